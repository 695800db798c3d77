#include <catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace hvgnn;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kSqrtHalf = 0.7071067811865476;
// cosh(sqrt(1/2)), sinh(sqrt(1/2))
constexpr double kCoshR = 1.2605918365213561;
constexpr double kSinhR = 0.7675231451261163;

TimeEncodingParams params_d2(double omega, double K = 1.0) {
    return TimeEncodingParams({omega}, 2, Curvature(K), 1.0);
}
} // namespace

TEST_CASE("euclidean encoding examples", "[time_encoding]") {
    SECTION("t = 0 gives the paired cos/sin pattern") {
        const auto p = TimeEncodingParams::geometric_init(6, Curvature(1.0), 1.0);
        const auto e = encode_euclidean(0.0, p);
        const double a = 1.0 / std::sqrt(6.0);
        REQUIRE(e.size() == 6);
        for (int i = 0; i < 6; ++i) REQUIRE_THAT(e[static_cast<std::size_t>(i)], WithinAbs(i % 2 == 0 ? a : 0.0, 1e-15));
    }
    SECTION("quarter period") {
        const auto e = encode_euclidean(M_PI / 2, params_d2(1.0));
        REQUIRE_THAT(e[0], WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(e[1], WithinAbs(kSqrtHalf, 1e-12));
    }
    SECTION("constant norm sqrt(1/2)") {
        Rng rng(3);
        const auto p = TimeEncodingParams::geometric_init(8, Curvature(1.0), 1.0);
        for (int i = 0; i < 100; ++i) {
            const auto e = encode_euclidean(rng.uniform(), p);
            double n2 = 0;
            for (double x : e) n2 += x * x;
            REQUIRE_THAT(std::sqrt(n2), WithinAbs(kSqrtHalf, 1e-12));
        }
    }
}

TEST_CASE("euclidean kernel", "[time_encoding]") {
    const auto p = TimeEncodingParams::geometric_init(8, Curvature(1.0), 1.0);
    SECTION("self kernel is 1/2") {
        REQUIRE_THAT(euclidean_kernel(0.37, 0.37, p), WithinAbs(0.5, 1e-12));
    }
    SECTION("half period flips the sign") {
        REQUIRE_THAT(euclidean_kernel(M_PI, 0.0, params_d2(1.0)), WithinAbs(-0.5, 1e-12));
    }
    SECTION("translation invariance") {
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            const double ti = rng.uniform(), tj = rng.uniform(), c = rng.uniform();
            REQUIRE_THAT(euclidean_kernel(ti + c, tj + c, p), WithinAbs(euclidean_kernel(ti, tj, p), 1e-12));
        }
    }
}

TEST_CASE("hyperbolic encoding", "[time_encoding]") {
    SECTION("frozen lift at t = 0") {
        const auto z = encode_hyperbolic(0.0, params_d2(1.0));
        REQUIRE_THAT(z.coords[0], WithinAbs(kCoshR, 1e-12));
        REQUIRE_THAT(z.coords[1], WithinAbs(kSinhR, 1e-12));
        REQUIRE_THAT(z.coords[2], WithinAbs(0.0, 1e-15));
    }
    SECTION("on-manifold and constant time-like coordinate") {
        Rng rng(7);
        for (double K : {std::exp(-3.0), 1.0, std::exp(1.0)}) {
            const auto p = TimeEncodingParams::geometric_init(8, Curvature(K), 1.0);
            const double x0_ref = encode_hyperbolic(0.0, p).coords[0];
            for (int i = 0; i < 50; ++i) {
                const auto z = encode_hyperbolic(rng.uniform(), p);
                REQUIRE(std::abs(lorentz_inner(z.coords, z.coords) + K) <= 1e-9 * K);
                REQUIRE_THAT(z.coords[0], WithinAbs(x0_ref, 1e-12));
            }
        }
    }
}

TEST_CASE("lorentz kernel translation invariance and affine relation", "[time_encoding]") {
    Rng rng(11);
    for (double K : {std::exp(-3.0), 1.0, std::exp(1.0)}) {
        const auto p = TimeEncodingParams::geometric_init(8, Curvature(K), 1.0);
        REQUIRE_THAT(lorentz_kernel(0.42, 0.42, p), WithinAbs(-K, 1e-11 * std::max(1.0, K)));
        const auto kc = lorentz_kernel_constants(p);
        for (int i = 0; i < 300; ++i) {
            const double ti = rng.uniform(), tj = rng.uniform(), c = rng.uniform();
            const double kl = lorentz_kernel(ti, tj, p);
            REQUIRE_THAT(lorentz_kernel(ti + c, tj + c, p), WithinAbs(kl, 1e-10));
            REQUIRE_THAT(kc.a * euclidean_kernel(ti, tj, p) + kc.b, WithinAbs(kl, 1e-9));
        }
    }
}

TEST_CASE("kernel gradient with respect to frequencies", "[time_encoding]") {
    const double ti = 0.31, tj = 0.77, Kv = 1.0;
    auto build = [&](ad::tape& tp, const std::vector<double>& om) {
        ad::var omega = tp.leaf(om, static_cast<int>(om.size()), 1);
        value_ctx<ad::var> ctx{&tp};
        auto enc = te::TimeEncoder<ad::var>::make(omega, 2 * static_cast<int>(om.size()), ctx);
        ad::var K = tp.constant_scalar(Kv), sK = tp.constant_scalar(std::sqrt(Kv));
        return man::inner(enc.encode_hyperbolic(ti, K, sK), enc.encode_hyperbolic(tj, K, sK));
    };
    const std::vector<double> om0 = {1.0, 4.0, 16.0};
    ad::tape tp;
    ad::var out = build(tp, om0);
    tp.backward(out);
    ad::var leaf;
    leaf.tp = &tp;
    leaf.id = 0;
    leaf.gen = tp.generation();
    leaf.r = 3;
    leaf.c = 1;
    const auto g = tp.grad(leaf);
    const auto fd = testutil::finite_difference(
        [&](const std::vector<double>& om) {
            ad::tape t2;
            return value_of(build(t2, om));
        },
        om0, 1e-5);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(testutil::rel_err(g[i], fd[i]) < 1e-5);
}

TEST_CASE("frequency ladder initialization", "[time_encoding]") {
    const auto p = TimeEncodingParams::geometric_init(8, Curvature(1.0), 2.0);
    REQUIRE(p.omegas.size() == 4);
    REQUIRE_THAT(p.omegas[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(p.omegas[3], WithinAbs(5000.0, 1e-9));
    for (int i = 0; i + 1 < 4; ++i)
        REQUIRE_THAT(p.omegas[static_cast<std::size_t>(i + 1)] / p.omegas[static_cast<std::size_t>(i)],
                     WithinAbs(std::pow(10.0, 4.0 / 3.0), 1e-9));
    REQUIRE_THROWS_AS(TimeEncodingParams({1.0}, 3, Curvature(1.0), 1.0), configuration_error);
    REQUIRE_THROWS_AS(TimeEncodingParams({1.0}, 2, Curvature(1.0), 0.0), configuration_error);
}
