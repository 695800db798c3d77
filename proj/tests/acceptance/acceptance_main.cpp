// Acceptance suite: one criterion per command-line argument (1..9), all by
// default. Prints one PASS/FAIL line per criterion and exits nonzero when a
// non-stretch criterion fails. Criterion 9 is a stretch target on a
// DBLP-scale dataset; its failure is reported but does not fail the run
// (point HVGNN_DBLP_CSV at a real converted edge list to score it instead of
// the synthetic stand-in).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "hvgnn/hvgnn.hpp"

using namespace hvgnn;

namespace {

struct Outcome {
    bool pass = true;
    double seconds = 0.0;
    std::string detail;
};

struct Collector {
    bool ok = true;
    std::ostringstream why;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            if (!ok) why << "; ";
            why << what;
            ok = false;
        }
    }
};

LorentzPoint random_point(Rng& rng, int d, Curvature K, double radius) {
    std::vector<double> w(static_cast<std::size_t>(d));
    double n2 = 0.0;
    for (auto& x : w) {
        x = rng.gaussian();
        n2 += x * x;
    }
    const double target = radius * rng.uniform();
    const double scale = n2 > 0 ? target / std::sqrt(n2) : 0.0;
    for (auto& x : w) x *= scale;
    return lift_euclidean(w, K);
}

TangentVector random_tangent(Rng& rng, const LorentzPoint& x, double max_norm) {
    const int n = static_cast<int>(x.coords.size());
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& v : w) v = rng.gaussian();
    const double ip = lorentz_inner(w, x.coords);
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] += ip * x.coords[static_cast<std::size_t>(i)] / x.curvature.k;
    double q = std::max(detail::lorentz_inner_raw(w, w), 0.0);
    const double target = max_norm * rng.uniform();
    const double scale = q > 0 ? target / std::sqrt(q) : 0.0;
    for (auto& v : w) v *= scale;
    return TangentVector(x, std::move(w));
}

double residual(const LorentzPoint& p) {
    return std::abs(detail::lorentz_inner_raw(p.coords, p.coords) + p.curvature.k);
}

const double kCurvatures[3] = {std::exp(-3.0), 1.0, std::exp(1.0)};

// ---------------------------------------------------------------- criterion 1

Outcome criterion_geometry() {
    Collector c;
    Rng rng(101);
    for (int d : {2, 8, 16}) {
        for (double Kv : kCurvatures) {
            const Curvature K(Kv);
            const double s = std::sqrt(Kv);
            double worst_rt = 0, worst_res = 0, worst_norm = 0, worst_klein = 0;
            for (int i = 0; i < 1000; ++i) {
                // round trip: exp then log recovers the tangent componentwise
                const auto x = random_point(rng, d, K, 1.0);
                const auto v = random_tangent(rng, x, 5.0);
                const auto y = exp_map(x, v);
                const auto v2 = log_map(x, y);
                for (std::size_t j = 0; j < v.coords.size(); ++j)
                    worst_rt = std::max(worst_rt, std::abs(v2.coords[j] - v.coords[j]));

                // constraint, transport norm and Klein inverses at radii on
                // the curvature scale (resolvable by the quadratic form)
                const auto a = random_point(rng, d, K, 1.5 * s);
                const auto b = random_point(rng, d, K, 1.5 * s);
                const auto t = random_tangent(rng, a, 1.5 * s);
                worst_res = std::max(worst_res, residual(exp_map(a, t)));
                const auto moved = parallel_transport(a, b, t);
                worst_norm = std::max(worst_norm, std::abs(moved.norm() - t.norm()) / std::max(t.norm(), 1e-12));
                const auto back = klein_to_lorentz(lorentz_to_klein(a));
                for (std::size_t j = 0; j < a.coords.size(); ++j)
                    worst_klein = std::max(worst_klein,
                                           std::abs(back.coords[j] - a.coords[j]) / std::max(1.0, std::abs(a.coords[j])));
                worst_res = std::max(worst_res, residual(back));
            }
            std::ostringstream tag;
            tag << "d=" << d << " logK=" << std::log(Kv);
            c.require(worst_rt <= 1e-6, tag.str() + " roundtrip " + std::to_string(worst_rt));
            c.require(worst_res <= 1e-6 * Kv, tag.str() + " constraint " + std::to_string(worst_res));
            c.require(worst_norm <= 1e-9, tag.str() + " transport " + std::to_string(worst_norm));
            c.require(worst_klein <= 1e-9, tag.str() + " klein " + std::to_string(worst_klein));
        }
    }
    Outcome o;
    o.pass = c.ok;
    o.detail = c.ok ? "9000 random cases within tolerance" : c.why.str();
    return o;
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_translation_invariance() {
    Collector c;
    Rng rng(202);
    double worst_shift = 0, worst_affine = 0;
    for (double Kv : kCurvatures) {
        const auto p = TimeEncodingParams::geometric_init(8, Curvature(Kv), 1.0);
        const auto kc = lorentz_kernel_constants(p);
        for (int i = 0; i < 1000; ++i) {
            const double ti = rng.uniform(), tj = rng.uniform(), shift = rng.uniform();
            const double kl = lorentz_kernel(ti, tj, p);
            worst_shift = std::max(worst_shift, std::abs(lorentz_kernel(ti + shift, tj + shift, p) - kl));
            worst_affine = std::max(worst_affine, std::abs(kc.a * euclidean_kernel(ti, tj, p) + kc.b - kl));
        }
    }
    c.require(worst_shift <= 1e-10, "shift residual " + std::to_string(worst_shift));
    c.require(worst_affine <= 1e-9, "affine-relation residual " + std::to_string(worst_affine));
    Outcome o;
    o.pass = c.ok;
    std::ostringstream d;
    d << "3000 triples: |K(t+C)-K| <= " << std::scientific << std::setprecision(2) << worst_shift
      << ", |A*K_R+B-K_L| <= " << worst_affine;
    o.detail = c.ok ? d.str() : c.why.str();
    return o;
}

// ---------------------------------------------------------------- criterion 3

// Independent change-of-variables oracle assembled from raw loops and the
// textbook map formulas only.
double oracle_log_density(const std::vector<double>& z, const std::vector<double>& mu,
                          const std::vector<double>& sigma, double K) {
    const int n = static_cast<int>(mu.size());
    const int d = n - 1;
    const double sK = std::sqrt(K);
    auto ip = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double s = -a[0] * b[0];
        for (int i = 1; i < n; ++i) s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
        return s;
    };
    auto log_at = [&](const std::vector<double>& from, const std::vector<double>& to) {
        const double a = ip(from, to);
        const double dist = sK * std::acosh(std::max(-a / K, 1.0));
        std::vector<double> u(static_cast<std::size_t>(n), 0.0);
        if (dist == 0.0) return u;
        double un2 = 0.0;
        for (int i = 0; i < n; ++i) {
            u[static_cast<std::size_t>(i)] = to[static_cast<std::size_t>(i)] + (a / K) * from[static_cast<std::size_t>(i)];
            un2 += (i == 0 ? -1.0 : 1.0) * u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
        }
        const double un = std::sqrt(un2);
        for (auto& x : u) x *= dist / un;
        return u;
    };
    std::vector<double> origin_c(static_cast<std::size_t>(n), 0.0);
    origin_c[0] = sK;
    const auto u = log_at(mu, z);
    const double dist = sK * std::acosh(std::max(-ip(mu, z) / K, 1.0));
    const auto lmo = log_at(mu, origin_c);
    const auto lom = log_at(origin_c, mu);
    const double dmo = sK * std::acosh(std::max(-ip(mu, origin_c) / K, 1.0));
    std::vector<double> x = u;
    if (dmo != 0.0) {
        const double coef = ip(lmo, u) / (dmo * dmo);
        for (int i = 0; i < n; ++i)
            x[static_cast<std::size_t>(i)] -= coef * (lmo[static_cast<std::size_t>(i)] + lom[static_cast<std::size_t>(i)]);
    }
    double base = 0.0;
    for (int i = 0; i < d; ++i) {
        const double xi = x[static_cast<std::size_t>(i + 1)];
        const double si = sigma[static_cast<std::size_t>(i)];
        base += -0.5 * std::log(2.0 * M_PI) - std::log(si) - xi * xi / (2.0 * si * si);
    }
    const double rhat = dist / sK;
    if (rhat < 1e-7) return base;
    return base + (d - 1) * std::log(rhat / std::sinh(rhat));
}

std::vector<std::vector<double>> tangent_basis_2d(const LorentzPoint& mu) {
    std::vector<std::vector<double>> basis;
    for (int axis = 1; axis <= 2; ++axis) {
        std::vector<double> v(3, 0.0);
        v[static_cast<std::size_t>(axis)] = 1.0;
        const double ip0 = detail::lorentz_inner_raw(v, mu.coords);
        for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(i)] += ip0 * mu.coords[static_cast<std::size_t>(i)] / mu.curvature.k;
        for (const auto& b : basis) {
            const double cb = detail::lorentz_inner_raw(v, b);
            for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(i)] -= cb * b[static_cast<std::size_t>(i)];
        }
        const double nn = std::sqrt(detail::lorentz_inner_raw(v, v));
        for (auto& x : v) x /= nn;
        basis.push_back(v);
    }
    return basis;
}

Outcome criterion_wrapped_normal() {
    Collector c;
    Rng rng(303);

    // (a) sampler outputs on-manifold, sigma on the curvature scale
    double worst_res = 0;
    for (double Kv : kCurvatures) {
        const Curvature K(Kv);
        const double s = std::sqrt(Kv);
        const auto mu = random_point(rng, 4, K, s);
        std::vector<double> sigma = {0.5 * s, 1.0 * s, 1.5 * s, 0.8 * s};
        const auto p = WrappedNormalParams::from_sigma(mu, sigma);
        for (int i = 0; i < 400; ++i) {
            const auto z = sample(p, rng.gaussian_vector(4));
            worst_res = std::max(worst_res, residual(z) / Kv);
        }
    }
    c.require(worst_res <= 1e-6, "(a) sampler constraint " + std::to_string(worst_res));

    // (b) density normalization by polar quadrature at d=2, K=1
    {
        const Curvature K(1.0);
        const auto mu = random_point(rng, 2, K, 0.8);
        const auto p = WrappedNormalParams::from_sigma(mu, std::vector<double>{0.9, 1.2});
        const auto basis = tangent_basis_2d(mu);
        const int n_rho = 200, n_theta = 128;
        const double R = 10.0;
        double integral = 0.0;
        for (int it = 0; it < n_theta; ++it) {
            const double theta = 2.0 * M_PI * it / n_theta;
            for (int ir = 0; ir < n_rho; ++ir) {
                const double rho = R * (ir + 0.5) / n_rho;
                std::vector<double> u(3);
                for (int i = 0; i < 3; ++i)
                    u[static_cast<std::size_t>(i)] = rho * (std::cos(theta) * basis[0][static_cast<std::size_t>(i)] +
                                                            std::sin(theta) * basis[1][static_cast<std::size_t>(i)]);
                integral += std::exp(log_density(exp_map(mu, TangentVector(mu, u)), p)) * std::sinh(rho);
            }
        }
        integral *= (R / n_rho) * (2.0 * M_PI / n_theta);
        c.require(std::abs(integral - 1.0) <= 0.01, "(b) quadrature mass " + std::to_string(integral));
    }

    // (c) change-of-variables oracle on 500 random points
    {
        double worst = 0;
        for (int rep = 0; rep < 500; ++rep) {
            const double Kv = kCurvatures[rep % 3];
            const Curvature K(Kv);
            const int d = 2 + 2 * (rep % 3);
            const auto mu = random_point(rng, d, K, std::sqrt(Kv));
            std::vector<double> sigma(static_cast<std::size_t>(d));
            for (auto& s : sigma) s = rng.uniform(0.4, 1.5);
            const auto p = WrappedNormalParams::from_sigma(mu, sigma);
            const auto z = sample(p, rng.gaussian_vector(d));
            worst = std::max(worst, std::abs(log_density(z, p) - oracle_log_density(z.coords, mu.coords, sigma, Kv)));
        }
        c.require(worst <= 1e-8, "(c) change-of-variables residual " + std::to_string(worst));
    }

    // (d) kernel two-sample test: reparameterised sampler vs an independent
    // rejection sampler driven by log_density (uniform geodesic-ball proposal)
    {
        const Curvature K(1.0);
        const auto mu = lift_euclidean(std::vector<double>{0.5, -0.3}, K);
        const std::vector<double> sigma = {0.8, 1.2};
        const auto p = WrappedNormalParams::from_sigma(mu, sigma);
        const int n = 400;
        std::vector<LorentzPoint> a, b;
        for (int i = 0; i < n; ++i) a.push_back(sample(p, rng.gaussian_vector(2)));

        const auto basis = tangent_basis_2d(mu);
        const double R = 7.0;
        const double log_sup = -std::log(2.0 * M_PI * sigma[0] * sigma[1]); // density upper bound
        long proposals = 0;
        while (static_cast<int>(b.size()) < n && proposals < 4000000) {
            ++proposals;
            const double rho = std::acosh(1.0 + rng.uniform() * (std::cosh(R) - 1.0));
            const double theta = 2.0 * M_PI * rng.uniform();
            std::vector<double> u(3);
            for (int i = 0; i < 3; ++i)
                u[static_cast<std::size_t>(i)] = rho * (std::cos(theta) * basis[0][static_cast<std::size_t>(i)] +
                                                        std::sin(theta) * basis[1][static_cast<std::size_t>(i)]);
            const auto z = exp_map(mu, TangentVector(mu, u));
            if (std::log(std::max(rng.uniform(), 1e-300)) < log_density(z, p) - log_sup) b.push_back(z);
        }
        c.require(static_cast<int>(b.size()) == n, "(d) rejection sampler starved");

        std::vector<LorentzPoint> pool = a;
        pool.insert(pool.end(), b.begin(), b.end());
        const int m2 = 2 * n;
        std::vector<double> dist2(static_cast<std::size_t>(m2) * m2, 0.0);
        std::vector<double> all;
        all.reserve(static_cast<std::size_t>(m2) * (m2 - 1) / 2);
        for (int i = 0; i < m2; ++i)
            for (int j = i + 1; j < m2; ++j) {
                const double dd = distance(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
                dist2[static_cast<std::size_t>(i) * m2 + j] = dist2[static_cast<std::size_t>(j) * m2 + i] = dd * dd;
                all.push_back(dd * dd);
            }
        std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2), all.end());
        const double h2 = std::max(all[all.size() / 2], 1e-12);
        std::vector<double> kern(dist2.size());
        for (std::size_t i = 0; i < kern.size(); ++i) kern[i] = std::exp(-dist2[i] / h2);

        std::vector<int> assign(static_cast<std::size_t>(m2));
        for (int i = 0; i < m2; ++i) assign[static_cast<std::size_t>(i)] = i < n ? 0 : 1;
        auto mmd = [&](const std::vector<int>& lab) {
            double kxx = 0, kyy = 0, kxy = 0;
            for (int i = 0; i < m2; ++i)
                for (int j = i + 1; j < m2; ++j) {
                    const double kv = kern[static_cast<std::size_t>(i) * m2 + j];
                    if (lab[static_cast<std::size_t>(i)] == 0 && lab[static_cast<std::size_t>(j)] == 0) kxx += kv;
                    else if (lab[static_cast<std::size_t>(i)] == 1 && lab[static_cast<std::size_t>(j)] == 1) kyy += kv;
                    else kxy += kv;
                }
            const double nn = n;
            return 2.0 * kxx / (nn * (nn - 1)) + 2.0 * kyy / (nn * (nn - 1)) - 2.0 * kxy / (nn * nn);
        };
        const double observed = mmd(assign);
        int exceed = 0;
        const int n_perm = 500;
        Rng prng(909);
        auto perm = assign;
        for (int r = 0; r < n_perm; ++r) {
            for (int i = m2 - 1; i > 0; --i)
                std::swap(perm[static_cast<std::size_t>(i)],
                          perm[static_cast<std::size_t>(prng.uniform_int(static_cast<std::uint64_t>(i) + 1))]);
            if (mmd(perm) >= observed) ++exceed;
        }
        const double pval = (1.0 + exceed) / (1.0 + n_perm);
        c.require(pval >= 0.01, "(d) two-sample test rejected, p=" + std::to_string(pval));
    }

    Outcome o;
    o.pass = c.ok;
    o.detail = c.ok ? "sampler, quadrature, change-of-variables and two-sample checks within tolerance" : c.why.str();
    return o;
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_gradient_fidelity() {
    Collector c;
    SyntheticConfig sc;
    sc.communities = 2;
    sc.nodes = 10;
    sc.events = 30;
    sc.p_in = 0.85;
    sc.p_out = 0.15;
    sc.seed = 13;
    const auto g = generate_synthetic(sc);

    ModelConfig mc;
    mc.geometry = Geometry::hvgnn;
    mc.d = 4;
    mc.layers = 2;
    mc.feature_dim = g.feature_dim;
    mc.decoder.n_classes = g.n_classes;
    mc.max_neighbors = 5;
    const auto st = init_model(mc, 17);

    const auto split = chronological_split(g);
    const PairSet pairs = PairSet::from_events(g, 0, split.train_end);
    Batch batch;
    batch.use_labels = true;
    batch.kl_weight = static_cast<double>(g.n_nodes) / split.train_end;
    Rng rng(19);
    for (int i = 0; i < split.train_end; ++i) {
        const auto& e = g.events[static_cast<std::size_t>(i)];
        batch.positives.push_back({e.src, e.dst, e.timestamp});
        batch.negatives.push_back({e.src, sample_negative_dst(rng, e.src, g.n_nodes, pairs), e.timestamp});
    }
    const auto queries = batch_queries(batch);
    std::vector<double> noise(noise_size(mc, queries.size()));
    for (auto& x : noise) x = rng.gaussian();

    ad::tape tp;
    value_ctx<ad::var> ctx{&tp};
    auto mv = build_views<ad::var>(st, ctx);
    auto parts = elbo_core<ad::var>(g, mv, mc, batch, queries, noise, ctx);
    tp.backward(parts.elbo);
    std::vector<double> analytic(st.params.size());
    for (std::size_t b = 0; b < st.blocks.size(); ++b) {
        const auto gb = tp.grad(mv.leaves[b]);
        std::copy(gb.begin(), gb.end(), analytic.begin() + static_cast<std::ptrdiff_t>(st.blocks[b].offset));
    }

    auto value_at = [&](const std::vector<double>& params) {
        ModelState st2 = st;
        st2.params = params;
        return elbo_value(st2, g, batch, queries, noise).elbo;
    };
    int ok = 0;
    const int total = static_cast<int>(st.params.size());
    auto perturbed = st.params;
    for (int i = 0; i < total; ++i) {
        const double h = 1e-5;
        const double x0 = perturbed[static_cast<std::size_t>(i)];
        perturbed[static_cast<std::size_t>(i)] = x0 + h;
        const double fp = value_at(perturbed);
        perturbed[static_cast<std::size_t>(i)] = x0 - h;
        const double fm = value_at(perturbed);
        perturbed[static_cast<std::size_t>(i)] = x0;
        const double fd = (fp - fm) / (2.0 * h);
        const double a = analytic[static_cast<std::size_t>(i)];
        if (std::abs(a - fd) <= 1e-4 * std::max({std::abs(a), std::abs(fd), 1e-6})) ++ok;
    }
    const double frac = static_cast<double>(ok) / total;
    c.require(frac >= 0.99, "pass fraction " + std::to_string(frac));
    Outcome o;
    o.pass = c.ok;
    std::ostringstream d;
    d << ok << "/" << total << " parameters within 1e-4 relative";
    o.detail = c.ok ? d.str() : c.why.str() + " (" + d.str() + ")";
    return o;
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_causality_structure() {
    Collector c;
    SyntheticConfig sc;
    sc.communities = 3;
    sc.nodes = 50;
    sc.events = 500;
    sc.p_in = 0.85;
    sc.p_out = 0.1;
    sc.seed = 23;
    const auto g = generate_synthetic(sc);
    Rng rng(29);

    // future-event injection leaves all representations bitwise unchanged
    {
        auto g2 = g;
        g2.events = g.events;
        for (std::size_t i = 0; i < g2.events.size(); ++i) g2.events[i].timestamp = g.raw_timestamps[i];
        for (int extra = 0; extra < 20; ++extra)
            g2.events.push_back({static_cast<int>(rng.uniform_int(50)), static_cast<int>(rng.uniform_int(50)),
                                 g.t_raw_min + (0.82 + 0.008 * extra) * (g.t_raw_max - g.t_raw_min)});
        g2.finalize();

        std::vector<std::pair<int, double>> queries;
        for (int i = 0; i < 20; ++i) queries.push_back({static_cast<int>(rng.uniform_int(50)), 0.8 * rng.uniform()});

        Rng prng(31);
        std::vector<double> proj(static_cast<std::size_t>(8) * g.feature_dim);
        for (auto& x : proj) x = prng.uniform(-0.3, 0.3);
        std::vector<LayerParams> layers;
        for (int l = 0; l < 2; ++l) {
            std::vector<double> w(64);
            for (auto& x : w) x = prng.uniform(-0.35, 0.35);
            layers.emplace_back(std::move(w), 1.0, 0.0, TimeEncodingParams::geometric_init(8, Curvature(1.0), 1.0));
        }
        const TgnnConfig cfg(proj, 8, g.feature_dim, layers, 10, Curvature(1.0));

        const auto before = tgnn_forward_hyperbolic(g, queries, cfg);
        const auto after = tgnn_forward_hyperbolic(g2, queries, cfg);
        for (std::size_t i = 0; i < queries.size(); ++i)
            c.require(before[i].coords == after[i].coords, "hyperbolic causality violated");
        c.require(tgnn_forward_euclidean(g, queries, cfg) == tgnn_forward_euclidean(g2, queries, cfg),
                  "euclidean causality violated");
    }

    // neighbor permutation invariance of one layer
    {
        std::vector<LorentzPoint> reps;
        for (int i = 0; i < 8; ++i) reps.push_back(random_point(rng, 6, Curvature(1.0), 1.2));
        std::vector<double> w(36);
        for (auto& x : w) x = rng.uniform(-0.4, 0.4);
        const LayerParams lp(w, 1.3, -0.2, TimeEncodingParams::geometric_init(6, Curvature(1.0), 1.0));
        TimeAwareNeighborhood nb{0, 0.95, {{1, 0.1}, {2, 0.5}, {3, 0.3}, {4, 0.9}, {5, 0.7}, {6, 0.2}}};
        const auto out1 = hyptga_forward(reps, nb, lp);
        TimeAwareNeighborhood perm{0, 0.95, {{4, 0.9}, {6, 0.2}, {1, 0.1}, {5, 0.7}, {3, 0.3}, {2, 0.5}}};
        const auto out2 = hyptga_forward(reps, perm, lp);
        double worst = 0;
        for (std::size_t i = 0; i < out1.coords.size(); ++i)
            worst = std::max(worst, std::abs(out1.coords[i] - out2.coords[i]));
        c.require(worst <= 1e-10, "permutation residual " + std::to_string(worst));
    }

    // attention-weight positive-scaling invariance of the midpoint
    {
        double worst = 0;
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<LorentzPoint> pts;
            std::vector<double> w1, w5;
            for (int i = 0; i < 6; ++i) {
                pts.push_back(random_point(rng, 5, Curvature(1.0), 1.5));
                w1.push_back(0.05 + rng.uniform());
                w5.push_back(5.0 * w1.back());
            }
            const auto m1 = einstein_midpoint(w1, pts);
            const auto m5 = einstein_midpoint(w5, pts);
            for (std::size_t i = 0; i < m1.coords.size(); ++i)
                worst = std::max(worst, std::abs(m1.coords[i] - m5.coords[i]));
        }
        c.require(worst <= 1e-12, "weight-scaling residual " + std::to_string(worst));
    }

    Outcome o;
    o.pass = c.ok;
    o.detail = c.ok ? "bitwise causality, permutation <= 1e-10, weight scaling <= 1e-12" : c.why.str();
    return o;
}

// ---------------------------------------------------------------- criterion 6

TemporalGraph criterion6_graph(bool feature_signal = true) {
    SyntheticConfig sc;
    sc.communities = 4;
    sc.nodes = 100;
    sc.events = 5000;
    sc.p_in = 0.9;
    sc.p_out = 0.1;
    sc.seed = 7;
    sc.feature_signal = feature_signal;
    return generate_synthetic(sc);
}

RunConfig criterion6_config() {
    RunConfig rc;
    rc.geometry = Geometry::hvgnn;
    rc.d = 8;
    rc.layers = 2;
    rc.logk = 0.0;
    rc.steps = 300;
    rc.batch = 100;
    rc.max_neighbors = 10;
    rc.seed = 1;
    rc.lr = 1e-2;
    return rc;
}

Outcome criterion_end_to_end() {
    Collector c;
    const auto g = criterion6_graph();
    const auto rc = criterion6_config();
    const auto res = run_training(rc, g);
    c.require(res.exit_code == 0, "training aborted: " + res.abort_reason);

    // smoothed ELBO: means of disjoint 20-step windows over the first 200
    // steps must be non-decreasing
    double prev = -1e300;
    bool monotone = true;
    for (int blockStart = 0; blockStart + 20 <= 200; blockStart += 20) {
        double m = 0;
        for (int s = blockStart; s < blockStart + 20; ++s) m += res.history[static_cast<std::size_t>(s)].elbo;
        m /= 20.0;
        if (m < prev) monotone = false;
        prev = m;
    }
    c.require(monotone, "smoothed ELBO decreased");
    double min_kl = 1e300;
    for (const auto& h : res.history) min_kl = std::min(min_kl, h.kl);
    c.require(min_kl > -1.0, "KL term went negative: " + std::to_string(min_kl));

    const auto split = chronological_split(g);
    const auto lp = eval_link_prediction(res.state, g, split, "transductive", rc.seed);
    const auto auc = eval_node_classification(res.state, g, split, "transductive");
    c.require(lp.ap >= 0.75, "AP " + std::to_string(lp.ap) + " < 0.75");
    c.require(auc.has_value() && *auc >= 0.80, "macro AUC " + std::to_string(auc.value_or(-1)) + " < 0.80");

    // permutation-null sanity band: random-parameter models on a matched
    // no-signal dataset, and label-shuffled scores on this dataset
    const auto g_null = criterion6_graph(false);
    const auto split_null = chronological_split(g_null);
    double null_lo = 1.0, null_hi = 0.0;
    for (int s = 1; s <= 20; ++s) {
        ModelConfig mc = model_config(rc, g_null);
        const auto st = init_model(mc, static_cast<std::uint64_t>(s));
        const auto nap = eval_link_prediction(st, g_null, split_null, "transductive", static_cast<std::uint64_t>(s)).ap;
        null_lo = std::min(null_lo, nap);
        null_hi = std::max(null_hi, nap);
    }
    c.require(null_lo >= 0.4 && null_hi <= 0.6,
              "random-model AP band [" + std::to_string(null_lo) + "," + std::to_string(null_hi) + "] outside [0.4,0.6]");
    Rng rng(55);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> scores(static_cast<std::size_t>(lp.n_pairs));
        std::vector<int> labels(static_cast<std::size_t>(lp.n_pairs));
        for (std::size_t i = 0; i < scores.size(); ++i) {
            scores[i] = rng.uniform();
            labels[i] = i < scores.size() / 2 ? 1 : 0;
        }
        const double nap = average_precision(scores, labels);
        c.require(nap >= 0.4 && nap <= 0.6, "permutation-null AP " + std::to_string(nap));
    }

    Outcome o;
    o.pass = c.ok;
    std::ostringstream d;
    d << "AP=" << std::fixed << std::setprecision(4) << lp.ap << " AUC=" << auc.value_or(-1) << " null=["
      << null_lo << "," << null_hi << "] smoothed ELBO monotone";
    o.detail = c.ok ? d.str() : c.why.str() + " (" + d.str() + ")";
    return o;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_ablation() {
    Collector c;
    const auto g = criterion6_graph();
    const auto split = chronological_split(g);
    std::ostringstream d;
    double mean_ap[3] = {0, 0, 0};
    const Geometry geoms[3] = {Geometry::hvgnn, Geometry::tgnn_l, Geometry::tgnn_r};
    for (int gi = 0; gi < 3; ++gi) {
        for (int s = 1; s <= 5; ++s) {
            RunConfig rc = criterion6_config();
            rc.geometry = geoms[gi];
            rc.steps = 150;
            rc.seed = static_cast<std::uint64_t>(s);
            const auto res = run_training(rc, g);
            c.require(res.exit_code == 0, std::string(geometry_name(geoms[gi])) + " training aborted");
            mean_ap[gi] += eval_link_prediction(res.state, g, split, "transductive", rc.seed).ap;
        }
        mean_ap[gi] /= 5.0;
        d << geometry_name(geoms[gi]) << "=" << std::fixed << std::setprecision(4) << mean_ap[gi] << " ";
    }
    c.require(mean_ap[0] >= mean_ap[1] - 0.02, "HVGNN below TGNN_L - 0.02");
    c.require(mean_ap[1] >= mean_ap[2] - 0.02, "TGNN_L below TGNN_R - 0.02");
    Outcome o;
    o.pass = c.ok;
    o.detail = (c.ok ? "mean AP over 5 seeds: " : c.why.str() + "; ") + d.str();
    return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_curvature_sweep() {
    Collector c;
    const auto g = criterion6_graph();
    RunConfig rc = criterion6_config();
    rc.steps = 150;
    rc.logk_grid = {-3, -2, -1, 0, 1};
    rc.out_dir = (std::filesystem::temp_directory_path() / "hvgnn_acceptance_sweep").string();
    std::filesystem::remove_all(rc.out_dir);
    const int code = cmd_sweep(rc, g);
    c.require(code == 0, "sweep exit code " + std::to_string(code));

    std::ifstream csv(rc.out_dir + "/sweep.csv");
    std::string line;
    std::getline(csv, line);
    c.require(line == "logK,accuracy,ap,auc", "unexpected header: " + line);
    int rows = 0;
    double best_ap = 0, k1_ap = -1;
    std::ostringstream d;
    while (std::getline(csv, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string logk, acc, ap, auc;
        std::getline(ss, logk, ',');
        std::getline(ss, acc, ',');
        std::getline(ss, ap, ',');
        std::getline(ss, auc, '\n');
        for (const auto& tok : {logk, acc, ap, auc})
            c.require(std::isfinite(std::stod(tok)), "non-finite metric in row: " + line);
        best_ap = std::max(best_ap, std::stod(ap));
        if (std::stod(logk) == 0.0) k1_ap = std::stod(ap);
        d << "logK=" << logk << ":ap=" << ap.substr(0, 6) << " ";
    }
    c.require(rows == 5, "expected 5 rows, got " + std::to_string(rows));
    c.require(k1_ap >= 0 && best_ap >= k1_ap, "max-over-grid below the K=1 entry");
    Outcome o;
    o.pass = c.ok;
    o.detail = c.ok ? d.str() : c.why.str();
    return o;
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_dblp_scale() {
    Collector c;
    TemporalGraph g;
    std::string source;
    if (const char* path = std::getenv("HVGNN_DBLP_CSV"); path && std::filesystem::exists(path)) {
        LoadConfig lc;
        lc.remap_ids = true;
        g = load_edge_list(path, lc);
        source = std::string("converted dataset ") + path;
    } else {
        // synthetic stand-in at the published scale (1909 nodes, 8237 events)
        SyntheticConfig sc;
        sc.communities = 16;
        sc.nodes = 1909;
        sc.events = 8237;
        sc.p_in = 0.95;
        sc.p_out = 0.002;
        sc.seed = 11;
        g = generate_synthetic(sc);
        source = "synthetic stand-in (no converted CSV present)";
    }
    RunConfig rc;
    rc.geometry = Geometry::hvgnn;
    rc.d = 8;
    rc.layers = 2;
    rc.steps = 400;
    rc.batch = 64;
    rc.max_neighbors = 10;
    rc.seed = 1;
    rc.lr = 1e-2;
    const auto res = run_training(rc, g);
    c.require(res.exit_code == 0, "training aborted");
    const auto split = chronological_split(g);
    const auto lp = eval_link_prediction(res.state, g, split, "transductive", rc.seed);
    c.require(lp.ap >= 0.90, "AP " + std::to_string(lp.ap) + " < 0.90");
    Outcome o;
    o.pass = c.ok;
    std::ostringstream d;
    d << source << ": n=" << g.n_nodes << " m=" << g.events.size() << " AP=" << std::fixed << std::setprecision(4)
      << lp.ap;
    o.detail = c.ok ? d.str() : c.why.str() + " (" + d.str() + ")";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "geometry suite", 10, criterion_geometry},
    {2, "translation invariance", 5, criterion_translation_invariance},
    {3, "wrapped-normal correctness", 60, criterion_wrapped_normal},
    {4, "gradient fidelity", 120, criterion_gradient_fidelity},
    {5, "causality and structure", 600, criterion_causality_structure},
    {6, "end-to-end learning", 600, criterion_end_to_end},
    {7, "ablation ordering", 3600, criterion_ablation},
    {8, "curvature sweep", 3600, criterion_curvature_sweep},
    {9, "DBLP-scale stretch", 14400, criterion_dblp_scale},
};

} // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty())
        for (const auto& cr : kCriteria) selected.push_back(cr.id);

    bool all_ok = true;
    for (int id : selected) {
        const Criterion* cr = nullptr;
        for (const auto& k : kCriteria)
            if (k.id == id) cr = &k;
        if (!cr) {
            std::cerr << "unknown criterion " << id << "\n";
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr->run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = o.seconds < cr->budget_seconds;
        const bool pass = o.pass && in_budget;
        const bool stretch = cr->id == 9;
        std::cout << "[" << (pass ? (stretch ? "PASS (stretch)" : "PASS") : (stretch ? "FAIL (stretch, non-fatal)" : "FAIL"))
                  << "] criterion " << cr->id << ": " << cr->name << " (" << std::fixed << std::setprecision(1)
                  << o.seconds << " s" << (in_budget ? "" : ", OVER BUDGET") << ") - " << o.detail << "\n";
        std::cout.flush();
        if (!pass && !stretch) all_ok = false;
    }
    return all_ok ? 0 : 1;
}
