#pragma once

#include <cmath>
#include <vector>

#include "hvgnn/manifold.hpp"

// Translation-invariant functional time encodings. The Euclidean map uses
// paired cosine/sine features,
//   phi_R(t) = sqrt(1/d) (cos w1 t, sin w1 t, ..., cos w_{d/2} t, sin w_{d/2} t),
// whose kernel <phi_R(ti), phi_R(tj)> = (1/d) sum_k cos(w_k (ti - tj)) depends
// on ti - tj exactly and whose norm is the constant sqrt(1/2). The hyperbolic
// map lifts phi_R to the hyperboloid through exp at the origin; the constant
// norm makes the Lorentzian kernel an affine function A*K_R + B of the
// Euclidean one.

namespace hvgnn {

struct TimeEncodingParams {
    std::vector<double> omegas; // length d/2
    int d;
    Curvature curvature;
    double t_max;

    TimeEncodingParams(std::vector<double> om, int d_, Curvature K, double t_max_)
        : omegas(std::move(om)), d(d_), curvature(K), t_max(t_max_) {
        if (d < 2 || d % 2 != 0) throw configuration_error("TimeEncodingParams: d must be even and >= 2");
        if (static_cast<int>(omegas.size()) != d / 2) throw dimension_error("TimeEncodingParams: need d/2 frequencies");
        if (!(t_max > 0.0)) throw configuration_error("TimeEncodingParams: t_max must be positive");
    }

    /// Geometric frequency ladder from 1/t_max to 1e4/t_max.
    static TimeEncodingParams geometric_init(int d, Curvature K, double t_max) {
        if (d < 2 || d % 2 != 0) throw configuration_error("TimeEncodingParams: d must be even and >= 2");
        const int half = d / 2;
        std::vector<double> om(static_cast<std::size_t>(half));
        for (int k = 0; k < half; ++k) {
            const double expo = half > 1 ? static_cast<double>(k) * 4.0 / (half - 1) : 0.0;
            om[static_cast<std::size_t>(k)] = std::pow(10.0, expo) / t_max;
        }
        return TimeEncodingParams(std::move(om), d, K, t_max);
    }
};

namespace te {

/// Interleaving matrices placing cos features at even rows, sin at odd rows.
template <class V>
struct TimeEncoder {
    V omega; // d/2
    V pc, ps; // d x d/2
    double inv_sqrt_d = 0.0;
    int d = 0;

    static TimeEncoder make(const V& omega, int d, const value_ctx<V>& ctx) {
        TimeEncoder enc;
        enc.omega = omega;
        enc.d = d;
        enc.inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
        const int half = d / 2;
        std::vector<double> c(static_cast<std::size_t>(d) * half, 0.0);
        std::vector<double> s(static_cast<std::size_t>(d) * half, 0.0);
        for (int k = 0; k < half; ++k) {
            c[static_cast<std::size_t>(2 * k) * half + k] = 1.0;
            s[static_cast<std::size_t>(2 * k + 1) * half + k] = 1.0;
        }
        enc.pc = ctx.matrix(d, half, c);
        enc.ps = ctx.matrix(d, half, s);
        return enc;
    }

    V encode_euclidean(double t) const {
        V ang = omega * t;
        return (matmul(pc, cos(ang)) + matmul(ps, sin(ang))) * inv_sqrt_d;
    }

    V encode_hyperbolic(double t, const V& K, const V& sqrtK) const {
        return man::exp0(encode_euclidean(t), K, sqrtK);
    }
};

} // namespace te

namespace detail {
inline te::TimeEncoder<vecd> make_encoder(const TimeEncodingParams& p) {
    value_ctx<vecd> ctx;
    return te::TimeEncoder<vecd>::make(vecd::col(p.omegas), p.d, ctx);
}
} // namespace detail

inline std::vector<double> encode_euclidean(double t, const TimeEncodingParams& p) {
    return values_of(detail::make_encoder(p).encode_euclidean(t));
}

inline double euclidean_kernel(double t_i, double t_j, const TimeEncodingParams& p) {
    const auto enc = detail::make_encoder(p);
    return value_of(sum(enc.encode_euclidean(t_i) * enc.encode_euclidean(t_j)));
}

inline LorentzPoint encode_hyperbolic(double t, const TimeEncodingParams& p) {
    const auto enc = detail::make_encoder(p);
    vecd z = enc.encode_hyperbolic(t, detail::kv(p.curvature), detail::skv(p.curvature));
    return LorentzPoint(values_of(z), p.curvature);
}

inline double lorentz_kernel(double t_i, double t_j, const TimeEncodingParams& p) {
    const auto enc = detail::make_encoder(p);
    const vecd K = detail::kv(p.curvature), sK = detail::skv(p.curvature);
    return value_of(man::inner(enc.encode_hyperbolic(t_i, K, sK), enc.encode_hyperbolic(t_j, K, sK)));
}

struct KernelConstants {
    double a, b;
};

/// Constants of the affine kernel relation K_L = A * K_R + B. With the paired
/// encoding ||phi_R|| = sqrt(1/2) for every t, so with c = ||phi_R|| / sqrt(K):
///   A = K sinh(c)^2 / ||phi_R||^2,   B = -K cosh(c)^2.
inline KernelConstants lorentz_kernel_constants(const TimeEncodingParams& p) {
    const double K = p.curvature.k;
    const double r = std::sqrt(0.5);
    const double c = r / p.curvature.sqrt_k();
    KernelConstants kc;
    kc.a = K * std::sinh(c) * std::sinh(c) / (r * r);
    kc.b = -K * std::cosh(c) * std::cosh(c);
    return kc;
}

} // namespace hvgnn
