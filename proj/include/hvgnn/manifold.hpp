#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hvgnn/autodiff.hpp"
#include "hvgnn/errors.hpp"
#include "hvgnn/values.hpp"

// Lorentz-model hyperbolic geometry. The hyperboloid
//   L^{d,K} = { x in R^{d+1} : <x,x>_L = -K, x0 > 0 },  K > 0,
// has constant curvature -1/K. All maps are written as templates over the
// value type (vecd or ad::var) so the same formulas serve plain evaluation
// and gradient recording. The typed API below adds invariant checks.

namespace hvgnn::man {

/// Tangent norms below this take the series branch of exp/log (avoids 0/0).
inline constexpr double taylor_eps = 1e-7;
inline constexpr double taylor_eps_sq = taylor_eps * taylor_eps;

/// Lorentzian inner product <x,y>_L = -x0 y0 + sum_i xi yi.
template <class V>
V inner(const V& x, const V& y) {
    return sum(x * y) - 2.0 * (slice(x, 0, 1) * slice(y, 0, 1));
}

/// arcosh on [1, inf), composed from recorded primitives.
template <class V>
V acosh1(const V& z) {
    return log(z + sqrt(clamp_min(z * z - 1.0, 0.0)));
}

/// Re-solves the time-like coordinate so the point sits exactly on the
/// hyperboloid; prevents constraint drift across stacked maps.
template <class V>
V reproject(const V& y, const V& K) {
    V sp = slice(y, 1, y.size() - 1);
    return concat(sqrt(K + sum(sp * sp)), sp);
}

template <class V>
V distance(const V& x, const V& y, const V& K, const V& sqrtK) {
    V z = clamp_min(-inner(x, y) / K, 1.0);
    return sqrtK * acosh1(z);
}

template <class V>
V distance_sq(const V& x, const V& y, const V& K, const V& sqrtK) {
    V d = distance(x, y, K, sqrtK);
    return d * d;
}

template <class V>
V exp_map(const V& x, const V& v, const V& K, const V& sqrtK) {
    V s = clamp_min(inner(v, v), 0.0);
    if (value_of(s) < taylor_eps_sq) {
        return reproject(x + v + (s / (2.0 * K)) * x, K);
    }
    V r = sqrt(s);
    V c = r / sqrtK;
    return reproject(cosh(c) * x + (sqrtK * sinh(c) / r) * v, K);
}

template <class V>
V log_map(const V& x, const V& y, const V& K, const V& sqrtK) {
    V a = inner(x, y);
    V dist = sqrtK * acosh1(clamp_min(-a / K, 1.0));
    if (value_of(dist) < taylor_eps) return 0.0 * x;
    V u = y + (a / K) * x;
    V nrm = sqrt(clamp_min(inner(u, u), 1e-300));
    return (dist / nrm) * u;
}

/// Geodesic parallel transport x -> y. Algebraically reduced with
/// <x,v>_L = 0, which removes the 0/0 of the textbook form as y -> x:
///   P(v) = v + <y,v>_L / (K - <x,y>_L) (x + y).
/// Coincident base points return v unchanged.
template <class V>
V parallel_transport(const V& x, const V& y, const V& v, const V& K) {
    V a = inner(x, y);
    const double kv = value_of(K);
    if (-value_of(a) / kv <= 1.0 + taylor_eps_sq / (2.0 * kv)) return v;
    V b = inner(y, v);
    return v + (b / (K - a)) * (x + y);
}

/// exp at the origin of a purely spatial tangent vector w (length d).
template <class V>
V exp0(const V& w, const V& K, const V& sqrtK) {
    V s = sum(w * w);
    if (value_of(s) < taylor_eps_sq) {
        return concat(sqrt(K + s), w);
    }
    V r = sqrt(s);
    V sp = (sqrtK * sinh(r / sqrtK) / r) * w;
    return concat(sqrt(K + sum(sp * sp)), sp);
}

/// Spatial block of log at the origin (the time-like entry is zero).
template <class V>
V log0(const V& x, const V& K, const V& sqrtK) {
    V sp = slice(x, 1, x.size() - 1);
    V s = sum(sp * sp);
    if (value_of(s) < taylor_eps_sq) return sp;
    V dist = sqrtK * acosh1(clamp_min(slice(x, 0, 1) / sqrtK, 1.0));
    return (dist / sqrt(s)) * sp;
}

template <class V>
V lift_euclidean(const V& w, const V& K, const V& sqrtK) {
    return exp0(w, K, sqrtK);
}

template <class V>
V to_klein(const V& y, const V& sqrtK) {
    return sqrtK * slice(y, 1, y.size() - 1) / slice(y, 0, 1);
}

template <class V>
V klein_lorentz_factor(const V& k, const V& K) {
    return sqrt(K / (K - sum(k * k)));
}

template <class V>
V from_klein(const V& k, const V& K, const V& sqrtK) {
    V sp = klein_lorentz_factor(k, K) * k;
    return concat(sqrt(K + sum(sp * sp)), sp);
}

/// Einstein midpoint of hyperboloid points with positive weights. Uses the
/// identity eta(klein(x)) = x0 / sqrt(K) for the Lorentz factors.
template <class V>
V einstein_midpoint(std::span<const V> points, std::span<const V> weights, const V& K, const V& sqrtK) {
    if (points.empty()) throw contract_error("einstein_midpoint: empty point list");
    if (points.size() != weights.size()) throw dimension_error("einstein_midpoint: weights/points length mismatch");
    const int d = points[0].size() - 1;
    V num = weights[0] * slice(points[0], 1, d);
    V den = weights[0] * slice(points[0], 0, 1) / sqrtK;
    for (std::size_t i = 1; i < points.size(); ++i) {
        num = num + weights[i] * slice(points[i], 1, d);
        den = den + weights[i] * slice(points[i], 0, 1) / sqrtK;
    }
    // num/den are the Klein coordinates of the midpoint scaled consistently:
    // sum_i s_i k_i / sum_i s_i with s_i = w_i eta_i and k_i = sqrtK x_i / x_i0.
    V m = num / den;
    return from_klein(m, K, sqrtK);
}

/// Transport of the tangent-at-origin embedding (0, w) to the base mu.
template <class V>
V transport_from_origin(const V& mu, const V& w, const V& K, const V& sqrtK) {
    const int d = mu.size() - 1;
    V mu0 = slice(mu, 0, 1);
    V mus = slice(mu, 1, d);
    V coef = sum(mus * w) / (K + sqrtK * mu0);
    return prepend_zero(w) + coef * concat(mu0 + sqrtK, mus);
}

/// Transport of a tangent vector at mu back to the origin.
template <class V>
V transport_to_origin(const V& mu, const V& u, const V& K, const V& sqrtK) {
    const int d = mu.size() - 1;
    V mu0 = slice(mu, 0, 1);
    V coef = (0.0 - (sqrtK * slice(u, 0, 1))) / (K + sqrtK * mu0);
    return u + coef * concat(mu0 + sqrtK, slice(mu, 1, d));
}

} // namespace hvgnn::man

namespace hvgnn {

/// Relative tolerance for the manifold/tangency invariants.
inline constexpr double manifold_tol = 1e-9;

struct Curvature {
    double k;

    explicit Curvature(double k_) : k(k_) {
        if (!(k > 0.0) || !std::isfinite(k)) throw domain_error("Curvature: K must be positive and finite");
    }
    double sqrt_k() const { return std::sqrt(k); }
    bool operator==(const Curvature& o) const { return k == o.k; }
};

namespace detail {
inline double lorentz_inner_raw(std::span<const double> x, std::span<const double> y) {
    double s = -x[0] * y[0];
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}
} // namespace detail

/// A point on the upper sheet of the hyperboloid.
struct LorentzPoint {
    std::vector<double> coords; // length d+1
    Curvature curvature;

    LorentzPoint(std::vector<double> c, Curvature K) : coords(std::move(c)), curvature(K) {
        if (coords.size() < 2) throw dimension_error("LorentzPoint: need at least 2 coordinates");
        if (!(coords[0] > 0.0)) throw domain_error("LorentzPoint: time-like coordinate must be positive");
        const double q = detail::lorentz_inner_raw(coords, coords);
        const double scale = std::max(curvature.k, coords[0] * coords[0]);
        if (std::abs(q + curvature.k) > manifold_tol * scale)
            throw domain_error("LorentzPoint: not on the hyperboloid");
    }

    int dim() const { return static_cast<int>(coords.size()) - 1; }
    vecd as_vec() const { return vecd::col(coords); }
};

/// A tangent vector with an explicit base point.
struct TangentVector {
    LorentzPoint base;
    std::vector<double> coords; // length d+1

    TangentVector(LorentzPoint base_, std::vector<double> c) : base(std::move(base_)), coords(std::move(c)) {
        if (coords.size() != base.coords.size()) throw dimension_error("TangentVector: length mismatch with base");
        const double ip = detail::lorentz_inner_raw(coords, base.coords);
        double mag = 0.0;
        for (std::size_t i = 0; i < coords.size(); ++i) mag += std::abs(coords[i] * base.coords[i]);
        if (std::abs(ip) > manifold_tol * std::max(1.0, mag))
            throw domain_error("TangentVector: not orthogonal to the base point");
    }

    int dim() const { return static_cast<int>(coords.size()) - 1; }
    vecd as_vec() const { return vecd::col(coords); }

    /// Lorentzian norm; tangent vectors at hyperboloid points are spacelike.
    double norm() const {
        const double q = detail::lorentz_inner_raw(coords, coords);
        return std::sqrt(std::max(q, 0.0));
    }
};

/// A point in the Klein ball of radius sqrt(K).
struct KleinPoint {
    std::vector<double> coords; // length d
    Curvature curvature;

    KleinPoint(std::vector<double> c, Curvature K) : coords(std::move(c)), curvature(K) {
        double n2 = 0.0;
        for (double x : coords) n2 += x * x;
        if (!(n2 < curvature.k)) throw domain_error("KleinPoint: squared norm must be below K");
    }

    int dim() const { return static_cast<int>(coords.size()); }
};

inline double lorentz_inner(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw dimension_error("lorentz_inner: vectors must have equal length >= 2");
    return detail::lorentz_inner_raw(x, y);
}

inline LorentzPoint origin(int d, Curvature K) {
    if (d < 1) throw dimension_error("origin: dimension must be >= 1");
    std::vector<double> c(static_cast<std::size_t>(d) + 1, 0.0);
    c[0] = K.sqrt_k();
    return LorentzPoint(std::move(c), K);
}

namespace detail {
inline void check_same_space(const LorentzPoint& x, const LorentzPoint& y) {
    if (x.coords.size() != y.coords.size()) throw dimension_error("points have different dimensions");
    if (!(x.curvature == y.curvature)) throw configuration_error("points have different curvatures");
}
inline vecd kv(const Curvature& K) { return vecd::scalar(K.k); }
inline vecd skv(const Curvature& K) { return vecd::scalar(K.sqrt_k()); }
} // namespace detail

inline double distance(const LorentzPoint& x, const LorentzPoint& y) {
    detail::check_same_space(x, y);
    return value_of(man::distance(x.as_vec(), y.as_vec(), detail::kv(x.curvature), detail::skv(x.curvature)));
}

inline LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& v) {
    if (v.base.coords != x.coords || !(v.base.curvature == x.curvature))
        throw contract_error("exp_map: tangent vector is not based at x");
    vecd y = man::exp_map(x.as_vec(), v.as_vec(), detail::kv(x.curvature), detail::skv(x.curvature));
    return LorentzPoint(values_of(y), x.curvature);
}

inline TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y) {
    detail::check_same_space(x, y);
    vecd v = man::log_map(x.as_vec(), y.as_vec(), detail::kv(x.curvature), detail::skv(x.curvature));
    return TangentVector(x, values_of(v));
}

inline TangentVector parallel_transport(const LorentzPoint& x, const LorentzPoint& y, const TangentVector& v) {
    detail::check_same_space(x, y);
    if (v.base.coords != x.coords) throw contract_error("parallel_transport: tangent vector is not based at x");
    vecd out = man::parallel_transport(x.as_vec(), y.as_vec(), v.as_vec(), detail::kv(x.curvature));
    return TangentVector(y, values_of(out));
}

inline LorentzPoint lift_euclidean(std::span<const double> x, Curvature K) {
    if (x.empty()) throw dimension_error("lift_euclidean: dimension must be >= 1");
    vecd w = vecd::col(std::vector<double>(x.begin(), x.end()));
    vecd y = man::lift_euclidean(w, detail::kv(K), detail::skv(K));
    return LorentzPoint(values_of(y), K);
}

inline KleinPoint lorentz_to_klein(const LorentzPoint& y) {
    vecd k = man::to_klein(y.as_vec(), detail::skv(y.curvature));
    return KleinPoint(values_of(k), y.curvature);
}

inline LorentzPoint klein_to_lorentz(const KleinPoint& x) {
    vecd y = man::from_klein(vecd::col(x.coords), detail::kv(x.curvature), detail::skv(x.curvature));
    return LorentzPoint(values_of(y), x.curvature);
}

} // namespace hvgnn
