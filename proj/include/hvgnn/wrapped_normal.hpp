#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hvgnn/manifold.hpp"
#include "hvgnn/rng.hpp"

// Wrapped normal distribution on the hyperboloid: a Euclidean diagonal
// normal pushed through parallel transport from the origin and the
// exponential map at the mean. Sampling is reparameterisable; the density
// follows from the change of variables through that map, whose volume
// distortion is (sinh(r)/r)^{d-1} with r = ||u||_L / sqrt(K) for the
// tangent argument u = log_mu(z).

namespace hvgnn::wn {

inline constexpr double half_log_2pi = 0.91893853320467274178032973640562;

/// log(sinh(r)) with an overflow-safe branch for large r.
template <class V>
V log_sinh(const V& r) {
    if (value_of(r) > 20.0) {
        // sinh(r) = e^r (1 - e^{-2r}) / 2
        return r - 0.6931471805599453 + log(clamp_min(1.0 - exp(0.0 - 2.0 * r), 1e-300));
    }
    return log(sinh(r));
}

/// Reparameterised draw: scale noise by sigma, embed in the origin tangent
/// space, transport to mu, exponentiate.
template <class V>
V sample(const V& mu, const V& log_sigma, std::span<const double> noise, const V& K, const V& sqrtK,
         const value_ctx<V>& ctx) {
    V vtilde = exp(log_sigma) * ctx.vector(noise);
    V u = man::transport_from_origin(mu, vtilde, K, sqrtK);
    return man::exp_map(mu, u, K, sqrtK);
}

/// Euclidean diagonal-normal log-density with mean zero.
template <class V>
V diag_normal_log_density(const V& x, const V& log_sigma) {
    const int d = x.size();
    V standardized = x * exp(0.0 - log_sigma);
    return 0.0 - (d * half_log_2pi) - sum(log_sigma) - 0.5 * sum(standardized * standardized);
}

template <class V>
V log_density(const V& z, const V& mu, const V& log_sigma, const V& K, const V& sqrtK) {
    const int d = mu.size() - 1;
    V u = man::log_map(mu, z, K, sqrtK);
    V pulled = man::transport_to_origin(mu, u, K, sqrtK);
    V x = slice(pulled, 1, d); // the time-like entry of a tangent at the origin is zero
    V base = diag_normal_log_density(x, log_sigma);
    V rsq = clamp_min(man::inner(u, u), 0.0);
    if (value_of(rsq) < man::taylor_eps_sq) return base; // limit of the correction is 0
    V rhat = sqrt(rsq) / sqrtK;
    return base + (static_cast<double>(d) - 1.0) * (log(rhat) - log_sinh(rhat));
}

/// Monte Carlo KL estimate (1/n) sum_k [log q(z_k) - log p(z_k)], z_k ~ q.
template <class V>
V kl_monte_carlo(const V& mu_q, const V& log_sigma_q, const V& mu_p, const V& log_sigma_p,
                 std::span<const double> noise, int n_samples, const V& K, const V& sqrtK,
                 const value_ctx<V>& ctx) {
    if (n_samples < 1) throw contract_error("kl_monte_carlo: need at least one sample");
    const int d = mu_q.size() - 1;
    if (static_cast<int>(noise.size()) != n_samples * d) throw dimension_error("kl_monte_carlo: noise size mismatch");
    V acc = ctx.scalar(0.0);
    for (int k = 0; k < n_samples; ++k) {
        V z = sample(mu_q, log_sigma_q, noise.subspan(static_cast<std::size_t>(k) * d, static_cast<std::size_t>(d)), K,
                     sqrtK, ctx);
        acc = acc + (log_density(z, mu_q, log_sigma_q, K, sqrtK) - log_density(z, mu_p, log_sigma_p, K, sqrtK));
    }
    return acc / static_cast<double>(n_samples);
}

} // namespace hvgnn::wn

namespace hvgnn {

struct WrappedNormalParams {
    LorentzPoint mu;
    std::vector<double> log_sigma; // length d; sigma = exp(log_sigma) > 0

    WrappedNormalParams(LorentzPoint mu_, std::vector<double> log_sigma_)
        : mu(std::move(mu_)), log_sigma(std::move(log_sigma_)) {
        if (static_cast<int>(log_sigma.size()) != mu.dim())
            throw dimension_error("WrappedNormalParams: sigma length must equal the manifold dimension");
        for (double s : log_sigma)
            if (!std::isfinite(s)) throw domain_error("WrappedNormalParams: log sigma must be finite");
    }

    static WrappedNormalParams from_sigma(LorentzPoint mu_, std::span<const double> sigma) {
        std::vector<double> ls(sigma.size());
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            if (!(sigma[i] > 0.0)) throw domain_error("WrappedNormalParams: sigma must be positive");
            ls[i] = std::log(sigma[i]);
        }
        return WrappedNormalParams(std::move(mu_), std::move(ls));
    }

    int dim() const { return mu.dim(); }
    std::vector<double> sigma() const {
        std::vector<double> out(log_sigma.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_sigma[i]);
        return out;
    }
};

inline WrappedNormalParams standard_prior(int d, Curvature K) {
    return WrappedNormalParams(origin(d, K), std::vector<double>(static_cast<std::size_t>(d), 0.0));
}

inline LorentzPoint sample(const WrappedNormalParams& params, std::span<const double> noise) {
    if (static_cast<int>(noise.size()) != params.dim()) throw dimension_error("sample: noise length mismatch");
    value_ctx<vecd> ctx;
    vecd z = wn::sample(params.mu.as_vec(), vecd::col(params.log_sigma), noise, detail::kv(params.mu.curvature),
                        detail::skv(params.mu.curvature), ctx);
    return LorentzPoint(values_of(z), params.mu.curvature);
}

inline double log_density(const LorentzPoint& z, const WrappedNormalParams& params) {
    detail::check_same_space(z, params.mu);
    return value_of(wn::log_density(z.as_vec(), params.mu.as_vec(), vecd::col(params.log_sigma),
                                    detail::kv(params.mu.curvature), detail::skv(params.mu.curvature)));
}

inline double kl_monte_carlo(const WrappedNormalParams& q, const WrappedNormalParams& p, int n_samples, Rng& rng) {
    detail::check_same_space(q.mu, p.mu);
    const int d = q.dim();
    std::vector<double> noise(static_cast<std::size_t>(n_samples) * d);
    for (auto& x : noise) x = rng.gaussian();
    value_ctx<vecd> ctx;
    return value_of(wn::kl_monte_carlo(q.mu.as_vec(), vecd::col(q.log_sigma), p.mu.as_vec(), vecd::col(p.log_sigma),
                                       noise, n_samples, detail::kv(q.mu.curvature), detail::skv(q.mu.curvature), ctx));
}

} // namespace hvgnn
