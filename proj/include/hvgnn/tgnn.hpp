#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "hvgnn/data.hpp"
#include "hvgnn/time_encoding.hpp"

// Temporal graph attention in both geometries. One layer renews the target
// representation at time t from the time-aware neighborhood: every member
// (self-loop included, with zero timespan) gets a time-aware representation
//   hyperbolic:  h~_j = phi_L(|t - t_j|)  (+)  W (x) h_j
//   euclidean :  h~_j = phi_R(|t - t_j|)  +    W h_j
// and the aggregate is the Einstein midpoint (resp. the self-normalized
// weighted mean) under sigmoid attention weights from the inner product of
// time-aware representations. Stacking recurses: the layer-l input of a
// neighbor is its layer-(l-1) output at its own event time.

namespace hvgnn {

struct LayerParams {
    std::vector<double> weight; // d x d, row-major
    double attn_gamma = 1.0;
    double attn_bias = 0.0;
    TimeEncodingParams time_params;

    LayerParams(std::vector<double> w, double gamma, double bias, TimeEncodingParams tp)
        : weight(std::move(w)), attn_gamma(gamma), attn_bias(bias), time_params(std::move(tp)) {
        if (static_cast<int>(weight.size()) != time_params.d * time_params.d)
            throw dimension_error("LayerParams: weight must be d x d");
        if (!std::isfinite(attn_gamma) || !std::isfinite(attn_bias))
            throw domain_error("LayerParams: attention parameters must be finite");
        for (double x : weight)
            if (!std::isfinite(x)) throw domain_error("LayerParams: weight must be finite");
    }
};

namespace tg {

template <class V>
struct EncoderLayer {
    V W;     // d x d
    V gamma; // scalar
    V c;     // scalar
    te::TimeEncoder<V> tenc;
};

template <class V>
struct EncoderParamsT {
    V in_proj; // d x f
    std::vector<EncoderLayer<V>> layers;
};

/// h~ = phi_L(t_hat) (+) W (x) h, with (x) applied first.
template <class V>
V time_aware_rep_hyp(const EncoderLayer<V>& lp, const V& h, double t_hat, const V& K, const V& sqrtK, const V& one) {
    V wh = man::exp0(matmul(lp.W, man::log0(h, K, sqrtK)), K, sqrtK);
    V phi = lp.tenc.encode_hyperbolic(t_hat, K, sqrtK);
    const V pts[2] = {phi, wh};
    const V wts[2] = {one, one};
    return man::einstein_midpoint(std::span<const V>(pts, 2), std::span<const V>(wts, 2), K, sqrtK);
}

template <class V>
V time_aware_rep_euc(const EncoderLayer<V>& lp, const V& h, double t_hat) {
    return lp.tenc.encode_euclidean(t_hat) + matmul(lp.W, h);
}

/// Sigmoid attention + Einstein midpoint over the target/neighbor union.
template <class V>
V hyptga_aggregate(const V& htilde_target, std::span<const V> htilde_all, const EncoderLayer<V>& lp, const V& K,
                   const V& sqrtK) {
    std::vector<V> weights;
    weights.reserve(htilde_all.size());
    for (const V& h : htilde_all)
        weights.push_back(sigmoid(lp.gamma * man::inner(htilde_target, h) + lp.c));
    return man::einstein_midpoint(htilde_all, std::span<const V>(weights.data(), weights.size()), K, sqrtK);
}

template <class V>
V euclidean_aggregate(const V& htilde_target, std::span<const V> htilde_all, const EncoderLayer<V>& lp) {
    V w0 = sigmoid(lp.gamma * sum(htilde_target * htilde_all[0]) + lp.c);
    V num = w0 * htilde_all[0];
    V den = w0;
    for (std::size_t i = 1; i < htilde_all.size(); ++i) {
        V wi = sigmoid(lp.gamma * sum(htilde_target * htilde_all[i]) + lp.c);
        num = num + wi * htilde_all[i];
        den = den + wi;
    }
    return num / den;
}

/// Stacked temporal attention over one graph. Representations are memoized
/// per (layer, node, time) so shared sub-neighborhoods are computed once;
/// the cache is only valid while the underlying parameters are fixed.
template <class V>
class TgnnEngine {
public:
    TgnnEngine(const TemporalGraph& g, const EncoderParamsT<V>& enc, const V& K, const V& sqrtK, bool hyperbolic,
               int max_neighbors, const value_ctx<V>& ctx)
        : g_(&g), enc_(&enc), K_(K), sqrtK_(sqrtK), hyperbolic_(hyperbolic), max_n_(max_neighbors), ctx_(ctx) {
        one_ = ctx_.scalar(1.0);
        layer0_.assign(static_cast<std::size_t>(g.n_nodes), std::nullopt);
    }

    int depth() const { return static_cast<int>(enc_->layers.size()); }

    V rep(int node, double t) { return rep_at(node, t, depth()); }

private:
    const TemporalGraph* g_;
    const EncoderParamsT<V>* enc_;
    V K_, sqrtK_, one_;
    bool hyperbolic_;
    int max_n_;
    value_ctx<V> ctx_;
    std::vector<std::optional<V>> layer0_;
    std::map<std::tuple<int, int, std::uint64_t>, V> memo_;

    V rep_at(int node, double t, int layer) {
        if (node < 0 || node >= g_->n_nodes) throw input_error("tgnn: node id out of range");
        if (layer == 0) {
            auto& slot = layer0_[static_cast<std::size_t>(node)];
            if (!slot) {
                V x = ctx_.vector(g_->feature(node));
                V h0 = matmul(enc_->in_proj, x);
                slot = hyperbolic_ ? man::exp0(h0, K_, sqrtK_) : h0;
            }
            return *slot;
        }
        const auto key = std::make_tuple(layer, node, std::bit_cast<std::uint64_t>(t));
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        const auto& lp = enc_->layers[static_cast<std::size_t>(layer - 1)];
        const auto nb = time_aware_neighbors(*g_, node, t, max_n_);

        std::vector<V> htilde;
        htilde.reserve(nb.neighbors.size() + 1);
        V h_self = rep_at(node, t, layer - 1);
        htilde.push_back(hyperbolic_ ? time_aware_rep_hyp(lp, h_self, 0.0, K_, sqrtK_, one_)
                                     : time_aware_rep_euc(lp, h_self, 0.0));
        for (const auto& [j, tj] : nb.neighbors) {
            V hj = rep_at(j, tj, layer - 1);
            const double t_hat = t - tj; // strictly past, so t_hat = |t - tj|
            htilde.push_back(hyperbolic_ ? time_aware_rep_hyp(lp, hj, t_hat, K_, sqrtK_, one_)
                                         : time_aware_rep_euc(lp, hj, t_hat));
        }
        std::span<const V> all(htilde.data(), htilde.size());
        V out = hyperbolic_ ? hyptga_aggregate(htilde[0], all, lp, K_, sqrtK_) : euclidean_aggregate(htilde[0], all, lp);
        memo_.emplace(key, out);
        return out;
    }
};

} // namespace tg

// -- typed single-shot operations (unit-test surface) -------------------------

inline LorentzPoint hyperbolic_linear(std::span<const double> weight, const LorentzPoint& x) {
    const int d = x.dim();
    if (static_cast<int>(weight.size()) != d * d) throw dimension_error("hyperbolic_linear: weight must be d x d");
    const vecd W = vecd::matrix(d, d, std::vector<double>(weight.begin(), weight.end()));
    const vecd K = detail::kv(x.curvature), sK = detail::skv(x.curvature);
    vecd y = man::exp0(matmul(W, man::log0(x.as_vec(), K, sK)), K, sK);
    return LorentzPoint(values_of(y), x.curvature);
}

inline LorentzPoint einstein_midpoint(std::span<const double> weights, std::span<const LorentzPoint> points) {
    if (points.empty()) throw contract_error("einstein_midpoint: empty point list");
    if (weights.size() != points.size()) throw dimension_error("einstein_midpoint: weights/points length mismatch");
    for (double w : weights)
        if (!(w > 0.0)) throw domain_error("einstein_midpoint: weights must be positive");
    for (std::size_t i = 1; i < points.size(); ++i) detail::check_same_space(points[0], points[i]);
    std::vector<vecd> pts, wts;
    pts.reserve(points.size());
    wts.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        pts.push_back(points[i].as_vec());
        wts.push_back(vecd::scalar(weights[i]));
    }
    vecd m = man::einstein_midpoint(std::span<const vecd>(pts.data(), pts.size()),
                                    std::span<const vecd>(wts.data(), wts.size()), detail::kv(points[0].curvature),
                                    detail::skv(points[0].curvature));
    return LorentzPoint(values_of(m), points[0].curvature);
}

inline LorentzPoint weighted_addition(const LorentzPoint& x, const LorentzPoint& y) {
    detail::check_same_space(x, y);
    const double w[2] = {1.0, 1.0};
    const LorentzPoint pts[2] = {x, y};
    return einstein_midpoint(std::span<const double>(w, 2), std::span<const LorentzPoint>(pts, 2));
}

namespace detail {
inline tg::EncoderLayer<vecd> layer_view(const LayerParams& p) {
    const int d = p.time_params.d;
    tg::EncoderLayer<vecd> lv;
    lv.W = vecd::matrix(d, d, p.weight);
    lv.gamma = vecd::scalar(p.attn_gamma);
    lv.c = vecd::scalar(p.attn_bias);
    value_ctx<vecd> ctx;
    lv.tenc = te::TimeEncoder<vecd>::make(vecd::col(p.time_params.omegas), d, ctx);
    return lv;
}
} // namespace detail

inline LorentzPoint time_aware_representation(const LorentzPoint& h, double t_hat, const LayerParams& p) {
    if (t_hat < 0.0) throw domain_error("time_aware_representation: timespan must be non-negative");
    const auto lv = detail::layer_view(p);
    const vecd K = detail::kv(h.curvature), sK = detail::skv(h.curvature);
    vecd out = tg::time_aware_rep_hyp(lv, h.as_vec(), t_hat, K, sK, vecd::scalar(1.0));
    return LorentzPoint(values_of(out), h.curvature);
}

inline double attention_weight(const LorentzPoint& h_i, const LorentzPoint& h_j, const LayerParams& p) {
    detail::check_same_space(h_i, h_j);
    const double ip = lorentz_inner(h_i.coords, h_j.coords);
    const double logit = p.attn_gamma * ip + p.attn_bias;
    return logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
}

/// One HypTGA layer over caller-supplied per-node input representations.
inline LorentzPoint hyptga_forward(std::span<const LorentzPoint> reps, const TimeAwareNeighborhood& nbhd,
                                   const LayerParams& p) {
    if (nbhd.target < 0 || nbhd.target >= static_cast<int>(reps.size()))
        throw input_error("hyptga_forward: target id out of range");
    for (const auto& [j, tj] : nbhd.neighbors) {
        if (j < 0 || j >= static_cast<int>(reps.size())) throw input_error("hyptga_forward: neighbor id out of range");
        if (!(tj < nbhd.query_time)) throw contract_error("hyptga_forward: neighborhood events must be strictly past");
    }
    const auto lv = detail::layer_view(p);
    const Curvature K = reps[static_cast<std::size_t>(nbhd.target)].curvature;
    const vecd Kv = detail::kv(K), sK = detail::skv(K);
    const vecd one = vecd::scalar(1.0);
    std::vector<vecd> htilde;
    htilde.reserve(nbhd.neighbors.size() + 1);
    htilde.push_back(tg::time_aware_rep_hyp(lv, reps[static_cast<std::size_t>(nbhd.target)].as_vec(), 0.0, Kv, sK, one));
    for (const auto& [j, tj] : nbhd.neighbors)
        htilde.push_back(
            tg::time_aware_rep_hyp(lv, reps[static_cast<std::size_t>(j)].as_vec(), nbhd.query_time - tj, Kv, sK, one));
    vecd out = tg::hyptga_aggregate(htilde[0], std::span<const vecd>(htilde.data(), htilde.size()), lv, Kv, sK);
    return LorentzPoint(values_of(out), K);
}

// -- stacked forward over a temporal graph ------------------------------------

struct TgnnConfig {
    std::vector<double> in_proj; // d x f, row-major
    int d = 0;
    int feature_dim = 0;
    std::vector<LayerParams> layers;
    int max_neighbors = 20;
    Curvature curvature;

    TgnnConfig(std::vector<double> proj, int d_, int f_, std::vector<LayerParams> ls, int max_n, Curvature K)
        : in_proj(std::move(proj)), d(d_), feature_dim(f_), layers(std::move(ls)), max_neighbors(max_n), curvature(K) {
        if (layers.empty()) throw configuration_error("TgnnConfig: need at least one layer");
        if (static_cast<int>(in_proj.size()) != d * feature_dim)
            throw dimension_error("TgnnConfig: in_proj must be d x feature_dim");
        for (const auto& l : layers)
            if (l.time_params.d != d) throw configuration_error("TgnnConfig: layer dimension mismatch");
    }
};

namespace detail {
inline tg::EncoderParamsT<vecd> encoder_view(const TgnnConfig& cfg) {
    tg::EncoderParamsT<vecd> enc;
    enc.in_proj = vecd::matrix(cfg.d, cfg.feature_dim, cfg.in_proj);
    for (const auto& l : cfg.layers) enc.layers.push_back(layer_view(l));
    return enc;
}
} // namespace detail

inline std::vector<LorentzPoint> tgnn_forward_hyperbolic(const TemporalGraph& g,
                                                         std::span<const std::pair<int, double>> queries,
                                                         const TgnnConfig& cfg) {
    if (g.feature_dim != cfg.feature_dim) throw configuration_error("tgnn_forward: feature dimension mismatch");
    const auto enc = detail::encoder_view(cfg);
    value_ctx<vecd> ctx;
    tg::TgnnEngine<vecd> eng(g, enc, detail::kv(cfg.curvature), detail::skv(cfg.curvature), true, cfg.max_neighbors, ctx);
    std::vector<LorentzPoint> out;
    out.reserve(queries.size());
    for (const auto& [node, t] : queries) out.emplace_back(values_of(eng.rep(node, t)), cfg.curvature);
    return out;
}

inline std::vector<std::vector<double>> tgnn_forward_euclidean(const TemporalGraph& g,
                                                               std::span<const std::pair<int, double>> queries,
                                                               const TgnnConfig& cfg) {
    if (g.feature_dim != cfg.feature_dim) throw configuration_error("tgnn_forward: feature dimension mismatch");
    const auto enc = detail::encoder_view(cfg);
    value_ctx<vecd> ctx;
    tg::TgnnEngine<vecd> eng(g, enc, detail::kv(cfg.curvature), detail::skv(cfg.curvature), false, cfg.max_neighbors, ctx);
    std::vector<std::vector<double>> out;
    out.reserve(queries.size());
    for (const auto& [node, t] : queries) out.push_back(values_of(eng.rep(node, t)));
    return out;
}

} // namespace hvgnn
