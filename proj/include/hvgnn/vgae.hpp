#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvgnn/tgnn.hpp"
#include "hvgnn/wrapped_normal.hpp"

// The variational graph autoencoder. Two temporal encoders parameterize the
// per-node posterior (mu from the manifold-valued encoder, log sigma from the
// Euclidean one); the Fermi-Dirac decoder scores edges from geodesic
// distance, the multinomial-logistic decoder classifies from the tangent
// representation at the origin. Training ascends the ELBO
//   J = E_q[log p(edges, labels | Z)] - KL[q || prior]
// with reparameterised samples; all parameters live in Euclidean space so a
// standard Adam step applies.

namespace hvgnn {

enum class Geometry { hvgnn, evgnn, tgnn_l, tgnn_r };

inline bool is_hyperbolic(Geometry g) { return g == Geometry::hvgnn || g == Geometry::tgnn_l; }
inline bool is_vae(Geometry g) { return g == Geometry::hvgnn || g == Geometry::evgnn; }

inline const char* geometry_name(Geometry g) {
    switch (g) {
        case Geometry::hvgnn: return "hvgnn";
        case Geometry::evgnn: return "evgnn";
        case Geometry::tgnn_l: return "tgnn_l";
        case Geometry::tgnn_r: return "tgnn_r";
    }
    return "?";
}

inline Geometry geometry_from_name(const std::string& s) {
    if (s == "hvgnn") return Geometry::hvgnn;
    if (s == "evgnn") return Geometry::evgnn;
    if (s == "tgnn_l") return Geometry::tgnn_l;
    if (s == "tgnn_r") return Geometry::tgnn_r;
    throw configuration_error("unknown geometry: " + s);
}

struct DecoderConfig {
    double fd_r = 2.0; // Fermi-Dirac radius
    double fd_t = 1.0; // Fermi-Dirac temperature
    int n_classes = 0; // 0 disables the classification head

    void validate() const {
        if (!(fd_r >= 0.0)) throw configuration_error("DecoderConfig: fd_r must be >= 0");
        if (!(fd_t > 0.0)) throw configuration_error("DecoderConfig: fd_t must be > 0");
        if (n_classes == 1 || n_classes < 0) throw configuration_error("DecoderConfig: need n_classes >= 2 (or 0)");
    }
};

struct ModelConfig {
    Geometry geometry = Geometry::hvgnn;
    int d = 8;
    int layers = 2;
    int feature_dim = 0;
    double K = 1.0;
    bool trainable_k = false;
    DecoderConfig decoder;
    int max_neighbors = 10;
    int n_mc = 1;
    double t_max = 1.0;

    void validate() const {
        if (d < 2 || d % 2 != 0) throw configuration_error("ModelConfig: d must be even and >= 2");
        if (layers < 1) throw configuration_error("ModelConfig: need at least one layer");
        if (feature_dim < 1) throw configuration_error("ModelConfig: feature_dim must be set");
        if (!(K > 0.0)) throw configuration_error("ModelConfig: K must be positive");
        if (max_neighbors < 0 || n_mc < 1) throw configuration_error("ModelConfig: bad sampling sizes");
        decoder.validate();
    }
};

struct ParamBlock {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
    int r = 0, c = 0;
};

struct ModelState {
    ModelConfig cfg;
    std::vector<double> params;
    std::vector<ParamBlock> blocks;
    std::vector<double> adam_m, adam_v;
    long step = 0;

    std::span<const double> block_span(const ParamBlock& b) const {
        return std::span<const double>(params).subspan(b.offset, b.size);
    }
};

namespace detail {

struct BlockBuilder {
    ModelState* st;
    void add(const std::string& name, int r, int c, std::vector<double> init) {
        ParamBlock b;
        b.name = name;
        b.offset = st->params.size();
        b.size = static_cast<std::size_t>(r) * c;
        b.r = r;
        b.c = c;
        if (init.size() != b.size) throw dimension_error("model init: block size mismatch for " + name);
        st->params.insert(st->params.end(), init.begin(), init.end());
        st->blocks.push_back(std::move(b));
    }
};

inline std::vector<double> uniform_init(Rng& rng, int n, double bound) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& x : out) x = rng.uniform(-bound, bound);
    return out;
}

inline void add_encoder_blocks(BlockBuilder& bb, const std::string& prefix, const ModelConfig& cfg, Rng& rng) {
    const int d = cfg.d, f = cfg.feature_dim;
    bb.add(prefix + ".in_proj", d, f, uniform_init(rng, d * f, 1.0 / std::sqrt(static_cast<double>(f))));
    const auto ladder = TimeEncodingParams::geometric_init(d, Curvature(cfg.K), cfg.t_max).omegas;
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string p = prefix + ".l" + std::to_string(l);
        bb.add(p + ".W", d, d, uniform_init(rng, d * d, 1.0 / std::sqrt(static_cast<double>(d))));
        bb.add(p + ".gamma", 1, 1, {1.0});
        bb.add(p + ".c", 1, 1, {0.0});
        bb.add(p + ".omega", d / 2, 1, ladder);
    }
}

} // namespace detail

/// Fresh model with the documented initialization: layer weights uniform in
/// (-1/sqrt(d), 1/sqrt(d)), input projection scaled by fan-in, gamma = 1,
/// c = 0, geometric frequency ladder, zero-initialized classifier.
inline ModelState init_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelState st;
    st.cfg = cfg;
    detail::BlockBuilder bb{&st};
    Rng rng = Rng(seed).fork(0xA11CE);
    detail::add_encoder_blocks(bb, "enc_mu", cfg, rng);
    if (is_vae(cfg.geometry)) detail::add_encoder_blocks(bb, "enc_sigma", cfg, rng);
    if (cfg.decoder.n_classes >= 2) {
        bb.add("dec.mlr.W", cfg.decoder.n_classes, cfg.d,
               std::vector<double>(static_cast<std::size_t>(cfg.decoder.n_classes) * cfg.d, 0.0));
        bb.add("dec.mlr.b", cfg.decoder.n_classes, 1, std::vector<double>(static_cast<std::size_t>(cfg.decoder.n_classes), 0.0));
    }
    if (cfg.trainable_k) bb.add("kappa", 1, 1, {std::log(cfg.K)});
    st.adam_m.assign(st.params.size(), 0.0);
    st.adam_v.assign(st.params.size(), 0.0);
    return st;
}

// -- parameter views -----------------------------------------------------------

template <class V>
struct MlrParamsT {
    V W; // C x d
    V b; // C
};

template <class V>
struct ModelViews {
    tg::EncoderParamsT<V> enc_mu;
    std::optional<tg::EncoderParamsT<V>> enc_sigma;
    std::optional<MlrParamsT<V>> mlr;
    std::optional<V> kappa;
    V K, sqrtK;
    std::vector<V> leaves; // one per block, in block order
};

/// Materializes parameter views; with the tape context this registers one
/// leaf per block so gradients can be read back in block order.
template <class V>
ModelViews<V> build_views(const ModelState& st, const value_ctx<V>& ctx) {
    ModelViews<V> mv;
    std::size_t bi = 0;
    auto next = [&](int expect_r, int expect_c) -> V {
        if (bi >= st.blocks.size()) throw contract_error("build_views: block walk out of range");
        const ParamBlock& b = st.blocks[bi++];
        if (b.r != expect_r || b.c != expect_c) throw contract_error("build_views: block shape mismatch at " + b.name);
        V v = ctx.param(st.block_span(b), b.r, b.c);
        mv.leaves.push_back(v);
        return v;
    };
    const ModelConfig& cfg = st.cfg;
    auto read_encoder = [&]() {
        tg::EncoderParamsT<V> enc;
        enc.in_proj = next(cfg.d, cfg.feature_dim);
        for (int l = 0; l < cfg.layers; ++l) {
            tg::EncoderLayer<V> lay;
            lay.W = next(cfg.d, cfg.d);
            lay.gamma = next(1, 1);
            lay.c = next(1, 1);
            V omega = next(cfg.d / 2, 1);
            lay.tenc = te::TimeEncoder<V>::make(omega, cfg.d, ctx);
            enc.layers.push_back(std::move(lay));
        }
        return enc;
    };
    mv.enc_mu = read_encoder();
    if (is_vae(cfg.geometry)) mv.enc_sigma = read_encoder();
    if (cfg.decoder.n_classes >= 2) {
        MlrParamsT<V> mlr;
        mlr.W = next(cfg.decoder.n_classes, cfg.d);
        mlr.b = next(cfg.decoder.n_classes, 1);
        mv.mlr = std::move(mlr);
    }
    if (cfg.trainable_k) {
        mv.kappa = next(1, 1);
        mv.K = exp(*mv.kappa);
        mv.sqrtK = exp(0.5 * (*mv.kappa));
    } else {
        mv.K = ctx.scalar(cfg.K);
        mv.sqrtK = ctx.scalar(std::sqrt(cfg.K));
    }
    if (bi != st.blocks.size()) throw contract_error("build_views: unread parameter blocks");
    return mv;
}

// -- decoders ------------------------------------------------------------------

namespace dec {

/// log p(edge) = -softplus((d^2 - r)/t); log p(no edge) = -softplus((r - d^2)/t).
template <class V>
V fd_log_prob(const V& dist_sq, double r, double t, bool positive) {
    V z = (dist_sq - r) / t;
    return positive ? (0.0 - softplus(z)) : (0.0 - softplus(0.0 - z));
}

/// Log class probabilities; hyperbolic points are read in the tangent space
/// at the origin.
template <class V>
V mlr_log_probs(const V& z, const MlrParamsT<V>& mlr, bool hyperbolic, const V& K, const V& sqrtK) {
    V x = hyperbolic ? man::log0(z, K, sqrtK) : z;
    V logits = matmul(mlr.W, x) + mlr.b;
    return logits - logsumexp(logits);
}

} // namespace dec

inline double fermi_dirac_likelihood(const LorentzPoint& z_i, const LorentzPoint& z_j, const DecoderConfig& cfg) {
    cfg.validate();
    detail::check_same_space(z_i, z_j);
    const double d = distance(z_i, z_j);
    const double logit = (cfg.fd_r - d * d) / cfg.fd_t;
    return logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
}

struct MlrClassParams {
    std::vector<double> weights; // C x d row-major
    std::vector<double> biases;  // C
};

inline std::vector<double> hyperbolic_mlr_likelihood(const LorentzPoint& z, const MlrClassParams& cp) {
    const int d = z.dim();
    if (cp.biases.size() < 2) throw configuration_error("hyperbolic_mlr_likelihood: need at least two classes");
    const int C = static_cast<int>(cp.biases.size());
    if (static_cast<int>(cp.weights.size()) != C * d) throw dimension_error("hyperbolic_mlr_likelihood: weight shape");
    MlrParamsT<vecd> mlr{vecd::matrix(C, d, cp.weights), vecd::col(cp.biases)};
    vecd lp = dec::mlr_log_probs(z.as_vec(), mlr, true, detail::kv(z.curvature), detail::skv(z.curvature));
    auto out = values_of(lp);
    for (auto& x : out) x = std::exp(x);
    return out;
}

// -- posterior -----------------------------------------------------------------

struct PosteriorOutput {
    std::vector<std::pair<int, double>> queries;
    std::vector<WrappedNormalParams> dists;
};

// -- ELBO ----------------------------------------------------------------------

struct EventPair {
    int src = 0, dst = 0;
    double time = 0.0;
};

struct Batch {
    std::vector<EventPair> positives;
    std::vector<EventPair> negatives;
    bool use_labels = false;
    // Minibatch amortization of the KL term. The full objective carries one
    // KL per node against a likelihood over every edge; a batch of B edges
    // touches ~3B query nodes, so an unweighted per-query KL sum would
    // overcount the prior term by roughly m/n. Trainers set this to
    // n_nodes / m_train; 1.0 evaluates the unweighted form.
    double kl_weight = 1.0;
};

struct QueryKey {
    int node = 0;
    double time = 0.0;
    bool operator<(const QueryKey& o) const { return node != o.node ? node < o.node : time < o.time; }
    bool operator==(const QueryKey& o) const { return node == o.node && time == o.time; }
};

/// Unique (node, time) pairs touched by a batch, sorted.
inline std::vector<QueryKey> batch_queries(const Batch& b) {
    std::vector<QueryKey> q;
    q.reserve(2 * (b.positives.size() + b.negatives.size()));
    for (const auto& e : b.positives) {
        q.push_back({e.src, e.time});
        q.push_back({e.dst, e.time});
    }
    for (const auto& e : b.negatives) {
        q.push_back({e.src, e.time});
        q.push_back({e.dst, e.time});
    }
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    return q;
}

inline std::size_t noise_size(const ModelConfig& cfg, std::size_t n_queries) {
    return is_vae(cfg.geometry) ? n_queries * static_cast<std::size_t>(cfg.n_mc) * cfg.d : 0;
}

template <class V>
struct ElboParts {
    V elbo, recon, cls, kl;
};

/// Unnormalized ELBO of one batch: reconstruction and classification terms
/// are sums over pairs/labeled queries, the KL term sums over the unique
/// (node, time) queries. Deterministic given the noise buffer.
template <class V>
ElboParts<V> elbo_core(const TemporalGraph& g, const ModelViews<V>& mv, const ModelConfig& cfg, const Batch& batch,
                       std::span<const QueryKey> queries, std::span<const double> noise, const value_ctx<V>& ctx) {
    const bool hyp = is_hyperbolic(cfg.geometry);
    const bool vae = is_vae(cfg.geometry);
    const int d = cfg.d, n_mc = vae ? cfg.n_mc : 1;
    if (noise.size() != noise_size(cfg, queries.size())) throw dimension_error("elbo_core: noise buffer size mismatch");

    tg::TgnnEngine<V> eng_mu(g, mv.enc_mu, mv.K, mv.sqrtK, hyp, cfg.max_neighbors, ctx);
    std::optional<tg::TgnnEngine<V>> eng_sigma;
    if (vae) eng_sigma.emplace(g, *mv.enc_sigma, mv.K, mv.sqrtK, false, cfg.max_neighbors, ctx);

    std::map<QueryKey, int> index;
    for (std::size_t i = 0; i < queries.size(); ++i) index.emplace(queries[i], static_cast<int>(i));

    std::vector<V> mu(queries.size());
    std::vector<V> log_sigma;
    std::vector<std::vector<V>> z(queries.size());
    if (vae) log_sigma.resize(queries.size());

    const std::vector<double> prior_ls(static_cast<std::size_t>(d), 0.0);
    V prior_log_sigma = ctx.vector(prior_ls);
    std::vector<double> origin_coords(static_cast<std::size_t>(d) + 1, 0.0);
    V prior_mu = ctx.scalar(0.0); // placeholder; set below for the hyperbolic case
    if (hyp) {
        // constant origin (sqrt(K), 0, ..., 0); with trainable K this must follow K
        V zeros = ctx.vector(prior_ls);
        prior_mu = concat(mv.sqrtK, zeros);
    } else {
        prior_mu = ctx.vector(prior_ls);
    }

    for (std::size_t i = 0; i < queries.size(); ++i) {
        mu[i] = eng_mu.rep(queries[i].node, queries[i].time);
        if (!vae) {
            z[i] = {mu[i]};
            continue;
        }
        log_sigma[i] = (*eng_sigma).rep(queries[i].node, queries[i].time);
        z[i].reserve(static_cast<std::size_t>(n_mc));
        for (int k = 0; k < n_mc; ++k) {
            auto eps = noise.subspan((i * static_cast<std::size_t>(n_mc) + static_cast<std::size_t>(k)) * d,
                                     static_cast<std::size_t>(d));
            if (hyp) {
                z[i].push_back(wn::sample(mu[i], log_sigma[i], eps, mv.K, mv.sqrtK, ctx));
            } else {
                z[i].push_back(mu[i] + exp(log_sigma[i]) * ctx.vector(eps));
            }
        }
    }

    auto pair_dist_sq = [&](const V& a, const V& b) {
        if (hyp) return man::distance_sq(a, b, mv.K, mv.sqrtK);
        V diff = a - b;
        return sum(diff * diff);
    };

    V recon = ctx.scalar(0.0);
    auto add_pairs = [&](const std::vector<EventPair>& pairs, bool positive) {
        for (const auto& e : pairs) {
            const int i = index.at({e.src, e.time});
            const int j = index.at({e.dst, e.time});
            V acc = ctx.scalar(0.0);
            for (int k = 0; k < n_mc; ++k)
                acc = acc + dec::fd_log_prob(pair_dist_sq(z[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)],
                                                          z[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]),
                                             cfg.decoder.fd_r, cfg.decoder.fd_t, positive);
            recon = recon + acc / static_cast<double>(n_mc);
        }
    };
    add_pairs(batch.positives, true);
    add_pairs(batch.negatives, false);

    V cls = ctx.scalar(0.0);
    if (batch.use_labels && mv.mlr && cfg.decoder.n_classes >= 2) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const int label = g.label_of(queries[i].node);
            if (label <= 0) continue;
            V acc = ctx.scalar(0.0);
            for (int k = 0; k < static_cast<int>(z[i].size()); ++k) {
                V lp = dec::mlr_log_probs(z[i][static_cast<std::size_t>(k)], *mv.mlr, hyp, mv.K, mv.sqrtK);
                acc = acc + slice(lp, label - 1, 1);
            }
            cls = cls + acc / static_cast<double>(z[i].size());
        }
    }

    V kl = ctx.scalar(0.0);
    if (vae) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            V acc = ctx.scalar(0.0);
            for (int k = 0; k < n_mc; ++k) {
                const V& zk = z[i][static_cast<std::size_t>(k)];
                if (hyp) {
                    acc = acc + (wn::log_density(zk, mu[i], log_sigma[i], mv.K, mv.sqrtK) -
                                 wn::log_density(zk, prior_mu, prior_log_sigma, mv.K, mv.sqrtK));
                } else {
                    acc = acc + (wn::diag_normal_log_density(zk - mu[i], log_sigma[i]) -
                                 wn::diag_normal_log_density(zk - prior_mu, prior_log_sigma));
                }
            }
            kl = kl + acc / static_cast<double>(n_mc);
        }
    }

    ElboParts<V> parts;
    parts.recon = recon;
    parts.cls = cls;
    parts.kl = batch.kl_weight == 1.0 ? kl : batch.kl_weight * kl;
    parts.elbo = recon + cls - parts.kl;
    return parts;
}

/// Posteriors for a list of (node, time) queries in plain double mode.
inline PosteriorOutput encode_posterior(const TemporalGraph& g, std::span<const std::pair<int, double>> queries,
                                        const ModelState& st) {
    if (!is_vae(st.cfg.geometry) || !is_hyperbolic(st.cfg.geometry))
        throw configuration_error("encode_posterior: wrapped-normal posterior requires the hvgnn geometry");
    if (g.feature_dim != st.cfg.feature_dim) throw configuration_error("encode_posterior: feature dimension mismatch");
    value_ctx<vecd> ctx;
    auto mv = build_views<vecd>(st, ctx);
    tg::TgnnEngine<vecd> eng_mu(g, mv.enc_mu, mv.K, mv.sqrtK, true, st.cfg.max_neighbors, ctx);
    tg::TgnnEngine<vecd> eng_sigma(g, *mv.enc_sigma, mv.K, mv.sqrtK, false, st.cfg.max_neighbors, ctx);
    PosteriorOutput out;
    const Curvature K(st.cfg.K);
    for (const auto& [node, t] : queries) {
        out.queries.emplace_back(node, t);
        out.dists.emplace_back(LorentzPoint(values_of(eng_mu.rep(node, t)), K), values_of(eng_sigma.rep(node, t)));
    }
    return out;
}

/// Plain-mode ELBO evaluation (shared by reporting and the finite-difference
/// oracle; `noise` must match batch_queries(batch) in layout).
struct ElboValue {
    double elbo = 0, recon = 0, cls = 0, kl = 0;
};

inline ElboValue elbo_value(const ModelState& st, const TemporalGraph& g, const Batch& batch,
                            std::span<const QueryKey> queries, std::span<const double> noise) {
    value_ctx<vecd> ctx;
    auto mv = build_views<vecd>(st, ctx);
    auto parts = elbo_core<vecd>(g, mv, st.cfg, batch, queries, noise, ctx);
    return ElboValue{value_of(parts.elbo), value_of(parts.recon), value_of(parts.cls), value_of(parts.kl)};
}

// -- optimization ----------------------------------------------------------------

struct OptimizerConfig {
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct StepMetrics {
    double elbo = 0, recon = 0, cls = 0, kl = 0, grad_norm = 0;
};

/// One Adam ascent step on the batch ELBO. Throws training_error when the
/// loss goes non-finite. Deterministic given the noise buffer.
inline StepMetrics train_step(ModelState& st, const TemporalGraph& g, const Batch& batch,
                              std::span<const QueryKey> queries, std::span<const double> noise,
                              const OptimizerConfig& opt, ad::tape& tp) {
    tp.reset();
    value_ctx<ad::var> ctx{&tp};
    auto mv = build_views<ad::var>(st, ctx);
    auto parts = elbo_core<ad::var>(g, mv, st.cfg, batch, queries, noise, ctx);

    StepMetrics m;
    m.elbo = value_of(parts.elbo);
    m.recon = value_of(parts.recon);
    m.cls = value_of(parts.cls);
    m.kl = value_of(parts.kl);
    if (!std::isfinite(m.elbo))
        throw training_error("train_step: non-finite loss (elbo=" + std::to_string(m.elbo) + ") at step " +
                             std::to_string(st.step));

    tp.backward(parts.elbo);
    std::vector<double> grad(st.params.size(), 0.0);
    for (std::size_t b = 0; b < st.blocks.size(); ++b) {
        const auto gb = tp.grad(mv.leaves[b]);
        std::copy(gb.begin(), gb.end(), grad.begin() + static_cast<std::ptrdiff_t>(st.blocks[b].offset));
    }
    double norm_sq = 0.0;
    for (double x : grad) norm_sq += x * x;
    m.grad_norm = std::sqrt(norm_sq);

    st.step += 1;
    if (opt.lr != 0.0) {
        const double b1t = 1.0 - std::pow(opt.beta1, static_cast<double>(st.step));
        const double b2t = 1.0 - std::pow(opt.beta2, static_cast<double>(st.step));
        for (std::size_t i = 0; i < st.params.size(); ++i) {
            st.adam_m[i] = opt.beta1 * st.adam_m[i] + (1.0 - opt.beta1) * grad[i];
            st.adam_v[i] = opt.beta2 * st.adam_v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
            const double mh = st.adam_m[i] / b1t;
            const double vh = st.adam_v[i] / b2t;
            st.params[i] += opt.lr * mh / (std::sqrt(vh) + opt.eps); // ascent
        }
    }
    return m;
}

inline StepMetrics train_step(ModelState& st, const TemporalGraph& g, const Batch& batch,
                              std::span<const double> noise, const OptimizerConfig& opt) {
    ad::tape tp;
    const auto queries = batch_queries(batch);
    return train_step(st, g, batch, queries, noise, opt, tp);
}

} // namespace hvgnn
