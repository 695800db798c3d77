#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hvgnn/checkpoint.hpp"
#include "hvgnn/metrics.hpp"
#include "hvgnn/vgae.hpp"

// Run orchestration shared by the CLI and the acceptance suite: seeded
// training over chronological mini-batches with per-epoch negative
// resampling, deterministic evaluation from posterior means, and the
// curvature sweep.

namespace hvgnn {

struct RunConfig {
    Geometry geometry = Geometry::hvgnn;
    int d = 8;
    int layers = 2;
    double logk = 0.0;
    bool trainable_k = false;
    double lr = 1e-2;
    int epochs = 10;
    int steps = 0; // optional cap on total steps; 0 = run the full epoch budget
    int batch = 100;
    std::uint64_t seed = 1;
    int max_neighbors = 10;
    int n_mc = 1;
    double fd_r = 2.0;
    double fd_t = 1.0;
    bool link_prediction = true;
    bool node_classification = true;
    double split_train = 0.8, split_val = 0.05, split_test = 0.15;
    std::string split_mode = "transductive"; // or "inductive"
    std::string data_path, labels_path, out_dir = ".", checkpoint_path;
    bool remap_ids = false;
    std::vector<double> logk_grid = {-3, -2, -1, 0, 1};
    // gen-synthetic settings
    int gen_communities = 4, gen_nodes = 100, gen_events = 5000;
    double gen_p_in = 0.9, gen_p_out = 0.1;
    bool gen_feature_signal = true;
    double gen_feature_noise = 0.3;
};

// -- key=value config files -----------------------------------------------------

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw parse_error("config: expected key=value, got '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

namespace detail {
inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw configuration_error("config: bad boolean for " + key + ": " + v);
}
} // namespace detail

/// Applies key=value settings onto a RunConfig (later sources win).
inline void apply_config(RunConfig& rc, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, val] : kv) {
        try {
            if (key == "geometry") rc.geometry = geometry_from_name(val);
            else if (key == "dim") rc.d = std::stoi(val);
            else if (key == "layers") rc.layers = std::stoi(val);
            else if (key == "logk") rc.logk = std::stod(val);
            else if (key == "trainable_k") rc.trainable_k = detail::parse_bool(val, key);
            else if (key == "lr") rc.lr = std::stod(val);
            else if (key == "epochs") rc.epochs = std::stoi(val);
            else if (key == "steps") rc.steps = std::stoi(val);
            else if (key == "batch") rc.batch = std::stoi(val);
            else if (key == "seed") rc.seed = static_cast<std::uint64_t>(std::stoull(val));
            else if (key == "max_neighbors") rc.max_neighbors = std::stoi(val);
            else if (key == "n_mc") rc.n_mc = std::stoi(val);
            else if (key == "fd_r") rc.fd_r = std::stod(val);
            else if (key == "fd_t") rc.fd_t = std::stod(val);
            else if (key == "link_prediction") rc.link_prediction = detail::parse_bool(val, key);
            else if (key == "node_classification") rc.node_classification = detail::parse_bool(val, key);
            else if (key == "split") rc.split_mode = val;
            else if (key == "split_train") rc.split_train = std::stod(val);
            else if (key == "split_val") rc.split_val = std::stod(val);
            else if (key == "split_test") rc.split_test = std::stod(val);
            else if (key == "data") rc.data_path = val;
            else if (key == "labels") rc.labels_path = val;
            else if (key == "out") rc.out_dir = val;
            else if (key == "checkpoint") rc.checkpoint_path = val;
            else if (key == "remap_ids") rc.remap_ids = detail::parse_bool(val, key);
            else if (key == "logk_grid") {
                rc.logk_grid.clear();
                std::stringstream ss(val);
                std::string tok;
                while (std::getline(ss, tok, ',')) rc.logk_grid.push_back(std::stod(tok));
                if (rc.logk_grid.empty()) throw configuration_error("config: empty logk_grid");
            } else if (key == "communities") rc.gen_communities = std::stoi(val);
            else if (key == "nodes") rc.gen_nodes = std::stoi(val);
            else if (key == "events") rc.gen_events = std::stoi(val);
            else if (key == "p_in") rc.gen_p_in = std::stod(val);
            else if (key == "p_out") rc.gen_p_out = std::stod(val);
            else if (key == "feature_signal") rc.gen_feature_signal = detail::parse_bool(val, key);
            else if (key == "feature_noise") rc.gen_feature_noise = std::stod(val);
            else throw configuration_error("config: unknown key " + key);
        } catch (const error&) {
            throw;
        } catch (...) {
            throw configuration_error("config: bad value for " + key + ": " + val);
        }
    }
    if (rc.split_mode != "transductive" && rc.split_mode != "inductive")
        throw configuration_error("config: split must be transductive or inductive");
}

inline ModelConfig model_config(const RunConfig& rc, const TemporalGraph& g) {
    ModelConfig mc;
    mc.geometry = rc.geometry;
    mc.d = rc.d;
    mc.layers = rc.layers;
    mc.feature_dim = g.feature_dim;
    mc.K = std::exp(rc.logk);
    mc.trainable_k = rc.trainable_k;
    mc.decoder.fd_r = rc.fd_r;
    mc.decoder.fd_t = rc.fd_t;
    mc.decoder.n_classes = rc.node_classification && g.n_classes >= 2 ? g.n_classes : 0;
    mc.max_neighbors = rc.max_neighbors;
    mc.n_mc = rc.n_mc;
    mc.t_max = 1.0; // timestamps are normalized at load
    mc.validate();
    return mc;
}

// -- negative sampling ------------------------------------------------------------

/// Undirected positive-pair set for rejection sampling.
struct PairSet {
    std::set<std::pair<int, int>> pairs;

    static PairSet from_events(const TemporalGraph& g, int first, int last) {
        PairSet ps;
        for (int i = first; i < last; ++i) {
            const auto& e = g.events[static_cast<std::size_t>(i)];
            ps.pairs.emplace(std::min(e.src, e.dst), std::max(e.src, e.dst));
        }
        return ps;
    }

    bool contains(int a, int b) const { return pairs.count({std::min(a, b), std::max(a, b)}) > 0; }
};

/// Uniform non-edge destination for a given source (falls back to any
/// distinct node after 100 rejections; only relevant for near-complete graphs).
inline int sample_negative_dst(Rng& rng, int src, int n_nodes, const PairSet& positives) {
    for (int tries = 0; tries < 100; ++tries) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_nodes)));
        if (j != src && !positives.contains(src, j)) return j;
    }
    for (int tries = 0; tries < 100; ++tries) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_nodes)));
        if (j != src) return j;
    }
    return (src + 1) % n_nodes;
}

// -- training ------------------------------------------------------------------------

struct TrainResult {
    int exit_code = 0; // 0 ok, 3 non-finite loss (state holds the last good parameters)
    std::vector<StepMetrics> history;
    ModelState state;
    std::string abort_reason;
};

/// Seeded training loop: chronological mini-batches reshuffled per epoch,
/// one fresh uniform negative per positive per epoch, Adam on the ELBO.
inline TrainResult run_training(const RunConfig& rc, const TemporalGraph& g) {
    const ModelConfig mc = model_config(rc, g);
    const Split split = chronological_split(g, rc.split_train, rc.split_val, rc.split_test);
    const PairSet train_pairs = PairSet::from_events(g, 0, split.train_end);

    TrainResult res;
    res.state = init_model(mc, rc.seed);
    Rng rng_order = Rng(rc.seed).fork(11);
    Rng rng_neg = Rng(rc.seed).fork(12);
    Rng rng_noise = Rng(rc.seed).fork(13);

    OptimizerConfig opt;
    opt.lr = rc.lr;
    ad::tape tape;

    const int n_train = split.train_end;
    if (n_train <= 0) throw input_error("run_training: empty training window");
    const int batch_size = std::max(1, std::min(rc.batch, n_train));
    const long long total_steps =
        rc.steps > 0 ? rc.steps
                     : static_cast<long long>(rc.epochs) * ((n_train + batch_size - 1) / batch_size);

    std::vector<int> order(static_cast<std::size_t>(n_train));
    for (int i = 0; i < n_train; ++i) order[static_cast<std::size_t>(i)] = i;

    long long step = 0;
    while (step < total_steps) {
        // one epoch: reshuffle, fresh negatives
        for (int i = n_train - 1; i > 0; --i)
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(rng_order.uniform_int(static_cast<std::uint64_t>(i) + 1))]);
        for (int start = 0; start < n_train && step < total_steps; start += batch_size) {
            const int end = std::min(start + batch_size, n_train);
            Batch batch;
            batch.use_labels = mc.decoder.n_classes >= 2;
            batch.kl_weight = static_cast<double>(g.n_nodes) / n_train;
            for (int i = start; i < end; ++i) {
                const auto& e = g.events[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
                batch.positives.push_back({e.src, e.dst, e.timestamp});
                batch.negatives.push_back(
                    {e.src, sample_negative_dst(rng_neg, e.src, g.n_nodes, train_pairs), e.timestamp});
            }
            const auto queries = batch_queries(batch);
            std::vector<double> noise(noise_size(mc, queries.size()));
            for (auto& x : noise) x = rng_noise.gaussian();

            const ModelState before = res.state;
            try {
                res.history.push_back(train_step(res.state, g, batch, queries, noise, opt, tape));
            } catch (const training_error& err) {
                res.state = before; // last good parameters
                res.exit_code = 3;
                res.abort_reason = err.what();
                return res;
            }
            ++step;
        }
    }
    return res;
}

// -- evaluation ---------------------------------------------------------------------

struct LinkPredictionEval {
    bool has_pairs = false;
    double accuracy = 0.0;
    double ap = 0.0;
    int n_pairs = 0;
};

namespace detail {

/// Deterministic representations (posterior means) for a set of queries.
template <class Fn>
void with_mean_engine(const ModelState& st, const TemporalGraph& g, Fn&& fn) {
    value_ctx<vecd> ctx;
    auto mv = build_views<vecd>(st, ctx);
    tg::TgnnEngine<vecd> eng(g, mv.enc_mu, mv.K, mv.sqrtK, is_hyperbolic(st.cfg.geometry), st.cfg.max_neighbors, ctx);
    fn(eng, mv);
}

inline double fd_probability(double dist_sq, double r, double t) {
    const double logit = (r - dist_sq) / t;
    return logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
}

} // namespace detail

/// Scores test-split events (positives plus one corrupted-destination
/// negative each) from posterior means only.
inline LinkPredictionEval eval_link_prediction(const ModelState& st, const TemporalGraph& g, const Split& split,
                                               const std::string& split_mode, std::uint64_t seed) {
    const bool inductive = split_mode == "inductive";
    std::vector<EventPair> positives;
    for (int i = split.val_end; i < split.n_events; ++i) {
        const auto& e = g.events[static_cast<std::size_t>(i)];
        const bool src_ind = split.inductive_mask[static_cast<std::size_t>(e.src)];
        const bool dst_ind = split.inductive_mask[static_cast<std::size_t>(e.dst)];
        const bool qualifies = inductive ? (src_ind || dst_ind) : (!src_ind && !dst_ind);
        if (qualifies) positives.push_back({e.src, e.dst, e.timestamp});
    }
    LinkPredictionEval out;
    if (positives.empty()) return out;

    const PairSet all_pairs = PairSet::from_events(g, 0, split.n_events);
    Rng rng = Rng(seed).fork(21);
    std::vector<EventPair> negatives;
    negatives.reserve(positives.size());
    for (const auto& e : positives)
        negatives.push_back({e.src, sample_negative_dst(rng, e.src, g.n_nodes, all_pairs), e.time});

    std::vector<double> scores;
    std::vector<int> labels;
    detail::with_mean_engine(st, g, [&](tg::TgnnEngine<vecd>& eng, ModelViews<vecd>& mv) {
        const bool hyp = is_hyperbolic(st.cfg.geometry);
        auto score = [&](const EventPair& e) {
            vecd zi = eng.rep(e.src, e.time);
            vecd zj = eng.rep(e.dst, e.time);
            double dsq;
            if (hyp) {
                dsq = value_of(man::distance_sq(zi, zj, mv.K, mv.sqrtK));
            } else {
                vecd diff = zi - zj;
                dsq = value_of(sum(diff * diff));
            }
            return detail::fd_probability(dsq, st.cfg.decoder.fd_r, st.cfg.decoder.fd_t);
        };
        for (const auto& e : positives) {
            scores.push_back(score(e));
            labels.push_back(1);
        }
        for (const auto& e : negatives) {
            scores.push_back(score(e));
            labels.push_back(0);
        }
    });

    out.has_pairs = true;
    out.n_pairs = static_cast<int>(scores.size());
    out.accuracy = accuracy_at(scores, labels, 0.5);
    out.ap = average_precision(scores, labels);
    return out;
}

/// One-vs-rest macro AUC over labeled nodes in the selected split scope,
/// each queried just after the last event.
inline std::optional<double> eval_node_classification(const ModelState& st, const TemporalGraph& g, const Split& split,
                                                      const std::string& split_mode) {
    if (st.cfg.decoder.n_classes < 2 || g.labels.empty()) return std::nullopt;
    const bool inductive = split_mode == "inductive";
    std::vector<int> nodes;
    for (int i = 0; i < g.n_nodes; ++i) {
        if (g.label_of(i) <= 0) continue;
        if (split.inductive_mask[static_cast<std::size_t>(i)] == inductive) nodes.push_back(i);
    }
    if (nodes.size() < 2) return std::nullopt;

    const double t_eval = std::nextafter(1.0, 2.0); // strictly after every normalized event
    const int C = st.cfg.decoder.n_classes;
    std::vector<double> probs;
    std::vector<int> labels;
    detail::with_mean_engine(st, g, [&](tg::TgnnEngine<vecd>& eng, ModelViews<vecd>& mv) {
        for (int node : nodes) {
            vecd z = eng.rep(node, t_eval);
            vecd lp = dec::mlr_log_probs(z, *mv.mlr, is_hyperbolic(st.cfg.geometry), mv.K, mv.sqrtK);
            for (double v : values_of(lp)) probs.push_back(std::exp(v));
            labels.push_back(g.label_of(node));
        }
    });
    try {
        return macro_auc_ovr(probs, labels, C);
    } catch (const error&) {
        return std::nullopt;
    }
}

// -- file-level commands -----------------------------------------------------------

namespace detail {

inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open " + path + " for writing");
    out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
}

} // namespace detail

inline TemporalGraph load_dataset(const RunConfig& rc) {
    LoadConfig lc;
    lc.remap_ids = rc.remap_ids;
    TemporalGraph g = load_edge_list(rc.data_path, lc);
    if (!rc.labels_path.empty()) load_labels(rc.labels_path, g);
    return g;
}

/// train: fit, then write train_metrics.csv and model.ckpt under out_dir.
/// Returns 0, or 3 on a non-finite loss (the last good checkpoint is kept).
inline int cmd_train(const RunConfig& rc, const TemporalGraph& g) {
    std::filesystem::create_directories(rc.out_dir);
    TrainResult res = run_training(rc, g);
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < res.history.size(); ++i) {
        const auto& h = res.history[i];
        std::ostringstream os;
        os << i << "," << detail::format_double(h.elbo) << "," << detail::format_double(h.recon + h.cls) << ","
           << detail::format_double(h.kl) << "," << detail::format_double(h.grad_norm);
        rows.push_back(os.str());
    }
    detail::write_csv(rc.out_dir + "/train_metrics.csv", "step,elbo,recon,kl,grad_norm", rows);
    save_checkpoint(rc.out_dir + "/model.ckpt", res.state);
    return res.exit_code;
}

inline std::vector<std::pair<std::string, std::string>> eval_rows(const ModelState& st, const TemporalGraph& g,
                                                                  const RunConfig& rc) {
    const Split split = chronological_split(g, rc.split_train, rc.split_val, rc.split_test);
    std::vector<std::pair<std::string, std::string>> rows;
    const auto lp = eval_link_prediction(st, g, split, rc.split_mode, rc.seed);
    if (!lp.has_pairs) {
        rows.emplace_back("no_inductive_nodes", "1");
        return rows;
    }
    rows.emplace_back("accuracy", detail::format_double(lp.accuracy));
    rows.emplace_back("ap", detail::format_double(lp.ap));
    rows.emplace_back("n_pairs", std::to_string(lp.n_pairs));
    if (const auto auc = eval_node_classification(st, g, split, rc.split_mode))
        rows.emplace_back("auc", detail::format_double(*auc));
    return rows;
}

/// eval: score a checkpoint on the selected split; writes eval_metrics.csv.
inline int cmd_eval(const RunConfig& rc, const TemporalGraph& g) {
    std::filesystem::create_directories(rc.out_dir);
    const ModelConfig mc = model_config(rc, g);
    ModelState st = load_checkpoint(rc.checkpoint_path, mc); // throws configuration_error on mismatch
    std::vector<std::string> rows;
    for (const auto& [k, v] : eval_rows(st, g, rc)) rows.push_back(k + "," + v);
    detail::write_csv(rc.out_dir + "/eval_metrics.csv", "metric,value", rows);
    return 0;
}

struct SweepRow {
    double logk = 0.0;
    double accuracy = 0.0, ap = 0.0;
    std::optional<double> auc;
};

/// Train + evaluate once per curvature on the grid; per-entry seeds are
/// seed + grid index.
inline std::vector<SweepRow> run_sweep(const RunConfig& rc, const TemporalGraph& g) {
    if (!is_hyperbolic(rc.geometry)) throw configuration_error("sweep-curvature requires a hyperbolic geometry");
    std::vector<SweepRow> out;
    for (std::size_t i = 0; i < rc.logk_grid.size(); ++i) {
        RunConfig entry = rc;
        entry.logk = rc.logk_grid[i];
        entry.seed = rc.seed + i;
        TrainResult res = run_training(entry, g);
        if (res.exit_code != 0) throw training_error("sweep-curvature: " + res.abort_reason);
        const Split split = chronological_split(g, rc.split_train, rc.split_val, rc.split_test);
        const auto lp = eval_link_prediction(res.state, g, split, entry.split_mode, entry.seed);
        SweepRow row;
        row.logk = entry.logk;
        row.accuracy = lp.accuracy;
        row.ap = lp.ap;
        row.auc = eval_node_classification(res.state, g, split, entry.split_mode);
        out.push_back(row);
    }
    return out;
}

inline int cmd_sweep(const RunConfig& rc, const TemporalGraph& g) {
    std::filesystem::create_directories(rc.out_dir);
    const auto rows = run_sweep(rc, g);
    const bool with_auc = !rows.empty() && rows.front().auc.has_value();
    std::vector<std::string> lines;
    for (const auto& r : rows) {
        std::ostringstream os;
        os << detail::format_double(r.logk) << "," << detail::format_double(r.accuracy) << ","
           << detail::format_double(r.ap);
        if (with_auc) os << "," << detail::format_double(r.auc.value_or(0.0));
        lines.push_back(os.str());
    }
    detail::write_csv(rc.out_dir + "/sweep.csv", with_auc ? "logK,accuracy,ap,auc" : "logK,accuracy,ap", lines);
    return 0;
}

inline int cmd_gen_synthetic(const RunConfig& rc) {
    std::filesystem::create_directories(rc.out_dir);
    SyntheticConfig sc;
    sc.communities = rc.gen_communities;
    sc.nodes = rc.gen_nodes;
    sc.events = rc.gen_events;
    sc.p_in = rc.gen_p_in;
    sc.p_out = rc.gen_p_out;
    sc.seed = rc.seed;
    sc.feature_signal = rc.gen_feature_signal;
    sc.feature_noise = rc.gen_feature_noise;
    const TemporalGraph g = generate_synthetic(sc);
    write_edge_list(rc.out_dir + "/edges.csv", g);
    write_labels(rc.out_dir + "/labels.csv", g);
    return 0;
}

} // namespace hvgnn
