#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hvgnn/errors.hpp"
#include "hvgnn/rng.hpp"

// Temporal edge-list handling: CSV ingestion, chronological splitting,
// time-aware neighbor lookup, and a seeded synthetic generator used by the
// end-to-end tests.
//
// Canonical CSV: header `src,dst,timestamp[,f0,f1,...]`, 0-based integer node
// ids, decimal timestamps, LF line endings. Feature columns, when present,
// carry the features of the row's source node. Labels file: `node,label`.

namespace hvgnn {

struct EdgeEvent {
    int src = 0;
    int dst = 0;
    double timestamp = 0.0; // normalized to [0,1] after finalize()
};

struct TemporalGraph {
    int n_nodes = 0;
    int feature_dim = 0;
    std::vector<double> features; // n_nodes x feature_dim, row-major
    std::vector<EdgeEvent> events; // sorted by timestamp, ties keep input order
    std::vector<double> raw_timestamps; // aligned with events
    std::vector<int> labels; // per node, 1..n_classes, 0 = unlabeled; empty if none
    int n_classes = 0;
    double t_raw_min = 0.0, t_raw_max = 0.0;

    std::vector<std::vector<int>> node_events; // per node, incident event ids in time order

    std::span<const double> feature(int node) const {
        return std::span<const double>(features).subspan(static_cast<std::size_t>(node) * feature_dim,
                                                         static_cast<std::size_t>(feature_dim));
    }

    int label_of(int node) const { return labels.empty() ? 0 : labels[static_cast<std::size_t>(node)]; }

    /// Stable-sorts events by raw timestamp, rescales times to [0,1], and
    /// builds the per-node incidence index (the graph is undirected for
    /// neighborhood purposes).
    void finalize() {
        raw_timestamps.resize(events.size());
        for (std::size_t i = 0; i < events.size(); ++i) raw_timestamps[i] = events[i].timestamp;
        std::vector<int> order(events.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return raw_timestamps[static_cast<std::size_t>(a)] < raw_timestamps[static_cast<std::size_t>(b)]; });
        std::vector<EdgeEvent> sorted;
        std::vector<double> sorted_raw;
        sorted.reserve(events.size());
        sorted_raw.reserve(events.size());
        for (int idx : order) {
            sorted.push_back(events[static_cast<std::size_t>(idx)]);
            sorted_raw.push_back(raw_timestamps[static_cast<std::size_t>(idx)]);
        }
        events = std::move(sorted);
        raw_timestamps = std::move(sorted_raw);

        if (!events.empty()) {
            t_raw_min = raw_timestamps.front();
            t_raw_max = raw_timestamps.back();
        }
        const double denom = t_raw_max > t_raw_min ? t_raw_max - t_raw_min : 1.0;
        for (std::size_t i = 0; i < events.size(); ++i)
            events[i].timestamp = (raw_timestamps[i] - t_raw_min) / denom;

        node_events.assign(static_cast<std::size_t>(n_nodes), {});
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& e = events[i];
            if (e.src < 0 || e.src >= n_nodes || e.dst < 0 || e.dst >= n_nodes)
                throw input_error("TemporalGraph: event endpoint out of range");
            node_events[static_cast<std::size_t>(e.src)].push_back(static_cast<int>(i));
            if (e.dst != e.src) node_events[static_cast<std::size_t>(e.dst)].push_back(static_cast<int>(i));
        }
    }
};

/// Events incident to a target node strictly before a query time.
struct TimeAwareNeighborhood {
    int target = 0;
    double query_time = 0.0;
    std::vector<std::pair<int, double>> neighbors; // (other endpoint, event time), chronological
};

/// The max_n most recent strictly-past events incident to the node.
inline TimeAwareNeighborhood time_aware_neighbors(const TemporalGraph& g, int node, double t, int max_n) {
    if (node < 0 || node >= g.n_nodes) throw input_error("time_aware_neighbors: unknown node id");
    if (!std::isfinite(t)) throw input_error("time_aware_neighbors: non-finite query time");
    TimeAwareNeighborhood out;
    out.target = node;
    out.query_time = t;
    const auto& idx = g.node_events[static_cast<std::size_t>(node)];
    // binary search: first incident event with timestamp >= t
    int lo = 0, hi = static_cast<int>(idx.size());
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (g.events[static_cast<std::size_t>(idx[static_cast<std::size_t>(mid)])].timestamp < t)
            lo = mid + 1;
        else
            hi = mid;
    }
    const int first = std::max(0, lo - (max_n > 0 ? max_n : 0));
    for (int i = first; i < lo; ++i) {
        const auto& e = g.events[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        out.neighbors.emplace_back(e.src == node ? e.dst : e.src, e.timestamp);
    }
    return out;
}

struct Split {
    int train_end = 0; // events [0, train_end)
    int val_end = 0;   // events [train_end, val_end)
    int n_events = 0;  // events [val_end, n_events) are the test range
    std::vector<bool> inductive_mask; // nodes whose first event is in the test range
};

inline Split chronological_split(const TemporalGraph& g, double f_train = 0.8, double f_val = 0.05,
                                 double f_test = 0.15) {
    if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
        throw configuration_error("chronological_split: fractions must sum to 1");
    const int m = static_cast<int>(g.events.size());
    if (m < 3) throw input_error("chronological_split: need at least 3 events");
    Split s;
    s.n_events = m;
    s.train_end = static_cast<int>(std::floor(f_train * m));
    s.val_end = static_cast<int>(std::floor((f_train + f_val) * m));
    s.inductive_mask.assign(static_cast<std::size_t>(g.n_nodes), true);
    for (int i = 0; i < s.val_end; ++i) {
        s.inductive_mask[static_cast<std::size_t>(g.events[static_cast<std::size_t>(i)].src)] = false;
        s.inductive_mask[static_cast<std::size_t>(g.events[static_cast<std::size_t>(i)].dst)] = false;
    }
    return s;
}

// -- CSV ---------------------------------------------------------------------

struct LoadConfig {
    bool remap_ids = false;   // tolerate arbitrary id tokens, densify by first appearance
    int degree_buckets = 8;   // fallback feature dimension when no feature columns exist
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw parse_error(where + ": trailing characters in number '" + s + "'");
        return v;
    } catch (const parse_error&) {
        throw;
    } catch (...) {
        throw parse_error(where + ": expected a number, got '" + s + "'");
    }
}

inline long parse_int(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw parse_error(where + ": trailing characters in integer '" + s + "'");
        return v;
    } catch (const parse_error&) {
        throw;
    } catch (...) {
        throw parse_error(where + ": expected an integer, got '" + s + "'");
    }
}

} // namespace detail

inline TemporalGraph load_edge_list(const std::string& path, const LoadConfig& cfg = {}) {
    std::ifstream in(path);
    if (!in) throw input_error("load_edge_list: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "src" || header[1] != "dst" || header[2] != "timestamp")
        throw parse_error(path + ":1: header must start with src,dst,timestamp");
    const int n_feat = static_cast<int>(header.size()) - 3;

    TemporalGraph g;
    std::map<std::string, int> id_map;
    std::vector<std::pair<int, std::vector<double>>> row_features; // (src, features)
    int max_id = -1;
    long line_no = 1;
    auto node_id = [&](const std::string& tok, const std::string& where) -> int {
        if (cfg.remap_ids) {
            auto it = id_map.find(tok);
            if (it != id_map.end()) return it->second;
            const int id = static_cast<int>(id_map.size());
            id_map.emplace(tok, id);
            return id;
        }
        const long v = detail::parse_int(tok, where);
        if (v < 0) throw parse_error(where + ": node ids must be non-negative");
        return static_cast<int>(v);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        auto cols = detail::split_csv_line(line);
        if (static_cast<int>(cols.size()) != 3 + n_feat)
            throw parse_error(where + ": expected " + std::to_string(3 + n_feat) + " columns, got " +
                              std::to_string(cols.size()));
        EdgeEvent e;
        e.src = node_id(cols[0], where);
        e.dst = node_id(cols[1], where);
        e.timestamp = detail::parse_double(cols[2], where);
        if (!std::isfinite(e.timestamp)) throw parse_error(where + ": timestamp must be finite");
        max_id = std::max({max_id, e.src, e.dst});
        g.events.push_back(e);
        if (n_feat > 0) {
            std::vector<double> f(static_cast<std::size_t>(n_feat));
            for (int j = 0; j < n_feat; ++j) f[static_cast<std::size_t>(j)] = detail::parse_double(cols[static_cast<std::size_t>(3 + j)], where);
            row_features.emplace_back(e.src, std::move(f));
        }
    }
    g.n_nodes = max_id + 1;
    if (g.n_nodes <= 0) throw parse_error(path + ": no events");

    if (n_feat > 0) {
        g.feature_dim = n_feat;
        g.features.assign(static_cast<std::size_t>(g.n_nodes) * n_feat, 0.0);
        for (const auto& [src, f] : row_features)
            std::copy(f.begin(), f.end(), g.features.begin() + static_cast<std::size_t>(src) * n_feat);
    } else {
        // one-hot log2 degree bucket
        const int f = cfg.degree_buckets;
        g.feature_dim = f;
        g.features.assign(static_cast<std::size_t>(g.n_nodes) * f, 0.0);
        std::vector<int> degree(static_cast<std::size_t>(g.n_nodes), 0);
        for (const auto& e : g.events) {
            degree[static_cast<std::size_t>(e.src)]++;
            if (e.dst != e.src) degree[static_cast<std::size_t>(e.dst)]++;
        }
        for (int i = 0; i < g.n_nodes; ++i) {
            const int bucket = std::min(f - 1, static_cast<int>(std::floor(std::log2(1.0 + degree[static_cast<std::size_t>(i)]))));
            g.features[static_cast<std::size_t>(i) * f + bucket] = 1.0;
        }
    }
    g.finalize();
    return g;
}

/// Applies a `node,label` CSV to the graph; label values are densified to
/// 1..C in sorted order.
inline void load_labels(const std::string& path, TemporalGraph& g) {
    std::ifstream in(path);
    if (!in) throw input_error("load_labels: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("node,label", 0) != 0) throw parse_error(path + ":1: header must be node,label");
    std::vector<std::pair<int, long>> raw;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        auto cols = detail::split_csv_line(line);
        if (cols.size() != 2) throw parse_error(where + ": expected 2 columns, got " + std::to_string(cols.size()));
        const long node = detail::parse_int(cols[0], where);
        if (node < 0 || node >= g.n_nodes) throw parse_error(where + ": node id out of range");
        raw.emplace_back(static_cast<int>(node), detail::parse_int(cols[1], where));
    }
    std::map<long, int> classes;
    for (const auto& [node, lab] : raw) classes.emplace(lab, 0);
    int next = 1;
    for (auto& [lab, id] : classes) id = next++;
    g.labels.assign(static_cast<std::size_t>(g.n_nodes), 0);
    for (const auto& [node, lab] : raw) g.labels[static_cast<std::size_t>(node)] = classes[lab];
    g.n_classes = static_cast<int>(classes.size());
}

namespace detail {
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
} // namespace detail

/// Writes the canonical CSV (raw timestamps, src-node feature columns).
inline void write_edge_list(const std::string& path, const TemporalGraph& g) {
    std::ofstream out(path);
    if (!out) throw input_error("write_edge_list: cannot open " + path + " for writing");
    out << "src,dst,timestamp";
    for (int j = 0; j < g.feature_dim; ++j) out << ",f" << j;
    out << "\n";
    for (std::size_t i = 0; i < g.events.size(); ++i) {
        const auto& e = g.events[i];
        out << e.src << "," << e.dst << "," << detail::format_double(g.raw_timestamps[i]);
        const auto f = g.feature(e.src);
        for (double x : f) out << "," << detail::format_double(x);
        out << "\n";
    }
}

inline void write_labels(const std::string& path, const TemporalGraph& g) {
    std::ofstream out(path);
    if (!out) throw input_error("write_labels: cannot open " + path + " for writing");
    out << "node,label\n";
    for (int i = 0; i < g.n_nodes; ++i)
        if (g.label_of(i) > 0) out << i << "," << g.label_of(i) << "\n";
}

// -- synthetic generator ------------------------------------------------------

struct SyntheticConfig {
    int communities = 4;
    int nodes = 100;
    int events = 5000;
    double p_in = 0.9;
    double p_out = 0.1;
    std::uint64_t seed = 0;
    double feature_noise = 0.3;
    bool feature_signal = true; // false: pure-noise features (null-model harness)
};

/// Temporal stochastic block model. Each event draws a uniform source and a
/// destination community with odds p_in : p_out per community; timestamps are
/// sorted uniforms on [0,1]; labels are community ids. Features are noisy
/// one-hot community indicators (or pure noise when feature_signal is off).
inline TemporalGraph generate_synthetic(const SyntheticConfig& cfg) {
    if (!(cfg.p_in > cfg.p_out)) throw configuration_error("generate_synthetic: require p_in > p_out");
    if (cfg.communities < 1 || cfg.nodes < 2 || cfg.events < 1 || cfg.nodes < cfg.communities)
        throw configuration_error("generate_synthetic: bad sizes");
    const int k = cfg.communities, n = cfg.nodes, m = cfg.events;

    TemporalGraph g;
    g.n_nodes = n;
    auto community = [&](int node) { return node % k; };
    std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) members[static_cast<std::size_t>(community(i))].push_back(i);

    Rng rng(cfg.seed);
    Rng rng_ts = rng.fork(1);
    Rng rng_edges = rng.fork(2);
    Rng rng_feat = rng.fork(3);

    std::vector<double> ts(static_cast<std::size_t>(m));
    for (auto& t : ts) t = rng_ts.uniform();
    std::sort(ts.begin(), ts.end());

    const double total_odds = cfg.p_in + cfg.p_out * (k - 1);
    for (int e = 0; e < m; ++e) {
        const int src = static_cast<int>(rng_edges.uniform_int(static_cast<std::uint64_t>(n)));
        const int c_src = community(src);
        int c_dst = c_src;
        const double u = rng_edges.uniform() * total_odds;
        if (u >= cfg.p_in && k > 1) {
            int other = static_cast<int>((u - cfg.p_in) / cfg.p_out);
            if (other >= k - 1) other = k - 2;
            c_dst = other >= c_src ? other + 1 : other;
        }
        const auto& pool = members[static_cast<std::size_t>(c_dst)];
        int dst = src;
        for (int tries = 0; tries < 100 && dst == src; ++tries)
            dst = pool[rng_edges.uniform_int(pool.size())];
        if (dst == src) dst = (src + 1) % n;
        g.events.push_back(EdgeEvent{src, dst, ts[static_cast<std::size_t>(e)]});
    }

    const int f = std::max(8, cfg.feature_signal ? k : 8);
    g.feature_dim = f;
    g.features.assign(static_cast<std::size_t>(n) * f, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < f; ++j)
            g.features[static_cast<std::size_t>(i) * f + j] = cfg.feature_noise * rng_feat.gaussian();
        if (cfg.feature_signal) g.features[static_cast<std::size_t>(i) * f + community(i)] += 1.0;
    }

    g.labels.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) g.labels[static_cast<std::size_t>(i)] = community(i) + 1;
    g.n_classes = k;

    g.finalize();
    return g;
}

} // namespace hvgnn
