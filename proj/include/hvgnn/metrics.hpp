#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "hvgnn/errors.hpp"

namespace hvgnn {

/// Average precision of a binary ranking (ties broken by input order,
/// deterministically).
inline double average_precision(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size() || scores.empty()) throw dimension_error("average_precision: bad inputs");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double hits = 0.0, ap = 0.0;
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l > 0 ? 1u : 0u;
    if (n_pos == 0) return 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] > 0) {
            hits += 1.0;
            ap += hits / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(n_pos);
}

inline double accuracy_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
    if (scores.size() != labels.size() || scores.empty()) throw dimension_error("accuracy_at: bad inputs");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int pred = scores[i] >= threshold ? 1 : 0;
        correct += pred == (labels[i] > 0 ? 1 : 0) ? 1u : 0u;
    }
    return static_cast<double>(correct) / static_cast<double>(scores.size());
}

/// ROC AUC by the rank statistic, with midrank tie handling.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size() || scores.empty()) throw dimension_error("roc_auc: bad inputs");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t t = 0; t < scores.size(); ++t)
        if (labels[t] > 0) {
            rank_sum_pos += rank[t];
            ++n_pos;
        }
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;
    return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// One-vs-rest macro AUC over classes present in the label set.
/// probs is row-major n x C; labels are 1-based class ids (0 = unlabeled).
inline double macro_auc_ovr(std::span<const double> probs, std::span<const int> labels, int n_classes) {
    if (n_classes < 2) throw configuration_error("macro_auc_ovr: need at least 2 classes");
    const std::size_t n = labels.size();
    if (probs.size() != n * static_cast<std::size_t>(n_classes)) throw dimension_error("macro_auc_ovr: shape mismatch");
    double total = 0.0;
    int used = 0;
    for (int c = 1; c <= n_classes; ++c) {
        std::vector<double> sc;
        std::vector<int> lb;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] <= 0) continue;
            sc.push_back(probs[i * static_cast<std::size_t>(n_classes) + static_cast<std::size_t>(c - 1)]);
            lb.push_back(labels[i] == c ? 1 : 0);
        }
        bool has_pos = false, has_neg = false;
        for (int l : lb) (l > 0 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) continue;
        total += roc_auc(sc, lb);
        ++used;
    }
    if (used == 0) throw input_error("macro_auc_ovr: no class with both positives and negatives");
    return total / used;
}

} // namespace hvgnn
