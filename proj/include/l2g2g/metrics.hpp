#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "l2g2g/errors.hpp"
#include "l2g2g/gcn.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/rng.hpp"

namespace l2g2g {

// AUC = P(score_pos > score_neg), ties get half credit; rank statistic.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ContractViolation("auc: size mismatch");
    std::int64_t n_pos = std::count(labels.begin(), labels.end(), 1);
    std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw MetricError("auc needs both classes");

    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scores[a] < scores[b]; });
    // sum of positive ranks with midranks for ties
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] == 1) rank_sum += midrank;
        i = j + 1;
    }
    return (rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// AP = mean over positives of precision at that positive's rank, scores
// sorted descending with a stable sort.
inline double ap(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ContractViolation("ap: size mismatch");
    std::int64_t n_pos = std::count(labels.begin(), labels.end(), 1);
    if (n_pos == 0 || n_pos == static_cast<std::int64_t>(labels.size()))
        throw MetricError("ap needs both classes");
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    double sum = 0.0;
    std::int64_t hits = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (labels[order[r]] == 1) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(n_pos);
}

struct EdgeSplit {
    Graph train;
    std::vector<std::pair<int, int>> test_pos, val_pos;
    std::vector<std::pair<int, int>> test_neg, val_neg;
};

// Uniform held-out edge split: 10% test / 5% validation positives by default,
// with equal counts of verified non-edges sampled uniformly.
inline EdgeSplit split_edges(const Graph& g, double test_frac, double val_frac,
                             std::uint64_t seed) {
    const std::int64_t m = g.num_edges();
    const auto n_test = static_cast<std::int64_t>(std::floor(test_frac * static_cast<double>(m)));
    const auto n_val = static_cast<std::int64_t>(std::floor(val_frac * static_cast<double>(m)));
    if (n_test < 1 || (val_frac > 0 && n_val < 1))
        throw ParameterError("split_edges: graph too small for requested fractions");

    Rng rng = derive_rng(seed, "split");
    std::vector<std::pair<int, int>> edges = g.edges();
    for (std::size_t i = edges.size(); i > 1; --i)
        std::swap(edges[i - 1], edges[rng.next_below(i)]);

    EdgeSplit split;
    split.test_pos.assign(edges.begin(), edges.begin() + n_test);
    split.val_pos.assign(edges.begin() + n_test, edges.begin() + n_test + n_val);
    std::vector<std::pair<int, int>> train_edges(edges.begin() + n_test + n_val, edges.end());
    split.train = Graph(g.num_nodes(), std::move(train_edges), g.features());

    // negatives: uniform non-edges of the original graph, deduplicated
    const std::int64_t need = n_test + n_val;
    const std::int64_t max_tries = 200 * need + 1000;
    std::set<std::pair<int, int>> seen;
    std::vector<std::pair<int, int>> negs;
    std::int64_t tries = 0;
    const int n = g.num_nodes();
    while (static_cast<std::int64_t>(negs.size()) < need) {
        if (++tries > max_tries)
            throw ParameterError("split_edges: negative sampling exhausted (graph too dense)");
        int u = static_cast<int>(rng.next_below(n));
        int v = static_cast<int>(rng.next_below(n));
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (g.has_edge(u, v) || seen.count({u, v})) continue;
        seen.insert({u, v});
        negs.emplace_back(u, v);
    }
    split.test_neg.assign(negs.begin(), negs.begin() + n_test);
    split.val_neg.assign(negs.begin() + n_test, negs.end());
    return split;
}

// Score held-out positives and negatives with the inner-product decoder on a
// global embedding; returns (scores, labels) ready for auc/ap.
inline std::pair<std::vector<double>, std::vector<int>> score_pairs(
    const Matrix& z, const std::vector<std::pair<int, int>>& positives,
    const std::vector<std::pair<int, int>>& negatives) {
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(positives.size() + negatives.size());
    labels.reserve(scores.capacity());
    for (auto [u, v] : positives) {
        scores.push_back(stable_sigmoid(z.row(u).dot(z.row(v))));
        labels.push_back(1);
    }
    for (auto [u, v] : negatives) {
        scores.push_back(stable_sigmoid(z.row(u).dot(z.row(v))));
        labels.push_back(0);
    }
    return {std::move(scores), std::move(labels)};
}

}  // namespace l2g2g
