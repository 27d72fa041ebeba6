#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <set>

#include "l2g2g/metrics.hpp"
#include "l2g2g/sbm.hpp"

using namespace l2g2g;

namespace {

// O(n^2) pairwise definition: P(score_pos > score_neg) with half credit for ties
double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double num = 0;
    std::int64_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            ++pairs;
            if (s[i] > s[j]) num += 1.0;
            else if (s[i] == s[j]) num += 0.5;
        }
    return num / static_cast<double>(pairs);
}

// rank-precision definition with a stable descending sort
double brute_ap(const std::vector<double>& s, const std::vector<int>& y) {
    std::vector<int> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s[a] > s[b]; });
    double sum = 0;
    int hits = 0, total = 0;
    for (std::size_t r = 0; r < order.size(); ++r)
        if (y[order[r]] == 1) {
            ++hits;
            ++total;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    return sum / total;
}

}  // namespace

TEST_CASE("perfect separation scores 1.0 on both metrics") {
    std::vector<double> s{0.9, 0.1};
    std::vector<int> y{1, 0};
    REQUIRE(auc(s, y) == 1.0);
    REQUIRE(ap(s, y) == 1.0);
}

TEST_CASE("all-tied scores give auc one half") {
    std::vector<double> s{0.3, 0.3, 0.3, 0.3};
    std::vector<int> y{1, 0, 1, 0};
    REQUIRE(auc(s, y) == 0.5);
}

TEST_CASE("worked three-element case") {
    std::vector<double> s{0.8, 0.6, 0.4};
    std::vector<int> y{1, 0, 1};
    REQUIRE(auc(s, y) == 0.5);
    REQUIRE(ap(s, y) == Catch::Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("metrics reject single-class input") {
    std::vector<double> s{0.1, 0.2};
    REQUIRE_THROWS_AS(auc(s, std::vector<int>{1, 1}), MetricError);
    REQUIRE_THROWS_AS(ap(s, std::vector<int>{0, 0}), MetricError);
}

TEST_CASE("metrics match the brute-force oracles, ties included") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(199));
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool has0 = false, has1 = false;
        for (int i = 0; i < n; ++i) {
            // quantized scores so ties actually happen
            s[i] = static_cast<double>(rng.next_below(16)) / 16.0;
            y[i] = static_cast<int>(rng.next_below(2));
            (y[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        REQUIRE(auc(s, y) == brute_auc(s, y));
        REQUIRE(ap(s, y) == brute_ap(s, y));
    }
}

TEST_CASE("edge split respects the fraction arithmetic") {
    Graph g = generate_sbm(SbmConfig{4, 20, 0.35, 0.01, 2});
    // trim to exactly 100 edges for the worked fraction case
    std::vector<std::pair<int, int>> edges(g.edges().begin(), g.edges().begin() + 100);
    Graph h(g.num_nodes(), edges, g.features());
    EdgeSplit split = split_edges(h, 0.10, 0.05, 3);
    REQUIRE(split.test_pos.size() == 10);
    REQUIRE(split.val_pos.size() == 5);
    REQUIRE(split.test_neg.size() == 10);
    REQUIRE(split.val_neg.size() == 5);
    REQUIRE(split.train.num_edges() == 85);
}

TEST_CASE("edge split pieces are disjoint, negatives are non-edges") {
    Graph g = generate_sbm(SbmConfig{5, 20, 0.3, 0.02, 4});
    EdgeSplit split = split_edges(g, 0.10, 0.05, 7);
    std::set<std::pair<int, int>> test(split.test_pos.begin(), split.test_pos.end());
    for (const auto& e : split.val_pos) REQUIRE(!test.count(e));
    for (const auto& e : split.train.edges()) REQUIRE(!test.count(e));
    std::set<std::pair<int, int>> negs;
    for (const auto& e : split.test_neg) {
        REQUIRE(!g.has_edge(e.first, e.second));
        REQUIRE(negs.insert(e).second);
    }
    for (const auto& e : split.val_neg) {
        REQUIRE(!g.has_edge(e.first, e.second));
        REQUIRE(negs.insert(e).second);
    }
    // determinism
    EdgeSplit again = split_edges(g, 0.10, 0.05, 7);
    REQUIRE(again.test_pos == split.test_pos);
    REQUIRE(again.test_neg == split.test_neg);
}

TEST_CASE("split fails cleanly on graphs with no spare non-edges") {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < 8; ++u)
        for (int v = u + 1; v < 8; ++v) edges.emplace_back(u, v);
    Graph complete(8, edges, Matrix::Zero(8, 1));
    REQUIRE_THROWS_AS(split_edges(complete, 0.5, 0.25, 1), ParameterError);
    Graph tiny(4, {{0, 1}}, Matrix::Zero(4, 1));
    REQUIRE_THROWS_AS(split_edges(tiny, 0.10, 0.05, 1), ParameterError);
}

TEST_CASE("score_pairs feeds the decoder on the right rows") {
    Matrix z(3, 2);
    z << 1, 0, 1, 0, -1, 0;
    auto [scores, labels] = score_pairs(z, {{0, 1}}, {{0, 2}});
    REQUIRE(scores[0] == stable_sigmoid(1.0));
    REQUIRE(scores[1] == stable_sigmoid(-1.0));
    REQUIRE(labels == std::vector<int>{1, 0});
}
