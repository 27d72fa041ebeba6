#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "l2g2g/partition.hpp"
#include "l2g2g/sbm.hpp"

using namespace l2g2g;

namespace {

Graph two_cliques() {
    std::vector<std::pair<int, int>> edges;
    for (int base : {0, 5})
        for (int u = 0; u < 5; ++u)
            for (int v = u + 1; v < 5; ++v) edges.emplace_back(base + u, base + v);
    return Graph(10, edges, Matrix::Zero(10, 1));
}

void check_invariants(const Graph& g, const PatchSet& ps, const PatchGraph& pg, int d) {
    // edge cover
    for (auto [u, v] : g.edges()) {
        bool covered = false;
        for (int j : ps.membership[u]) {
            const auto& nodes = ps.patches[j].nodes;
            if (std::binary_search(nodes.begin(), nodes.end(), v)) covered = true;
        }
        REQUIRE(covered);
    }
    // node cover
    for (int v = 0; v < g.num_nodes(); ++v) REQUIRE(!ps.membership[v].empty());
    // overlap floor and exact overlap lists
    for (const auto& e : pg.edges) {
        REQUIRE(static_cast<int>(e.overlap.size()) >= d);
        const auto& a = ps.patches[e.i].nodes;
        const auto& b = ps.patches[e.j].nodes;
        std::vector<int> want;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(want));
        REQUIRE(e.overlap == want);
    }
    REQUIRE(pg.connected());
}

}  // namespace

TEST_CASE("cluster_nodes with k=1 puts everything in one cluster") {
    Graph g = two_cliques();
    auto a = cluster_nodes(g, 1, 0);
    REQUIRE(std::all_of(a.begin(), a.end(), [](int c) { return c == 0; }));
}

TEST_CASE("cluster_nodes rejects k out of range") {
    Graph g = two_cliques();
    REQUIRE_THROWS_AS(cluster_nodes(g, 11, 0), ParameterError);
    REQUIRE_THROWS_AS(cluster_nodes(g, 0, 0), ParameterError);
}

TEST_CASE("two disjoint cliques split into one cluster each") {
    Graph g = two_cliques();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto a = cluster_nodes(g, 2, seed);
        for (int v = 1; v < 5; ++v) REQUIRE(a[v] == a[0]);
        for (int v = 6; v < 10; ++v) REQUIRE(a[v] == a[5]);
        REQUIRE(a[0] != a[5]);
    }
}

TEST_CASE("cluster_nodes is deterministic and balanced on an SBM") {
    Graph g = generate_sbm(SbmConfig{10, 50, 0.2, 2e-3, 3});
    auto a = cluster_nodes(g, 10, 11);
    REQUIRE(a == cluster_nodes(g, 10, 11));
    std::vector<int> sizes(10, 0);
    for (int c : a) ++sizes[c];
    const int cap = static_cast<int>(std::ceil(1.2 * g.num_nodes() / 10.0));
    for (int s : sizes) {
        REQUIRE(s > 0);
        REQUIRE(s <= cap);
    }
}

TEST_CASE("label propagation beats random balanced partitions on cut size") {
    Graph g = generate_sbm(SbmConfig{8, 40, 0.3, 4e-3, 5});
    auto cut_edges = [&](const std::vector<int>& a) {
        std::int64_t cut = 0;
        for (auto [u, v] : g.edges())
            if (a[u] != a[v]) ++cut;
        return cut;
    };
    const std::int64_t ours = cut_edges(cluster_nodes(g, 8, 1));
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> rnd(g.num_nodes());
        for (int v = 0; v < g.num_nodes(); ++v) rnd[v] = v % 8;
        for (std::size_t i = rnd.size(); i > 1; --i)
            std::swap(rnd[i - 1], rnd[rng.next_below(i)]);
        REQUIRE(ours < cut_edges(rnd));
    }
}

TEST_CASE("build_patches with k=1 reproduces the whole graph") {
    Graph g = two_cliques();
    auto [ps, pg] = build_patches(g, std::vector<int>(10, 0), 2);
    REQUIRE(ps.k() == 1);
    REQUIRE(pg.edges.empty());
    REQUIRE(ps.patches[0].size() == 10);
    REQUIRE(static_cast<std::int64_t>(ps.patches[0].edges.size()) == g.num_edges());
}

TEST_CASE("one-hop expansion covers a bridge edge") {
    // two triangles joined by the edge (2,3)
    Graph g(6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 3}}, Matrix::Zero(6, 1));
    auto [ps, pg] = build_patches(g, {0, 0, 0, 1, 1, 1}, 1);
    REQUIRE(ps.patches[0].nodes == std::vector<int>{0, 1, 2, 3});
    REQUIRE(ps.patches[1].nodes == std::vector<int>{2, 3, 4, 5});
    REQUIRE(pg.edges.size() == 1);
    REQUIRE(pg.edges[0].overlap == std::vector<int>{2, 3});
    check_invariants(g, ps, pg, 1);
}

TEST_CASE("patch invariants hold on an SBM partition") {
    Graph g = generate_sbm(SbmConfig{10, 60, 0.25, 3e-3, 7});
    auto a = cluster_nodes(g, 6, 13);
    auto [ps, pg] = build_patches(g, a, 8);
    check_invariants(g, ps, pg, 8);
    REQUIRE(pg.max_overlap >= 8);
    // determinism
    auto [ps2, pg2] = build_patches(g, a, 8);
    for (int j = 0; j < ps.k(); ++j) REQUIRE(ps.patches[j].nodes == ps2.patches[j].nodes);
}

TEST_CASE("connectivity repair bridges sparse overlaps") {
    // two cliques joined by one edge but d larger than the natural overlap
    Graph g = two_cliques();
    Graph bridged(10, [&] {
        auto e = g.edges();
        e.emplace_back(4, 5);
        return e;
    }(), Matrix::Zero(10, 1));
    auto [ps, pg] = build_patches(bridged, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 4);
    check_invariants(bridged, ps, pg, 4);
}

TEST_CASE("patches smaller than min_overlap are grown by the repair pass") {
    Graph g = two_cliques();
    auto [ps, pg] = build_patches(g, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 7);
    check_invariants(g, ps, pg, 7);
    for (const auto& p : ps.patches) REQUIRE(p.size() >= 7);
}

TEST_CASE("min_overlap larger than the graph errors out") {
    Graph g = two_cliques();
    REQUIRE_THROWS_AS(build_patches(g, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 11), ParameterError);
}

TEST_CASE("isolated nodes are swept into a cluster instead of seeding one") {
    Graph g(11, two_cliques().edges(), Matrix::Zero(11, 1));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto a = cluster_nodes(g, 2, seed);
        std::vector<int> sizes(2, 0);
        for (int c : a) ++sizes[c];
        REQUIRE(std::min(sizes[0], sizes[1]) >= 5);
        auto [ps, pg] = build_patches(g, a, 2);
        check_invariants(g, ps, pg, 2);
    }
}

TEST_CASE("patch files round trip") {
    Graph g = generate_sbm(SbmConfig{6, 30, 0.3, 5e-3, 9});
    auto [ps, pg] = build_patches(g, cluster_nodes(g, 4, 2), 6);
    save_patches("/tmp/l2g2g_test_patches.txt", ps, 6);
    auto [ps2, pg2] = load_patches("/tmp/l2g2g_test_patches.txt", g);
    REQUIRE(ps2.k() == ps.k());
    for (int j = 0; j < ps.k(); ++j) {
        REQUIRE(ps2.patches[j].nodes == ps.patches[j].nodes);
        REQUIRE(ps2.patches[j].edges == ps.patches[j].edges);
    }
    REQUIRE_THROWS_AS(load_patches("/tmp/does_not_exist_patches.txt", g), FormatError);
}
