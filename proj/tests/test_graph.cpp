#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "l2g2g/graph.hpp"
#include "l2g2g/rng.hpp"

using namespace l2g2g;

namespace {

Graph path3() {
    return Graph(3, {{0, 1}, {1, 2}}, Matrix::Zero(3, 1));
}

std::string tmpfile_with(const std::string& name, const std::string& text) {
    std::string path = std::string("/tmp/l2g2g_test_") + name;
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("graph dedups and orients edges") {
    Graph g(3, {{1, 0}, {0, 1}, {2, 1}}, Matrix::Zero(3, 2));
    REQUIRE(g.num_edges() == 2);
    REQUIRE(g.has_edge(0, 1));
    REQUIRE(g.has_edge(1, 0));
    REQUIRE(!g.has_edge(0, 2));
    REQUIRE(g.degree(1) == 2);
}

TEST_CASE("graph rejects bad edges") {
    REQUIRE_THROWS_AS(Graph(2, {{0, 0}}, Matrix::Zero(2, 1)), ContractViolation);
    REQUIRE_THROWS_AS(Graph(2, {{0, 5}}, Matrix::Zero(2, 1)), ContractViolation);
    REQUIRE_THROWS_AS(Graph(2, {}, Matrix::Zero(3, 1)), ContractViolation);
}

TEST_CASE("normalize_adjacency of edgeless graph is the identity") {
    Graph g(3, {}, Matrix::Zero(3, 1));
    Matrix ahat = Matrix(normalize_adjacency(g));
    REQUIRE((ahat - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalize_adjacency of a single edge") {
    Graph g(2, {{0, 1}}, Matrix::Zero(2, 1));
    Matrix ahat = Matrix(normalize_adjacency(g));
    Matrix want(2, 2);
    want << 0.5, 0.5, 0.5, 0.5;
    REQUIRE((ahat - want).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("normalize_adjacency path entry matches hand computation") {
    Matrix ahat = Matrix(normalize_adjacency(path3()));
    // degrees after self-loops: 2, 3, 2
    REQUIRE(ahat(0, 1) == Catch::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
    REQUIRE(ahat(1, 1) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("normalize_adjacency is symmetric") {
    Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {0, 3}}, Matrix::Zero(6, 1));
    Matrix ahat = Matrix(normalize_adjacency(g));
    REQUIRE((ahat - ahat.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("load_graph dedups reversed lines and drops self-loops") {
    auto fpath = tmpfile_with("feat.txt", "3 1\n0\n0\n0\n");
    auto epath = tmpfile_with("edges.txt", "0 1\n1 0\n2 2\n");
    LoadStats stats;
    Graph g = load_graph(epath, fpath, &stats);
    REQUIRE(g.num_edges() == 1);
    REQUIRE(stats.dropped_self_loops == 1);
}

TEST_CASE("load_graph rejects bad input") {
    auto fpath = tmpfile_with("feat2.txt", "2 1\n0\n0\n");
    auto big = tmpfile_with("edges_big.txt", "0 7\n");
    REQUIRE_THROWS_AS(load_graph(big, fpath), FormatError);
    auto junk = tmpfile_with("edges_junk.txt", "0 x\n");
    REQUIRE_THROWS_AS(load_graph(junk, fpath), FormatError);
    auto badfeat = tmpfile_with("feat_bad.txt", "2 1\n0\nnope\n");
    auto ok = tmpfile_with("edges_ok.txt", "0 1\n");
    REQUIRE_THROWS_AS(load_graph(ok, badfeat), FormatError);
}

TEST_CASE("graph save then load round trips") {
    Rng rng(5);
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < 12; ++u)
        for (int v = u + 1; v < 12; ++v)
            if (rng.next_double() < 0.3) edges.emplace_back(u, v);
    Matrix x(12, 3);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = rng.next_in(-1, 1);
    Graph g(12, edges, x);
    save_graph(g, "/tmp/l2g2g_test_rt.edges", "/tmp/l2g2g_test_rt.features");
    Graph h = load_graph("/tmp/l2g2g_test_rt.edges", "/tmp/l2g2g_test_rt.features");
    REQUIRE(h.num_nodes() == g.num_nodes());
    REQUIRE(h.edges() == g.edges());
    REQUIRE((h.features() - g.features()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix save then load round trips") {
    Matrix m(2, 3);
    m << 1.5, -2.25, 0.0, 1e-17, 3.0, -7.5;
    save_matrix("/tmp/l2g2g_test_mat.txt", m);
    Matrix r = load_matrix("/tmp/l2g2g_test_mat.txt");
    REQUIRE((r - m).cwiseAbs().maxCoeff() == 0.0);
}
