#include <catch_amalgamated.hpp>

#include <cmath>

#include "l2g2g/sbm.hpp"

using namespace l2g2g;

TEST_CASE("sbm with zero probabilities is edgeless") {
    SbmConfig cfg{4, 5, 0.0, 0.0, 1};
    Graph g = generate_sbm(cfg);
    REQUIRE(g.num_nodes() == 20);
    REQUIRE(g.num_edges() == 0);
}

TEST_CASE("sbm with p_in=1, p_out=0 gives complete blocks") {
    SbmConfig cfg{2, 3, 1.0, 0.0, 1};
    Graph g = generate_sbm(cfg);
    REQUIRE(g.num_edges() == 6);  // two triangles
    for (auto [u, v] : g.edges()) REQUIRE(u / 3 == v / 3);
}

TEST_CASE("sbm features are block one-hot") {
    SbmConfig cfg{3, 4, 0.5, 0.1, 2};
    Graph g = generate_sbm(cfg);
    REQUIRE(g.num_features() == 3);
    for (int v = 0; v < g.num_nodes(); ++v) {
        REQUIRE(g.features().row(v).sum() == 1.0);
        REQUIRE(g.features()(v, v / 4) == 1.0);
    }
}

TEST_CASE("sbm is deterministic for a fixed seed") {
    SbmConfig cfg{5, 20, 0.3, 0.02, 7};
    Graph a = generate_sbm(cfg);
    Graph b = generate_sbm(cfg);
    REQUIRE(a.edges() == b.edges());
    cfg.seed = 8;
    REQUIRE(generate_sbm(cfg).edges() != a.edges());
}

TEST_CASE("sbm rejects invalid configs") {
    REQUIRE_THROWS_AS(generate_sbm(SbmConfig{0, 5, 0.1, 0.0, 0}), ParameterError);
    REQUIRE_THROWS_AS(generate_sbm(SbmConfig{2, 3, 0.1, 0.5, 0}), ParameterError);  // p_out > p_in
    REQUIRE_THROWS_AS(generate_sbm(SbmConfig{2, 3, 1.5, 0.1, 0}), ParameterError);
}

TEST_CASE("sbm rejects oversized node counts") {
    SbmConfig cfg{4000, 1000, 0.0, 0.0, 0};
    REQUIRE_THROWS_AS(generate_sbm(cfg), ParameterError);
}

TEST_CASE("expected edge count formula matches the large configuration") {
    SbmConfig cfg{100, 1000, 0.02, 1e-4, 0};
    REQUIRE(sbm_expected_edges(cfg) == Catch::Approx(1494000.0).epsilon(1e-12));
}

TEST_CASE("edge counts concentrate around the expectation") {
    // 12 seeds, mixture of regimes; every draw within 3 standard deviations
    for (SbmConfig base : {SbmConfig{10, 60, 0.2, 1e-3, 0}, SbmConfig{20, 30, 0.05, 0.01, 0}}) {
        const double mu = sbm_expected_edges(base);
        const double sigma = sbm_edge_count_stddev(base);
        int within = 0;
        for (std::uint64_t s = 0; s < 12; ++s) {
            base.seed = s;
            const double m = static_cast<double>(generate_sbm(base).num_edges());
            if (std::abs(m - mu) <= 3.0 * sigma) ++within;
        }
        REQUIRE(within >= 11);  // allow one 3-sigma excursion across seeds
    }
}

TEST_CASE("named configs expose nominal and effective probabilities") {
    auto eff = named_sbm_config("sbm-small", 0);
    auto nom = named_sbm_config("sbm-small", 0, true);
    REQUIRE(eff.p_in > nom.p_in);  // effective reproduces the published count
    REQUIRE(eff.num_nodes() == 10000);
    REQUIRE(named_sbm_config("sbm-large", 0).num_nodes() == 100000);
    REQUIRE_THROWS_AS(named_sbm_config("nope", 0), ParameterError);
}
