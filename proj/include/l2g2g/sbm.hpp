#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "l2g2g/errors.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/rng.hpp"

namespace l2g2g {

struct SbmConfig {
    int n_blocks = 100;
    int block_size = 100;
    double p_in = 0.02;
    double p_out = 1e-4;
    std::uint64_t seed = 0;

    int num_nodes() const { return n_blocks * block_size; }

    void validate() const {
        if (n_blocks < 1 || block_size < 1) throw ParameterError("SBM: empty blocks");
        if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
            throw ParameterError("SBM: need 0 <= p_out <= p_in <= 1");
    }
};

// Closed-form E[M] for a config; used by the dataset report and tests.
inline double sbm_expected_edges(const SbmConfig& cfg) {
    const double n = static_cast<double>(cfg.num_nodes());
    const double within = cfg.n_blocks * (cfg.block_size * (cfg.block_size - 1.0) / 2.0);
    const double total = n * (n - 1.0) / 2.0;
    return within * cfg.p_in + (total - within) * cfg.p_out;
}

inline double sbm_edge_count_stddev(const SbmConfig& cfg) {
    const double n = static_cast<double>(cfg.num_nodes());
    const double within = cfg.n_blocks * (cfg.block_size * (cfg.block_size - 1.0) / 2.0);
    const double total = n * (n - 1.0) / 2.0;
    return std::sqrt(within * cfg.p_in * (1.0 - cfg.p_in) +
                     (total - within) * cfg.p_out * (1.0 - cfg.p_out));
}

namespace detail {

// Geometric-skip Bernoulli stream over `count` slots: yields the indices of
// successes in O(#successes) expected time.
template <typename F>
void bernoulli_skip(std::int64_t count, double p, Rng& rng, F&& emit) {
    if (p <= 0.0 || count <= 0) return;
    if (p >= 1.0) {
        for (std::int64_t i = 0; i < count; ++i) emit(i);
        return;
    }
    const double log1mp = std::log1p(-p);
    std::int64_t i = -1;
    for (;;) {
        double u = rng.next_double();
        // skip ~ Geometric(p); 1 - u avoids log(0)
        double skip = std::floor(std::log1p(-u) / log1mp);
        if (skip > static_cast<double>(count)) return;
        i += 1 + static_cast<std::int64_t>(skip);
        if (i >= count) return;
        emit(i);
    }
}

}  // namespace detail

// Stochastic block model with one-hot block-membership features.
// Within-block pairs are edges with probability p_in, between-block pairs
// with p_out, all independent. Feature row v is the unit vector of v's block.
inline Graph generate_sbm(const SbmConfig& cfg) {
    cfg.validate();
    constexpr std::int64_t kMaxNodes = 1 << 21;  // pair counts stay well inside int64
    const std::int64_t n = cfg.num_nodes();
    if (n > kMaxNodes)
        throw ParameterError("SBM: N=" + std::to_string(n) + " exceeds supported maximum " +
                             std::to_string(kMaxNodes));

    Rng rng(derive_seed(cfg.seed, "sbm"));
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(sbm_expected_edges(cfg) * 1.1) + 64);

    const int b = cfg.block_size;
    const std::int64_t within_pairs = static_cast<std::int64_t>(b) * (b - 1) / 2;
    for (int blk = 0; blk < cfg.n_blocks; ++blk) {
        const int base = blk * b;
        detail::bernoulli_skip(within_pairs, cfg.p_in, rng, [&](std::int64_t idx) {
            // idx -> (row, col) in the strict upper triangle of a b x b block
            auto row = static_cast<int>((2 * b - 1 - std::sqrt((2.0 * b - 1) * (2.0 * b - 1) -
                                                               8.0 * static_cast<double>(idx))) /
                                        2.0);
            auto row_start_of = [b](int r) {
                return static_cast<std::int64_t>(r) * (2 * b - r - 1) / 2;
            };
            // guard against fp rounding at row boundaries
            while (row + 1 < b && row_start_of(row + 1) <= idx) ++row;
            while (row > 0 && row_start_of(row) > idx) --row;
            std::int64_t row_start = row_start_of(row);
            int col = static_cast<int>(idx - row_start) + row + 1;
            edges.emplace_back(base + row, base + col);
        });
    }
    const std::int64_t between_pairs = static_cast<std::int64_t>(b) * b;
    for (int bi = 0; bi < cfg.n_blocks; ++bi) {
        for (int bj = bi + 1; bj < cfg.n_blocks; ++bj) {
            const int base_i = bi * b, base_j = bj * b;
            detail::bernoulli_skip(between_pairs, cfg.p_out, rng, [&](std::int64_t idx) {
                edges.emplace_back(base_i + static_cast<int>(idx / b),
                                   base_j + static_cast<int>(idx % b));
            });
        }
    }

    Matrix x = Matrix::Zero(n, cfg.n_blocks);
    for (std::int64_t v = 0; v < n; ++v) x(v, static_cast<int>(v / b)) = 1.0;
    return Graph(static_cast<int>(n), std::move(edges), std::move(x));
}

// The four benchmark configurations. The probabilities are the ones that
// reproduce the reported edge counts; pass use_nominal=true for the nominal
// (0.02, 1e-4) small / (1e-3, 1e-4) large-sparse values instead.
inline SbmConfig named_sbm_config(const std::string& name, std::uint64_t seed,
                                  bool use_nominal = false) {
    SbmConfig cfg;
    cfg.seed = seed;
    if (name == "sbm-small") {
        cfg.n_blocks = 100;
        cfg.block_size = 100;
        cfg.p_in = use_nominal ? 0.02 : 0.2;
        cfg.p_out = 1e-4;
    } else if (name == "sbm-large-sparse") {
        cfg.n_blocks = 100;
        cfg.block_size = 1000;
        cfg.p_in = 1e-3;
        cfg.p_out = use_nominal ? 1e-4 : 1e-5;
    } else if (name == "sbm-large") {
        cfg.n_blocks = 100;
        cfg.block_size = 1000;
        cfg.p_in = 0.02;
        cfg.p_out = 1e-4;
    } else if (name == "sbm-large-dense") {
        cfg.n_blocks = 100;
        cfg.block_size = 1000;
        cfg.p_in = 0.1;
        cfg.p_out = 0.002;
    } else {
        throw ParameterError("unknown SBM config: " + name);
    }
    return cfg;
}

}  // namespace l2g2g
