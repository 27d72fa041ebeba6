#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "l2g2g/errors.hpp"

namespace l2g2g {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Undirected attributed graph. Edges are stored once with u < v; self-loops
// are never stored (normalization and loss targets add them internally).
class Graph {
public:
    Graph() = default;
    Graph(int n_nodes, std::vector<std::pair<int, int>> edge_list, Matrix features)
        : n_(n_nodes), features_(std::move(features)) {
        if (features_.rows() != n_)
            throw ContractViolation("feature row count does not match node count");
        set_edges(std::move(edge_list));
    }

    int num_nodes() const { return n_; }
    std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
    int num_features() const { return static_cast<int>(features_.cols()); }

    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const Matrix& features() const { return features_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    const std::vector<std::vector<int>>& adjacency_lists() const { return adj_; }
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }

    bool has_edge(int u, int v) const {
        if (u == v) return false;
        const auto& nu = adj_[u];
        return std::binary_search(nu.begin(), nu.end(), v);
    }

    SparseMatrix adjacency_matrix() const {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(edges_.size() * 2);
        for (auto [u, v] : edges_) {
            trips.emplace_back(u, v, 1.0);
            trips.emplace_back(v, u, 1.0);
        }
        SparseMatrix a(n_, n_);
        a.setFromTriplets(trips.begin(), trips.end());
        return a;
    }

private:
    void set_edges(std::vector<std::pair<int, int>> edge_list) {
        for (auto& [u, v] : edge_list) {
            if (u == v) throw ContractViolation("self-loop in edge list");
            if (u < 0 || v < 0 || u >= n_ || v >= n_)
                throw ContractViolation("edge endpoint out of range");
            if (u > v) std::swap(u, v);
        }
        std::sort(edge_list.begin(), edge_list.end());
        edge_list.erase(std::unique(edge_list.begin(), edge_list.end()), edge_list.end());
        edges_ = std::move(edge_list);
        adj_.assign(n_, {});
        for (auto [u, v] : edges_) {
            adj_[u].push_back(v);
            adj_[v].push_back(u);
        }
        for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
    }

    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
    Matrix features_;
};

// \hat A = D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
inline SparseMatrix normalize_adjacency(const Graph& g) {
    const int n = g.num_nodes();
    Vector dinv_sqrt(n);
    for (int v = 0; v < n; ++v)
        dinv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(g.num_edges() * 2 + n);
    for (int v = 0; v < n; ++v)
        trips.emplace_back(v, v, dinv_sqrt[v] * dinv_sqrt[v]);
    for (auto [u, v] : g.edges()) {
        const double w = dinv_sqrt[u] * dinv_sqrt[v];
        trips.emplace_back(u, v, w);
        trips.emplace_back(v, u, w);
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

// --- text IO ---------------------------------------------------------------
//
// Edge list: one "u v" pair per line, 0-based ids. Duplicate and reversed
// lines are deduplicated; self-loop lines are dropped (counted).
// Feature matrix: header "N F", then N rows of F reals. Embeddings use the
// same matrix format.

struct LoadStats {
    std::int64_t dropped_self_loops = 0;
};

inline Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open matrix file: " + path);
    std::int64_t rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
        throw FormatError("bad matrix header in " + path);
    Matrix m(rows, cols);
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < cols; ++j)
            if (!(in >> m(i, j)))
                throw FormatError("non-numeric or missing entry in " + path);
    return m;
}

inline void save_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write matrix file: " + path);
    out.precision(17);
    out << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << (j ? " " : "") << m(i, j);
        out << "\n";
    }
}

inline Matrix load_embedding(const std::string& path) { return load_matrix(path); }
inline void save_embedding(const std::string& path, const Matrix& z) { save_matrix(path, z); }

inline Graph load_graph(const std::string& edge_list_path, const std::string& feature_path,
                        LoadStats* stats = nullptr) {
    Matrix x = load_matrix(feature_path);
    const int n = static_cast<int>(x.rows());
    std::ifstream in(edge_list_path);
    if (!in) throw FormatError("cannot open edge list: " + edge_list_path);
    std::vector<std::pair<int, int>> edges;
    std::int64_t self_loops = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u >> v))
            throw FormatError("bad edge line '" + line + "' in " + edge_list_path);
        if (u == v) {
            ++self_loops;
            continue;
        }
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw FormatError("node id out of range (N=" + std::to_string(n) + ") in line '" +
                              line + "'");
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
    if (stats) stats->dropped_self_loops = self_loops;
    return Graph(n, std::move(edges), std::move(x));
}

inline void save_graph(const Graph& g, const std::string& edge_list_path,
                       const std::string& feature_path) {
    std::ofstream out(edge_list_path);
    if (!out) throw FormatError("cannot write edge list: " + edge_list_path);
    for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
    save_matrix(feature_path, g.features());
}

}  // namespace l2g2g
