#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <string>
#include <vector>

#include "l2g2g/errors.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/partition.hpp"
#include "l2g2g/transform.hpp"

namespace l2g2g {

// Polar factor of M via SVD: the orthogonal matrix nearest to M, equal to
// M (M^T M)^{-1/2} when M has full rank.
inline Matrix polar_factor(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

inline bool is_rank_deficient(const Matrix& m, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    return sv.size() == 0 || sv(sv.size() - 1) < rel_tol * sv(0);
}

// Orthogonal Procrustes estimate between the two patches' embeddings of the
// shared nodes: the R minimizing sum_u ||zi_u - R zj_u||^2. Rows of the
// inputs correspond to the same ordered overlap node list. The overlap means
// are removed first so a translation offset between the patches does not
// bias the rotation.
inline Matrix pairwise_rotation(const Matrix& zi_overlap, const Matrix& zj_overlap,
                                int patch_i = -1, int patch_j = -1) {
    if (zi_overlap.rows() != zj_overlap.rows() || zi_overlap.cols() != zj_overlap.cols())
        throw ContractViolation("pairwise_rotation: overlap shape mismatch");
    Matrix ci = zi_overlap.rowwise() - zi_overlap.colwise().mean();
    Matrix cj = zj_overlap.rowwise() - zj_overlap.colwise().mean();
    Matrix m = ci.transpose() * cj;  // e x e cross-covariance
    if (is_rank_deficient(m))
        throw SyncError("degenerate overlap between patches " + std::to_string(patch_i) +
                        " and " + std::to_string(patch_j));
    return polar_factor(m);
}

struct PairwiseRotation {
    int i = 0, j = 0;   // patch ids, i < j
    Matrix rotation;    // maps patch-j frame into patch-i frame
    double weight = 0;  // overlap size w_ij
};

// Damped block power iteration on S = Rtilde S, each block re-projected to
// its polar factor per iteration, starting from identity blocks. Returns one
// orthogonal matrix per patch, consistent with the pairwise estimates:
// S_i ~ R_ij S_j.
inline std::vector<Matrix> solve_rotations(const PatchGraph& pg,
                                           const std::vector<PairwiseRotation>& rotations,
                                           int max_iters = 20000, double tol = 1e-8) {
    const int k = pg.k;
    if (k == 0) return {};
    const int e = rotations.empty() ? 0 : static_cast<int>(rotations.front().rotation.rows());
    if (k == 1 || rotations.empty()) {
        if (k > 1) throw SyncError("solve_rotations: no pairwise rotations for k > 1");
        return {Matrix::Identity(e == 0 ? 1 : e, e == 0 ? 1 : e)};
    }

    struct Arc {
        int to;
        const Matrix* rot;
        bool transpose;
        double w;
    };
    std::vector<std::vector<Arc>> arcs(k);
    std::vector<double> wsum(k, 0.0);
    for (const auto& r : rotations) {
        arcs[r.i].push_back({r.j, &r.rotation, false, r.weight});
        arcs[r.j].push_back({r.i, &r.rotation, true, r.weight});
        wsum[r.i] += r.weight;
        wsum[r.j] += r.weight;
    }
    for (int i = 0; i < k; ++i)
        if (wsum[i] <= 0.0)
            throw SyncError("solve_rotations: patch " + std::to_string(i) +
                            " has no overlap edges");

    // start from a spanning-tree propagation of the pairwise estimates; the
    // all-identity start is a saddle point whenever some R_ij has a rotation
    // angle of pi (the damped average collapses to a singular matrix)
    std::vector<Matrix> s(k, Matrix::Identity(e, e));
    {
        std::vector<char> seen(k, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            for (const auto& a : arcs[i]) {
                if (seen[a.to]) continue;
                seen[a.to] = 1;
                // consistency S_i = R_ij S_j, i.e. S_j = R_ij^T S_i
                if (a.transpose)
                    s[a.to] = *a.rot * s[i];
                else
                    s[a.to] = a.rot->transpose() * s[i];
                stack.push_back(a.to);
            }
        }
    }
    double residual = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<Matrix> next(k);
        for (int i = 0; i < k; ++i) {
            Matrix acc = Matrix::Zero(e, e);
            for (const auto& a : arcs[i]) {
                if (a.transpose)
                    acc.noalias() += (a.w / wsum[i]) * (a.rot->transpose() * s[a.to]);
                else
                    acc.noalias() += (a.w / wsum[i]) * (*a.rot * s[a.to]);
            }
            next[i] = polar_factor(0.5 * (s[i] + acc));
        }
        residual = 0.0;
        for (int i = 0; i < k; ++i)
            residual = std::max(residual, (next[i] - s[i]).cwiseAbs().maxCoeff());
        s = std::move(next);
        if (residual <= tol) return s;
    }
    throw SyncError("solve_rotations did not converge; final residual " +
                    std::to_string(residual));
}

// Least-norm solution of min ||B T - C||^2 via conjugate gradient on the
// normal equations; B^T B is the patch-graph Laplacian. Mean-zero gauge.
inline Matrix solve_translation_system(const PatchGraph& pg, const Matrix& c,
                                       int max_iters = 200, double tol = 1e-10) {
    const int k = pg.k;
    const int e = static_cast<int>(c.cols());
    if (static_cast<Eigen::Index>(pg.edges.size()) != c.rows())
        throw ContractViolation("solve_translation_system: C row count mismatch");
    if (!pg.connected())
        throw ContractViolation("solve_translation_system: patch graph disconnected");
    if (k == 1) return Matrix::Zero(1, e);

    // rhs = B^T C
    Matrix rhs = Matrix::Zero(k, e);
    for (std::size_t r = 0; r < pg.edges.size(); ++r) {
        rhs.row(pg.edges[r].i) += c.row(r);
        rhs.row(pg.edges[r].j) -= c.row(r);
    }
    auto laplacian_apply = [&](const Matrix& x) {
        Matrix y = Matrix::Zero(k, e);
        for (const auto& edge : pg.edges) {
            Eigen::RowVectorXd diff = x.row(edge.i) - x.row(edge.j);
            y.row(edge.i) += diff;
            y.row(edge.j) -= diff;
        }
        return y;
    };

    Matrix t = Matrix::Zero(k, e);
    Matrix res = rhs;  // residual; starts at rhs since t = 0
    Matrix p = res;
    double rs_old = res.squaredNorm();
    const double stop = tol * tol * std::max(rhs.squaredNorm(), 1e-300);
    for (int it = 0; it < max_iters && rs_old > stop; ++it) {
        Matrix lp = laplacian_apply(p);
        double denom = (p.array() * lp.array()).sum();
        if (denom <= 0.0) break;
        double alpha = rs_old / denom;
        t += alpha * p;
        res -= alpha * lp;
        double rs_new = res.squaredNorm();
        p = res + (rs_new / rs_old) * p;
        rs_old = rs_new;
    }
    t.rowwise() -= t.colwise().mean();  // gauge
    return t;
}

namespace detail {

inline int patch_local_id(const Patch& p, int global) {
    auto it = std::lower_bound(p.nodes.begin(), p.nodes.end(), global);
    if (it == p.nodes.end() || *it != global)
        throw ContractViolation("node not in patch");
    return static_cast<int>(it - p.nodes.begin());
}

}  // namespace detail

// Translation estimates from rotation-aligned patch embeddings. Row (i,j) of
// C is the mean over the overlap of (rotated_j - rotated_i), so that adding
// T per patch cancels the per-patch offsets.
inline Matrix solve_translations(const PatchSet& ps, const PatchGraph& pg,
                                 const std::vector<Matrix>& rotated) {
    const int e = ps.patches.empty() || rotated.empty() ? 0 : static_cast<int>(rotated[0].cols());
    Matrix c(pg.edges.size(), e);
    for (std::size_t r = 0; r < pg.edges.size(); ++r) {
        const auto& edge = pg.edges[r];
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(e);
        for (int v : edge.overlap) {
            acc += rotated[edge.j].row(detail::patch_local_id(ps.patches[edge.j], v));
            acc -= rotated[edge.i].row(detail::patch_local_id(ps.patches[edge.i], v));
        }
        c.row(r) = acc / static_cast<double>(edge.overlap.size());
    }
    return solve_translation_system(pg, c);
}

// Full Local2Global synchronization for one set of patch embeddings:
// pairwise Procrustes estimates, rotation synchronization, translation
// synchronization. Returns one rigid Transform per patch.
inline std::vector<Transform> synchronize(const PatchSet& ps, const PatchGraph& pg,
                                          const std::vector<Matrix>& zs) {
    const int k = ps.k();
    if (static_cast<int>(zs.size()) != k)
        throw ContractViolation("synchronize: embedding count mismatch");
    const int e = k == 0 ? 0 : static_cast<int>(zs[0].cols());
    if (k == 1) return {Transform::identity(e)};

    std::vector<PairwiseRotation> pairwise;
    pairwise.reserve(pg.edges.size());
    for (const auto& edge : pg.edges) {
        const auto n_ov = static_cast<Eigen::Index>(edge.overlap.size());
        Matrix zi(n_ov, e), zj(n_ov, e);
        for (Eigen::Index t = 0; t < n_ov; ++t) {
            zi.row(t) = zs[edge.i].row(detail::patch_local_id(ps.patches[edge.i], edge.overlap[t]));
            zj.row(t) = zs[edge.j].row(detail::patch_local_id(ps.patches[edge.j], edge.overlap[t]));
        }
        pairwise.push_back(
            {edge.i, edge.j, pairwise_rotation(zi, zj, edge.i, edge.j),
             static_cast<double>(edge.overlap.size())});
    }

    std::vector<Matrix> s = solve_rotations(pg, pairwise);
    std::vector<Transform> transforms(k);
    std::vector<Matrix> rotated(k);
    for (int j = 0; j < k; ++j) {
        transforms[j].rotation = s[j].transpose();  // applied as z -> S_j^T z
        rotated[j] = zs[j] * s[j];                  // rows become (S_j^T z)^T
    }
    Matrix t = solve_translations(ps, pg, rotated);
    for (int j = 0; j < k; ++j) transforms[j].translation = t.row(j).transpose();
    return transforms;
}

// Mean of the transformed patch embeddings per global node.
inline Matrix align_and_average(const PatchSet& ps, const std::vector<Matrix>& zs,
                                const std::vector<Transform>& transforms) {
    const int k = ps.k();
    if (static_cast<int>(zs.size()) != k || static_cast<int>(transforms.size()) != k)
        throw ContractViolation("align_and_average: size mismatch");
    const int e = k == 0 ? 0 : static_cast<int>(zs[0].cols());
    Matrix out = Matrix::Zero(ps.n_global, e);
    std::vector<int> count(ps.n_global, 0);
    for (int j = 0; j < k; ++j) {
        Matrix aligned = transforms[j].apply(zs[j]);
        const auto& nodes = ps.patches[j].nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            out.row(nodes[i]) += aligned.row(static_cast<Eigen::Index>(i));
            ++count[nodes[i]];
        }
    }
    for (int v = 0; v < ps.n_global; ++v) {
        if (count[v] == 0)
            throw ContractViolation("node " + std::to_string(v) + " not covered by any patch");
        out.row(v) /= static_cast<double>(count[v]);
    }
    return out;
}

}  // namespace l2g2g
