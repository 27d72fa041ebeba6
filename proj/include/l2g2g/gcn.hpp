#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "l2g2g/errors.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/rng.hpp"
#include "l2g2g/transform.hpp"

namespace l2g2g {

// Two-layer GCN encoder: Z = Ahat relu(Ahat X W1) W2. No biases.
struct GcnModel {
    Matrix w1;  // F x H1
    Matrix w2;  // H1 x e

    int in_dim() const { return static_cast<int>(w1.rows()); }
    int hidden_dim() const { return static_cast<int>(w1.cols()); }
    int embed_dim() const { return static_cast<int>(w2.cols()); }

    static GcnModel glorot(int f, int h1, int e, std::uint64_t seed) {
        Rng rng = derive_rng(seed, "glorot");
        GcnModel m{Matrix(f, h1), Matrix(h1, e)};
        auto fill = [&](Matrix& w) {
            const double limit = std::sqrt(6.0 / (w.rows() + w.cols()));
            for (Eigen::Index i = 0; i < w.rows(); ++i)
                for (Eigen::Index j = 0; j < w.cols(); ++j)
                    w(i, j) = rng.next_in(-limit, limit);
        };
        fill(m.w1);
        fill(m.w2);
        return m;
    }
};

struct Gradients {
    Matrix w1, w2;
};

struct ForwardCache {
    Matrix pre;     // Ahat X W1
    Matrix hidden;  // relu(pre)
    Matrix z;
};

inline ForwardCache gcn_forward_cached(const GcnModel& model, const SparseMatrix& ahat,
                                       const Matrix& x) {
    if (x.cols() != model.w1.rows() || ahat.rows() != x.rows() || ahat.rows() != ahat.cols())
        throw ContractViolation("gcn_forward: shape mismatch");
    ForwardCache c;
    c.pre = ahat * (x * model.w1);
    c.hidden = c.pre.cwiseMax(0.0);
    c.z = ahat * (c.hidden * model.w2);
    return c;
}

inline Matrix gcn_forward(const GcnModel& model, const SparseMatrix& ahat, const Matrix& x) {
    return gcn_forward_cached(model, ahat, x).z;
}

// dL/dW1, dL/dW2 from dL/dZ; Ahat is symmetric so its transpose is itself.
inline Gradients gcn_backward(const GcnModel& model, const SparseMatrix& ahat, const Matrix& x,
                              const ForwardCache& cache, const Matrix& dz) {
    Matrix g2 = ahat * dz;
    Gradients g;
    g.w2 = cache.hidden.transpose() * g2;
    Matrix dpre = (cache.pre.array() > 0.0).select(g2 * model.w2.transpose(), 0.0);
    g.w1 = x.transpose() * (ahat * dpre);
    return g;
}

inline double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double t = std::exp(x);
    return t / (1.0 + t);
}

inline double decoder_score(const Eigen::Ref<const Vector>& zu,
                            const Eigen::Ref<const Vector>& zv) {
    if (zu.size() != zv.size()) throw ContractViolation("decoder_score: dimension mismatch");
    return stable_sigmoid(zu.dot(zv));
}

// Weighted full-pair binary cross-entropy against the target A + I, averaged
// over all N^2 ordered pairs. Positives carry pos_weight = (N^2 - Mt)/Mt with
// Mt = 2M + N (floored at 1 in the degenerate Mt = N^2 case). Evaluated in
// the log-sum-exp form on logits zhat_u . zhat_v.
//
// `adj` are the sorted neighbor lists of the target graph (no self loops),
// `n_edges` its undirected edge count. If dzhat is non-null it receives
// dLoss/dZhat. Row blocks sweep the upper trapezoid of the symmetric logit
// matrix; off-diagonal entries count twice.
inline double bce_loss_grad(const Matrix& zhat, const std::vector<std::vector<int>>& adj,
                            std::int64_t n_edges, Matrix* dzhat) {
    const std::int64_t n = zhat.rows();
    if (static_cast<std::int64_t>(adj.size()) != n)
        throw ContractViolation("bce_loss_grad: adjacency/embedding size mismatch");
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    const double mt = 2.0 * static_cast<double>(n_edges) + static_cast<double>(n);
    const double pos_weight = (mt >= n2) ? 1.0 : (n2 - mt) / mt;

    if (dzhat) dzhat->setZero(n, zhat.cols());
    double loss = 0.0;
    const std::int64_t block = 256;
    Eigen::ArrayXXd logits, work;
    for (std::int64_t r0 = 0; r0 < n; r0 += block) {
        const std::int64_t b = std::min(block, n - r0);
        const std::int64_t r1 = r0 + b;
        const std::int64_t nc = n - r0;
        logits = (zhat.middleRows(r0, b) * zhat.bottomRows(nc).transpose()).array();
        work = (-logits.abs()).exp();
        // negative-class softplus everywhere; in-block columns count once,
        // columns past the block twice (symmetric mirror)
        {
            auto softplus = logits.max(0.0) + work.log1p();
            loss += softplus.leftCols(b).sum() + 2.0 * softplus.rightCols(nc - b).sum();
        }
        // work becomes sigma(logits)
        work = (logits >= 0.0).select((1.0 + work).inverse(), work / (1.0 + work));
        // positive entries: self-loop plus neighbors with j >= r0
        for (std::int64_t i = r0; i < r1; ++i) {
            auto fix = [&](std::int64_t j) {
                const std::int64_t c = j - r0;
                const double w = (j < r1) ? 1.0 : 2.0;
                const double l = logits(i - r0, c);
                const double f_neg = std::max(l, 0.0) + std::log1p(std::exp(-std::abs(l)));
                loss += w * (pos_weight * (f_neg - l) - f_neg);
                work(i - r0, c) = pos_weight * (work(i - r0, c) - 1.0);
            };
            fix(i);
            const auto& nbrs = adj[i];
            auto it = std::lower_bound(nbrs.begin(), nbrs.end(), static_cast<int>(r0));
            for (; it != nbrs.end(); ++it) fix(*it);
        }
        if (dzhat) {
            const double scale = 2.0 / n2;
            dzhat->middleRows(r0, b).noalias() +=
                scale * (work.matrix() * zhat.bottomRows(nc));
            if (nc > b)
                dzhat->bottomRows(nc - b).noalias() +=
                    scale * (work.matrix().rightCols(nc - b).transpose() * zhat.middleRows(r0, b));
        }
    }
    return loss / n2;
}

inline double recon_loss(const Matrix& z, const Graph& target, const Transform* t = nullptr) {
    if (z.rows() != target.num_nodes())
        throw ContractViolation("recon_loss: embedding rows do not match target nodes");
    if (t) {
        Matrix zhat = t->apply(z);
        return bce_loss_grad(zhat, target.adjacency_lists(), target.num_edges(), nullptr);
    }
    return bce_loss_grad(z, target.adjacency_lists(), target.num_edges(), nullptr);
}

struct LossGrad {
    double loss = 0.0;
    Gradients grads;
};

// Loss and exact reverse-mode gradients of recon_loss(decode(transform(Z)))
// w.r.t. W1 and W2; the transform is a constant under differentiation.
inline LossGrad loss_and_grad(const GcnModel& model, const SparseMatrix& ahat, const Matrix& x,
                              const Graph& target, const Transform* t = nullptr) {
    ForwardCache cache = gcn_forward_cached(model, ahat, x);
    Matrix dzhat;
    LossGrad out;
    if (t) {
        Matrix zhat = t->apply(cache.z);
        out.loss = bce_loss_grad(zhat, target.adjacency_lists(), target.num_edges(), &dzhat);
        Matrix dz = dzhat * t->rotation;  // zhat = Z S^T + 1 t^T
        out.grads = gcn_backward(model, ahat, x, cache, dz);
    } else {
        out.loss = bce_loss_grad(cache.z, target.adjacency_lists(), target.num_edges(), &dzhat);
        out.grads = gcn_backward(model, ahat, x, cache, dzhat);
    }
    return out;
}

// --- Adam -------------------------------------------------------------------

struct AdamState {
    Matrix m1, v1;  // moments for W1
    Matrix m2, v2;  // moments for W2
    long step = 0;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_model(const GcnModel& m, double lr = 0.001) {
        AdamState s;
        s.lr = lr;
        s.m1 = Matrix::Zero(m.w1.rows(), m.w1.cols());
        s.v1 = s.m1;
        s.m2 = Matrix::Zero(m.w2.rows(), m.w2.cols());
        s.v2 = s.m2;
        return s;
    }
};

inline void adam_step(GcnModel& model, const Gradients& grads, AdamState& s) {
    if (grads.w1.rows() != model.w1.rows() || grads.w2.rows() != model.w2.rows())
        throw ContractViolation("adam_step: gradient shape mismatch");
    ++s.step;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    auto update = [&](Matrix& w, const Matrix& g, Matrix& m, Matrix& v) {
        m = s.beta1 * m + (1.0 - s.beta1) * g;
        v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
        w.array() -= s.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + s.eps);
    };
    update(model.w1, grads.w1, s.m1, s.v1);
    update(model.w2, grads.w2, s.m2, s.v2);
}

// --- checkpoint IO -----------------------------------------------------------

inline void save_model(const std::string& path, const GcnModel& m) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write checkpoint: " + path);
    out.precision(17);
    out << m.in_dim() << " " << m.hidden_dim() << " " << m.embed_dim() << "\n";
    auto dump = [&](const Matrix& w) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << w(i, j);
            out << "\n";
        }
    };
    dump(m.w1);
    dump(m.w2);
}

inline GcnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    int f = 0, h1 = 0, e = 0;
    if (!(in >> f >> h1 >> e) || f < 1 || h1 < 1 || e < 1)
        throw FormatError("bad checkpoint header in " + path);
    GcnModel m{Matrix(f, h1), Matrix(h1, e)};
    auto slurp = [&](Matrix& w) {
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                if (!(in >> w(i, j))) throw FormatError("truncated checkpoint: " + path);
    };
    slurp(m.w1);
    slurp(m.w2);
    return m;
}

}  // namespace l2g2g
