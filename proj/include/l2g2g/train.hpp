#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "l2g2g/errors.hpp"
#include "l2g2g/gcn.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/partition.hpp"
#include "l2g2g/rng.hpp"
#include "l2g2g/sync.hpp"
#include "l2g2g/transform.hpp"

namespace l2g2g {

struct TrainConfig {
    int epochs = 200;
    double lr = 0.001;
    int hidden_dim = 32;
    int embed_dim = 16;
    int k = 10;               // patches (L2G regimes)
    int min_overlap = 32;     // d = 2e
    int sync_every = 10;
    int fastgae_sample = 0;   // 0 = floor(sqrt(N))
    std::uint64_t seed = 0;
    std::string regime = "gae";

    void validate() const {
        if (epochs < 1) throw ParameterError("epochs must be >= 1");
        if (sync_every < 1) throw ParameterError("sync_every must be >= 1");
        if (lr <= 0) throw ParameterError("lr must be positive");
    }
};

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_seconds;  // epoch body only; partitioning excluded
    Matrix embedding;                   // global, N x e
    std::vector<Transform> transforms;  // L2G regimes only
    std::string regime;

    double mean_epoch_seconds() const {
        double s = 0;
        for (double t : epoch_seconds) s += t;
        return epoch_seconds.empty() ? 0.0 : s / static_cast<double>(epoch_seconds.size());
    }
};

namespace detail {

class EpochTimer {
public:
    void start() { t0_ = std::chrono::steady_clock::now(); }
    double stop() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

inline void check_finite(double loss, int epoch) {
    if (!std::isfinite(loss)) throw TrainError("non-finite training loss", epoch);
}

}  // namespace detail

// Full-graph GAE: encode everything, reconstruct all pairs, every epoch.
inline TrainReport train_gae(const Graph& g, const TrainConfig& cfg) {
    cfg.validate();
    const SparseMatrix ahat = normalize_adjacency(g);
    GcnModel model =
        GcnModel::glorot(g.num_features(), cfg.hidden_dim, cfg.embed_dim, derive_seed(cfg.seed, "init"));
    AdamState adam = AdamState::for_model(model, cfg.lr);

    TrainReport report;
    report.regime = "gae";
    detail::EpochTimer timer;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        timer.start();
        LossGrad lg = loss_and_grad(model, ahat, g.features(), g);
        detail::check_finite(lg.loss, epoch);
        adam_step(model, lg.grads, adam);
        report.epoch_seconds.push_back(timer.stop());
        report.epoch_loss.push_back(lg.loss);
    }
    report.embedding = gcn_forward(model, ahat, g.features());
    return report;
}

// n_s distinct nodes, inclusion probability proportional to degree + 1
// (sequential weighted sampling without replacement, by rejection).
inline std::vector<int> sample_subgraph_degree_proportional(const Graph& g, int n_s, Rng& rng) {
    const int n = g.num_nodes();
    if (n_s < 1 || n_s > n) throw ParameterError("sample size out of range");
    std::vector<double> cum(n);
    double total = 0;
    for (int v = 0; v < n; ++v) {
        total += g.degree(v) + 1;
        cum[v] = total;
    }
    std::vector<char> taken(n, 0);
    std::vector<int> picked;
    picked.reserve(n_s);
    while (static_cast<int>(picked.size()) < n_s) {
        double r = rng.next_double() * total;
        int v = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
        if (v >= n) v = n - 1;
        if (taken[v]) continue;  // rejection = renormalization over the rest
        taken[v] = 1;
        picked.push_back(v);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

// FastGAE: full-graph encode, loss on the induced subgraph of a fresh
// degree-proportional sqrt(N) sample each epoch.
inline TrainReport train_fastgae(const Graph& g, const TrainConfig& cfg) {
    cfg.validate();
    const int n = g.num_nodes();
    const int n_s = cfg.fastgae_sample > 0 ? cfg.fastgae_sample
                                           : static_cast<int>(std::sqrt(static_cast<double>(n)));
    if (n_s > n) throw ParameterError("fastgae sample size exceeds N");
    const SparseMatrix ahat = normalize_adjacency(g);
    GcnModel model =
        GcnModel::glorot(g.num_features(), cfg.hidden_dim, cfg.embed_dim, derive_seed(cfg.seed, "init"));
    AdamState adam = AdamState::for_model(model, cfg.lr);
    Rng sample_rng = derive_rng(cfg.seed, "fastgae-sample");

    TrainReport report;
    report.regime = "fastgae";
    std::vector<int> local_of(n, -1);
    detail::EpochTimer timer;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        timer.start();
        ForwardCache cache = gcn_forward_cached(model, ahat, g.features());
        std::vector<int> sample = sample_subgraph_degree_proportional(g, n_s, sample_rng);
        // induced subgraph adjacency in local ids
        for (std::size_t i = 0; i < sample.size(); ++i) local_of[sample[i]] = static_cast<int>(i);
        std::vector<std::vector<int>> sub_adj(sample.size());
        std::int64_t sub_edges = 0;
        for (std::size_t i = 0; i < sample.size(); ++i)
            for (int w : g.neighbors(sample[i]))
                if (local_of[w] != -1) {
                    sub_adj[i].push_back(local_of[w]);
                    if (local_of[w] > static_cast<int>(i)) ++sub_edges;
                }
        Matrix zsub(sample.size(), cfg.embed_dim);
        for (std::size_t i = 0; i < sample.size(); ++i) zsub.row(i) = cache.z.row(sample[i]);

        Matrix dzsub;
        const double loss = bce_loss_grad(zsub, sub_adj, sub_edges, &dzsub);
        detail::check_finite(loss, epoch);
        Matrix dz = Matrix::Zero(n, cfg.embed_dim);
        for (std::size_t i = 0; i < sample.size(); ++i) dz.row(sample[i]) = dzsub.row(i);
        Gradients grads = gcn_backward(model, ahat, g.features(), cache, dz);
        adam_step(model, grads, adam);
        for (int v : sample) local_of[v] = -1;
        report.epoch_seconds.push_back(timer.stop());
        report.epoch_loss.push_back(loss);
    }
    report.embedding = gcn_forward(model, ahat, g.features());
    return report;
}

namespace detail {

struct PatchContext {
    Graph graph;        // induced subgraph with its own features
    SparseMatrix ahat;
};

inline std::vector<PatchContext> make_patch_contexts(const Graph& g, const PatchSet& ps) {
    std::vector<PatchContext> ctx;
    ctx.reserve(ps.k());
    for (const auto& p : ps.patches) {
        PatchContext c{p.induced_graph(g), {}};
        c.ahat = normalize_adjacency(c.graph);
        ctx.push_back(std::move(c));
    }
    return ctx;
}

}  // namespace detail

// GAE+L2G baseline: one independent GAE per patch, trained sequentially with
// per-patch derived seeds, then a single synchronization pass.
inline TrainReport train_gae_l2g(const Graph& g, const PatchSet& ps, const PatchGraph& pg,
                                 const TrainConfig& cfg) {
    cfg.validate();
    const int k = ps.k();
    auto ctx = detail::make_patch_contexts(g, ps);

    TrainReport report;
    report.regime = "gae-l2g";
    report.epoch_loss.assign(cfg.epochs, 0.0);
    report.epoch_seconds.assign(cfg.epochs, 0.0);
    std::vector<Matrix> zs(k);
    detail::EpochTimer timer;
    for (int j = 0; j < k; ++j) {
        GcnModel model = GcnModel::glorot(g.num_features(), cfg.hidden_dim, cfg.embed_dim,
                                          derive_seed(cfg.seed, "patch-init-" + std::to_string(j)));
        AdamState adam = AdamState::for_model(model, cfg.lr);
        const double weight = static_cast<double>(ps.patches[j].size()) / g.num_nodes();
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            timer.start();
            LossGrad lg = loss_and_grad(model, ctx[j].ahat, ctx[j].graph.features(), ctx[j].graph);
            detail::check_finite(lg.loss, epoch);
            adam_step(model, lg.grads, adam);
            report.epoch_seconds[epoch] += timer.stop();
            report.epoch_loss[epoch] += weight * lg.loss;
        }
        zs[j] = gcn_forward(model, ctx[j].ahat, ctx[j].graph.features());
    }
    timer.start();
    report.transforms = synchronize(ps, pg, zs);
    const double sync_seconds = timer.stop();
    report.epoch_seconds[cfg.epochs - 1] += sync_seconds;  // one-off post-training alignment
    report.embedding = align_and_average(ps, zs, report.transforms);
    return report;
}

// L2G2G: one shared GCN encodes all patches; transforms are refreshed from
// the current embeddings at epochs 0, sync_every, 2*sync_every, ... and held
// constant under differentiation; patch losses are aggregated with weights
// N_j / N (no renormalization).
inline TrainReport train_l2g2g(const Graph& g, const PatchSet& ps, const PatchGraph& pg,
                               const TrainConfig& cfg) {
    cfg.validate();
    const int k = ps.k();
    auto ctx = detail::make_patch_contexts(g, ps);
    GcnModel model =
        GcnModel::glorot(g.num_features(), cfg.hidden_dim, cfg.embed_dim, derive_seed(cfg.seed, "init"));
    AdamState adam = AdamState::for_model(model, cfg.lr);

    TrainReport report;
    report.regime = "l2g2g";
    std::vector<Matrix> zs(k);
    std::vector<ForwardCache> caches(k);
    std::vector<Transform> transforms;
    detail::EpochTimer timer;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        timer.start();
        for (int j = 0; j < k; ++j) {
            caches[j] = gcn_forward_cached(model, ctx[j].ahat, ctx[j].graph.features());
            zs[j] = caches[j].z;
        }
        if (epoch % cfg.sync_every == 0) {
            try {
                transforms = synchronize(ps, pg, zs);
            } catch (const SyncError& err) {
                throw TrainError(std::string("sync failed: ") + err.what(), epoch);
            }
        }
        double total_loss = 0.0;
        Gradients grads{Matrix::Zero(model.w1.rows(), model.w1.cols()),
                        Matrix::Zero(model.w2.rows(), model.w2.cols())};
        for (int j = 0; j < k; ++j) {
            const double weight = static_cast<double>(ps.patches[j].size()) / g.num_nodes();
            Matrix zhat = transforms[j].apply(zs[j]);
            Matrix dzhat;
            const double lj = bce_loss_grad(zhat, ctx[j].graph.adjacency_lists(),
                                            ctx[j].graph.num_edges(), &dzhat);
            total_loss += weight * lj;
            Matrix dz = weight * (dzhat * transforms[j].rotation);
            Gradients gj = gcn_backward(model, ctx[j].ahat, ctx[j].graph.features(), caches[j], dz);
            grads.w1 += gj.w1;
            grads.w2 += gj.w2;
        }
        detail::check_finite(total_loss, epoch);
        adam_step(model, grads, adam);
        report.epoch_seconds.push_back(timer.stop());
        report.epoch_loss.push_back(total_loss);
    }
    for (int j = 0; j < k; ++j) zs[j] = gcn_forward(model, ctx[j].ahat, ctx[j].graph.features());
    report.transforms = transforms;
    report.embedding = align_and_average(ps, zs, transforms);
    return report;
}

// Edge probability between nodes living in (possibly different) patches:
// sigmoid of the inner product of the two aligned embeddings.
inline double score_cross_patch(int local_u, int patch_i, int local_v, int patch_j,
                                const std::vector<Matrix>& zs,
                                const std::vector<Transform>& transforms) {
    Vector zu = transforms[patch_i].rotation * zs[patch_i].row(local_u).transpose() +
                transforms[patch_i].translation;
    Vector zv = transforms[patch_j].rotation * zs[patch_j].row(local_v).transpose() +
                transforms[patch_j].translation;
    return decoder_score(zu, zv);
}

}  // namespace l2g2g
