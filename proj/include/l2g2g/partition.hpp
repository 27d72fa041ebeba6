#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "l2g2g/errors.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/rng.hpp"

namespace l2g2g {

// One overlapping patch: sorted global node ids plus the induced edges in
// local ids (local id of a node = its index in `nodes`).
struct Patch {
    std::vector<int> nodes;
    std::vector<std::pair<int, int>> edges;

    int size() const { return static_cast<int>(nodes.size()); }

    Graph induced_graph(const Graph& g) const {
        Matrix x(nodes.size(), g.num_features());
        for (std::size_t i = 0; i < nodes.size(); ++i) x.row(i) = g.features().row(nodes[i]);
        return Graph(size(), edges, std::move(x));
    }
};

struct PatchSet {
    std::vector<Patch> patches;
    std::vector<std::vector<int>> membership;  // per global node: patches containing it
    int n_global = 0;

    int k() const { return static_cast<int>(patches.size()); }
};

struct PatchGraphEdge {
    int i = 0, j = 0;            // patch ids, i < j
    std::vector<int> overlap;    // sorted shared global node ids
};

struct PatchGraph {
    int k = 0;
    int min_overlap = 0;          // d
    int max_overlap = 0;          // recorded l
    std::vector<PatchGraphEdge> edges;

    bool connected() const {
        if (k <= 1) return true;
        std::vector<std::vector<int>> adj(k);
        for (const auto& e : edges) {
            adj[e.i].push_back(e.j);
            adj[e.j].push_back(e.i);
        }
        std::vector<char> seen(k, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int cnt = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++cnt;
                    q.push(w);
                }
        }
        return cnt == k;
    }
};

// Seeded balanced label propagation. Every node ends in exactly one of k
// non-empty clusters; deterministic for fixed (g, k, seed).
inline std::vector<int> cluster_nodes(const Graph& g, int k, std::uint64_t seed) {
    const int n = g.num_nodes();
    if (k < 1 || k > n) throw ParameterError("cluster_nodes: need 1 <= k <= N");
    std::vector<int> label(n, -1);
    if (k == 1) {
        std::fill(label.begin(), label.end(), 0);
        return label;
    }

    Rng rng = derive_rng(seed, "cluster");
    // first seed degree-weighted (+1 so edgeless graphs work); later seeds
    // degree-weighted among the nodes farthest from all previous seeds, so
    // every component gets a seed before any component gets two
    std::vector<int> seeds;
    std::vector<std::int64_t> dist(n);
    auto weighted_pick = [&](const std::vector<int>& candidates) {
        double total = 0;
        for (int v : candidates) total += g.degree(v) + 1;
        double r = rng.next_double() * total;
        for (int v : candidates) {
            r -= g.degree(v) + 1;
            if (r <= 0) return v;
        }
        return candidates.back();
    };
    {
        std::vector<int> all;
        for (int v = 0; v < n; ++v)
            if (g.degree(v) > 0) all.push_back(v);
        if (all.empty()) {
            all.resize(n);
            std::iota(all.begin(), all.end(), 0);
        }
        seeds.push_back(weighted_pick(all));
    }
    constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();
    while (static_cast<int>(seeds.size()) < k) {
        std::fill(dist.begin(), dist.end(), kUnreached);
        std::queue<int> q;
        for (int s : seeds) {
            dist[s] = 0;
            q.push(s);
        }
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int w : g.neighbors(v))
                if (dist[w] == kUnreached) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
        }
        // isolated nodes are always unreached so they would win every
        // farthest-first round and waste seeds on singleton clusters; only
        // seed one when no node with an edge is left
        std::int64_t best = -1;
        bool need_deg = true;
        for (int pass : {1, 0}) {
            need_deg = pass == 1;
            for (int v = 0; v < n; ++v)
                if (dist[v] > best && (!need_deg || g.degree(v) > 0) &&
                    std::find(seeds.begin(), seeds.end(), v) == seeds.end())
                    best = dist[v];
            if (best != -1) break;
        }
        std::vector<int> candidates;
        for (int v = 0; v < n; ++v)
            if (dist[v] == best && (!need_deg || g.degree(v) > 0) &&
                std::find(seeds.begin(), seeds.end(), v) == seeds.end())
                candidates.push_back(v);
        seeds.push_back(weighted_pick(candidates));
    }

    const int cap = static_cast<int>((12LL * n + 10LL * k - 1) / (10LL * k));  // ceil(1.2 N/k)
    std::vector<int> cluster_size(k, 0);
    std::vector<std::vector<int>> frontier(k);
    for (int c = 0; c < k; ++c) {
        label[seeds[c]] = c;
        cluster_size[c] = 1;
        frontier[c].push_back(seeds[c]);
    }

    // round-robin BFS growth under the capacity cap; ties go to the cluster
    // that reaches a node first, scan order is by node id
    bool grew = true;
    while (grew) {
        grew = false;
        for (int c = 0; c < k; ++c) {
            std::vector<int> next;
            std::sort(frontier[c].begin(), frontier[c].end());
            for (int v : frontier[c]) {
                for (int w : g.neighbors(v)) {
                    if (label[w] != -1 || cluster_size[c] >= cap) continue;
                    label[w] = c;
                    ++cluster_size[c];
                    next.push_back(w);
                    grew = true;
                }
            }
            frontier[c] = std::move(next);
        }
    }

    // stragglers: nodes left over by the cap go to the neighboring cluster
    // with the most links (tie: lowest cluster id)
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < n; ++v) {
            if (label[v] != -1) continue;
            std::vector<int> links(k, 0);
            for (int w : g.neighbors(v))
                if (label[w] != -1) ++links[label[w]];
            // most links wins; clusters still under the cap take precedence
            int best = -1;
            for (int under : {1, 0}) {
                for (int c = 0; c < k; ++c)
                    if (links[c] > 0 && (cluster_size[c] < cap) == (under == 1) &&
                        (best == -1 || links[c] > links[best]))
                        best = c;
                if (best != -1) break;
            }
            if (best != -1) {
                label[v] = best;
                ++cluster_size[best];
                changed = true;
            }
        }
    }
    // straggler assignment can push a cluster past the cap when every linked
    // cluster is full; trim by moving boundary nodes into adjacent under-cap
    // clusters (each move shrinks the total overflow, so this terminates)
    for (bool moved = true; moved;) {
        moved = false;
        for (int v = 0; v < n; ++v) {
            const int c = label[v];
            if (c == -1 || cluster_size[c] <= cap) continue;
            std::vector<int> links(k, 0);
            for (int w : g.neighbors(v))
                if (label[w] != -1) ++links[label[w]];
            int best = -1;
            for (int c2 = 0; c2 < k; ++c2)
                if (c2 != c && links[c2] > 0 && cluster_size[c2] < cap &&
                    (best == -1 || links[c2] > links[best]))
                    best = c2;
            if (best != -1) {
                label[v] = best;
                --cluster_size[c];
                ++cluster_size[best];
                moved = true;
            }
        }
    }
    // refinement: move each node to the label most common among its
    // neighbors when that strictly beats its current cluster and the target
    // has room. The capped BFS growth can shred dense communities across
    // clusters; a few majority sweeps snap them back together, which keeps
    // patch boundaries (and the one-hop patch expansion) small. Every move
    // strictly increases the intra-cluster edge count, so this terminates;
    // the sweep bound is just a cost guard.
    for (int sweep = 0; sweep < 20; ++sweep) {
        bool moved = false;
        for (int v = 0; v < n; ++v) {
            const int c = label[v];
            if (c == -1 || cluster_size[c] <= 1) continue;
            std::vector<int> links(k, 0);
            for (int w : g.neighbors(v))
                if (label[w] != -1) ++links[label[w]];
            int best = c;
            for (int c2 = 0; c2 < k; ++c2)
                if (c2 != c && cluster_size[c2] < cap && links[c2] > links[best])
                    best = c2;
            if (best != c && links[best] > links[c]) {
                label[v] = best;
                --cluster_size[c];
                ++cluster_size[best];
                moved = true;
            }
        }
        if (!moved) break;
    }
    // anything still unlabeled lives in a component with no seed (only
    // possible when the graph has more components than k): sweep whole
    // components into the currently smallest cluster
    for (int v = 0; v < n; ++v) {
        if (label[v] != -1) continue;
        int target = static_cast<int>(std::min_element(cluster_size.begin(), cluster_size.end()) -
                                      cluster_size.begin());
        std::queue<int> q;
        q.push(v);
        label[v] = target;
        ++cluster_size[target];
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int w : g.neighbors(u))
                if (label[w] == -1) {
                    label[w] = target;
                    ++cluster_size[target];
                    q.push(w);
                }
        }
    }
    return label;
}

namespace detail {

inline void induce_patch_edges(const Graph& g, Patch& p, std::vector<int>& local_id) {
    for (std::size_t i = 0; i < p.nodes.size(); ++i) local_id[p.nodes[i]] = static_cast<int>(i);
    p.edges.clear();
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        const int u = p.nodes[i];
        for (int v : g.neighbors(u))
            if (v > u && local_id[v] != -1)
                p.edges.emplace_back(static_cast<int>(i), local_id[v]);
    }
    for (int v : p.nodes) local_id[v] = -1;
}

inline std::vector<int> find_patch_components(int k, const std::vector<PatchGraphEdge>& edges) {
    std::vector<int> comp(k);
    std::iota(comp.begin(), comp.end(), 0);
    // union-find with path halving
    auto find = [&](int x) {
        while (comp[x] != x) {
            comp[x] = comp[comp[x]];
            x = comp[x];
        }
        return x;
    };
    for (const auto& e : edges) {
        int a = find(e.i), b = find(e.j);
        if (a != b) comp[std::max(a, b)] = std::min(a, b);
    }
    for (int i = 0; i < k; ++i) comp[i] = find(i);
    return comp;
}

}  // namespace detail

// Build PatchSet + PatchGraph from node lists. Recomputes induced edges,
// overlaps, and repairs patch-graph connectivity by copying high-degree
// nodes between patches whose clusters touch in G.
inline std::pair<PatchSet, PatchGraph> finalize_patches(const Graph& g,
                                                        std::vector<std::vector<int>> node_lists,
                                                        const std::vector<int>& assignment,
                                                        int min_overlap) {
    const int n = g.num_nodes();
    const int k = static_cast<int>(node_lists.size());
    PatchSet ps;
    ps.n_global = n;
    ps.patches.resize(k);
    for (int j = 0; j < k; ++j) {
        auto& nodes = node_lists[j];
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        ps.patches[j].nodes = std::move(nodes);
        if (ps.patches[j].nodes.empty())
            throw ContractViolation("empty patch " + std::to_string(j));
    }
    // patches smaller than min_overlap are not rejected here: they sit
    // isolated in the patch graph, so connectivity repair below grows them
    if (k > 1 && min_overlap > n)
        throw ParameterError("min_overlap " + std::to_string(min_overlap) +
                             " exceeds graph size " + std::to_string(n));

    // cluster adjacency in G: candidate pairs for connectivity repair
    std::set<std::pair<int, int>> cluster_adj;
    if (!assignment.empty()) {
        for (auto [u, v] : g.edges()) {
            int a = assignment[u], b = assignment[v];
            if (a != b) cluster_adj.insert({std::min(a, b), std::max(a, b)});
        }
    }

    std::vector<int> local_id(n, -1);
    PatchGraph pg;
    pg.k = k;
    pg.min_overlap = min_overlap;

    for (;;) {
        // overlaps from membership lists
        ps.membership.assign(n, {});
        for (int j = 0; j < k; ++j)
            for (int v : ps.patches[j].nodes) ps.membership[v].push_back(j);
        std::map<std::pair<int, int>, std::vector<int>> overlaps;
        for (int v = 0; v < n; ++v) {
            const auto& m = ps.membership[v];
            for (std::size_t a = 0; a < m.size(); ++a)
                for (std::size_t b = a + 1; b < m.size(); ++b)
                    overlaps[{m[a], m[b]}].push_back(v);
        }
        pg.edges.clear();
        pg.max_overlap = 0;
        for (auto& [key, nodes] : overlaps) {
            pg.max_overlap = std::max(pg.max_overlap, static_cast<int>(nodes.size()));
            if (static_cast<int>(nodes.size()) >= min_overlap)
                pg.edges.push_back({key.first, key.second, nodes});
        }

        auto comp = detail::find_patch_components(k, pg.edges);
        bool connected = std::all_of(comp.begin(), comp.end(), [&](int c) { return c == comp[0]; });
        if (connected || k == 1) break;

        // pick the repair pair bridging two components: prefer touching
        // clusters, then largest current overlap, then lowest ids
        int best_i = -1, best_j = -1;
        std::int64_t best_score = -1;
        for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
                if (comp[i] == comp[j]) continue;
                auto it = overlaps.find({i, j});
                std::int64_t ov = it == overlaps.end() ? 0 : static_cast<std::int64_t>(it->second.size());
                std::int64_t score = ov + (cluster_adj.count({i, j}) ? 1000000 : 0);
                if (score > best_score) {
                    best_score = score;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_i == -1) break;  // G itself disconnected; nothing to bridge

        // copy highest-degree nodes between the two patches until the
        // overlap reaches d (alternating directions, ties by lowest id)
        auto& pi = ps.patches[best_i].nodes;
        auto& pj = ps.patches[best_j].nodes;
        auto it = overlaps.find({best_i, best_j});
        int have = it == overlaps.end() ? 0 : static_cast<int>(it->second.size());
        bool from_i = true;
        int fails = 0;
        while (have < min_overlap && fails < 2) {
            const auto& src = from_i ? pi : pj;
            auto& dst = from_i ? pj : pi;
            int pick = -1;
            for (int v : src)
                if (!std::binary_search(dst.begin(), dst.end(), v) &&
                    (pick == -1 || g.degree(v) > g.degree(pick)))
                    pick = v;
            if (pick != -1) {
                dst.insert(std::lower_bound(dst.begin(), dst.end(), pick), pick);
                ++have;
                fails = 0;
            } else {
                ++fails;
            }
            from_i = !from_i;
        }
        if (have < min_overlap)
            throw ParameterError("cannot reach min_overlap between patches " +
                                 std::to_string(best_i) + " and " + std::to_string(best_j));
    }

    for (auto& p : ps.patches) detail::induce_patch_edges(g, p, local_id);

    // edge cover sanity: every global edge must be induced somewhere
    if (!assignment.empty()) {
        for (auto [u, v] : g.edges()) {
            bool covered = false;
            for (int j : ps.membership[u])
                if (std::binary_search(ps.patches[j].nodes.begin(), ps.patches[j].nodes.end(), v)) {
                    covered = true;
                    break;
                }
            if (!covered) throw ContractViolation("edge cover violated by patch construction");
        }
    }
    return {std::move(ps), std::move(pg)};
}

// Patch j = cluster j plus every node one hop away, induced; this covers
// every cut edge inside at least one patch.
inline std::pair<PatchSet, PatchGraph> build_patches(const Graph& g,
                                                     const std::vector<int>& assignment,
                                                     int min_overlap) {
    const int n = g.num_nodes();
    if (static_cast<int>(assignment.size()) != n)
        throw ContractViolation("assignment size mismatch");
    int k = 0;
    for (int a : assignment) k = std::max(k, a + 1);
    std::vector<std::vector<int>> lists(k);
    for (int v = 0; v < n; ++v) {
        lists[assignment[v]].push_back(v);
        for (int w : g.neighbors(v)) lists[assignment[w]].push_back(v);
    }
    return finalize_patches(g, std::move(lists), assignment, min_overlap);
}

inline void save_patches(const std::string& path, const PatchSet& ps, int min_overlap) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write patch file: " + path);
    out << ps.k() << " " << min_overlap << "\n";
    for (const auto& p : ps.patches) {
        for (std::size_t i = 0; i < p.nodes.size(); ++i) out << (i ? " " : "") << p.nodes[i];
        out << "\n";
    }
}

inline std::pair<PatchSet, PatchGraph> load_patches(const std::string& path, const Graph& g) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open patch file: " + path);
    int k = 0, d = 0;
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty patch file: " + path);
    {
        std::istringstream h(line);
        if (!(h >> k >> d) || k < 1) throw FormatError("bad patch file header in " + path);
    }
    std::vector<std::vector<int>> lists(k);
    for (int j = 0; j < k; ++j) {
        if (!std::getline(in, line)) throw FormatError("truncated patch file: " + path);
        std::istringstream ls(line);
        int v;
        while (ls >> v) {
            if (v < 0 || v >= g.num_nodes()) throw FormatError("patch node id out of range");
            lists[j].push_back(v);
        }
    }
    return finalize_patches(g, std::move(lists), {}, d);
}

}  // namespace l2g2g
