#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "l2g2g/errors.hpp"
#include "l2g2g/graph.hpp"
#include "l2g2g/metrics.hpp"
#include "l2g2g/partition.hpp"
#include "l2g2g/sbm.hpp"
#include "l2g2g/train.hpp"

namespace l2g2g {

struct BenchConfig {
    std::vector<std::string> datasets = {"sbm-small"};  // named SBMs or "file:<prefix>"
    std::vector<std::string> regimes = {"gae", "fastgae", "gae-l2g", "l2g2g"};
    std::vector<int> k_values = {10};
    int epochs = 200;
    double lr = 0.001;
    int sync_every = 10;
    int min_overlap = 32;
    int n_seeds = 10;
    std::uint64_t seed_base = 0;
    double test_frac = 0.10;
    double val_frac = 0.05;
    bool reconstruct_full = false;  // score all M edges vs M non-edges instead
    std::string out_dir = ".";

    static BenchConfig from_file(const std::string& path);
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = item.find_last_not_of(" \t");
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

}  // namespace detail

// Flat key=value config; '#' starts a comment, lists are comma separated.
inline BenchConfig BenchConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open bench config: " + path);
    BenchConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw FormatError("bad config line " + std::to_string(lineno) + " in " + path);
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "datasets") cfg.datasets = detail::split_list(val);
            else if (key == "regimes") cfg.regimes = detail::split_list(val);
            else if (key == "k") {
                cfg.k_values.clear();
                for (const auto& v : detail::split_list(val)) cfg.k_values.push_back(std::stoi(v));
            } else if (key == "epochs") cfg.epochs = std::stoi(val);
            else if (key == "lr") cfg.lr = std::stod(val);
            else if (key == "sync_every") cfg.sync_every = std::stoi(val);
            else if (key == "min_overlap") cfg.min_overlap = std::stoi(val);
            else if (key == "seeds") cfg.n_seeds = std::stoi(val);
            else if (key == "seed_base") cfg.seed_base = std::stoull(val);
            else if (key == "test_frac") cfg.test_frac = std::stod(val);
            else if (key == "val_frac") cfg.val_frac = std::stod(val);
            else if (key == "reconstruct_full") cfg.reconstruct_full = (val == "1" || val == "true");
            else if (key == "out_dir") cfg.out_dir = val;
            else throw FormatError("unknown config key '" + key + "' in " + path);
        } catch (const std::invalid_argument&) {
            throw FormatError("bad value for '" + key + "' in " + path);
        }
    }
    return cfg;
}

struct RunRecord {
    std::string dataset, regime;
    int k = 0;
    int seed = 0;
    double auc_pct = 0, ap_pct = 0, epoch_time_s = 0;
    bool ok = false;
    std::string error;
};

struct AggregateRow {
    std::string dataset, regime;
    int k = 0;
    double auc_mean = 0, auc_std = 0, ap_mean = 0, ap_std = 0, epoch_time_mean = 0;
    int n_ok = 0, n_seeds = 0;

    bool complete() const { return n_ok == n_seeds; }
};

struct BenchResult {
    std::vector<RunRecord> runs;
    std::vector<AggregateRow> table;
};

inline Graph load_bench_dataset(const std::string& name, std::uint64_t seed) {
    if (name.rfind("file:", 0) == 0) {
        const std::string prefix = name.substr(5);
        return load_graph(prefix + ".edges", prefix + ".features");
    }
    return generate_sbm(named_sbm_config(name, seed));
}

// One (dataset graph, regime, k, seed) cell: split, partition, train, score.
inline RunRecord run_single(const Graph& g, const std::string& dataset, const std::string& regime,
                            int k, int seed, const BenchConfig& cfg) {
    RunRecord rec{dataset, regime, k, seed, 0, 0, 0, false, ""};
    try {
        const std::uint64_t run_seed = derive_seed(cfg.seed_base, dataset) ^ static_cast<std::uint64_t>(seed);
        std::vector<std::pair<int, int>> eval_pos, eval_neg;
        const Graph* train_graph = &g;
        std::optional<EdgeSplit> split;
        if (cfg.reconstruct_full) {
            eval_pos = g.edges();
            Rng rng = derive_rng(run_seed, "recon-neg");
            std::set<std::pair<int, int>> seen;
            const std::int64_t max_tries = 200 * g.num_edges() + 1000;
            std::int64_t tries = 0;
            while (static_cast<std::int64_t>(eval_neg.size()) < g.num_edges()) {
                if (++tries > max_tries)
                    throw ParameterError("non-edge sampling exhausted");
                int u = static_cast<int>(rng.next_below(g.num_nodes()));
                int v = static_cast<int>(rng.next_below(g.num_nodes()));
                if (u == v) continue;
                if (u > v) std::swap(u, v);
                if (g.has_edge(u, v) || seen.count({u, v})) continue;
                seen.insert({u, v});
                eval_neg.emplace_back(u, v);
            }
        } else {
            split = split_edges(g, cfg.test_frac, cfg.val_frac, derive_seed(run_seed, "split"));
            eval_pos = split->test_pos;
            eval_neg = split->test_neg;
            train_graph = &split->train;
        }

        TrainConfig tc;
        tc.epochs = cfg.epochs;
        tc.lr = cfg.lr;
        tc.k = k;
        tc.min_overlap = cfg.min_overlap;
        tc.sync_every = cfg.sync_every;
        tc.seed = run_seed;
        tc.regime = regime;

        TrainReport report;
        if (regime == "gae") {
            report = train_gae(*train_graph, tc);
        } else if (regime == "fastgae") {
            report = train_fastgae(*train_graph, tc);
        } else if (regime == "gae-l2g" || regime == "l2g2g") {
            auto assignment = cluster_nodes(*train_graph, k, derive_seed(run_seed, "partition"));
            auto [ps, pg] = build_patches(*train_graph, assignment, cfg.min_overlap);
            report = regime == "gae-l2g" ? train_gae_l2g(*train_graph, ps, pg, tc)
                                         : train_l2g2g(*train_graph, ps, pg, tc);
        } else {
            throw ParameterError("unknown regime: " + regime);
        }

        auto [scores, labels] = score_pairs(report.embedding, eval_pos, eval_neg);
        rec.auc_pct = 100.0 * auc(scores, labels);
        rec.ap_pct = 100.0 * ap(scores, labels);
        rec.epoch_time_s = report.mean_epoch_seconds();
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

inline AggregateRow aggregate_runs(const std::vector<RunRecord>& cell) {
    AggregateRow row;
    row.n_seeds = static_cast<int>(cell.size());
    if (!cell.empty()) {
        row.dataset = cell[0].dataset;
        row.regime = cell[0].regime;
        row.k = cell[0].k;
    }
    std::vector<double> aucs, aps, times;
    for (const auto& r : cell)
        if (r.ok) {
            aucs.push_back(r.auc_pct);
            aps.push_back(r.ap_pct);
            times.push_back(r.epoch_time_s);
        }
    row.n_ok = static_cast<int>(aucs.size());
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto sample_std = [&](const std::vector<double>& v, double m) {
        if (v.size() < 2) return 0.0;
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    row.auc_mean = mean(aucs);
    row.auc_std = sample_std(aucs, row.auc_mean);
    row.ap_mean = mean(aps);
    row.ap_std = sample_std(aps, row.ap_mean);
    row.epoch_time_mean = mean(times);
    return row;
}

inline BenchResult run_benchmark(const BenchConfig& cfg,
                                 std::ostream* progress = nullptr) {
    BenchResult result;
    for (const auto& dataset : cfg.datasets) {
        Graph g = load_bench_dataset(dataset, cfg.seed_base);
        for (int k : cfg.k_values) {
            for (const auto& regime : cfg.regimes) {
                std::vector<RunRecord> cell;
                for (int seed = 0; seed < cfg.n_seeds; ++seed) {
                    RunRecord rec = run_single(g, dataset, regime, k, seed, cfg);
                    if (progress)
                        *progress << dataset << " " << regime << " k=" << k << " seed=" << seed
                                  << (rec.ok ? " auc=" + std::to_string(rec.auc_pct)
                                             : " FAILED: " + rec.error)
                                  << "\n"
                                  << std::flush;
                    cell.push_back(rec);
                    result.runs.push_back(std::move(rec));
                }
                result.table.push_back(aggregate_runs(cell));
            }
        }
    }
    return result;
}

// --- reporting ---------------------------------------------------------------

inline void write_runs_csv(const std::string& path, const std::vector<RunRecord>& runs) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    out << "dataset,regime,k,seed,auc,ap,epoch_time_s\n";
    out.precision(10);
    for (const auto& r : runs) {
        out << r.dataset << "," << r.regime << "," << r.k << "," << r.seed << ",";
        if (r.ok)
            out << r.auc_pct << "," << r.ap_pct << "," << r.epoch_time_s << "\n";
        else
            out << ",,\n";
    }
}

inline void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& table) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    out << "dataset,regime,k,auc_mean,auc_std,ap_mean,ap_std,epoch_time_s_mean,n_ok,n_seeds,"
           "complete\n";
    out.precision(10);
    for (const auto& r : table)
        out << r.dataset << "," << r.regime << "," << r.k << "," << r.auc_mean << "," << r.auc_std
            << "," << r.ap_mean << "," << r.ap_std << "," << r.epoch_time_mean << "," << r.n_ok
            << "," << r.n_seeds << "," << (r.complete() ? 1 : 0) << "\n";
}

inline nlohmann::json bench_result_json(const BenchResult& result) {
    nlohmann::json j;
    j["runs"] = nlohmann::json::array();
    for (const auto& r : result.runs) {
        nlohmann::json run{{"dataset", r.dataset}, {"regime", r.regime}, {"k", r.k},
                           {"seed", r.seed},       {"ok", r.ok}};
        if (r.ok) {
            run["auc"] = r.auc_pct;
            run["ap"] = r.ap_pct;
            run["epoch_time_s"] = r.epoch_time_s;
        } else {
            run["error"] = r.error;
        }
        j["runs"].push_back(std::move(run));
    }
    j["aggregate"] = nlohmann::json::array();
    for (const auto& r : result.table)
        j["aggregate"].push_back({{"dataset", r.dataset},
                                  {"regime", r.regime},
                                  {"k", r.k},
                                  {"auc_mean", r.auc_mean},
                                  {"auc_std", r.auc_std},
                                  {"ap_mean", r.ap_mean},
                                  {"ap_std", r.ap_std},
                                  {"epoch_time_s_mean", r.epoch_time_mean},
                                  {"n_ok", r.n_ok},
                                  {"n_seeds", r.n_seeds},
                                  {"complete", r.complete()}});
    return j;
}

// Dataset report: expected vs published edge counts for the four SBM
// configurations, under both the nominal probabilities and the ones that
// reproduce the published counts.
inline nlohmann::json sbm_dataset_report() {
    const std::map<std::string, double> reported = {{"sbm-small", 104485},
                                                    {"sbm-large-sparse", 99231},
                                                    {"sbm-large", 1493135},
                                                    {"sbm-large-dense", 14897099}};
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [name, m_reported] : reported) {
        SbmConfig nominal = named_sbm_config(name, 0, /*use_nominal=*/true);
        SbmConfig effective = named_sbm_config(name, 0, /*use_nominal=*/false);
        j.push_back({{"dataset", name},
                     {"reported_edges", m_reported},
                     {"nominal", {{"p_in", nominal.p_in},
                                  {"p_out", nominal.p_out},
                                  {"expected_edges", sbm_expected_edges(nominal)},
                                  {"stddev", sbm_edge_count_stddev(nominal)},
                                  {"delta_vs_reported", sbm_expected_edges(nominal) - m_reported}}},
                     {"effective", {{"p_in", effective.p_in},
                                    {"p_out", effective.p_out},
                                    {"expected_edges", sbm_expected_edges(effective)},
                                    {"stddev", sbm_edge_count_stddev(effective)},
                                    {"delta_vs_reported",
                                     sbm_expected_edges(effective) - m_reported}}}});
    }
    return j;
}

}  // namespace l2g2g
