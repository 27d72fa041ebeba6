// Command-line front end: SBM generation, partitioning, training, evaluation,
// and the multi-seed benchmark/ablation runners.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "l2g2g/l2g2g.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

l2g2g::Graph load_prefixed(const std::string& prefix) {
    return l2g2g::load_graph(prefix + ".edges", prefix + ".features");
}

json report_json(const l2g2g::TrainReport& report) {
    json j;
    j["regime"] = report.regime;
    j["epochs"] = report.epoch_loss.size();
    j["epoch_loss"] = report.epoch_loss;
    j["epoch_seconds"] = report.epoch_seconds;
    j["mean_epoch_seconds"] = report.mean_epoch_seconds();
    return j;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw l2g2g::FormatError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch-based graph autoencoder embedding and benchmark suite"};
    app.require_subcommand(1);

    // generate-sbm
    auto* gen = app.add_subcommand("generate-sbm", "Generate an SBM graph with one-hot features");
    std::string gen_name, gen_out = "sbm";
    l2g2g::SbmConfig sbm;
    bool gen_nominal = false, gen_report = false;
    gen->add_option("--name", gen_name, "named config: sbm-small|sbm-large-sparse|sbm-large|sbm-large-dense");
    gen->add_option("--blocks", sbm.n_blocks, "number of blocks");
    gen->add_option("--block-size", sbm.block_size, "nodes per block");
    gen->add_option("--p-in", sbm.p_in, "within-block edge probability");
    gen->add_option("--p-out", sbm.p_out, "between-block edge probability");
    gen->add_option("--seed", sbm.seed, "generator seed");
    gen->add_flag("--nominal", gen_nominal, "with --name: use the nominal probabilities");
    gen->add_flag("--report", gen_report, "also write the dataset edge-count report");
    gen->add_option("--out", gen_out, "output path prefix (.edges/.features)");

    // partition
    auto* part = app.add_subcommand("partition", "Split a graph into overlapping patches");
    std::string part_graph, part_out = "patches.txt";
    int part_k = 10, part_d = 32;
    std::uint64_t part_seed = 0;
    part->add_option("--graph", part_graph, "graph path prefix")->required();
    part->add_option("--k", part_k, "number of patches");
    part->add_option("--min-overlap", part_d, "minimum pairwise overlap d");
    part->add_option("--seed", part_seed, "clustering seed");
    part->add_option("--out", part_out, "patch file");

    // train
    auto* train = app.add_subcommand("train", "Train one regime and write report + embedding");
    std::string train_graph, train_out = ".", train_patches;
    l2g2g::TrainConfig tc;
    train->add_option("--regime", tc.regime, "gae|fastgae|gae-l2g|l2g2g")->required();
    train->add_option("--graph", train_graph, "graph path prefix")->required();
    train->add_option("--epochs", tc.epochs, "training epochs");
    train->add_option("--lr", tc.lr, "Adam learning rate");
    train->add_option("--k", tc.k, "number of patches (L2G regimes)");
    train->add_option("--min-overlap", tc.min_overlap, "minimum patch overlap d");
    train->add_option("--sync-every", tc.sync_every, "epochs between transform refreshes");
    train->add_option("--fastgae-sample", tc.fastgae_sample, "FastGAE sample size (0 = floor(sqrt(N)))");
    train->add_option("--seed", tc.seed, "run seed");
    train->add_option("--patches", train_patches, "reuse a patch file instead of partitioning");
    train->add_option("--out", train_out, "output directory");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score an embedding against a graph");
    std::string eval_graph, eval_embedding;
    std::uint64_t eval_seed = 0;
    double eval_test = 0.10, eval_val = 0.05;
    bool eval_full = false;
    eval->add_option("--graph", eval_graph, "graph path prefix")->required();
    eval->add_option("--embedding", eval_embedding, "embedding matrix file")->required();
    eval->add_option("--seed", eval_seed, "split / negative-sampling seed");
    eval->add_option("--test-frac", eval_test, "held-out test fraction");
    eval->add_option("--val-frac", eval_val, "held-out validation fraction");
    eval->add_flag("--reconstruct-full", eval_full, "score all edges vs sampled non-edges");

    // bench / ablate
    auto* bench = app.add_subcommand("bench", "Multi-seed benchmark table (CSV + JSON)");
    std::string bench_config, bench_out;
    bench->add_option("--config", bench_config, "flat key=value config file")->required();
    bench->add_option("--out", bench_out, "output directory (overrides config)");

    auto* ablate = app.add_subcommand("ablate", "Patch-count sweep of the benchmark");
    std::string abl_config, abl_out, abl_klist = "2,3,4,5,6,7,8,9,10";
    ablate->add_option("--config", abl_config, "flat key=value config file")->required();
    ablate->add_option("--k-list", abl_klist, "comma-separated patch counts");
    ablate->add_option("--out", abl_out, "output directory (overrides config)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            l2g2g::SbmConfig cfg =
                gen_name.empty() ? sbm : l2g2g::named_sbm_config(gen_name, sbm.seed, gen_nominal);
            l2g2g::Graph g = l2g2g::generate_sbm(cfg);
            l2g2g::save_graph(g, gen_out + ".edges", gen_out + ".features");
            std::cout << "N=" << g.num_nodes() << " M=" << g.num_edges()
                      << " expected=" << l2g2g::sbm_expected_edges(cfg) << "\n";
            if (gen_report) write_json(gen_out + ".dataset_report.json", l2g2g::sbm_dataset_report());
        } else if (part->parsed()) {
            l2g2g::Graph g = load_prefixed(part_graph);
            auto assignment = l2g2g::cluster_nodes(g, part_k, part_seed);
            auto [ps, pg] = l2g2g::build_patches(g, assignment, part_d);
            l2g2g::save_patches(part_out, ps, part_d);
            std::cout << "k=" << ps.k() << " patch_graph_edges=" << pg.edges.size()
                      << " max_overlap=" << pg.max_overlap
                      << " connected=" << (pg.connected() ? "yes" : "no") << "\n";
        } else if (train->parsed()) {
            l2g2g::Graph g = load_prefixed(train_graph);
            fs::create_directories(train_out);
            l2g2g::TrainReport report;
            if (tc.regime == "gae") {
                report = l2g2g::train_gae(g, tc);
            } else if (tc.regime == "fastgae") {
                report = l2g2g::train_fastgae(g, tc);
            } else if (tc.regime == "gae-l2g" || tc.regime == "l2g2g") {
                std::pair<l2g2g::PatchSet, l2g2g::PatchGraph> patches =
                    train_patches.empty()
                        ? l2g2g::build_patches(
                              g, l2g2g::cluster_nodes(g, tc.k, l2g2g::derive_seed(tc.seed, "partition")),
                              tc.min_overlap)
                        : l2g2g::load_patches(train_patches, g);
                report = tc.regime == "gae-l2g"
                             ? l2g2g::train_gae_l2g(g, patches.first, patches.second, tc)
                             : l2g2g::train_l2g2g(g, patches.first, patches.second, tc);
            } else {
                throw l2g2g::ParameterError("unknown regime: " + tc.regime);
            }
            write_json(train_out + "/report.json", report_json(report));
            l2g2g::save_embedding(train_out + "/embedding.txt", report.embedding);
            if (!report.transforms.empty())
                l2g2g::save_transforms(train_out + "/transforms.txt", report.transforms);
            std::cout << "final_loss=" << report.epoch_loss.back()
                      << " mean_epoch_seconds=" << report.mean_epoch_seconds() << "\n";
        } else if (eval->parsed()) {
            l2g2g::Graph g = load_prefixed(eval_graph);
            l2g2g::Matrix z = l2g2g::load_embedding(eval_embedding);
            if (z.rows() != g.num_nodes())
                throw l2g2g::ParameterError("embedding rows do not match graph nodes");
            std::vector<std::pair<int, int>> pos, neg;
            if (eval_full) {
                pos = g.edges();
                l2g2g::Rng rng = l2g2g::derive_rng(eval_seed, "recon-neg");
                std::set<std::pair<int, int>> seen;
                while (neg.size() < pos.size()) {
                    int u = static_cast<int>(rng.next_below(g.num_nodes()));
                    int v = static_cast<int>(rng.next_below(g.num_nodes()));
                    if (u == v) continue;
                    if (u > v) std::swap(u, v);
                    if (g.has_edge(u, v) || seen.count({u, v})) continue;
                    seen.insert({u, v});
                    neg.emplace_back(u, v);
                }
            } else {
                auto split = l2g2g::split_edges(g, eval_test, eval_val, eval_seed);
                pos = split.test_pos;
                neg = split.test_neg;
            }
            auto [scores, labels] = l2g2g::score_pairs(z, pos, neg);
            json j{{"auc", 100.0 * l2g2g::auc(scores, labels)},
                   {"ap", 100.0 * l2g2g::ap(scores, labels)},
                   {"n_pos", pos.size()},
                   {"n_neg", neg.size()}};
            std::cout << j.dump(2) << "\n";
        } else if (bench->parsed() || ablate->parsed()) {
            l2g2g::BenchConfig cfg =
                l2g2g::BenchConfig::from_file(bench->parsed() ? bench_config : abl_config);
            if (ablate->parsed()) {
                cfg.k_values.clear();
                for (const auto& v : l2g2g::detail::split_list(abl_klist))
                    cfg.k_values.push_back(std::stoi(v));
            }
            const std::string& out_override = bench->parsed() ? bench_out : abl_out;
            if (!out_override.empty()) cfg.out_dir = out_override;
            fs::create_directories(cfg.out_dir);
            l2g2g::BenchResult result = l2g2g::run_benchmark(cfg, &std::cerr);
            l2g2g::write_runs_csv(cfg.out_dir + "/runs.csv", result.runs);
            l2g2g::write_aggregate_csv(cfg.out_dir + "/aggregate.csv", result.table);
            write_json(cfg.out_dir + "/results.json", l2g2g::bench_result_json(result));
            write_json(cfg.out_dir + "/dataset_report.json", l2g2g::sbm_dataset_report());
            bool all_ok = true;
            for (const auto& row : result.table) all_ok = all_ok && row.complete();
            std::cout << "cells=" << result.table.size() << (all_ok ? "" : " (incomplete)") << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
