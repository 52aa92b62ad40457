// Command-line front end: workspace-oriented subcommands that compose on
// an output directory, plus `run` for the full pipeline.
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "llm4grn/causal_synth.hpp"
#include "llm4grn/grn_inference.hpp"
#include "llm4grn/llm_kb.hpp"
#include "llm4grn/pipeline.hpp"
#include "llm4grn/version.hpp"

namespace fs = std::filesystem;
using namespace llm4grn;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    bool offline = false;
};

RunConfig load_cfg(const GlobalArgs& args) {
    if (args.config_path.empty()) throw ConfigError("--config is required for this command");
    RunConfig cfg = load_run_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    return cfg;
}

LlmOptions llm_options_from(const RunConfig& cfg) {
    LlmOptions options;
    options.model = cfg.model;
    options.temperature = cfg.temperature;
    options.max_retries = cfg.max_retries;
    options.concurrency = cfg.concurrency;
    return options;
}

ExpressionMatrix load_workspace_matrix(const fs::path& path) {
    if (!fs::exists(path))
        throw ConfigError(path.string() + " not found; run `ingest` first");
    return load_matrix(path, MatrixFormat::csv);
}

// train.csv and partition.json as produced by `ingest` and `extract-tfs`.
std::pair<ExpressionMatrix, TfPartition> load_train_and_partition(const RunConfig& cfg) {
    ExpressionMatrix train = load_workspace_matrix(cfg.out_dir / "data" / "train.csv");
    const fs::path partition_path = cfg.out_dir / "partition.json";
    if (!fs::exists(partition_path))
        throw ConfigError(partition_path.string() + " not found; run `extract-tfs` first");
    TfPartition partition = read_partition_json(train.genes, partition_path);
    return {std::move(train), std::move(partition)};
}

void write_grn_artifact(const Grn& grn, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_grn(grn, path);
    std::printf("wrote %s (density %s)\n", path.string().c_str(),
                format_double(density(grn)).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GRN construction, causal scRNA-seq synthesis, and fidelity evaluation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "TOML run configuration");
    CLI::Option* seed_opt =
        app.add_option("--seed", args.seed, "override the configured base seed");
    app.add_option("--out-dir", args.out_dir, "override the configured output directory");
    app.add_flag("--offline", args.offline,
                 "replay LLM fixtures only; never touch the network");

    auto* ingest = app.add_subcommand(
        "ingest", "load the dataset, filter genes, and write train/val/test splits");
    ingest->fallthrough();

    auto* extract = app.add_subcommand(
        "extract-tfs", "partition the vocabulary into TFs and targets, writing partition.json");
    extract->fallthrough();

    auto* infer = app.add_subcommand(
        "infer-grn", "regression-importance GRN from the training split");
    infer->fallthrough();
    int infer_k = 10;
    std::string infer_out, importance_out;
    infer->add_option("--k", infer_k, "regulators per target");
    infer->add_option("--out", infer_out, "GRN output path (default <out-dir>/grn-statistical.tsv)");
    infer->add_option("--importance", importance_out, "also dump the full importance table");

    auto* random_cmd = app.add_subcommand("random-grn", "uniformly random GRN over the partition");
    random_cmd->fallthrough();
    int random_k = 10;
    std::string random_out;
    random_cmd->add_option("--k", random_k, "regulators per target");
    random_cmd->add_option("--out", random_out, "GRN output path (default <out-dir>/grn-random.tsv)");

    auto* llm_cmd = app.add_subcommand("llm-grn", "LLM-proposed GRN over the partition");
    llm_cmd->fallthrough();
    int llm_k = 10;
    std::string llm_out;
    llm_cmd->add_option("--k", llm_k, "regulators per target");
    llm_cmd->add_option("--out", llm_out, "GRN output path (default <out-dir>/grn-llm.tsv)");

    auto* overlap_cmd = app.add_subcommand("overlap", "edge overlap between two saved GRNs");
    std::string overlap_a, overlap_b;
    overlap_cmd->add_option("--a", overlap_a, "first GRN path")->required();
    overlap_cmd->add_option("--b", overlap_b, "second GRN path")->required();

    auto* synth = app.add_subcommand(
        "synthesize", "fit the two-stage model on the training split and sample cells");
    synth->fallthrough();
    std::string synth_grn, synth_out;
    std::size_t synth_cells = 0;
    synth->add_option("--grn", synth_grn, "GRN path (default <out-dir>/grn-statistical.tsv)");
    synth->add_option("--cells", synth_cells, "cells to sample (default from config)");
    synth->add_option("--out", synth_out, "output CSV (default <out-dir>/synthetic.csv)");

    auto* evaluate = app.add_subcommand(
        "evaluate", "fidelity metrics of a synthetic matrix against the test split");
    evaluate->fallthrough();
    std::string eval_synth, eval_out, eval_label = "evaluate";
    evaluate->add_option("--synthetic", eval_synth, "synthetic matrix CSV")->required();
    evaluate->add_option("--out", eval_out, "also write the metrics as CSV");
    evaluate->add_option("--label", eval_label, "arm label used in the report row");

    auto* report_cmd = app.add_subcommand(
        "report", "aggregate manifests into a metrics table plus the GRN overlap matrix");
    std::vector<std::string> report_manifests;
    std::string report_out = ".";
    report_cmd->add_option("manifests", report_manifests, "manifest.json paths")
        ->required()
        ->expected(-1);
    report_cmd->add_option("--report-dir", report_out, "directory for report files");

    auto* plot = app.add_subcommand("plot", "PCA projection of real vs synthetic cells");
    std::string plot_real, plot_synth, plot_svg = "projection.svg", plot_csv = "projection.csv";
    int plot_pcs = 2;
    plot->add_option("--real", plot_real, "real matrix CSV")->required();
    plot->add_option("--synthetic", plot_synth, "synthetic matrix CSV")->required();
    plot->add_option("--svg", plot_svg, "SVG output path");
    plot->add_option("--csv", plot_csv, "coordinates CSV output path");
    plot->add_option("--pcs", plot_pcs, "components to fit (first two are drawn)");

    auto* run = app.add_subcommand("run", "full pipeline: ingest through reports");
    run->fallthrough();
    int parallel_arms = 1;
    run->add_option("--parallel-arms", parallel_arms, "run independent arms concurrently");

    try {
        app.parse(argc, argv);
        args.seed_set = seed_opt->count() > 0;

        if (*ingest) {
            const RunConfig cfg = load_cfg(args);
            validate_run_config(cfg, args.offline);
            const ExpressionMatrix full = load_matrix(cfg.data_path, cfg.data_format);
            PreprocessConfig pre;
            pre.min_cells_expressed = cfg.effective_min_cells();
            pre.n_top_genes = cfg.n_top_genes;
            SplitSpec spec;
            spec.test_size = cfg.test_size;
            spec.val_size = cfg.val_size;
            spec.seed = fnv1a64_mix(cfg.seed, "split");
            const SplitResult split = preprocess(full, pre, spec);
            fs::create_directories(cfg.out_dir / "data");
            write_matrix_csv(split.train, cfg.out_dir / "data" / "train.csv");
            write_matrix_csv(split.val, cfg.out_dir / "data" / "val.csv");
            write_matrix_csv(split.test, cfg.out_dir / "data" / "test.csv");
            std::printf("wrote %s: train %lld, val %lld, test %lld cells, %lld genes\n",
                        (cfg.out_dir / "data").string().c_str(),
                        static_cast<long long>(split.train.n_cells()),
                        static_cast<long long>(split.val.n_cells()),
                        static_cast<long long>(split.test.n_cells()),
                        static_cast<long long>(split.train.n_genes()));
        } else if (*extract) {
            const RunConfig cfg = load_cfg(args);
            const ExpressionMatrix train = load_workspace_matrix(cfg.out_dir / "data" / "train.csv");
            TfPartition partition;
            if (cfg.kb_source == KbSource::human_file) {
                partition = partition_from_tf_file(train.genes, cfg.tf_list_path);
            } else {
                const auto client = make_chat_client(cfg, args.offline);
                partition = extract_tf_partition(train.genes, cfg.context, cfg.window,
                                                 cfg.stride, *client, llm_options_from(cfg));
            }
            write_partition_json(partition, cfg.out_dir / "partition.json");
            std::printf("wrote %s: %zu TFs, %zu targets\n",
                        (cfg.out_dir / "partition.json").string().c_str(),
                        partition.tfs().size(), partition.targets().size());
        } else if (*infer) {
            const RunConfig cfg = load_cfg(args);
            auto [train, partition] = load_train_and_partition(cfg);
            InferenceConfig inference;
            inference.k = infer_k;
            inference.gbm = cfg.gbm;
            inference.seed = fnv1a64_mix(cfg.seed, "infer");
            inference.n_threads = cfg.n_threads;
            const ExpressionMatrix train_ln = normalize_log1p(train);
            const fs::path out =
                infer_out.empty() ? cfg.out_dir / "grn-statistical.tsv" : fs::path(infer_out);
            if (importance_out.empty()) {
                write_grn_artifact(infer_grn(train_ln, partition, inference), out);
            } else {
                ImportanceTable table;
                write_grn_artifact(infer_grn(train_ln, partition, inference, &table), out);
                write_importance_table(table, importance_out);
            }
        } else if (*random_cmd) {
            const RunConfig cfg = load_cfg(args);
            auto [train, partition] = load_train_and_partition(cfg);
            const Grn grn = random_grn(partition, random_k, fnv1a64_mix(cfg.seed, "grn"));
            const fs::path out =
                random_out.empty() ? cfg.out_dir / "grn-random.tsv" : fs::path(random_out);
            write_grn_artifact(grn, out);
        } else if (*llm_cmd) {
            const RunConfig cfg = load_cfg(args);
            auto [train, partition] = load_train_and_partition(cfg);
            const auto client = make_chat_client(cfg, args.offline);
            const Grn grn =
                build_llm_grn(partition, cfg.context, llm_k, *client, llm_options_from(cfg));
            const fs::path out =
                llm_out.empty() ? cfg.out_dir / "grn-llm.tsv" : fs::path(llm_out);
            write_grn_artifact(grn, out);
        } else if (*overlap_cmd) {
            const Grn a = read_grn(overlap_a);
            const Grn b = read_grn(overlap_b);
            std::printf("overlap %s\n", format_double(overlap(a, b)).c_str());
        } else if (*synth) {
            const RunConfig cfg = load_cfg(args);
            const ExpressionMatrix train = load_workspace_matrix(cfg.out_dir / "data" / "train.csv");
            const fs::path grn_path =
                synth_grn.empty() ? cfg.out_dir / "grn-statistical.tsv" : fs::path(synth_grn);
            if (!fs::exists(grn_path))
                throw ConfigError(grn_path.string() + " not found; build a GRN first");
            const Grn grn = read_grn(grn_path);
            GbmConfig gbm = cfg.gbm;
            gbm.seed = fnv1a64_mix(cfg.seed, "scm");
            const Scm scm = fit_scm(train, grn, gbm, cfg.library_scale, cfg.n_threads);
            const std::size_t n_cells = synth_cells > 0 ? synth_cells : cfg.n_synth_cells;
            const ExpressionMatrix out_matrix =
                sample_synthetic(scm, n_cells, fnv1a64_mix(cfg.seed, "sample"));
            const fs::path out =
                synth_out.empty() ? cfg.out_dir / "synthetic.csv" : fs::path(synth_out);
            if (out.has_parent_path()) fs::create_directories(out.parent_path());
            write_matrix_csv(out_matrix, out);
            std::printf("wrote %s: %lld cells\n", out.string().c_str(),
                        static_cast<long long>(out_matrix.n_cells()));
        } else if (*evaluate) {
            const RunConfig cfg = load_cfg(args);
            const ExpressionMatrix test = load_workspace_matrix(cfg.out_dir / "data" / "test.csv");
            const ExpressionMatrix synthetic = load_matrix(eval_synth, MatrixFormat::csv);
            const ExpressionMatrix test_ln = normalize_log1p(test);
            const ExpressionMatrix synth_ln = normalize_log1p(synthetic);
            MetricReport report;
            report.arm = eval_label;
            report.real_label = "test";
            report.synth_label = eval_label;
            report.cosine = {cosine_distance(test_ln, synth_ln), 0.0};
            report.euclidean = {euclidean_distance(test_ln, synth_ln), 0.0};
            report.mmd = {mmd(test_ln, synth_ln, MmdConfig{}), 0.0};
            RfAurocConfig rf;
            rf.forest.n_trees = cfg.rf_trees;
            rf.forest.max_depth = cfg.rf_depth;
            rf.seed = fnv1a64_mix(cfg.seed, "rf");
            report.rf_auroc = rf_auroc(test_ln, synth_ln, rf);
            report.n_repeats = rf.repeats;
            report.mmd_kernel = MmdConfig{}.describe();
            std::printf("cosine %s\neuclidean %s\nmmd %s\nrf_auroc %s ± %s\n",
                        format_double(report.cosine.mean).c_str(),
                        format_double(report.euclidean.mean).c_str(),
                        format_double(report.mmd.mean).c_str(),
                        format_double(report.rf_auroc.mean).c_str(),
                        format_double(report.rf_auroc.std).c_str());
            if (!eval_out.empty()) write_metric_reports_csv({report}, eval_out);
        } else if (*report_cmd) {
            std::vector<RunManifest> manifests;
            manifests.reserve(report_manifests.size());
            for (const auto& path : report_manifests) manifests.push_back(read_manifest(path));
            make_report(manifests, report_out);
            std::printf("wrote %s\n", (fs::path(report_out) / "report.md").string().c_str());
        } else if (*plot) {
            const ExpressionMatrix real = load_matrix(plot_real, MatrixFormat::csv);
            const ExpressionMatrix synthetic = load_matrix(plot_synth, MatrixFormat::csv);
            plot_projection(real, synthetic, plot_pcs, plot_svg, plot_csv);
            std::printf("wrote %s and %s\n", plot_svg.c_str(), plot_csv.c_str());
        } else if (*run) {
            const RunConfig cfg = load_cfg(args);
            const RunManifest manifest = run_setting(cfg, args.offline, parallel_arms);
            std::printf("wrote %s\n", (cfg.out_dir / "manifest.json").string().c_str());
            for (const auto& timing : manifest.timings)
                std::printf("  %-24s %8lld ms\n", timing.stage.c_str(),
                            static_cast<long long>(timing.millis));
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const StageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
