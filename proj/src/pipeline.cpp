#include "llm4grn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "llm4grn/causal_synth.hpp"
#include "llm4grn/grn_inference.hpp"
#include "llm4grn/llm_kb.hpp"
#include "llm4grn/pca.hpp"
#include "llm4grn/version.hpp"

namespace llm4grn {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kControlArm = "control";
constexpr const char* kStage1Arm = "stage1-surrogate";

bool is_baseline(const std::string& arm) { return arm == kControlArm || arm == kStage1Arm; }

std::int64_t now_millis() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

LlmOptions llm_options_from(const RunConfig& cfg) {
    LlmOptions options;
    options.model = cfg.model;
    options.temperature = cfg.temperature;
    options.max_retries = cfg.max_retries;
    options.concurrency = cfg.concurrency;
    return options;
}

json timings_json(const std::vector<StageTiming>& timings) {
    json out = json::array();
    for (const auto& t : timings) out.push_back(json{{"stage", t.stage}, {"millis", t.millis}});
    return out;
}

std::string bold_cell(const MeanStd& v, bool best) {
    std::string cell = format_double(v.mean) + " ± " + format_double(v.std);
    return best ? "**" + cell + "**" : cell;
}

}  // namespace

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string() + " for digesting");
    std::uint64_t state = 0xcbf29ce484222325ull;
    char buffer[65536];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        state = fnv1a64(std::string_view(buffer, static_cast<std::size_t>(in.gcount())), state);
        if (!in) break;
    }
    return hex64(state);
}

void write_manifest(const RunManifest& manifest, const fs::path& path) {
    json digests = json::object();
    for (const auto& [rel, digest] : manifest.digests) digests[rel] = digest;
    json grn_files = json::object();
    for (const auto& [arm, rel] : manifest.grn_files) grn_files[arm] = rel;
    const json out{{"version", manifest.version},
                   {"name", manifest.name},
                   {"config", manifest.config},
                   {"timings", timings_json(manifest.timings)},
                   {"digests", digests},
                   {"vocab_digest", manifest.vocab_digest},
                   {"grn_files", grn_files},
                   {"metrics", metric_reports_to_json(manifest.metrics)},
                   {"failed", manifest.failed},
                   {"failure_stage", manifest.failure_stage}};
    std::ofstream file(path);
    if (!file) throw Error("cannot open " + path.string() + " for writing");
    file << out.dump(2) << '\n';
    if (!file) throw Error("failed writing " + path.string());
}

RunManifest read_manifest(const fs::path& path) {
    std::ifstream file(path);
    if (!file) throw Error("cannot open manifest " + path.string());
    json parsed;
    try {
        file >> parsed;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    RunManifest manifest;
    try {
        manifest.version = parsed.at("version").get<std::string>();
        manifest.name = parsed.at("name").get<std::string>();
        manifest.config = parsed.at("config");
        for (const auto& t : parsed.at("timings"))
            manifest.timings.push_back(
                {t.at("stage").get<std::string>(), t.at("millis").get<std::int64_t>()});
        for (const auto& [rel, digest] : parsed.at("digests").items())
            manifest.digests[rel] = digest.get<std::string>();
        manifest.vocab_digest = parsed.at("vocab_digest").get<std::string>();
        for (const auto& [arm, rel] : parsed.at("grn_files").items())
            manifest.grn_files[arm] = rel.get<std::string>();
        manifest.metrics = metric_reports_from_json(parsed.at("metrics"));
        manifest.failed = parsed.at("failed").get<bool>();
        manifest.failure_stage = parsed.at("failure_stage").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    manifest.base_dir = fs::absolute(path).parent_path();
    return manifest;
}

std::shared_ptr<ChatClient> make_chat_client(const RunConfig& cfg, bool offline) {
    if (offline) return std::make_shared<FixtureClient>(cfg.fixtures_path);
    HttpClientConfig http;
    http.base_url = cfg.base_url;
    http.path = cfg.endpoint;
    const fs::path cache_path =
        cfg.cache_path.empty() ? cfg.out_dir / "cache" / "responses.jsonl" : cfg.cache_path;
    fs::create_directories(cache_path.parent_path());
    return std::make_shared<CachingClient>(std::make_shared<HttpChatClient>(http),
                                           std::make_shared<ResponseCache>(cache_path));
}

TfPartition partition_from_tf_file(const GeneVocabulary& vocab, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open TF list " + path.string());
    std::vector<std::string> tfs;
    std::set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string symbol = normalize_symbol(line);
        if (symbol.empty() || !vocab.contains(symbol)) continue;
        if (seen.insert(symbol).second) tfs.push_back(symbol);
    }
    if (tfs.empty())
        throw Error("TF list " + path.string() + " shares no symbols with the vocabulary");
    return TfPartition::from_tf_list(vocab, tfs);
}

void write_partition_json(const TfPartition& partition, const fs::path& path) {
    const json out{{"tfs", partition.tfs()}, {"targets", partition.targets()}};
    std::ofstream file(path);
    if (!file) throw Error("cannot open " + path.string() + " for writing");
    file << out.dump(2) << '\n';
    if (!file) throw Error("failed writing " + path.string());
}

TfPartition read_partition_json(const GeneVocabulary& vocab, const fs::path& path) {
    std::ifstream file(path);
    if (!file) throw Error("cannot open partition " + path.string());
    json parsed;
    try {
        file >> parsed;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    std::vector<std::string> tfs;
    try {
        tfs = parsed.at("tfs").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return TfPartition::from_tf_list(vocab, tfs);
}

namespace {

struct ArmPlan {
    enum class Kind { graph, control, stage1 };
    Kind kind = Kind::graph;
    ArmConfig arm;
};

std::vector<ArmPlan> plan_arms(const RunConfig& cfg) {
    std::vector<ArmPlan> plans;
    for (const auto& arm : cfg.arms) plans.push_back({ArmPlan::Kind::graph, arm});
    if (cfg.include_baselines) {
        ArmConfig control;
        control.name = kControlArm;
        control.seed = fnv1a64_mix(cfg.seed, "control");
        control.replicates = cfg.baseline_replicates;
        plans.push_back({ArmPlan::Kind::control, control});
        ArmConfig stage1;
        stage1.name = kStage1Arm;
        stage1.seed = fnv1a64_mix(cfg.seed, "stage1");
        stage1.replicates = cfg.baseline_replicates;
        plans.push_back({ArmPlan::Kind::stage1, stage1});
    }
    return plans;
}

ExpressionMatrix control_subsample(const ExpressionMatrix& train, std::size_t n,
                                   std::uint64_t seed) {
    Rng rng(seed);
    const auto pool = static_cast<std::size_t>(train.n_cells());
    std::vector<std::size_t> rows;
    if (n <= pool) {
        rows = rng.sample_without_replacement(pool, n);
        std::sort(rows.begin(), rows.end());
    } else {
        rows.reserve(n);
        for (std::size_t i = 0; i < n; ++i) rows.push_back(rng.below(pool));
    }
    return train.take_rows(rows);
}

}  // namespace

RunManifest run_setting(const RunConfig& cfg, bool offline, int parallel_arms) {
    validate_run_config(cfg, offline);
    fs::create_directories(cfg.out_dir);

    RunManifest manifest;
    manifest.version = kVersion;
    manifest.name = cfg.name;
    manifest.config = config_snapshot(cfg);
    manifest.base_dir = cfg.out_dir;

    const fs::path manifest_path = cfg.out_dir / "manifest.json";
    auto record = [&](const fs::path& rel) {
        manifest.digests[rel.generic_string()] = file_digest(cfg.out_dir / rel);
    };

    // Runs one stage, recording its wall time; a failure is written into
    // the manifest before the annotated error propagates.
    auto stage = [&](const std::string& name, auto&& body) {
        const auto begin = now_millis();
        try {
            body();
        } catch (const std::exception& e) {
            manifest.timings.push_back({name, now_millis() - begin});
            manifest.failed = true;
            manifest.failure_stage = name;
            try {
                write_manifest(manifest, manifest_path);
            } catch (...) {
                // The stage failure is the error worth reporting.
            }
            throw StageError(name, e.what());
        }
        manifest.timings.push_back({name, now_millis() - begin});
    };

    SplitResult split;
    stage("ingest", [&]() {
        const ExpressionMatrix full = load_matrix(cfg.data_path, cfg.data_format);
        PreprocessConfig pre;
        pre.min_cells_expressed = cfg.effective_min_cells();
        pre.n_top_genes = cfg.n_top_genes;
        SplitSpec spec;
        spec.test_size = cfg.test_size;
        spec.val_size = cfg.val_size;
        spec.seed = fnv1a64_mix(cfg.seed, "split");
        split = preprocess(full, pre, spec);
        fs::create_directories(cfg.out_dir / "data");
        write_matrix_csv(split.train, cfg.out_dir / "data" / "train.csv");
        write_matrix_csv(split.val, cfg.out_dir / "data" / "val.csv");
        write_matrix_csv(split.test, cfg.out_dir / "data" / "test.csv");
        record(fs::path("data") / "train.csv");
        record(fs::path("data") / "val.csv");
        record(fs::path("data") / "test.csv");
        manifest.vocab_digest = hex64(split.train.genes.digest());
    });

    const std::vector<ArmPlan> plans = plan_arms(cfg);
    const bool needs_client =
        cfg.kb_source == KbSource::llm ||
        std::any_of(plans.begin(), plans.end(), [](const ArmPlan& p) {
            return p.kind == ArmPlan::Kind::graph && p.arm.grn_source == GrnSource::llm;
        });
    std::shared_ptr<ChatClient> client;
    if (needs_client)
        stage("client", [&]() { client = make_chat_client(cfg, offline); });

    TfPartition partition;
    stage("partition", [&]() {
        if (cfg.kb_source == KbSource::human_file) {
            partition = partition_from_tf_file(split.train.genes, cfg.tf_list_path);
        } else {
            partition = extract_tf_partition(split.train.genes, cfg.context, cfg.window,
                                             cfg.stride, *client, llm_options_from(cfg));
        }
        write_partition_json(partition, cfg.out_dir / "partition.json");
        record("partition.json");
    });

    const ExpressionMatrix test_ln = normalize_log1p(split.test);
    std::vector<std::pair<std::string, ExpressionMatrix>> first_replicates;

    // Arms are independent: each writes only its own directory and returns
    // its contribution, merged afterwards in plan order so the manifest is
    // identical whether arms ran sequentially or concurrently.
    struct ArmResult {
        bool ran = false;
        std::string error;
        std::int64_t millis = 0;
        std::vector<std::pair<std::string, std::string>> digests;
        std::string grn_rel;
        MetricReport report;
        ExpressionMatrix first_replicate;
    };

    auto run_arm = [&](const ArmPlan& plan) {
        ArmResult result;
        result.ran = true;
        const auto begin = now_millis();
        try {
            const fs::path arm_rel = fs::path("arms") / plan.arm.name;
            fs::create_directories(cfg.out_dir / arm_rel);
            auto local_record = [&](const fs::path& rel) {
                result.digests.emplace_back(rel.generic_string(),
                                            file_digest(cfg.out_dir / rel));
            };

            Scm scm;
            if (plan.kind == ArmPlan::Kind::graph) {
                Grn grn;
                switch (plan.arm.grn_source) {
                    case GrnSource::llm:
                        grn = build_llm_grn(partition, cfg.context, plan.arm.k, *client,
                                            llm_options_from(cfg));
                        break;
                    case GrnSource::statistical: {
                        InferenceConfig inference;
                        inference.k = plan.arm.k;
                        inference.gbm = cfg.gbm;
                        inference.seed = fnv1a64_mix(plan.arm.seed, "infer");
                        inference.n_threads = cfg.n_threads;
                        grn = infer_grn(normalize_log1p(split.train), partition, inference);
                        break;
                    }
                    case GrnSource::random:
                        grn = random_grn(partition, plan.arm.k,
                                         fnv1a64_mix(plan.arm.seed, "grn"));
                        break;
                }
                const fs::path grn_rel = arm_rel / "grn.tsv";
                write_grn(grn, cfg.out_dir / grn_rel);
                local_record(grn_rel);
                local_record(grn_rel.string() + ".meta.json");
                result.grn_rel = grn_rel.generic_string();

                GbmConfig gbm = cfg.gbm;
                gbm.seed = fnv1a64_mix(plan.arm.seed, "scm");
                scm = fit_scm(split.train, grn, gbm, cfg.library_scale, cfg.n_threads);
            }

            std::vector<double> cosines, euclideans, mmds, rfs;
            for (int rep = 0; rep < plan.arm.replicates; ++rep) {
                const std::uint64_t rep_seed =
                    fnv1a64_mix(plan.arm.seed, static_cast<std::uint64_t>(rep));
                ExpressionMatrix synth;
                switch (plan.kind) {
                    case ArmPlan::Kind::graph:
                        synth = sample_synthetic(scm, cfg.n_synth_cells, rep_seed);
                        break;
                    case ArmPlan::Kind::control:
                        synth = control_subsample(split.train, cfg.n_synth_cells, rep_seed);
                        break;
                    case ArmPlan::Kind::stage1:
                        synth = sample_structure_free(split.train, partition, cfg.n_synth_cells,
                                                      rep_seed, cfg.library_scale);
                        break;
                }
                const ExpressionMatrix synth_ln = normalize_log1p(synth);
                cosines.push_back(cosine_distance(test_ln, synth_ln));
                euclideans.push_back(euclidean_distance(test_ln, synth_ln));
                mmds.push_back(mmd(test_ln, synth_ln, MmdConfig{}));
                RfAurocConfig rf;
                rf.forest.n_trees = cfg.rf_trees;
                rf.forest.max_depth = cfg.rf_depth;
                rf.repeats = 1;
                rf.seed = fnv1a64_mix(rep_seed, "rf");
                rfs.push_back(rf_auroc(test_ln, synth_ln, rf).mean);
                if (rep == 0) {
                    write_matrix_csv(synth, cfg.out_dir / arm_rel / "synthetic.csv");
                    local_record(arm_rel / "synthetic.csv");
                    result.first_replicate = std::move(synth);
                }
            }

            result.report.arm = plan.arm.name;
            result.report.real_label = "test";
            result.report.synth_label = plan.arm.name;
            result.report.cosine = mean_std(cosines);
            result.report.euclidean = mean_std(euclideans);
            result.report.mmd = mean_std(mmds);
            result.report.rf_auroc = mean_std(rfs);
            result.report.n_repeats = plan.arm.replicates;
            result.report.mmd_kernel = MmdConfig{}.describe();
        } catch (const std::exception& e) {
            result.error = e.what();
        }
        result.millis = now_millis() - begin;
        return result;
    };

    std::vector<ArmResult> results(plans.size());
    if (parallel_arms <= 1) {
        for (std::size_t i = 0; i < plans.size(); ++i) {
            results[i] = run_arm(plans[i]);
            if (!results[i].error.empty()) break;
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        const auto n_workers =
            std::min<std::size_t>(static_cast<std::size_t>(parallel_arms), plans.size());
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = cursor.fetch_add(1);
                    if (i >= plans.size()) return;
                    results[i] = run_arm(plans[i]);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (!results[i].ran) continue;
        const std::string stage_name = "arm:" + plans[i].arm.name;
        manifest.timings.push_back({stage_name, results[i].millis});
        if (!results[i].error.empty()) {
            manifest.failed = true;
            manifest.failure_stage = stage_name;
            try {
                write_manifest(manifest, manifest_path);
            } catch (...) {
            }
            throw StageError(stage_name, results[i].error);
        }
        for (auto& [rel, digest] : results[i].digests) manifest.digests[rel] = digest;
        if (!results[i].grn_rel.empty())
            manifest.grn_files[plans[i].arm.name] = results[i].grn_rel;
        manifest.metrics.push_back(std::move(results[i].report));
        first_replicates.emplace_back(plans[i].arm.name, std::move(results[i].first_replicate));
    }

    stage("report", [&]() {
        write_metric_reports_csv(manifest.metrics, cfg.out_dir / "metrics.csv");
        write_metric_reports_json(manifest.metrics, cfg.out_dir / "metrics.json");
        record("metrics.csv");
        record("metrics.json");
        for (const auto& [arm, synth] : first_replicates) {
            const fs::path arm_rel = fs::path("arms") / arm;
            plot_projection(split.test, synth, 2, cfg.out_dir / arm_rel / "projection.svg",
                            cfg.out_dir / arm_rel / "projection.csv");
            record(arm_rel / "projection.svg");
            record(arm_rel / "projection.csv");
        }
        make_report({manifest}, cfg.out_dir);
        record("report.csv");
        record("report.md");
        if (fs::exists(cfg.out_dir / "overlap.csv")) record("overlap.csv");
    });

    write_manifest(manifest, manifest_path);
    return manifest;
}

void make_report(const std::vector<RunManifest>& manifests, const fs::path& out_dir) {
    if (manifests.empty()) throw Error("no manifests to report on");
    for (const auto& m : manifests) {
        if (m.vocab_digest != manifests.front().vocab_digest)
            throw IncompatibleManifestsError("manifests use different gene vocabularies");
    }
    fs::create_directories(out_dir);

    struct Row {
        std::string label;
        const MetricReport* report;
    };
    std::vector<Row> rows;
    for (const auto& m : manifests) {
        for (const auto& r : m.metrics) {
            const std::string label =
                manifests.size() > 1 ? m.name + "/" + r.arm : r.arm;
            rows.push_back({label, &r});
        }
    }

    // Best synthetic arm per column: smallest distance, AUROC nearest 0.5.
    // Baselines are excluded from the marking.
    auto best_index = [&rows](auto&& key) {
        std::ptrdiff_t best = -1;
        double best_value = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (is_baseline(rows[i].report->arm)) continue;
            const double value = key(*rows[i].report);
            if (best < 0 || value < best_value) {
                best = static_cast<std::ptrdiff_t>(i);
                best_value = value;
            }
        }
        return best;
    };
    const auto best_cosine = best_index([](const MetricReport& r) { return r.cosine.mean; });
    const auto best_euclidean =
        best_index([](const MetricReport& r) { return r.euclidean.mean; });
    const auto best_mmd = best_index([](const MetricReport& r) { return r.mmd.mean; });
    const auto best_rf =
        best_index([](const MetricReport& r) { return std::abs(r.rf_auroc.mean - 0.5); });

    {
        std::ofstream csv(out_dir / "report.csv");
        if (!csv) throw Error("cannot open report.csv for writing");
        csv << "arm,cosine_mean,cosine_std,euclidean_mean,euclidean_std,mmd_mean,mmd_std,"
               "rf_auroc_mean,rf_auroc_std,n_repeats\n";
        for (const auto& row : rows) {
            const auto& r = *row.report;
            csv << row.label << ',' << format_double(r.cosine.mean) << ','
                << format_double(r.cosine.std) << ',' << format_double(r.euclidean.mean) << ','
                << format_double(r.euclidean.std) << ',' << format_double(r.mmd.mean) << ','
                << format_double(r.mmd.std) << ',' << format_double(r.rf_auroc.mean) << ','
                << format_double(r.rf_auroc.std) << ',' << r.n_repeats << '\n';
        }
        if (!csv) throw Error("failed writing report.csv");
    }

    std::ostringstream md;
    md << "# Synthesis fidelity\n\n";
    md << "Best value per column among non-baseline arms in bold; distances smaller is\n"
          "better, RF-AUROC closer to 0.5 is better.\n\n";
    md << "| arm | cosine | euclidean | mmd | rf_auroc | repeats |\n";
    md << "| --- | --- | --- | --- | --- | --- |\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = *rows[i].report;
        const auto idx = static_cast<std::ptrdiff_t>(i);
        md << "| " << rows[i].label << " | " << bold_cell(r.cosine, idx == best_cosine) << " | "
           << bold_cell(r.euclidean, idx == best_euclidean) << " | "
           << bold_cell(r.mmd, idx == best_mmd) << " | "
           << bold_cell(r.rf_auroc, idx == best_rf) << " | " << r.n_repeats << " |\n";
    }

    // Pairwise edge overlap between recorded graphs that share a partition.
    struct NamedGrn {
        std::string label;
        Grn grn;
    };
    std::vector<NamedGrn> grns;
    for (const auto& m : manifests) {
        for (const auto& [arm, rel] : m.grn_files) {
            const std::string label = manifests.size() > 1 ? m.name + "/" + arm : arm;
            grns.push_back({label, read_grn(m.base_dir / rel)});
        }
    }
    std::vector<std::size_t> comparable;
    for (std::size_t i = 0; i < grns.size(); ++i) {
        bool shares = false;
        for (std::size_t j = 0; j < grns.size() && !shares; ++j)
            shares = i != j && grns[i].grn.partition() == grns[j].grn.partition() &&
                     grns[i].grn.k() == grns[j].grn.k();
        if (shares) comparable.push_back(i);
    }
    if (comparable.size() >= 2) {
        std::ofstream csv(out_dir / "overlap.csv");
        if (!csv) throw Error("cannot open overlap.csv for writing");
        csv << "grn";
        for (auto j : comparable) csv << ',' << grns[j].label;
        csv << '\n';
        md << "\n## GRN edge overlap\n\n| grn |";
        for (auto j : comparable) md << ' ' << grns[j].label << " |";
        md << "\n| --- |";
        for (std::size_t n = 0; n < comparable.size(); ++n) md << " --- |";
        md << '\n';
        for (auto i : comparable) {
            csv << grns[i].label;
            md << "| " << grns[i].label << " |";
            for (auto j : comparable) {
                const bool ok = grns[i].grn.partition() == grns[j].grn.partition() &&
                                grns[i].grn.k() == grns[j].grn.k();
                const std::string cell =
                    ok ? format_double(overlap(grns[i].grn, grns[j].grn)) : "";
                csv << ',' << cell;
                md << ' ' << cell << " |";
            }
            csv << '\n';
            md << '\n';
        }
        if (!csv) throw Error("failed writing overlap.csv");
    }

    std::ofstream file(out_dir / "report.md");
    if (!file) throw Error("cannot open report.md for writing");
    file << md.str();
    if (!file) throw Error("failed writing report.md");
}

void plot_projection(const ExpressionMatrix& real, const ExpressionMatrix& synthetic, int n_pcs,
                     const fs::path& svg_path, const fs::path& csv_path) {
    if (!(real.genes == synthetic.genes))
        throw ShapeMismatchError("projection inputs use different vocabularies");
    if (real.n_cells() == 0 || synthetic.n_cells() == 0)
        throw EmptyMatrixError("projection inputs must be nonempty");

    const ExpressionMatrix real_ln =
        real.normalized == Norm::lognorm ? real : normalize_log1p(real);
    const ExpressionMatrix synth_ln =
        synthetic.normalized == Norm::lognorm ? synthetic : normalize_log1p(synthetic);

    Eigen::MatrixXd pooled(real_ln.n_cells() + synth_ln.n_cells(), real_ln.n_genes());
    pooled.topRows(real_ln.n_cells()) = real_ln.values;
    pooled.bottomRows(synth_ln.n_cells()) = synth_ln.values;
    const PcaModel model = fit_pca(pooled, std::max(2, n_pcs));
    const Eigen::MatrixXd coords = pca_transform(model, pooled);
    const Eigen::Index n_real = real_ln.n_cells();

    {
        std::ofstream csv(csv_path);
        if (!csv) throw Error("cannot open " + csv_path.string() + " for writing");
        csv << "dataset,cell,pc1,pc2\n";
        for (Eigen::Index i = 0; i < coords.rows(); ++i) {
            const bool is_real = i < n_real;
            const auto& barcodes = is_real ? real_ln.barcodes : synth_ln.barcodes;
            const auto local = static_cast<std::size_t>(is_real ? i : i - n_real);
            csv << (is_real ? "real" : "synthetic") << ',' << barcodes[local] << ','
                << format_double(coords(i, 0)) << ','
                << format_double(coords.cols() > 1 ? coords(i, 1) : 0.0) << '\n';
        }
        if (!csv) throw Error("failed writing " + csv_path.string());
    }

    const double x_min = coords.col(0).minCoeff();
    const double x_max = coords.col(0).maxCoeff();
    const double y_min = coords.cols() > 1 ? coords.col(1).minCoeff() : -1.0;
    const double y_max = coords.cols() > 1 ? coords.col(1).maxCoeff() : 1.0;
    const double x_span = x_max > x_min ? x_max - x_min : 1.0;
    const double y_span = y_max > y_min ? y_max - y_min : 1.0;

    constexpr double width = 720.0, height = 540.0, margin = 50.0;
    auto sx = [&](double x) {
        return margin + (x - x_min) / x_span * (width - 2.0 * margin);
    };
    auto sy = [&](double y) {
        return height - margin - (y - y_min) / y_span * (height - 2.0 * margin);
    };

    std::ofstream svg(svg_path);
    if (!svg) throw Error("cannot open " + svg_path.string() + " for writing");
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
        << width - 2.0 * margin << "\" height=\"" << height - 2.0 * margin
        << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        const bool is_real = i < n_real;
        svg << "  <circle cx=\"" << format_double(sx(coords(i, 0))) << "\" cy=\""
            << format_double(sy(coords.cols() > 1 ? coords(i, 1) : 0.0))
            << "\" r=\"2.5\" fill=\"" << (is_real ? "#1f77b4" : "#d62728")
            << "\" fill-opacity=\"0.6\"/>\n";
    }
    svg << "  <text x=\"" << width / 2.0 << "\" y=\"" << height - 12.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">PC1</text>\n";
    svg << "  <text x=\"16\" y=\"" << height / 2.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
           "transform=\"rotate(-90 16 "
        << height / 2.0 << ")\">PC2</text>\n";
    svg << "  <circle cx=\"" << width - margin - 150.0 << "\" cy=\"" << margin + 16.0
        << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    svg << "  <text x=\"" << width - margin - 140.0 << "\" y=\"" << margin + 20.0
        << "\" font-family=\"sans-serif\" font-size=\"13\">real</text>\n";
    svg << "  <circle cx=\"" << width - margin - 150.0 << "\" cy=\"" << margin + 36.0
        << "\" r=\"4\" fill=\"#d62728\"/>\n";
    svg << "  <text x=\"" << width - margin - 140.0 << "\" y=\"" << margin + 40.0
        << "\" font-family=\"sans-serif\" font-size=\"13\">synthetic</text>\n";
    svg << "</svg>\n";
    if (!svg) throw Error("failed writing " + svg_path.string());
}

}  // namespace llm4grn
