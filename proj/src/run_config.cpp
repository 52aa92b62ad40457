#include "llm4grn/run_config.hpp"

#include <set>

#include "llm4grn/toml_lite.hpp"

namespace llm4grn {

namespace {

using nlohmann::json;

// Typed readers that keep TOML's int/float distinction from biting.
class Section {
public:
    Section(const json& doc, const std::string& name) : name_(name) {
        if (!doc.contains(name)) return;
        if (!doc.at(name).is_object()) throw ConfigError("[" + name + "] must be a table");
        table_ = &doc.at(name);
    }
    Section(const json& table, std::string name, int) : name_(std::move(name)), table_(&table) {}

    bool present() const { return table_ != nullptr; }

    template <typename T, typename Check>
    void read(const char* key, T& out, const Check& check) {
        if (!table_ || !table_->contains(key)) return;
        seen_.insert(key);
        try {
            check(table_->at(key), out);
        } catch (const json::exception&) {
            throw ConfigError(name_ + "." + std::string(key) + " has the wrong type");
        }
    }

    void string(const char* key, std::string& out) {
        read(key, out, [](const json& j, std::string& v) { v = j.get<std::string>(); });
    }
    void path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
        std::string raw;
        bool set = false;
        read(key, raw, [&set](const json& j, std::string& v) {
            v = j.get<std::string>();
            set = true;
        });
        if (set) {
            std::filesystem::path p(raw);
            out = p.is_absolute() ? p : base / p;
        }
    }
    template <typename T>
    void integer(const char* key, T& out) {
        read(key, out, [this, key](const json& j, T& v) {
            if (!j.is_number_integer())
                throw ConfigError(name_ + "." + std::string(key) + " must be an integer");
            v = static_cast<T>(j.get<long long>());
        });
    }
    void real(const char* key, double& out) {
        read(key, out, [](const json& j, double& v) { v = j.get<double>(); });
    }
    void boolean(const char* key, bool& out) {
        read(key, out, [](const json& j, bool& v) { v = j.get<bool>(); });
    }

    void reject_unknown() const {
        if (!table_) return;
        for (const auto& [key, value] : table_->items())
            if (!seen_.count(key))
                throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
    }

private:
    std::string name_;
    const json* table_ = nullptr;
    std::set<std::string> seen_;
};

KbSource parse_kb_source(const std::string& text) {
    if (text == "human_file") return KbSource::human_file;
    if (text == "llm") return KbSource::llm;
    throw ConfigError("kb.source must be 'human_file' or 'llm', got '" + text + "'");
}

GrnSource parse_grn_source(const std::string& text) {
    if (text == "llm") return GrnSource::llm;
    if (text == "statistical") return GrnSource::statistical;
    if (text == "random") return GrnSource::random;
    throw ConfigError("arm.grn_source must be 'llm', 'statistical', or 'random', got '" + text +
                      "'");
}

MatrixFormat parse_format(const std::string& text) {
    if (text == "csv") return MatrixFormat::csv;
    if (text == "mtx") return MatrixFormat::mtx;
    throw ConfigError("data.format must be 'csv' or 'mtx', got '" + text + "'");
}

}  // namespace

std::string to_string(KbSource source) {
    return source == KbSource::human_file ? "human_file" : "llm";
}

std::string to_string(GrnSource source) {
    switch (source) {
        case GrnSource::llm: return "llm";
        case GrnSource::statistical: return "statistical";
        case GrnSource::random: return "random";
    }
    return "random";
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config root must be a table");
    for (const auto& [key, value] : doc.items()) {
        static const std::set<std::string> known{"run", "data", "kb", "llm", "synthesis",
                                                 "metrics", "arm"};
        if (!known.count(key)) throw ConfigError("unknown section [" + key + "]");
    }

    RunConfig cfg;

    Section run(doc, "run");
    run.string("name", cfg.name);
    run.path("out_dir", cfg.out_dir, base_dir);
    run.integer("seed", cfg.seed);
    run.boolean("include_baselines", cfg.include_baselines);
    run.reject_unknown();

    Section data(doc, "data");
    std::string format = "csv";
    data.path("path", cfg.data_path, base_dir);
    data.string("format", format);
    data.integer("test_size", cfg.test_size);
    data.integer("val_size", cfg.val_size);
    data.integer("n_top_genes", cfg.n_top_genes);
    data.integer("min_cells_expressed", cfg.min_cells_expressed);
    data.reject_unknown();
    cfg.data_format = parse_format(format);

    Section kb(doc, "kb");
    std::string kb_source = "human_file";
    kb.string("source", kb_source);
    kb.path("tf_list", cfg.tf_list_path, base_dir);
    kb.string("context", cfg.context);
    kb.integer("window", cfg.window);
    kb.integer("stride", cfg.stride);
    kb.reject_unknown();
    cfg.kb_source = parse_kb_source(kb_source);

    Section llm(doc, "llm");
    llm.string("model", cfg.model);
    llm.real("temperature", cfg.temperature);
    llm.string("base_url", cfg.base_url);
    llm.string("endpoint", cfg.endpoint);
    llm.integer("max_retries", cfg.max_retries);
    llm.integer("concurrency", cfg.concurrency);
    llm.path("cache", cfg.cache_path, base_dir);
    llm.path("fixtures", cfg.fixtures_path, base_dir);
    llm.reject_unknown();

    Section synthesis(doc, "synthesis");
    synthesis.integer("n_cells", cfg.n_synth_cells);
    synthesis.real("library_scale", cfg.library_scale);
    synthesis.integer("n_trees", cfg.gbm.n_trees);
    synthesis.integer("max_depth", cfg.gbm.max_depth);
    synthesis.real("learning_rate", cfg.gbm.learning_rate);
    synthesis.real("subsample", cfg.gbm.subsample_fraction);
    synthesis.integer("threads", cfg.n_threads);
    synthesis.reject_unknown();

    Section metrics(doc, "metrics");
    metrics.integer("rf_trees", cfg.rf_trees);
    metrics.integer("rf_depth", cfg.rf_depth);
    metrics.integer("baseline_replicates", cfg.baseline_replicates);
    metrics.reject_unknown();

    if (doc.contains("arm")) {
        if (!doc.at("arm").is_array()) throw ConfigError("[[arm]] must be an array of tables");
        int index = 0;
        for (const auto& entry : doc.at("arm")) {
            Section arm(entry, "arm[" + std::to_string(index) + "]", 0);
            ArmConfig a;
            a.seed = fnv1a64_mix(cfg.seed, static_cast<std::uint64_t>(index));
            std::string source = "random";
            arm.string("name", a.name);
            arm.string("grn_source", source);
            arm.integer("k", a.k);
            arm.integer("seed", a.seed);
            arm.integer("replicates", a.replicates);
            arm.reject_unknown();
            a.grn_source = parse_grn_source(source);
            if (a.name.empty()) a.name = to_string(a.grn_source);
            cfg.arms.push_back(std::move(a));
            ++index;
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const json doc = load_toml_file(path);
    try {
        return parse_run_config(doc, std::filesystem::absolute(path).parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void validate_run_config(const RunConfig& cfg, bool offline) {
    if (cfg.name.empty()) throw ConfigError("run.name must not be empty");
    if (cfg.data_path.empty()) throw ConfigError("data.path is required");
    if (!std::filesystem::exists(cfg.data_path))
        throw ConfigError("data.path does not exist: " + cfg.data_path.string());
    if (cfg.test_size < 1 || cfg.val_size < 0)
        throw ConfigError("data.test_size must be >= 1 and data.val_size >= 0");
    if (cfg.n_top_genes < 2) throw ConfigError("data.n_top_genes must be >= 2");

    if (cfg.kb_source == KbSource::human_file) {
        if (cfg.tf_list_path.empty())
            throw ConfigError("kb.source = human_file requires kb.tf_list");
        if (!std::filesystem::exists(cfg.tf_list_path))
            throw ConfigError("kb.tf_list does not exist: " + cfg.tf_list_path.string());
    } else {
        if (cfg.window < 1) throw ConfigError("kb.window must be >= 1");
        if (cfg.stride < 1 || cfg.stride > cfg.window)
            throw ConfigError("kb.stride must be in [1, kb.window]");
    }

    const bool needs_client =
        cfg.kb_source == KbSource::llm ||
        std::any_of(cfg.arms.begin(), cfg.arms.end(),
                    [](const ArmConfig& a) { return a.grn_source == GrnSource::llm; });
    if (needs_client) {
        if (cfg.max_retries < 1) throw ConfigError("llm.max_retries must be >= 1");
        if (cfg.concurrency < 1) throw ConfigError("llm.concurrency must be >= 1");
        if (offline) {
            if (cfg.fixtures_path.empty())
                throw ConfigError("--offline requires llm.fixtures");
            if (!std::filesystem::exists(cfg.fixtures_path))
                throw ConfigError("llm.fixtures does not exist: " +
                                  cfg.fixtures_path.string());
        }
    }

    if (cfg.n_synth_cells < 1) throw ConfigError("synthesis.n_cells must be >= 1");
    if (cfg.library_scale <= 0.0) throw ConfigError("synthesis.library_scale must be positive");
    if (cfg.gbm.n_trees < 1 || cfg.gbm.max_depth < 1 || cfg.gbm.learning_rate <= 0.0 ||
        cfg.gbm.subsample_fraction <= 0.0 || cfg.gbm.subsample_fraction > 1.0)
        throw ConfigError("invalid [synthesis] booster settings");
    if (cfg.n_threads < 1) throw ConfigError("synthesis.threads must be >= 1");
    if (cfg.rf_trees < 1 || cfg.rf_depth < 1) throw ConfigError("invalid [metrics] forest settings");
    if (cfg.baseline_replicates < 1)
        throw ConfigError("metrics.baseline_replicates must be >= 1");

    std::set<std::string> names{"control", "stage1-surrogate"};
    for (const auto& arm : cfg.arms) {
        if (arm.k < 1) throw ConfigError("arm.k must be >= 1");
        if (arm.replicates < 1) throw ConfigError("arm.replicates must be >= 1");
        if (!names.insert(arm.name).second)
            throw ConfigError("duplicate arm name '" + arm.name + "'");
    }
    if (cfg.arms.empty() && !cfg.include_baselines)
        throw ConfigError("config defines no arms and baselines are disabled");
}

nlohmann::json config_snapshot(const RunConfig& cfg) {
    json arms = json::array();
    for (const auto& a : cfg.arms)
        arms.push_back(json{{"name", a.name},
                            {"grn_source", to_string(a.grn_source)},
                            {"k", a.k},
                            {"seed", a.seed},
                            {"replicates", a.replicates}});
    return json{
        {"run",
         {{"name", cfg.name},
          {"out_dir", cfg.out_dir.string()},
          {"seed", cfg.seed},
          {"include_baselines", cfg.include_baselines}}},
        {"data",
         {{"path", cfg.data_path.string()},
          {"format", cfg.data_format == MatrixFormat::csv ? "csv" : "mtx"},
          {"test_size", cfg.test_size},
          {"val_size", cfg.val_size},
          {"n_top_genes", cfg.n_top_genes},
          {"min_cells_expressed", cfg.effective_min_cells()}}},
        {"kb",
         {{"source", to_string(cfg.kb_source)},
          {"tf_list", cfg.tf_list_path.string()},
          {"context", cfg.context},
          {"window", cfg.window},
          {"stride", cfg.stride}}},
        {"llm",
         {{"model", cfg.model},
          {"temperature", cfg.temperature},
          {"base_url", cfg.base_url},
          {"endpoint", cfg.endpoint},
          {"max_retries", cfg.max_retries},
          {"concurrency", cfg.concurrency},
          {"cache", cfg.cache_path.string()},
          {"fixtures", cfg.fixtures_path.string()}}},
        {"synthesis",
         {{"n_cells", cfg.n_synth_cells},
          {"library_scale", cfg.library_scale},
          {"n_trees", cfg.gbm.n_trees},
          {"max_depth", cfg.gbm.max_depth},
          {"learning_rate", cfg.gbm.learning_rate},
          {"subsample", cfg.gbm.subsample_fraction},
          {"threads", cfg.n_threads}}},
        {"metrics",
         {{"rf_trees", cfg.rf_trees},
          {"rf_depth", cfg.rf_depth},
          {"baseline_replicates", cfg.baseline_replicates}}},
        {"arm", arms}};
}

}  // namespace llm4grn
