#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llm4grn/boosted_trees.hpp"
#include "llm4grn/expression.hpp"

namespace llm4grn {

struct ConfigError : Error {
    using Error::Error;
};

enum class KbSource { human_file, llm };
enum class GrnSource { llm, statistical, random };

std::string to_string(KbSource source);
std::string to_string(GrnSource source);

struct ArmConfig {
    std::string name;
    GrnSource grn_source = GrnSource::random;
    int k = 10;
    std::uint64_t seed = 0;
    int replicates = 8;  // 4 synthetic datasets × 2 seeds
};

struct RunConfig {
    std::string name = "run";
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    bool include_baselines = true;  // implicit control + stage1-surrogate arms

    // [data]
    std::filesystem::path data_path;
    MatrixFormat data_format = MatrixFormat::csv;
    Eigen::Index test_size = 1000;
    Eigen::Index val_size = 500;
    Eigen::Index n_top_genes = 1000;
    Eigen::Index min_cells_expressed = -1;  // negative → defaults to test_size

    // [kb]
    KbSource kb_source = KbSource::human_file;
    std::filesystem::path tf_list_path;
    std::string context;
    std::size_t window = 20;
    std::size_t stride = 10;

    // [llm]
    std::string model = "gpt-4";
    double temperature = 0.0;
    std::string base_url = "https://api.openai.com";
    std::string endpoint = "/v1/chat/completions";
    int max_retries = 3;
    int concurrency = 4;
    std::filesystem::path cache_path;     // empty → <out_dir>/cache/responses.jsonl
    std::filesystem::path fixtures_path;  // offline transcript

    // [synthesis]
    std::size_t n_synth_cells = 1000;
    double library_scale = 10000.0;
    GbmConfig gbm;
    int n_threads = 1;

    // [metrics]
    int rf_trees = 100;
    int rf_depth = 8;
    int baseline_replicates = 8;

    std::vector<ArmConfig> arms;

    Eigen::Index effective_min_cells() const {
        return min_cells_expressed >= 0 ? min_cells_expressed : test_size;
    }
};

// Builds a config from a parsed document; relative paths resolve against
// base_dir. Unknown keys are rejected so typos fail loudly.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

RunConfig load_run_config(const std::filesystem::path& path);

// Structural checks plus path resolution; throws ConfigError. Offline
// runs additionally require the fixture transcript (when the run needs a
// client at all).
void validate_run_config(const RunConfig& cfg, bool offline);

// The exact resolved settings, serialized into the manifest.
nlohmann::json config_snapshot(const RunConfig& cfg);

}  // namespace llm4grn
