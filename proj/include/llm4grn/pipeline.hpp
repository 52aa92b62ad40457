#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "llm4grn/chat_client.hpp"
#include "llm4grn/expression.hpp"
#include "llm4grn/grn.hpp"
#include "llm4grn/metrics.hpp"
#include "llm4grn/run_config.hpp"

namespace llm4grn {

// A pipeline failure, annotated with the stage that raised it. The
// manifest is still written with the failure point recorded.
struct StageError : Error {
    StageError(std::string stage_name, const std::string& message)
        : Error("stage " + stage_name + ": " + message), stage(std::move(stage_name)) {}
    std::string stage;
};

struct IncompatibleManifestsError : Error {
    using Error::Error;
};

struct StageTiming {
    std::string stage;
    std::int64_t millis = 0;
};

struct RunManifest {
    std::string version;
    std::string name;
    nlohmann::json config;
    std::vector<StageTiming> timings;
    // Relative output path → content digest. The manifest itself and the
    // response cache (which carries timestamps) are excluded.
    std::map<std::string, std::string> digests;
    std::string vocab_digest;
    std::map<std::string, std::string> grn_files;  // arm → relative path
    std::vector<MetricReport> metrics;
    bool failed = false;
    std::string failure_stage;

    std::filesystem::path base_dir;  // set when read back, not serialized
};

// FNV-1a over the raw bytes of a file.
std::string file_digest(const std::filesystem::path& path);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

// Chat client factory honoring offline mode: offline replays the fixture
// transcript and never writes the cache; online wraps the HTTP client in
// the read-through cache.
std::shared_ptr<ChatClient> make_chat_client(const RunConfig& cfg, bool offline);

// Full experiment: ingest → partition → per-arm GRN + synthesis +
// evaluation → reports. On a stage failure the partial manifest is
// written before the StageError propagates. Arms are independent; with
// parallel_arms > 1 they run concurrently, merged in declaration order so
// the manifest does not depend on scheduling.
RunManifest run_setting(const RunConfig& cfg, bool offline, int parallel_arms = 1);

// Cross-manifest aggregation: Table-1-shaped CSV + Markdown (best
// non-baseline value per column in bold) and, when two or more recorded
// GRNs share a partition, the pairwise overlap matrix.
void make_report(const std::vector<RunManifest>& manifests,
                 const std::filesystem::path& out_dir);

// 2-D PCA projection of real vs synthetic cells: SVG scatter plus a CSV
// of coordinates. PCA is fit on the pooled rows after lognorm.
void plot_projection(const ExpressionMatrix& real, const ExpressionMatrix& synthetic,
                     int n_pcs, const std::filesystem::path& svg_path,
                     const std::filesystem::path& csv_path);

// Reads a TF list file (one symbol per line, '#' comments); symbols
// absent from the vocabulary are dropped. Errors if none survive.
TfPartition partition_from_tf_file(const GeneVocabulary& vocab,
                                   const std::filesystem::path& path);

// Partition snapshot as JSON with sorted tfs/targets arrays. Reading
// requires the vocabulary the partition was built over.
void write_partition_json(const TfPartition& partition, const std::filesystem::path& path);
TfPartition read_partition_json(const GeneVocabulary& vocab,
                                const std::filesystem::path& path);

}  // namespace llm4grn
