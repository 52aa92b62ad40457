#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "llm4grn/boosted_trees.hpp"
#include "llm4grn/expression.hpp"
#include "llm4grn/grn.hpp"

namespace llm4grn {

struct InferenceConfig {
    int k = 10;                 // regulators retained per target
    GbmConfig gbm;              // per-target booster settings
    std::uint64_t seed = 0;     // mixed with the target symbol per model
    int n_threads = 1;
};

struct ScoredEdge {
    std::string tf;
    std::string target;
    double importance = 0.0;
};

// Per-target TF importances from the boosted regressions, before top-k
// selection. Rows are ordered by target, then by descending importance
// with symbol ties broken alphabetically.
struct ImportanceTable {
    std::vector<ScoredEdge> rows;
};

// Fits one boosted regression per target on the TF columns and keeps the
// k highest-importance TFs per target. Deterministic for a fixed seed:
// each target's booster is seeded from (seed, target symbol).
Grn infer_grn(const ExpressionMatrix& matrix, const TfPartition& partition,
              const InferenceConfig& cfg);

Grn infer_grn(const ExpressionMatrix& matrix, const TfPartition& partition,
              const InferenceConfig& cfg, ImportanceTable* table);

void write_importance_table(const ImportanceTable& table, const std::filesystem::path& path);

}  // namespace llm4grn
