#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llm4grn/expression.hpp"
#include "llm4grn/random_forest.hpp"

namespace llm4grn {

struct ZeroCentroidError : Error {
    using Error::Error;
};
struct SingleClassError : Error {
    using Error::Error;
};
struct EmptyLabelError : Error {
    using Error::Error;
};
struct UnknownMarkerError : Error {
    using Error::Error;
};

// Centroid distances. Both inputs must share a vocabulary and carry the
// same normalization state.
double cosine_distance(const ExpressionMatrix& r, const ExpressionMatrix& s);
double euclidean_distance(const ExpressionMatrix& r, const ExpressionMatrix& s);

struct MmdConfig {
    // Explicit RBF bandwidths; empty means one bandwidth from the median
    // heuristic (median pairwise distance of the pooled sample).
    std::vector<double> bandwidths;

    std::string describe() const;
};

// Median of all pairwise Euclidean distances of the pooled rows; 1.0 when
// the median degenerates to zero.
double median_pairwise_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// Biased quadratic MMD² with kernel exp(-d²/(2σ²)), summed over the
// configured bandwidths, clamped at zero against round-off.
double mmd(const ExpressionMatrix& r, const ExpressionMatrix& s, const MmdConfig& cfg = {});

// Mann-Whitney AUROC with average ranks (ties count one half).
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

struct RfAurocConfig {
    ForestConfig forest;
    double train_fraction = 0.7;
    int repeats = 10;
    std::uint64_t seed = 0;
};

// Trains a forest to tell real (label 1) from synthetic (label 0) rows on
// a stratified split and reports the held-out AUROC over seeded repeats.
MeanStd rf_auroc(const ExpressionMatrix& r, const ExpressionMatrix& s, const RfAurocConfig& cfg,
                 std::vector<double>* per_repeat = nullptr);

struct MetricReport {
    std::string arm;          // dataset-pair label, e.g. the GRN source
    std::string real_label;
    std::string synth_label;
    MeanStd cosine;
    MeanStd euclidean;
    MeanStd mmd;
    MeanStd rf_auroc;
    int n_repeats = 0;
    std::string mmd_kernel;   // bandwidth choice, recorded with every report
};

void write_metric_reports_csv(const std::vector<MetricReport>& reports,
                              const std::filesystem::path& path);
void write_metric_reports_json(const std::vector<MetricReport>& reports,
                               const std::filesystem::path& path);
std::vector<MetricReport> read_metric_reports_json(const std::filesystem::path& path);

nlohmann::json metric_reports_to_json(const std::vector<MetricReport>& reports);
std::vector<MetricReport> metric_reports_from_json(const nlohmann::json& parsed);

struct CellTypeRow {
    std::string label;
    std::size_t count = 0;
    double percentage = 0.0;
};
struct CellTypeTable {
    std::vector<CellTypeRow> rows;  // sorted by label
};

struct AnnotationResult {
    std::vector<std::string> labels;  // one per synthetic cell
    CellTypeTable table;
};

// Transfers labels from the real data to synthetic cells: PCA is fit on
// the real matrix, per-label centroids are formed in PC space, and each
// synthetic cell takes the nearest centroid's label (ties to the
// lexicographically first label).
AnnotationResult annotate_and_proportions(const ExpressionMatrix& labeled_real,
                                          const std::vector<std::string>& real_labels,
                                          const ExpressionMatrix& synthetic, int n_pcs);

struct MarkerRow {
    std::string label;
    std::string marker;
    double mean = 0.0;      // mean expression within the label's cells
    double fraction = 0.0;  // fraction of the label's cells expressing it
};

// Dot-plot data: per (cell type, marker) mean expression and expressing
// fraction. Rows are ordered by label, then by the given marker order.
std::vector<MarkerRow> marker_summary(const ExpressionMatrix& m,
                                      const std::vector<std::string>& labels,
                                      const std::vector<std::string>& markers);

void write_marker_summary_csv(const std::vector<MarkerRow>& rows,
                              const std::filesystem::path& path);

}  // namespace llm4grn
