#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "llm4grn/boosted_trees.hpp"
#include "llm4grn/expression.hpp"
#include "llm4grn/grn.hpp"

namespace llm4grn {

struct EmptyPoolError : Error {
    using Error::Error;
};

struct LinearUniformSpec {
    int n_tfs = 20;
    int n_targets = 50;
    int k = 5;
    int n_cells = 1000;
    std::pair<double, double> coeff_range{0.5, 1.5};
    double noise_scale = 0.1;
    std::uint64_t seed = 0;
};

// Known-graph benchmark: TF columns are i.i.d. Uniform(0,1); each target
// is a fixed positive-weight linear mix of its k parents plus Gaussian
// noise, clipped at zero. Returns the matrix and the generating graph.
std::pair<ExpressionMatrix, Grn> generate_linear_uniform(const LinearUniformSpec& spec);

// One fitted target mechanism: boosted regression on the k parent TFs
// plus the pool of training residuals used as empirical noise.
struct TargetModel {
    std::string symbol;
    std::vector<std::string> parents;  // sorted regulator symbols
    GbmModel model;                    // features indexed in `parents` order
    std::vector<double> residuals;     // one per training cell
};

// Two-stage generator: stage one draws whole TF rows from the training
// pool (preserving TF-TF correlations), stage two produces each target
// from its parents through the fitted mechanism.
struct Scm {
    GeneVocabulary genes;  // output vocabulary, training column order
    Grn grn;
    std::vector<std::string> tf_symbols;  // partition TFs, sorted
    Eigen::MatrixXd tf_pool;              // training rows × TF columns
    std::vector<TargetModel> targets;     // aligned with partition targets
    double library_scale = 10000.0;

    // column_map[c] = (is_tf, index into tf_symbols or targets)
    std::vector<std::pair<bool, std::size_t>> column_map;
};

Scm fit_scm(const ExpressionMatrix& train, const Grn& grn, const GbmConfig& cfg,
            double library_scale, int n_threads = 1);

// The sampling steps are exposed separately so structural properties can
// be probed with fixed noise: `tf_rows_for` materializes bootstrap picks,
// `residual_draws` fixes the stage-two noise, and `synthesize_raw` is the
// deterministic mechanism (prediction + residual, clipped at zero, no
// library normalization).
Eigen::MatrixXd tf_rows_for(const Scm& scm, const std::vector<std::uint64_t>& picks);
Eigen::MatrixXd residual_draws(const Scm& scm, std::size_t n_cells, Rng& rng);
Eigen::MatrixXd synthesize_raw(const Scm& scm, const Eigen::MatrixXd& tf_values,
                               const Eigen::MatrixXd& residuals);

// Full generator: bootstrap TF rows, apply mechanisms, clip, rescale each
// cell to library_scale. Deterministic for a fixed seed.
ExpressionMatrix sample_synthetic(const Scm& scm, std::size_t n_cells, std::uint64_t seed);

// Non-causal baseline: each output cell takes its TF block and its target
// block from two independently drawn training rows, so marginals survive
// but the TF→target coupling is destroyed. Rescaled like sample_synthetic.
ExpressionMatrix sample_structure_free(const ExpressionMatrix& train,
                                       const TfPartition& partition, std::size_t n_cells,
                                       std::uint64_t seed, double library_scale);

}  // namespace llm4grn
