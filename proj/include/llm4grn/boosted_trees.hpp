#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "llm4grn/common.hpp"

namespace llm4grn {

struct GbmConfig {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    double subsample_fraction = 0.9;
    std::uint64_t seed = 0;
};

// Binary regression tree stored as a flat node array; node 0 is the root.
struct RegressionTree {
    struct Node {
        int feature = -1;          // -1 for leaves
        double threshold = 0.0;    // go left when x[feature] <= threshold
        int left = -1;
        int right = -1;
        double value = 0.0;        // leaf prediction
    };
    std::vector<Node> nodes;

    bool is_stump() const { return nodes.size() <= 1; }

    double predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const {
        int n = 0;
        while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(n)];
            n = X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(n)].value;
    }
};

// Row indices per feature, sorted by feature value (ties by row index).
// Computed once per design matrix and reused across trees and targets.
struct SortedColumns {
    std::vector<std::vector<int>> order;  // order[j] = rows sorted by X(., j)
};

SortedColumns presort_columns(const Eigen::MatrixXd& X);

struct TreeOptions {
    int max_depth = 3;
    double min_gain = 1e-12;
    double min_split_weight = 2.0;
};

// Weighted least-squares tree grown level-wise over presorted columns.
// Rows with zero weight are ignored; `feature_set` limits split candidates.
// Split gains (weighted SSE reduction) are accumulated into *importance
// when provided, indexed by absolute feature id.
RegressionTree fit_regression_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const std::vector<double>& weights,
                                   const std::vector<int>& feature_set,
                                   const SortedColumns& sorted, const TreeOptions& options,
                                   std::vector<double>* importance);

struct GbmModel {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;
    Eigen::VectorXd importances;  // per feature, total squared-error reduction
    bool degenerate = false;      // zero-variance response

    double predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const {
        double f = base_score;
        for (const auto& tree : trees) f += learning_rate * tree.predict_row(X, row);
        return f;
    }

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        Eigen::VectorXd out(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X, i);
        return out;
    }
};

// Least-squares gradient boosting with depth-limited trees and row
// subsampling. Deterministic under a fixed seed. A zero-variance response
// yields a degenerate model with all-zero importances.
GbmModel fit_boosted_trees(const Eigen::MatrixXd& features, const Eigen::VectorXd& response,
                           const GbmConfig& cfg);
GbmModel fit_boosted_trees(const Eigen::MatrixXd& features, const Eigen::VectorXd& response,
                           const GbmConfig& cfg, const SortedColumns& sorted);

}  // namespace llm4grn
