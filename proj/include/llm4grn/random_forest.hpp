#pragma once

#include <cstdint>
#include <vector>

#include "llm4grn/boosted_trees.hpp"

namespace llm4grn {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 8;
    std::uint64_t seed = 0;
};

// Bagged regression forest. With 0/1 labels the averaged leaf means are
// class-probability scores, which is all AUROC needs.
struct RandomForest {
    std::vector<RegressionTree> trees;

    double predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const {
        double total = 0.0;
        for (const auto& tree : trees) total += tree.predict_row(X, row);
        return trees.empty() ? 0.0 : total / static_cast<double>(trees.size());
    }

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        Eigen::VectorXd out(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X, i);
        return out;
    }
};

// Each tree sees a bootstrap resample (as multiplicity weights) and a
// fresh uniform subset of floor(sqrt(p)) features. Deterministic for a
// fixed seed.
RandomForest fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const ForestConfig& cfg);

}  // namespace llm4grn
