#include "llm4grn/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace llm4grn {

RandomForest fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const ForestConfig& cfg) {
    if (X.rows() != y.size()) throw ShapeMismatchError("feature rows and labels differ");
    if (X.rows() < 2) throw Error("forest needs at least two rows");
    if (cfg.n_trees < 1 || cfg.max_depth < 1) throw Error("invalid forest configuration");

    const auto n = static_cast<std::uint64_t>(X.rows());
    const auto p = static_cast<std::uint64_t>(X.cols());
    const auto mtry = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::floor(std::sqrt(static_cast<double>(p)))));

    const SortedColumns sorted = presort_columns(X);
    TreeOptions options;
    options.max_depth = cfg.max_depth;

    RandomForest forest;
    forest.trees.reserve(static_cast<std::size_t>(cfg.n_trees));
    Rng rng(cfg.seed);
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int t = 0; t < cfg.n_trees; ++t) {
        std::fill(weights.begin(), weights.end(), 0.0);
        for (std::uint64_t i = 0; i < n; ++i) weights[rng.below(n)] += 1.0;
        std::vector<int> features;
        features.reserve(static_cast<std::size_t>(mtry));
        for (auto f : rng.sample_without_replacement(p, mtry))
            features.push_back(static_cast<int>(f));
        std::sort(features.begin(), features.end());
        forest.trees.push_back(
            fit_regression_tree(X, y, weights, features, sorted, options, nullptr));
    }
    return forest;
}

}  // namespace llm4grn
