#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "llm4grn/boosted_trees.hpp"

using namespace llm4grn;

namespace {

// Independent oracle: exhaustive weighted stump search. For every feature
// and every midpoint between consecutive distinct values, score the split
// by weighted SSE reduction computed from scratch. O(p * n^2), written
// against the raw definition rather than the production sweep.
struct OracleStump {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double left_mean = 0.0;
    double right_mean = 0.0;
};

OracleStump oracle_best_stump(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const std::vector<double>& weights) {
    const auto n = X.rows();
    double w_total = 0.0, s_total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        w_total += weights[static_cast<std::size_t>(i)];
        s_total += weights[static_cast<std::size_t>(i)] * y(i);
    }
    const double parent_score = w_total > 0.0 ? s_total * s_total / w_total : 0.0;

    OracleStump best;
    for (int j = 0; j < X.cols(); ++j) {
        std::vector<double> cuts;
        for (Eigen::Index i = 0; i < n; ++i)
            if (weights[static_cast<std::size_t>(i)] > 0.0) cuts.push_back(X(i, j));
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double threshold = (cuts[c] + cuts[c + 1]) / 2.0;
            double wl = 0.0, sl = 0.0, wr = 0.0, sr = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double w = weights[static_cast<std::size_t>(i)];
                if (w <= 0.0) continue;
                if (X(i, j) <= threshold) {
                    wl += w;
                    sl += w * y(i);
                } else {
                    wr += w;
                    sr += w * y(i);
                }
            }
            if (wl < 1.0 || wr < 1.0) continue;
            const double gain = sl * sl / wl + sr * sr / wr - parent_score;
            if (!best.found || gain > best.gain) {
                best = {true, j, threshold, gain, sl / wl, sr / wr};
            }
        }
    }
    return best;
}

Eigen::MatrixXd random_design(int n, int p, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = rng.uniform(-2.0, 2.0);
    return X;
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("depth-1 trees match the exhaustive stump oracle") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const Eigen::MatrixXd X = random_design(40, 4, seed);
        Rng rng(seed + 100);
        Eigen::VectorXd y(40);
        for (int i = 0; i < 40; ++i)
            y(i) = (X(i, 1) > 0.3 ? 2.0 : -1.0) + 0.2 * rng.normal();
        std::vector<double> weights(40, 1.0);
        // A few fractional and zero weights exercise the weighted path.
        weights[3] = 2.5;
        weights[7] = 0.0;
        weights[11] = 0.5;

        const OracleStump expected = oracle_best_stump(X, y, weights);
        REQUIRE(expected.found);

        const SortedColumns sorted = presort_columns(X);
        TreeOptions options;
        options.max_depth = 1;
        const RegressionTree tree =
            fit_regression_tree(X, y, weights, {0, 1, 2, 3}, sorted, options, nullptr);
        REQUIRE_FALSE(tree.is_stump());
        const auto& root = tree.nodes[0];
        CHECK(root.feature == expected.feature);
        // Same split set: production uses midpoints too, so thresholds agree.
        CHECK(root.threshold == doctest::Approx(expected.threshold).epsilon(1e-9));
        CHECK(tree.nodes[static_cast<std::size_t>(root.left)].value ==
              doctest::Approx(expected.left_mean).epsilon(1e-9));
        CHECK(tree.nodes[static_cast<std::size_t>(root.right)].value ==
              doctest::Approx(expected.right_mean).epsilon(1e-9));
    }
}

TEST_CASE("stump gain accumulates into the importance vector") {
    const Eigen::MatrixXd X = random_design(60, 3, 9);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) y(i) = X(i, 2) > 0.0 ? 1.0 : 0.0;
    std::vector<double> weights(60, 1.0);
    const OracleStump expected = oracle_best_stump(X, y, weights);
    REQUIRE(expected.found);
    REQUIRE(expected.feature == 2);

    const SortedColumns sorted = presort_columns(X);
    TreeOptions options;
    options.max_depth = 1;
    std::vector<double> importance(3, 0.0);
    (void)fit_regression_tree(X, y, weights, {0, 1, 2}, sorted, options, &importance);
    CHECK(importance[2] == doctest::Approx(expected.gain).epsilon(1e-9));
    CHECK(importance[0] == 0.0);
    CHECK(importance[1] == 0.0);
}

TEST_CASE("integer multiplicity weights equal row duplication") {
    const Eigen::MatrixXd X = random_design(25, 3, 21);
    Rng rng(22);
    Eigen::VectorXd y(25);
    for (int i = 0; i < 25; ++i) y(i) = X(i, 0) * 1.5 - X(i, 2) + 0.1 * rng.normal();

    std::vector<double> weights(25, 1.0);
    weights[4] = 3.0;
    weights[17] = 2.0;

    // Expanded copy: rows repeated according to their multiplicity.
    std::vector<int> rows;
    for (int i = 0; i < 25; ++i)
        for (int r = 0; r < static_cast<int>(weights[static_cast<std::size_t>(i)]); ++r)
            rows.push_back(i);
    Eigen::MatrixXd Xe(static_cast<Eigen::Index>(rows.size()), 3);
    Eigen::VectorXd ye(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Xe.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
        ye(static_cast<Eigen::Index>(r)) = y(rows[r]);
    }

    TreeOptions options;
    options.max_depth = 3;
    const RegressionTree weighted = fit_regression_tree(
        X, y, weights, {0, 1, 2}, presort_columns(X), options, nullptr);
    const RegressionTree expanded =
        fit_regression_tree(Xe, ye, std::vector<double>(rows.size(), 1.0), {0, 1, 2},
                            presort_columns(Xe), options, nullptr);

    // Same structure reached through different row sets: compare predictions.
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        CHECK(weighted.predict_row(X, i) == doctest::Approx(expanded.predict_row(X, i)).epsilon(1e-9));
}

TEST_CASE("max_depth bounds the tree and feature_set restricts splits") {
    const Eigen::MatrixXd X = random_design(80, 4, 31);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) y(i) = X(i, 0) + 2.0 * X(i, 3);

    TreeOptions options;
    options.max_depth = 2;
    const RegressionTree tree = fit_regression_tree(
        X, y, std::vector<double>(80, 1.0), {0, 1}, presort_columns(X), options, nullptr);
    // Depth 2 ⇒ at most 3 internal + 4 leaf nodes.
    CHECK(tree.nodes.size() <= 7);
    for (const auto& node : tree.nodes)
        if (node.feature >= 0) CHECK((node.feature == 0 || node.feature == 1));
}

TEST_CASE("constant response yields a degenerate model") {
    const Eigen::MatrixXd X = random_design(30, 3, 41);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 2.5);
    GbmConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 5;
    const GbmModel model = fit_boosted_trees(X, y, cfg);
    CHECK(model.degenerate);
    CHECK(model.importances.maxCoeff() == 0.0);
    CHECK(model.predict_row(X, 0) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("boosting fits a nonlinear signal and is seeded") {
    const Eigen::MatrixXd X = random_design(300, 4, 51);
    Rng rng(52);
    Eigen::VectorXd y(300);
    for (int i = 0; i < 300; ++i)
        y(i) = std::sin(2.0 * X(i, 0)) + (X(i, 2) > 0.5 ? 1.0 : 0.0) + 0.05 * rng.normal();

    GbmConfig cfg;
    cfg.n_trees = 150;
    cfg.max_depth = 3;
    cfg.learning_rate = 0.1;
    cfg.seed = 7;
    const GbmModel model = fit_boosted_trees(X, y, cfg);

    const double base_mse = mse(y, Eigen::VectorXd::Constant(300, y.mean()));
    const double fit_mse = mse(y, model.predict(X));
    CHECK(fit_mse < 0.15 * base_mse);

    // Informative features dominate the importances.
    CHECK(model.importances(0) > model.importances(1) * 10.0);
    CHECK(model.importances(2) > model.importances(3) * 10.0);

    const GbmModel again = fit_boosted_trees(X, y, cfg);
    CHECK(model.predict(X) == again.predict(X));

    GbmConfig other = cfg;
    other.seed = 8;
    const GbmModel different = fit_boosted_trees(X, y, other);
    CHECK(model.predict(X) != different.predict(X));
}

TEST_CASE("later boosting rounds keep reducing training error") {
    const Eigen::MatrixXd X = random_design(120, 3, 61);
    Eigen::VectorXd y(120);
    for (int i = 0; i < 120; ++i) y(i) = X(i, 0) * X(i, 1);

    GbmConfig small;
    small.n_trees = 10;
    small.subsample_fraction = 1.0;
    small.seed = 3;
    GbmConfig large = small;
    large.n_trees = 120;

    const double small_mse = mse(y, fit_boosted_trees(X, y, small).predict(X));
    const double large_mse = mse(y, fit_boosted_trees(X, y, large).predict(X));
    CHECK(large_mse < small_mse);
}

TEST_CASE("presorted columns are consistent with direct sorting") {
    const Eigen::MatrixXd X = random_design(15, 2, 71);
    const SortedColumns sorted = presort_columns(X);
    REQUIRE(sorted.order.size() == 2);
    for (int j = 0; j < 2; ++j) {
        REQUIRE(sorted.order[static_cast<std::size_t>(j)].size() == 15);
        for (std::size_t r = 0; r + 1 < 15; ++r) {
            const int a = sorted.order[static_cast<std::size_t>(j)][r];
            const int b = sorted.order[static_cast<std::size_t>(j)][r + 1];
            CHECK(X(a, j) <= X(b, j));
        }
    }
}
