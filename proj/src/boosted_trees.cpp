#include "llm4grn/boosted_trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace llm4grn {

SortedColumns presort_columns(const Eigen::MatrixXd& X) {
    SortedColumns sorted;
    sorted.order.resize(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        auto& ord = sorted.order[static_cast<std::size_t>(j)];
        ord.resize(static_cast<std::size_t>(X.rows()));
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(),
                         [&X, j](int a, int b) { return X(a, j) < X(b, j); });
    }
    return sorted;
}

namespace {

struct FrontierNode {
    int node_id = -1;
    double sum = 0.0;     // weighted response total
    double weight = 0.0;  // total row weight
    // Best split found so far across all candidate features.
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
};

}  // namespace

RegressionTree fit_regression_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const std::vector<double>& weights,
                                   const std::vector<int>& feature_set,
                                   const SortedColumns& sorted, const TreeOptions& options,
                                   std::vector<double>* importance) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (static_cast<std::size_t>(y.size()) != n || weights.size() != n)
        throw ShapeMismatchError("tree training arrays disagree on row count");

    RegressionTree tree;
    tree.nodes.emplace_back();

    // node_of[r] = current node for row r, or -1 once its node is final.
    std::vector<int> node_of(n, -1);
    FrontierNode root;
    root.node_id = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (weights[r] <= 0.0) continue;
        node_of[r] = 0;
        root.sum += weights[r] * y(static_cast<Eigen::Index>(r));
        root.weight += weights[r];
    }
    tree.nodes[0].value = root.weight > 0.0 ? root.sum / root.weight : 0.0;
    if (root.weight <= 0.0) return tree;

    std::vector<FrontierNode> frontier{root};
    // slot_of[node_id] = index into the frontier arrays for this level.
    std::vector<int> slot_of;

    std::vector<double> left_sum;
    std::vector<double> left_weight;
    std::vector<double> last_value;

    for (int depth = 0; depth < options.max_depth && !frontier.empty(); ++depth) {
        const std::size_t m = frontier.size();
        slot_of.assign(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < m; ++s) slot_of[static_cast<std::size_t>(frontier[s].node_id)] = static_cast<int>(s);

        for (int feature : feature_set) {
            left_sum.assign(m, 0.0);
            left_weight.assign(m, 0.0);
            last_value.assign(m, std::numeric_limits<double>::quiet_NaN());
            const auto& order = sorted.order[static_cast<std::size_t>(feature)];
            for (int r : order) {
                const int node = node_of[static_cast<std::size_t>(r)];
                if (node < 0) continue;
                const int s = slot_of[static_cast<std::size_t>(node)];
                if (s < 0) continue;
                auto& fn = frontier[static_cast<std::size_t>(s)];
                const double v = X(r, feature);
                const std::size_t su = static_cast<std::size_t>(s);
                if (left_weight[su] > 0.0 && v != last_value[su]) {
                    const double wl = left_weight[su];
                    const double wr = fn.weight - wl;
                    if (wl >= 1.0 && wr >= 1.0) {
                        const double sl = left_sum[su];
                        const double sr = fn.sum - sl;
                        const double gain =
                            sl * sl / wl + sr * sr / wr - fn.sum * fn.sum / fn.weight;
                        if (gain > fn.best_gain) {
                            fn.best_gain = gain;
                            fn.best_feature = feature;
                            fn.best_threshold = 0.5 * (last_value[su] + v);
                        }
                    }
                }
                const double w = weights[static_cast<std::size_t>(r)];
                left_sum[su] += w * y(r);
                left_weight[su] += w;
                last_value[su] = v;
            }
        }

        std::vector<FrontierNode> next;
        std::vector<int> child_slot(tree.nodes.size() + 2 * m, -1);
        for (auto& fn : frontier) {
            auto& node = tree.nodes[static_cast<std::size_t>(fn.node_id)];
            if (fn.best_feature < 0 || fn.best_gain < options.min_gain ||
                fn.weight < options.min_split_weight) {
                continue;  // stays a leaf; node.value already holds the mean
            }
            node.feature = fn.best_feature;
            node.threshold = fn.best_threshold;
            node.left = static_cast<int>(tree.nodes.size());
            node.right = node.left + 1;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            if (importance)
                (*importance)[static_cast<std::size_t>(fn.best_feature)] += fn.best_gain;
            FrontierNode l, r;
            l.node_id = node.left;
            r.node_id = node.right;
            child_slot[static_cast<std::size_t>(l.node_id)] = static_cast<int>(next.size());
            next.push_back(l);
            child_slot[static_cast<std::size_t>(r.node_id)] = static_cast<int>(next.size());
            next.push_back(r);
        }

        // Route rows into children and accumulate child statistics.
        for (std::size_t r = 0; r < n; ++r) {
            const int node = node_of[r];
            if (node < 0) continue;
            const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
            if (nd.feature < 0) {
                node_of[r] = -1;  // finalized leaf
                continue;
            }
            const int child = X(static_cast<Eigen::Index>(r), nd.feature) <= nd.threshold
                                  ? nd.left
                                  : nd.right;
            node_of[r] = child;
            auto& fn = next[static_cast<std::size_t>(child_slot[static_cast<std::size_t>(child)])];
            fn.sum += weights[r] * y(static_cast<Eigen::Index>(r));
            fn.weight += weights[r];
        }
        for (const auto& fn : next) {
            tree.nodes[static_cast<std::size_t>(fn.node_id)].value =
                fn.weight > 0.0 ? fn.sum / fn.weight : 0.0;
        }
        frontier = std::move(next);
    }
    return tree;
}

GbmModel fit_boosted_trees(const Eigen::MatrixXd& features, const Eigen::VectorXd& response,
                           const GbmConfig& cfg) {
    return fit_boosted_trees(features, response, cfg, presort_columns(features));
}

GbmModel fit_boosted_trees(const Eigen::MatrixXd& features, const Eigen::VectorXd& response,
                           const GbmConfig& cfg, const SortedColumns& sorted) {
    if (features.rows() != response.size())
        throw ShapeMismatchError("feature rows and response length differ");
    if (features.rows() < 1) throw ShapeMismatchError("no training rows");
    if (cfg.n_trees < 1 || cfg.max_depth < 1 || cfg.learning_rate <= 0.0 ||
        cfg.subsample_fraction <= 0.0 || cfg.subsample_fraction > 1.0)
        throw Error("invalid boosting configuration");

    const auto n = features.rows();
    const auto p = features.cols();

    GbmModel model;
    model.learning_rate = cfg.learning_rate;
    model.base_score = response.mean();
    model.importances = Eigen::VectorXd::Zero(p);

    const double spread = response.maxCoeff() - response.minCoeff();
    if (!(spread > 0.0)) {
        model.degenerate = true;
        return model;
    }

    std::vector<int> all_features(static_cast<std::size_t>(p));
    std::iota(all_features.begin(), all_features.end(), 0);

    TreeOptions options;
    options.max_depth = cfg.max_depth;

    std::vector<double> importance(static_cast<std::size_t>(p), 0.0);
    Eigen::VectorXd residual = response.array() - model.base_score;
    std::vector<double> weights(static_cast<std::size_t>(n), 0.0);
    Rng rng(cfg.seed);

    const auto n_sub = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(cfg.subsample_fraction * static_cast<double>(n)));

    for (int t = 0; t < cfg.n_trees; ++t) {
        std::fill(weights.begin(), weights.end(), 0.0);
        if (n_sub >= static_cast<std::uint64_t>(n)) {
            std::fill(weights.begin(), weights.end(), 1.0);
        } else {
            for (auto r : rng.sample_without_replacement(static_cast<std::uint64_t>(n), n_sub))
                weights[static_cast<std::size_t>(r)] = 1.0;
        }
        RegressionTree tree = fit_regression_tree(features, residual, weights, all_features,
                                                  sorted, options, &importance);
        if (tree.is_stump() && tree.nodes[0].value == 0.0) continue;  // no usable split
        for (Eigen::Index i = 0; i < n; ++i)
            residual(i) -= cfg.learning_rate * tree.predict_row(features, i);
        model.trees.push_back(std::move(tree));
    }
    for (Eigen::Index j = 0; j < p; ++j) model.importances(j) = importance[static_cast<std::size_t>(j)];
    return model;
}

}  // namespace llm4grn
