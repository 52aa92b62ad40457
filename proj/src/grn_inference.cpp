#include "llm4grn/grn_inference.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace llm4grn {

namespace {

// Importance ranking for one target: descending score, ties alphabetical.
std::vector<ScoredEdge> rank_tfs(const std::vector<std::string>& tfs,
                                 const Eigen::VectorXd& importances,
                                 const std::string& target) {
    std::vector<ScoredEdge> ranked;
    ranked.reserve(tfs.size());
    for (std::size_t j = 0; j < tfs.size(); ++j)
        ranked.push_back({tfs[j], target, importances(static_cast<Eigen::Index>(j))});
    std::sort(ranked.begin(), ranked.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.tf < b.tf;
    });
    return ranked;
}

}  // namespace

Grn infer_grn(const ExpressionMatrix& matrix, const TfPartition& partition,
              const InferenceConfig& cfg) {
    return infer_grn(matrix, partition, cfg, nullptr);
}

Grn infer_grn(const ExpressionMatrix& matrix, const TfPartition& partition,
              const InferenceConfig& cfg, ImportanceTable* table) {
    if (cfg.k < 1) throw Error("regulator count must be positive");
    if (static_cast<std::size_t>(cfg.k) > partition.tfs().size())
        throw TooFewTfsError("fewer candidate TFs than requested regulators per target");

    const auto& tfs = partition.tfs();
    const auto& targets = partition.targets();
    const Eigen::MatrixXd tf_block = matrix.columns_for(tfs);
    const SortedColumns sorted = presort_columns(tf_block);

    std::vector<std::vector<ScoredEdge>> per_target(targets.size());
    std::atomic<std::size_t> cursor{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= targets.size()) return;
            try {
                const auto& target = targets[i];
                const Eigen::VectorXd response =
                    matrix.values.col(static_cast<Eigen::Index>(matrix.genes.index_of(target)));
                GbmConfig gbm = cfg.gbm;
                gbm.seed = fnv1a64_mix(cfg.seed, target);
                GbmModel model = fit_boosted_trees(tf_block, response, gbm, sorted);
                per_target[i] = rank_tfs(tfs, model.importances, target);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = std::max(1, cfg.n_threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<Edge> edges;
    edges.reserve(targets.size() * static_cast<std::size_t>(cfg.k));
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (int j = 0; j < cfg.k; ++j) {
            const auto& row = per_target[i][static_cast<std::size_t>(j)];
            edges.emplace_back(row.tf, row.target);
        }
        if (table) {
            for (const auto& row : per_target[i]) table->rows.push_back(row);
        }
    }
    return validate_grn(partition, edges, cfg.k);
}

void write_importance_table(const ImportanceTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "TF\ttarget\timportance\n";
    for (const auto& row : table.rows)
        out << row.tf << '\t' << row.target << '\t' << format_double(row.importance) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace llm4grn
