#include "llm4grn/causal_synth.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace llm4grn {

namespace {

std::vector<std::string> numbered_symbols(const char* prefix, int count) {
    std::vector<std::string> symbols;
    symbols.reserve(static_cast<std::size_t>(count));
    char buf[32];
    for (int i = 1; i <= count; ++i) {
        std::snprintf(buf, sizeof(buf), "%s%04d", prefix, i);
        symbols.emplace_back(buf);
    }
    return symbols;
}

}  // namespace

std::pair<ExpressionMatrix, Grn> generate_linear_uniform(const LinearUniformSpec& spec) {
    if (spec.n_tfs < 1 || spec.n_targets < 1 || spec.n_cells < 1)
        throw Error("counts in the generator spec must be positive");
    if (spec.k < 1 || spec.k > spec.n_tfs)
        throw Error("regulator count must be in [1, n_tfs]");
    if (!(spec.coeff_range.first < spec.coeff_range.second))
        throw Error("coefficient range must have low < high");
    if (spec.noise_scale < 0.0) throw Error("noise scale must be non-negative");

    std::vector<std::string> symbols = numbered_symbols("TF", spec.n_tfs);
    const std::vector<std::string> target_symbols = numbered_symbols("TGT", spec.n_targets);
    std::vector<std::string> tf_symbols = symbols;
    symbols.insert(symbols.end(), target_symbols.begin(), target_symbols.end());
    GeneVocabulary vocab(symbols);
    TfPartition partition = TfPartition::from_tf_list(vocab, tf_symbols);

    Grn grn = random_grn(partition, spec.k, fnv1a64_mix(spec.seed, "graph"));

    // Edge weights are fixed once, iterating targets and regulators in
    // their canonical sorted order.
    Rng weight_rng(fnv1a64_mix(spec.seed, "weights"));
    std::vector<std::vector<double>> weights(target_symbols.size());
    const auto& targets = partition.targets();
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& parents = grn.regulators_of(targets[t]);
        weights[t].reserve(parents.size());
        for (std::size_t j = 0; j < parents.size(); ++j)
            weights[t].push_back(weight_rng.uniform(spec.coeff_range.first, spec.coeff_range.second));
    }

    // Column lookup: partition order is sorted, which matches the zero-padded
    // generated names, but derive indices through the vocabulary regardless.
    std::vector<std::vector<std::size_t>> parent_cols(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        for (const auto& parent : grn.regulators_of(targets[t]))
            parent_cols[t].push_back(vocab.index_of(parent));
    }

    Rng cell_rng(fnv1a64_mix(spec.seed, "cells"));
    Eigen::MatrixXd values(spec.n_cells, vocab.size());
    for (int i = 0; i < spec.n_cells; ++i) {
        for (int j = 0; j < spec.n_tfs; ++j) values(i, j) = cell_rng.unit();
        for (std::size_t t = 0; t < targets.size(); ++t) {
            double v = 0.0;
            for (std::size_t j = 0; j < parent_cols[t].size(); ++j)
                v += weights[t][j] * values(i, static_cast<Eigen::Index>(parent_cols[t][j]));
            if (spec.noise_scale > 0.0) v += spec.noise_scale * cell_rng.normal();
            values(i, static_cast<Eigen::Index>(vocab.index_of(targets[t]))) = std::max(0.0, v);
        }
    }
    return {make_matrix(std::move(values), {}, vocab, Norm::raw), std::move(grn)};
}

Scm fit_scm(const ExpressionMatrix& train, const Grn& grn, const GbmConfig& cfg,
            double library_scale, int n_threads) {
    if (library_scale <= 0.0) throw Error("library scale must be positive");
    if (train.n_cells() == 0) throw EmptyPoolError("training matrix has no cells");

    const auto& partition = grn.partition();
    // Raises UnknownSymbolError when a graph symbol is absent from training.
    for (const auto& symbol : partition.tfs()) train.genes.index_of(symbol);
    for (const auto& symbol : partition.targets()) train.genes.index_of(symbol);

    Scm scm;
    scm.grn = grn;
    scm.tf_symbols = partition.tfs();
    scm.tf_pool = train.columns_for(scm.tf_symbols);
    scm.library_scale = library_scale;

    // Output vocabulary: partition symbols in training column order.
    std::set<std::string> member(partition.tfs().begin(), partition.tfs().end());
    member.insert(partition.targets().begin(), partition.targets().end());
    std::vector<std::string> out_symbols;
    for (const auto& symbol : train.genes.symbols())
        if (member.count(symbol)) out_symbols.push_back(symbol);
    scm.genes = GeneVocabulary(out_symbols);

    const auto& targets = partition.targets();
    scm.targets.resize(targets.size());
    std::atomic<std::size_t> cursor{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= targets.size()) return;
            try {
                TargetModel tm;
                tm.symbol = targets[i];
                tm.parents = grn.regulators_of(targets[i]);
                const Eigen::MatrixXd X = train.columns_for(tm.parents);
                const Eigen::VectorXd y = train.values.col(
                    static_cast<Eigen::Index>(train.genes.index_of(targets[i])));
                GbmConfig gbm = cfg;
                gbm.seed = fnv1a64_mix(cfg.seed, targets[i]);
                tm.model = fit_boosted_trees(X, y, gbm);
                const Eigen::VectorXd fitted = tm.model.predict(X);
                tm.residuals.resize(static_cast<std::size_t>(y.size()));
                for (Eigen::Index r = 0; r < y.size(); ++r)
                    tm.residuals[static_cast<std::size_t>(r)] = y(r) - fitted(r);
                scm.targets[i] = std::move(tm);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int threads = std::max(1, n_threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    scm.column_map.reserve(scm.genes.size());
    for (const auto& symbol : scm.genes.symbols()) {
        if (partition.is_tf(symbol)) {
            const auto it = std::lower_bound(scm.tf_symbols.begin(), scm.tf_symbols.end(), symbol);
            scm.column_map.emplace_back(true,
                                        static_cast<std::size_t>(it - scm.tf_symbols.begin()));
        } else {
            const auto it = std::lower_bound(targets.begin(), targets.end(), symbol);
            scm.column_map.emplace_back(false, static_cast<std::size_t>(it - targets.begin()));
        }
    }
    return scm;
}

Eigen::MatrixXd tf_rows_for(const Scm& scm, const std::vector<std::uint64_t>& picks) {
    if (scm.tf_pool.rows() == 0) throw EmptyPoolError("TF bootstrap pool is empty");
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(picks.size()), scm.tf_pool.cols());
    for (std::size_t i = 0; i < picks.size(); ++i) {
        if (picks[i] >= static_cast<std::uint64_t>(scm.tf_pool.rows()))
            throw Error("bootstrap pick out of range");
        rows.row(static_cast<Eigen::Index>(i)) =
            scm.tf_pool.row(static_cast<Eigen::Index>(picks[i]));
    }
    return rows;
}

Eigen::MatrixXd residual_draws(const Scm& scm, std::size_t n_cells, Rng& rng) {
    Eigen::MatrixXd draws(static_cast<Eigen::Index>(n_cells),
                          static_cast<Eigen::Index>(scm.targets.size()));
    for (std::size_t i = 0; i < n_cells; ++i) {
        for (std::size_t t = 0; t < scm.targets.size(); ++t) {
            const auto& pool = scm.targets[t].residuals;
            if (pool.empty()) throw EmptyPoolError("residual pool is empty");
            draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                pool[rng.below(pool.size())];
        }
    }
    return draws;
}

Eigen::MatrixXd synthesize_raw(const Scm& scm, const Eigen::MatrixXd& tf_values,
                               const Eigen::MatrixXd& residuals) {
    const Eigen::Index n = tf_values.rows();
    if (tf_values.cols() != static_cast<Eigen::Index>(scm.tf_symbols.size()))
        throw ShapeMismatchError("TF value columns do not match the partition");
    if (residuals.rows() != n ||
        residuals.cols() != static_cast<Eigen::Index>(scm.targets.size()))
        throw ShapeMismatchError("residual draws do not match cells × targets");

    // Parent lookup into the TF block, fixed per target.
    std::vector<std::vector<Eigen::Index>> parent_cols(scm.targets.size());
    for (std::size_t t = 0; t < scm.targets.size(); ++t) {
        for (const auto& parent : scm.targets[t].parents) {
            const auto it =
                std::lower_bound(scm.tf_symbols.begin(), scm.tf_symbols.end(), parent);
            parent_cols[t].push_back(static_cast<Eigen::Index>(it - scm.tf_symbols.begin()));
        }
    }

    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(scm.column_map.size()));
    for (std::size_t c = 0; c < scm.column_map.size(); ++c) {
        const auto [is_tf, idx] = scm.column_map[c];
        const Eigen::Index col = static_cast<Eigen::Index>(c);
        if (is_tf) {
            out.col(col) = tf_values.col(static_cast<Eigen::Index>(idx));
        } else {
            const auto& tm = scm.targets[idx];
            const auto& cols = parent_cols[idx];
            Eigen::MatrixXd pblock(n, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t j = 0; j < cols.size(); ++j)
                pblock.col(static_cast<Eigen::Index>(j)) = tf_values.col(cols[j]);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v =
                    tm.model.predict_row(pblock, i) + residuals(i, static_cast<Eigen::Index>(idx));
                out(i, col) = std::max(0.0, v);
            }
        }
    }
    return out;
}

ExpressionMatrix sample_structure_free(const ExpressionMatrix& train,
                                       const TfPartition& partition, std::size_t n_cells,
                                       std::uint64_t seed, double library_scale) {
    if (n_cells < 1) throw Error("cell count must be positive");
    if (library_scale <= 0.0) throw Error("library scale must be positive");
    if (train.n_cells() == 0) throw EmptyPoolError("training matrix has no cells");
    for (const auto& symbol : partition.tfs()) train.genes.index_of(symbol);
    for (const auto& symbol : partition.targets()) train.genes.index_of(symbol);

    std::set<std::string> member(partition.tfs().begin(), partition.tfs().end());
    member.insert(partition.targets().begin(), partition.targets().end());
    std::vector<std::string> out_symbols;
    for (const auto& symbol : train.genes.symbols())
        if (member.count(symbol)) out_symbols.push_back(symbol);
    const GeneVocabulary vocab(out_symbols);

    std::vector<std::size_t> cols(out_symbols.size());
    std::vector<bool> is_tf(out_symbols.size());
    for (std::size_t c = 0; c < out_symbols.size(); ++c) {
        cols[c] = train.genes.index_of(out_symbols[c]);
        is_tf[c] = partition.is_tf(out_symbols[c]);
    }

    Rng rng(seed);
    const auto pool = static_cast<std::uint64_t>(train.n_cells());
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n_cells),
                           static_cast<Eigen::Index>(out_symbols.size()));
    for (std::size_t i = 0; i < n_cells; ++i) {
        const auto tf_row = static_cast<Eigen::Index>(rng.below(pool));
        const auto target_row = static_cast<Eigen::Index>(rng.below(pool));
        for (std::size_t c = 0; c < out_symbols.size(); ++c) {
            const auto src = is_tf[c] ? tf_row : target_row;
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                train.values(src, static_cast<Eigen::Index>(cols[c]));
        }
        const double total = values.row(static_cast<Eigen::Index>(i)).sum();
        if (total <= 0.0)
            throw ZeroLibraryError("composed cell " + std::to_string(i) +
                                   " has zero total expression");
        values.row(static_cast<Eigen::Index>(i)) *= library_scale / total;
    }
    return make_matrix(std::move(values), {}, vocab, Norm::raw);
}

ExpressionMatrix sample_synthetic(const Scm& scm, std::size_t n_cells, std::uint64_t seed) {
    if (n_cells < 1) throw Error("cell count must be positive");
    if (scm.tf_pool.rows() == 0) throw EmptyPoolError("TF bootstrap pool is empty");

    Rng rng(seed);
    std::vector<std::uint64_t> picks(n_cells);
    for (auto& pick : picks) pick = rng.below(static_cast<std::uint64_t>(scm.tf_pool.rows()));
    const Eigen::MatrixXd tf_values = tf_rows_for(scm, picks);
    const Eigen::MatrixXd residuals = residual_draws(scm, n_cells, rng);

    Eigen::MatrixXd raw = synthesize_raw(scm, tf_values, residuals);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        const double total = raw.row(i).sum();
        if (total <= 0.0)
            throw ZeroLibraryError("synthesized cell " + std::to_string(i) +
                                   " has zero total expression");
        raw.row(i) *= scm.library_scale / total;
    }
    return make_matrix(std::move(raw), {}, scm.genes, Norm::raw);
}

}  // namespace llm4grn
