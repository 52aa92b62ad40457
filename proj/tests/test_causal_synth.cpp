#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "llm4grn/causal_synth.hpp"

using namespace llm4grn;

namespace {

LinearUniformSpec small_spec() {
    LinearUniformSpec spec;
    spec.n_tfs = 5;
    spec.n_targets = 8;
    spec.k = 2;
    spec.n_cells = 250;
    spec.noise_scale = 0.05;
    spec.seed = 13;
    return spec;
}

struct Fitted {
    ExpressionMatrix train;
    Grn grn;
    Scm scm;
};

Fitted fit_small(std::uint64_t gbm_seed = 3) {
    const auto spec = small_spec();
    auto [train, grn] = generate_linear_uniform(spec);
    GbmConfig cfg;
    cfg.n_trees = 40;
    cfg.seed = gbm_seed;
    Scm scm = fit_scm(train, grn, cfg, 10000.0);
    return {std::move(train), std::move(grn), std::move(scm)};
}

}  // namespace

TEST_CASE("linear benchmark has the declared shape and bounded TF columns") {
    const auto spec = small_spec();
    const auto [matrix, grn] = generate_linear_uniform(spec);

    CHECK(matrix.n_cells() == spec.n_cells);
    CHECK(matrix.n_genes() == spec.n_tfs + spec.n_targets);
    CHECK(grn.k() == spec.k);
    CHECK(grn.partition().tfs().size() == static_cast<std::size_t>(spec.n_tfs));

    for (const auto& tf : grn.partition().tfs()) {
        const Eigen::MatrixXd col = matrix.columns_for({tf});
        CHECK(col.minCoeff() >= 0.0);
        CHECK(col.maxCoeff() <= 1.0);
    }
    CHECK(matrix.values.minCoeff() >= 0.0);  // targets are clipped

    // Targets correlate with their parents: the mean over parents of the
    // parent-target correlation is clearly positive (weights are positive).
    const auto [again, same_grn] = generate_linear_uniform(spec);
    CHECK(again.values == matrix.values);
    CHECK(same_grn.edges() == grn.edges());

    LinearUniformSpec reseeded = spec;
    reseeded.seed = 14;
    const auto [different, g2] = generate_linear_uniform(reseeded);
    CHECK(different.values != matrix.values);
}

TEST_CASE("fitted mechanisms cover every target with aligned residual pools") {
    const Fitted fx = fit_small();
    CHECK(fx.scm.targets.size() == fx.grn.partition().targets().size());
    CHECK(fx.scm.tf_symbols == fx.grn.partition().tfs());
    CHECK(fx.scm.tf_pool.rows() == fx.train.n_cells());
    CHECK(fx.scm.tf_pool.cols() == static_cast<Eigen::Index>(fx.scm.tf_symbols.size()));

    for (const auto& target : fx.scm.targets) {
        CHECK(target.parents == fx.grn.regulators_of(target.symbol));
        CHECK(target.residuals.size() == static_cast<std::size_t>(fx.train.n_cells()));
    }

    // column_map reproduces the training column layout.
    CHECK(fx.scm.column_map.size() == static_cast<std::size_t>(fx.train.n_genes()));
    for (std::size_t c = 0; c < fx.scm.column_map.size(); ++c) {
        const auto [is_tf, idx] = fx.scm.column_map[c];
        const std::string& symbol = fx.train.genes.symbol(c);
        if (is_tf)
            CHECK(fx.scm.tf_symbols[idx] == symbol);
        else
            CHECK(fx.scm.targets[idx].symbol == symbol);
    }
}

TEST_CASE("synthesize_raw passes TF values through untouched") {
    const Fitted fx = fit_small();
    Rng rng(99);
    const Eigen::MatrixXd tf_values =
        tf_rows_for(fx.scm, {0, 3, 7, 1});
    const Eigen::MatrixXd residuals = residual_draws(fx.scm, 4, rng);
    const Eigen::MatrixXd out = synthesize_raw(fx.scm, tf_values, residuals);

    CHECK(out.rows() == 4);
    CHECK(out.cols() == static_cast<Eigen::Index>(fx.scm.column_map.size()));
    CHECK(out.minCoeff() >= 0.0);

    for (std::size_t c = 0; c < fx.scm.column_map.size(); ++c) {
        const auto [is_tf, idx] = fx.scm.column_map[c];
        if (!is_tf) continue;
        for (Eigen::Index i = 0; i < 4; ++i)
            CHECK(out(i, static_cast<Eigen::Index>(c)) ==
                  tf_values(i, static_cast<Eigen::Index>(idx)));
    }
}

// Structural fidelity: a target responds only to its declared parents.
// Permuting a non-parent TF column leaves the mechanism output unchanged
// cell for cell; permuting a parent moves nearly all values.
TEST_CASE("interventions on non-parents are invisible to a target") {
    const Fitted fx = fit_small();
    const auto& target = fx.scm.targets[0];
    REQUIRE(target.parents.size() == 2);

    std::string non_parent;
    for (const auto& tf : fx.scm.tf_symbols)
        if (std::find(target.parents.begin(), target.parents.end(), tf) ==
            target.parents.end()) {
            non_parent = tf;
            break;
        }
    REQUIRE_FALSE(non_parent.empty());

    const std::size_t n = 60;
    std::vector<std::uint64_t> picks;
    Rng pick_rng(7);
    for (std::size_t i = 0; i < n; ++i)
        picks.push_back(pick_rng.below(static_cast<std::uint64_t>(fx.scm.tf_pool.rows())));
    Eigen::MatrixXd tf_values = tf_rows_for(fx.scm, picks);
    Rng noise_rng(8);
    const Eigen::MatrixXd residuals = residual_draws(fx.scm, n, noise_rng);

    const Eigen::MatrixXd base = synthesize_raw(fx.scm, tf_values, residuals);

    auto tf_index = [&](const std::string& symbol) {
        return static_cast<Eigen::Index>(
            std::find(fx.scm.tf_symbols.begin(), fx.scm.tf_symbols.end(), symbol) -
            fx.scm.tf_symbols.begin());
    };
    auto rotate_column = [&](const std::string& symbol) {
        Eigen::MatrixXd modified = tf_values;
        const Eigen::Index j = tf_index(symbol);
        const Eigen::VectorXd col = modified.col(j);
        for (std::size_t i = 0; i < n; ++i)
            modified(static_cast<Eigen::Index>(i), j) =
                col(static_cast<Eigen::Index>((i + 1) % n));
        return modified;
    };

    const Eigen::Index target_col =
        static_cast<Eigen::Index>(fx.train.genes.index_of(target.symbol));

    const Eigen::MatrixXd non_parent_out =
        synthesize_raw(fx.scm, rotate_column(non_parent), residuals);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(non_parent_out(static_cast<Eigen::Index>(i), target_col) ==
              base(static_cast<Eigen::Index>(i), target_col));

    const Eigen::MatrixXd parent_out =
        synthesize_raw(fx.scm, rotate_column(target.parents[0]), residuals);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (parent_out(static_cast<Eigen::Index>(i), target_col) !=
            base(static_cast<Eigen::Index>(i), target_col))
            ++changed;
    CHECK(changed >= n * 9 / 10);
}

TEST_CASE("sampled cells are non-negative, library-scaled, and seeded") {
    const Fitted fx = fit_small();
    const ExpressionMatrix synth = sample_synthetic(fx.scm, 40, 77);
    CHECK(synth.n_cells() == 40);
    CHECK(synth.n_genes() == fx.train.n_genes());
    CHECK(synth.genes == fx.train.genes);
    CHECK(synth.values.minCoeff() >= 0.0);
    CHECK(synth.normalized == Norm::raw);
    for (Eigen::Index i = 0; i < synth.n_cells(); ++i)
        CHECK(synth.values.row(i).sum() == doctest::Approx(10000.0).epsilon(1e-9));

    const ExpressionMatrix again = sample_synthetic(fx.scm, 40, 77);
    CHECK(again.values == synth.values);
    const ExpressionMatrix other = sample_synthetic(fx.scm, 40, 78);
    CHECK(other.values != synth.values);
}

TEST_CASE("structure-free sampling keeps marginals but no mechanism") {
    const Fitted fx = fit_small();
    const ExpressionMatrix synth =
        sample_structure_free(fx.train, fx.grn.partition(), 50, 5, 10000.0);
    CHECK(synth.n_cells() == 50);
    CHECK(synth.genes == fx.train.genes);
    CHECK(synth.values.minCoeff() >= 0.0);
    for (Eigen::Index i = 0; i < synth.n_cells(); ++i)
        CHECK(synth.values.row(i).sum() == doctest::Approx(10000.0).epsilon(1e-9));

    const ExpressionMatrix again =
        sample_structure_free(fx.train, fx.grn.partition(), 50, 5, 10000.0);
    CHECK(again.values == synth.values);
}

TEST_CASE("degenerate inputs are rejected") {
    const Fitted fx = fit_small();

    LinearUniformSpec bad = small_spec();
    bad.k = 9;  // more parents than TFs
    CHECK_THROWS(generate_linear_uniform(bad));
    bad = small_spec();
    bad.n_cells = 0;
    CHECK_THROWS(generate_linear_uniform(bad));

    // Graph over symbols the training matrix does not carry.
    auto other = llm4grn::testing::make_partition(3, 4);
    const Grn foreign = random_grn(other.partition, 1, 1);
    GbmConfig cfg;
    CHECK_THROWS(fit_scm(fx.train, foreign, cfg, 10000.0));

    CHECK_THROWS_AS(sample_synthetic(Scm{}, 5, 1), EmptyPoolError);
}
