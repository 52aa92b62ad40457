#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "llm4grn/causal_synth.hpp"
#include "llm4grn/grn_inference.hpp"

using namespace llm4grn;
using llm4grn::testing::TempDir;

namespace {

// Fraction of inferred edges present in the generating graph.
double precision_against(const Grn& inferred, const Grn& truth) {
    std::size_t hits = 0;
    const auto edges = inferred.edges();
    for (const auto& [tf, target] : edges)
        if (truth.has_edge(tf, target)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(edges.size());
}

}  // namespace

TEST_CASE("inferred graphs satisfy all structural invariants") {
    LinearUniformSpec spec;
    spec.n_tfs = 6;
    spec.n_targets = 8;
    spec.k = 2;
    spec.n_cells = 300;
    spec.seed = 11;
    const auto [matrix, truth] = generate_linear_uniform(spec);

    InferenceConfig cfg;
    cfg.k = 3;
    cfg.gbm.n_trees = 30;
    cfg.seed = 5;
    const Grn grn = infer_grn(matrix, truth.partition(), cfg);

    CHECK(grn.k() == 3);
    CHECK(grn.partition() == truth.partition());
    for (const auto& target : truth.partition().targets()) {
        const auto& regs = grn.regulators_of(target);
        CHECK(regs.size() == 3);
        for (const auto& tf : regs) CHECK(truth.partition().is_tf(tf));
    }
}

TEST_CASE("inference recovers planted linear parents") {
    LinearUniformSpec spec;
    spec.n_tfs = 8;
    spec.n_targets = 12;
    spec.k = 2;
    spec.n_cells = 600;
    spec.noise_scale = 0.02;
    spec.seed = 23;
    const auto [matrix, truth] = generate_linear_uniform(spec);

    InferenceConfig cfg;
    cfg.k = 2;
    cfg.gbm.n_trees = 80;
    cfg.seed = 9;
    ImportanceTable table;
    const Grn grn = infer_grn(matrix, truth.partition(), cfg, &table);

    CHECK(precision_against(grn, truth) >= 0.8);

    // The table covers every (target, tf) pair with finite scores.
    CHECK(table.rows.size() == 12 * 8);
    std::set<std::string> targets_seen;
    for (const auto& row : table.rows) {
        CHECK(std::isfinite(row.importance));
        CHECK(row.importance >= 0.0);
        CHECK(truth.partition().is_tf(row.tf));
        targets_seen.insert(row.target);
    }
    CHECK(targets_seen.size() == 12);
}

TEST_CASE("inference is deterministic and thread-count invariant") {
    LinearUniformSpec spec;
    spec.n_tfs = 5;
    spec.n_targets = 10;
    spec.k = 2;
    spec.n_cells = 200;
    spec.seed = 31;
    const auto [matrix, truth] = generate_linear_uniform(spec);

    InferenceConfig cfg;
    cfg.k = 2;
    cfg.gbm.n_trees = 25;
    cfg.seed = 17;
    const Grn single = infer_grn(matrix, truth.partition(), cfg);

    InferenceConfig parallel = cfg;
    parallel.n_threads = 4;
    const Grn pooled = infer_grn(matrix, truth.partition(), parallel);
    CHECK(single.edges() == pooled.edges());

    const Grn again = infer_grn(matrix, truth.partition(), cfg);
    CHECK(single.edges() == again.edges());
}

TEST_CASE("inference rejects impossible k") {
    LinearUniformSpec spec;
    spec.n_tfs = 4;
    spec.n_targets = 6;
    spec.k = 2;
    spec.n_cells = 50;
    spec.seed = 3;
    const auto [matrix, truth] = generate_linear_uniform(spec);

    InferenceConfig cfg;
    cfg.k = 5;  // only 4 TFs exist
    CHECK_THROWS_AS((void)infer_grn(matrix, truth.partition(), cfg), TooFewTfsError);
}

TEST_CASE("importance tables serialize as TSV") {
    TempDir dir("imp");
    LinearUniformSpec spec;
    spec.n_tfs = 3;
    spec.n_targets = 4;
    spec.k = 1;
    spec.n_cells = 80;
    spec.seed = 7;
    const auto [matrix, truth] = generate_linear_uniform(spec);

    InferenceConfig cfg;
    cfg.k = 1;
    cfg.gbm.n_trees = 10;
    ImportanceTable table;
    (void)infer_grn(matrix, truth.partition(), cfg, &table);

    const auto path = dir.path / "importance.tsv";
    write_importance_table(table, path);

    std::ifstream in(path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header.substr(0, 2) == "TF");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == table.rows.size());  // one line per scored pair
}
