#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "helpers.hpp"
#include "llm4grn/expression.hpp"

using namespace llm4grn;
using llm4grn::testing::TempDir;
using llm4grn::testing::numbered_symbols;
using llm4grn::testing::random_matrix;

namespace {

ExpressionMatrix small_matrix() {
    Eigen::MatrixXd values(3, 2);
    values << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
    return make_matrix(values, {"c1", "c2", "c3"}, GeneVocabulary({"A", "B"}));
}

}  // namespace

TEST_CASE("make_matrix validates values and generates barcodes") {
    const ExpressionMatrix m = small_matrix();
    CHECK(m.n_cells() == 3);
    CHECK(m.n_genes() == 2);
    CHECK(m.normalized == Norm::raw);

    Eigen::MatrixXd negative(1, 2);
    negative << 1.0, -0.5;
    CHECK_THROWS_AS(make_matrix(negative, {"c"}, GeneVocabulary({"A", "B"})),
                    NegativeValueError);

    Eigen::MatrixXd nan_values(1, 2);
    nan_values << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(make_matrix(nan_values, {"c"}, GeneVocabulary({"A", "B"})));

    Eigen::MatrixXd ok(2, 2);
    ok << 1, 2, 3, 4;
    const ExpressionMatrix generated = make_matrix(ok, {}, GeneVocabulary({"A", "B"}));
    CHECK(generated.barcodes.size() == 2);
    CHECK(generated.barcodes[0] != generated.barcodes[1]);

    CHECK_THROWS(make_matrix(ok, {"only-one"}, GeneVocabulary({"A", "B"})));
    Eigen::MatrixXd wrong_cols(2, 3);
    wrong_cols.setZero();
    CHECK_THROWS_AS(make_matrix(wrong_cols, {}, GeneVocabulary({"A", "B"})),
                    ShapeMismatchError);
}

TEST_CASE("take_rows and columns_for slice by identity") {
    const ExpressionMatrix m = small_matrix();
    const ExpressionMatrix picked = m.take_rows({2, 0, 2});
    CHECK(picked.n_cells() == 3);
    CHECK(picked.values(0, 0) == 5.0);
    CHECK(picked.values(1, 0) == 1.0);
    CHECK(picked.barcodes[0] == "c3");
    CHECK(picked.genes == m.genes);

    const Eigen::MatrixXd cols = m.columns_for({"B", "A"});
    CHECK(cols(0, 0) == 2.0);
    CHECK(cols(0, 1) == 1.0);
    CHECK_THROWS_AS((void)m.columns_for({"Z"}), UnknownSymbolError);
}

TEST_CASE("csv files round trip exactly") {
    TempDir dir("expr");
    const ExpressionMatrix m = random_matrix(8, 5, 123);
    const auto path = dir.path / "m.csv";
    write_matrix_csv(m, path);
    const ExpressionMatrix loaded = load_matrix(path, MatrixFormat::csv);
    CHECK(loaded.genes == m.genes);
    CHECK(loaded.barcodes == m.barcodes);
    CHECK(loaded.values == m.values);  // shortest round-trip formatting is exact
}

TEST_CASE("mtx sidecar layout loads genes as rows") {
    TempDir dir("mtx");
    {
        std::ofstream mtx(dir.path / "matrix.mtx");
        mtx << "%%MatrixMarket matrix coordinate real general\n"
            << "% comment line\n"
            << "3 2 4\n"      // genes cells entries
            << "1 1 5.0\n"    // gene 1, cell 1
            << "3 1 2.0\n"
            << "2 2 7.0\n"
            << "3 2 1.5\n";
        std::ofstream genes(dir.path / "genes.txt");
        genes << "A\nB\nC\n";
        std::ofstream barcodes(dir.path / "barcodes.txt");
        barcodes << "c1\nc2\n";
    }
    const ExpressionMatrix m = load_matrix(dir.path / "matrix.mtx", MatrixFormat::mtx);
    CHECK(m.n_cells() == 2);
    CHECK(m.n_genes() == 3);
    CHECK(m.values(0, 0) == 5.0);
    CHECK(m.values(0, 2) == 2.0);
    CHECK(m.values(1, 1) == 7.0);
    CHECK(m.values(1, 2) == 1.5);
    CHECK(m.values(0, 1) == 0.0);
    CHECK(m.genes.symbol(2) == "C");
    CHECK(m.barcodes[1] == "c2");
}

TEST_CASE("preprocess filters, selects top genes, and splits disjointly") {
    // 30 cells x 6 genes; gene F is expressed in one cell only, gene E is
    // constant (zero dispersion).
    Rng rng(5);
    Eigen::MatrixXd values(30, 6);
    for (int i = 0; i < 30; ++i) {
        values(i, 0) = rng.uniform(0.0, 10.0);      // A: dispersed
        values(i, 1) = rng.uniform(0.0, 50.0);      // B: more dispersed
        values(i, 2) = 1.0 + rng.uniform(0.0, 1.0); // C: mild
        values(i, 3) = rng.uniform(0.0, 100.0);     // D: most dispersed
        values(i, 4) = 3.0;                         // E: constant
        values(i, 5) = 0.0;                         // F: almost never expressed
    }
    values(0, 5) = 9.0;
    const ExpressionMatrix m =
        make_matrix(values, {}, GeneVocabulary({"A", "B", "C", "D", "E", "F"}));

    PreprocessConfig cfg;
    cfg.min_cells_expressed = 5;
    cfg.n_top_genes = 3;
    SplitSpec split;
    split.test_size = 6;
    split.val_size = 4;
    split.seed = 77;
    const SplitResult result = preprocess(m, cfg, split);

    // F dropped by the expression filter, then the 3 most dispersed kept.
    CHECK(result.train.n_genes() == 3);
    CHECK_FALSE(result.train.genes.contains("F"));
    CHECK(result.train.genes.contains("D"));
    CHECK(result.train.genes.contains("B"));

    CHECK(result.test.n_cells() == 6);
    CHECK(result.val.n_cells() == 4);
    CHECK(result.train.n_cells() == 20);

    std::set<std::string> seen;
    for (const auto* part : {&result.train, &result.val, &result.test})
        for (const auto& barcode : part->barcodes) CHECK(seen.insert(barcode).second);
    CHECK(seen.size() == 30);

    // Seeded: identical inputs give identical splits.
    const SplitResult again = preprocess(m, cfg, split);
    CHECK(again.train.values == result.train.values);
    CHECK(again.test.barcodes == result.test.barcodes);

    SplitSpec too_big;
    too_big.test_size = 40;
    CHECK_THROWS_AS(preprocess(m, cfg, too_big), TooFewCellsError);
}

TEST_CASE("normalize_log1p rescales rows then applies log1p") {
    Eigen::MatrixXd values(2, 3);
    values << 1.0, 2.0, 7.0,  // library 10
        5.0, 0.0, 15.0;       // library 20
    const ExpressionMatrix m = make_matrix(values, {}, GeneVocabulary({"A", "B", "C"}));
    const ExpressionMatrix out = normalize_log1p(m, 100.0);
    CHECK(out.normalized == Norm::lognorm);
    CHECK(out.values(0, 0) == doctest::Approx(std::log1p(10.0)).epsilon(1e-12));
    CHECK(out.values(0, 2) == doctest::Approx(std::log1p(70.0)).epsilon(1e-12));
    CHECK(out.values(1, 1) == 0.0);

    // Rescaled rows sum to the scale before log1p.
    for (int i = 0; i < 2; ++i) {
        double total = 0.0;
        for (int j = 0; j < 3; ++j) total += std::expm1(out.values(i, j));
        CHECK(total == doctest::Approx(100.0).epsilon(1e-9));
    }

    // Monotone within each row.
    CHECK(out.values(0, 0) < out.values(0, 1));
    CHECK(out.values(0, 1) < out.values(0, 2));

    Eigen::MatrixXd with_zero_row(2, 2);
    with_zero_row << 1.0, 2.0, 0.0, 0.0;
    const ExpressionMatrix z = make_matrix(with_zero_row, {}, GeneVocabulary({"A", "B"}));
    CHECK_THROWS_AS(normalize_log1p(z), ZeroLibraryError);
}

TEST_CASE("centroid is the per-gene mean") {
    const ExpressionMatrix m = small_matrix();
    const Eigen::VectorXd c = centroid(m);
    CHECK(c(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(c(1) == doctest::Approx(4.0).epsilon(1e-12));
}
