#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llm4grn/common.hpp"
#include "llm4grn/gene_vocabulary.hpp"

namespace llm4grn {

class NegativeValueError : public Error {
public:
    using Error::Error;
};

class TooFewCellsError : public Error {
public:
    using Error::Error;
};

class TooFewGenesError : public Error {
public:
    using Error::Error;
};

class ZeroLibraryError : public Error {
public:
    using Error::Error;
};

class EmptyMatrixError : public Error {
public:
    using Error::Error;
};

enum class Norm { raw, lognorm };

// Cells x genes matrix of non-negative finite values with per-row barcodes.
struct ExpressionMatrix {
    Eigen::MatrixXd values;              // rows = cells, cols = genes
    std::vector<std::string> barcodes;   // size = rows
    GeneVocabulary genes;                // size = cols
    Norm normalized = Norm::raw;

    Eigen::Index n_cells() const { return values.rows(); }
    Eigen::Index n_genes() const { return values.cols(); }

    // Rows selected by index, same vocabulary.
    ExpressionMatrix take_rows(const std::vector<std::size_t>& rows) const;

    // Column submatrix for the given symbols, in the given order.
    Eigen::MatrixXd columns_for(const std::vector<std::string>& symbols) const;
};

// Validates shape/finiteness/non-negativity; generates barcodes when absent.
ExpressionMatrix make_matrix(Eigen::MatrixXd values, std::vector<std::string> barcodes,
                             GeneVocabulary genes, Norm norm = Norm::raw);

struct SplitSpec {
    Eigen::Index test_size = 0;
    Eigen::Index val_size = 0;
    std::uint64_t seed = 0;
};

struct PreprocessConfig {
    Eigen::Index min_cells_expressed = 1;
    Eigen::Index n_top_genes = 1000;
};

enum class MatrixFormat { csv, mtx };

// CSV: first row gene symbols (optionally preceded by a "barcode" column);
// MTX: Matrix Market sidecar layout with genes.txt / barcodes.txt (genes as
// MTX rows, cells as columns).
ExpressionMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void write_matrix_csv(const ExpressionMatrix& m, const std::filesystem::path& path);

struct SplitResult {
    ExpressionMatrix train;
    ExpressionMatrix val;
    ExpressionMatrix test;
};

// Drops genes expressed in fewer than cfg.min_cells_expressed cells, keeps
// the cfg.n_top_genes most dispersed (variance/mean of raw counts, ties by
// symbol), then splits cells into disjoint train/val/test by seeded shuffle.
SplitResult preprocess(const ExpressionMatrix& m, const PreprocessConfig& cfg,
                       const SplitSpec& split);

// Rescales each cell to `scale` total counts, then applies ln(1+x).
ExpressionMatrix normalize_log1p(const ExpressionMatrix& m, double scale = 10000.0);

// Per-gene arithmetic mean over cells.
Eigen::VectorXd centroid(const ExpressionMatrix& m);

}  // namespace llm4grn
