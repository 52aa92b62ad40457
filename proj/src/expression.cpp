#include "llm4grn/expression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace llm4grn {

namespace {

std::string default_barcode(std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "CELL%06zu", i + 1);
    return buf;
}

}  // namespace

ExpressionMatrix ExpressionMatrix::take_rows(const std::vector<std::size_t>& rows) const {
    ExpressionMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    out.barcodes.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) =
            values.row(static_cast<Eigen::Index>(rows[i]));
        out.barcodes.push_back(barcodes.at(rows[i]));
    }
    out.genes = genes;
    out.normalized = normalized;
    return out;
}

Eigen::MatrixXd ExpressionMatrix::columns_for(const std::vector<std::string>& symbols) const {
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(symbols.size()));
    for (std::size_t j = 0; j < symbols.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) =
            values.col(static_cast<Eigen::Index>(genes.index_of(symbols[j])));
    return out;
}

ExpressionMatrix make_matrix(Eigen::MatrixXd values, std::vector<std::string> barcodes,
                             GeneVocabulary genes, Norm norm) {
    if (values.cols() != static_cast<Eigen::Index>(genes.size()))
        throw ShapeMismatchError("matrix has " + std::to_string(values.cols()) +
                                 " columns but vocabulary has " + std::to_string(genes.size()));
    if (barcodes.empty()) {
        barcodes.reserve(static_cast<std::size_t>(values.rows()));
        for (Eigen::Index i = 0; i < values.rows(); ++i)
            barcodes.push_back(default_barcode(static_cast<std::size_t>(i)));
    }
    if (static_cast<Eigen::Index>(barcodes.size()) != values.rows())
        throw ShapeMismatchError("barcode count does not match row count");
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double v = values(i, j);
            if (!std::isfinite(v)) throw ParseError("non-finite expression value");
            if (v < 0.0)
                throw NegativeValueError("negative expression value at cell " +
                                         std::to_string(i) + ", gene " +
                                         genes.symbol(static_cast<std::size_t>(j)));
        }
    ExpressionMatrix m;
    m.values = std::move(values);
    m.barcodes = std::move(barcodes);
    m.genes = std::move(genes);
    m.normalized = norm;
    return m;
}

namespace {

ExpressionMatrix load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split(line, ',');
    bool has_barcodes = false;
    if (!header.empty()) {
        const std::string first = to_upper(trim(header.front()));
        if (first.empty() || first == "BARCODE") {
            has_barcodes = true;
            header.erase(header.begin());
        }
    }
    if (header.empty()) throw ParseError("CSV header has no gene symbols");
    GeneVocabulary genes(header);

    const std::size_t n_genes = genes.size();
    std::vector<std::string> barcodes;
    std::vector<double> data;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        std::size_t offset = 0;
        if (has_barcodes) {
            if (fields.size() != n_genes + 1)
                throw ParseError("CSV row " + std::to_string(n_rows + 1) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(n_genes + 1));
            barcodes.push_back(trim(fields[0]));
            offset = 1;
        } else if (fields.size() != n_genes) {
            throw ParseError("CSV row " + std::to_string(n_rows + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n_genes));
        }
        for (std::size_t j = 0; j < n_genes; ++j)
            data.push_back(parse_double(fields[j + offset], "expression value"));
        ++n_rows;
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n_rows),
                           static_cast<Eigen::Index>(n_genes));
    for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t j = 0; j < n_genes; ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                data[i * n_genes + j];
    return make_matrix(std::move(values), std::move(barcodes), std::move(genes));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) lines.push_back(line);
    }
    return lines;
}

// 10x layout: MTX rows are genes, columns are cells; genes.txt and
// barcodes.txt live next to the matrix file.
ExpressionMatrix load_mtx(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw ParseError("missing MatrixMarket banner in " + path.string());
    {
        std::istringstream banner(line);
        std::string tag, object, fmt, field;
        banner >> tag >> object >> fmt >> field;
        if (object != "matrix" || fmt != "coordinate")
            throw ParseError("unsupported MatrixMarket type in " + path.string());
        if (field != "real" && field != "integer")
            throw ParseError("unsupported MatrixMarket field '" + field + "'");
    }
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '%') break;
    std::istringstream dims(line);
    std::size_t n_genes = 0, n_cells = 0, nnz = 0;
    if (!(dims >> n_genes >> n_cells >> nnz))
        throw ParseError("bad MTX size line in " + path.string());

    const auto dir = path.parent_path();
    auto gene_lines = read_lines(dir / "genes.txt");
    if (gene_lines.size() != n_genes)
        throw ParseError("genes.txt has " + std::to_string(gene_lines.size()) +
                         " entries, matrix has " + std::to_string(n_genes) + " gene rows");
    std::vector<std::string> gene_symbols;
    for (const auto& l : gene_lines) {
        const auto fields = split(l, '\t');
        gene_symbols.push_back(fields.size() >= 2 ? fields[1] : fields[0]);
    }
    auto barcodes = read_lines(dir / "barcodes.txt");
    if (barcodes.size() != n_cells)
        throw ParseError("barcodes.txt has " + std::to_string(barcodes.size()) +
                         " entries, matrix has " + std::to_string(n_cells) + " cell columns");
    for (auto& b : barcodes) b = trim(b);

    Eigen::MatrixXd values =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_cells),
                              static_cast<Eigen::Index>(n_genes));
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::istringstream row(line);
        std::size_t g = 0, c = 0;
        double v = 0.0;
        if (!(row >> g >> c >> v))
            throw ParseError("bad MTX entry: '" + line + "'");
        if (g < 1 || g > n_genes || c < 1 || c > n_cells)
            throw ParseError("MTX index out of range: '" + line + "'");
        values(static_cast<Eigen::Index>(c - 1), static_cast<Eigen::Index>(g - 1)) = v;
        ++seen;
    }
    if (seen != nnz)
        throw ParseError("MTX declares " + std::to_string(nnz) + " entries, found " +
                         std::to_string(seen));
    return make_matrix(std::move(values), std::move(barcodes), GeneVocabulary(gene_symbols));
}

}  // namespace

ExpressionMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
    switch (format) {
        case MatrixFormat::csv: return load_csv(path);
        case MatrixFormat::mtx: return load_mtx(path);
    }
    throw Error("unreachable");
}

void write_matrix_csv(const ExpressionMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << "barcode";
    for (const auto& sym : m.genes.symbols()) out << ',' << sym;
    out << '\n';
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        out << m.barcodes[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.values.cols(); ++j)
            out << ',' << format_double(m.values(i, j));
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

SplitResult preprocess(const ExpressionMatrix& m, const PreprocessConfig& cfg,
                       const SplitSpec& split) {
    if (m.normalized != Norm::raw) throw Error("preprocess expects raw counts");
    if (cfg.min_cells_expressed <= 0 || cfg.n_top_genes <= 0)
        throw Error("preprocess config values must be positive");
    if (split.test_size <= 0 || split.val_size <= 0)
        throw TooFewCellsError("split sizes must be positive");
    if (split.test_size + split.val_size >= m.n_cells())
        throw TooFewCellsError("test + val sizes leave no training cells");

    // Gene filter on the full matrix, before splitting.
    std::vector<std::size_t> kept;
    for (Eigen::Index j = 0; j < m.n_genes(); ++j) {
        Eigen::Index expressed = 0;
        for (Eigen::Index i = 0; i < m.n_cells(); ++i)
            if (m.values(i, j) > 0.0) ++expressed;
        if (expressed >= cfg.min_cells_expressed) kept.push_back(static_cast<std::size_t>(j));
    }
    if (static_cast<Eigen::Index>(kept.size()) < cfg.n_top_genes)
        throw TooFewGenesError(std::to_string(kept.size()) +
                               " genes survive the filter, need " +
                               std::to_string(cfg.n_top_genes));

    // Rank by dispersion = variance/mean of raw counts; ties by symbol.
    struct Ranked {
        double dispersion;
        std::string symbol;
        std::size_t col;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(kept.size());
    const double n = static_cast<double>(m.n_cells());
    for (std::size_t col : kept) {
        const auto c = m.values.col(static_cast<Eigen::Index>(col));
        const double mean = c.sum() / n;
        const double var = (c.array() - mean).square().sum() / n;
        ranked.push_back({var / mean, m.genes.symbol(col), col});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.dispersion != b.dispersion) return a.dispersion > b.dispersion;
        return a.symbol < b.symbol;
    });
    ranked.resize(static_cast<std::size_t>(cfg.n_top_genes));

    // Preserve the input vocabulary order for the selected genes.
    std::vector<std::size_t> cols;
    for (const auto& r : ranked) cols.push_back(r.col);
    std::sort(cols.begin(), cols.end());
    std::vector<std::string> symbols;
    symbols.reserve(cols.size());
    for (std::size_t col : cols) symbols.push_back(m.genes.symbol(col));
    GeneVocabulary vocab(symbols);

    Eigen::MatrixXd reduced(m.n_cells(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        reduced.col(static_cast<Eigen::Index>(j)) =
            m.values.col(static_cast<Eigen::Index>(cols[j]));

    // Seeded shuffle, then contiguous test / val / train blocks.
    std::vector<std::size_t> order(static_cast<std::size_t>(m.n_cells()));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(split.seed);
    rng.shuffle(order);
    const auto take = [&](std::size_t begin, std::size_t count) {
        std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                      order.begin() + static_cast<std::ptrdiff_t>(begin + count));
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    const auto test_rows = take(0, static_cast<std::size_t>(split.test_size));
    const auto val_rows =
        take(static_cast<std::size_t>(split.test_size), static_cast<std::size_t>(split.val_size));
    const auto train_rows =
        take(static_cast<std::size_t>(split.test_size + split.val_size),
             static_cast<std::size_t>(m.n_cells() - split.test_size - split.val_size));

    ExpressionMatrix full;
    full.values = std::move(reduced);
    full.barcodes = m.barcodes;
    full.genes = vocab;
    full.normalized = Norm::raw;
    return {full.take_rows(train_rows), full.take_rows(val_rows), full.take_rows(test_rows)};
}

ExpressionMatrix normalize_log1p(const ExpressionMatrix& m, double scale) {
    if (m.normalized != Norm::raw) throw Error("matrix is already normalized");
    if (scale <= 0.0) throw Error("scale must be positive");
    ExpressionMatrix out = m;
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
        const double total = out.values.row(i).sum();
        if (total <= 0.0)
            throw ZeroLibraryError("cell " + out.barcodes[static_cast<std::size_t>(i)] +
                                   " has zero total count");
        out.values.row(i) *= scale / total;
    }
    out.values = out.values.array().log1p();
    out.normalized = Norm::lognorm;
    return out;
}

Eigen::VectorXd centroid(const ExpressionMatrix& m) {
    if (m.n_cells() == 0) throw EmptyMatrixError("centroid of empty matrix");
    return m.values.colwise().mean();
}

}  // namespace llm4grn
