#include "llm4grn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "llm4grn/pca.hpp"

namespace llm4grn {

namespace {

using nlohmann::json;

void require_comparable(const ExpressionMatrix& r, const ExpressionMatrix& s) {
    if (!(r.genes == s.genes)) throw ShapeMismatchError("matrices use different vocabularies");
    if (r.normalized != s.normalized)
        throw ShapeMismatchError("matrices carry different normalization states");
    if (r.n_cells() == 0 || s.n_cells() == 0) throw EmptyMatrixError("matrix has no cells");
}

// Sequential accumulation keeps results reproducible across build flags.
double dot_seq(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) total += a(i) * b(i);
    return total;
}

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                        Eigen::Index j) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double d = a(i, c) - b(j, c);
        total += d * d;
    }
    return total;
}

double kernel_block_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double inv_two_sq) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            total += std::exp(-squared_distance(a, i, b, j) * inv_two_sq);
    return total;
}

}  // namespace

double cosine_distance(const ExpressionMatrix& r, const ExpressionMatrix& s) {
    require_comparable(r, s);
    const Eigen::VectorXd mu_r = centroid(r);
    const Eigen::VectorXd mu_s = centroid(s);
    const double nr = std::sqrt(dot_seq(mu_r, mu_r));
    const double ns = std::sqrt(dot_seq(mu_s, mu_s));
    if (nr == 0.0 || ns == 0.0) throw ZeroCentroidError("centroid has zero norm");
    if (mu_r == mu_s) return 0.0;  // identical centroids, exact by definition
    return 1.0 - dot_seq(mu_r, mu_s) / (nr * ns);
}

double euclidean_distance(const ExpressionMatrix& r, const ExpressionMatrix& s) {
    require_comparable(r, s);
    const Eigen::VectorXd mu_r = centroid(r);
    const Eigen::VectorXd mu_s = centroid(s);
    double total = 0.0;
    for (Eigen::Index i = 0; i < mu_r.size(); ++i) {
        const double d = mu_r(i) - mu_s(i);
        total += d * d;
    }
    return std::sqrt(total);
}

std::string MmdConfig::describe() const {
    if (bandwidths.empty()) return "rbf:median-heuristic";
    std::string text = "rbf:";
    for (std::size_t i = 0; i < bandwidths.size(); ++i) {
        if (i) text += ',';
        text += format_double(bandwidths[i]);
    }
    return text;
}

double median_pairwise_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const Eigen::Index n = x.rows() + y.rows();
    if (n < 2) throw EmptyMatrixError("median heuristic needs at least two pooled rows");
    auto row_of = [&](Eigen::Index i) {
        return i < x.rows() ? Eigen::RowVectorXd(x.row(i)) : Eigen::RowVectorXd(y.row(i - x.rows()));
    };
    std::vector<double> distances;
    distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd ri = row_of(i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Eigen::RowVectorXd rj = row_of(j);
            double sq = 0.0;
            for (Eigen::Index c = 0; c < ri.size(); ++c) {
                const double d = ri(c) - rj(c);
                sq += d * d;
            }
            distances.push_back(std::sqrt(sq));
        }
    }
    std::sort(distances.begin(), distances.end());
    const std::size_t m = distances.size();
    const double median =
        m % 2 == 1 ? distances[m / 2] : 0.5 * (distances[m / 2 - 1] + distances[m / 2]);
    return median > 0.0 ? median : 1.0;
}

double mmd(const ExpressionMatrix& r, const ExpressionMatrix& s, const MmdConfig& cfg) {
    require_comparable(r, s);
    std::vector<double> bandwidths = cfg.bandwidths;
    if (bandwidths.empty()) bandwidths.push_back(median_pairwise_distance(r.values, s.values));
    for (double b : bandwidths)
        if (!(b > 0.0)) throw Error("MMD bandwidths must be positive");

    const double m = static_cast<double>(r.n_cells());
    const double n = static_cast<double>(s.n_cells());
    double total = 0.0;
    for (double sigma : bandwidths) {
        const double inv_two_sq = 1.0 / (2.0 * sigma * sigma);
        const double kxx = kernel_block_sum(r.values, r.values, inv_two_sq);
        const double kyy = kernel_block_sum(s.values, s.values, inv_two_sq);
        const double kxy = kernel_block_sum(r.values, s.values, inv_two_sq);
        total += kxx / (m * m) + kyy / (n * n) - 2.0 * kxy / (m * n);
    }
    return std::max(0.0, total);
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ShapeMismatchError("scores and labels differ");
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw Error("labels must be 0 or 1");
        n_pos += static_cast<std::size_t>(labels[i]);
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw SingleClassError("both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups; rank sum of the positive class gives U.
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] == 1) positive_rank_sum += rank;
        i = j + 1;
    }
    const double u = positive_rank_sum -
                     static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MeanStd rf_auroc(const ExpressionMatrix& r, const ExpressionMatrix& s, const RfAurocConfig& cfg,
                 std::vector<double>* per_repeat) {
    require_comparable(r, s);
    if (r.n_cells() < 20 || s.n_cells() < 20)
        throw TooFewCellsError("each side needs at least 20 cells");
    if (cfg.repeats < 1) throw Error("repeat count must be positive");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw Error("train fraction must be in (0,1)");

    const Eigen::Index p = r.values.cols();
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(cfg.repeats));

    for (int rep = 0; rep < cfg.repeats; ++rep) {
        const std::uint64_t rep_seed = fnv1a64_mix(cfg.seed, static_cast<std::uint64_t>(rep));

        // Stratified split: an independent shuffle per class.
        auto split_class = [&](Eigen::Index n_rows, std::string_view tag) {
            Rng rng(fnv1a64_mix(rep_seed, tag));
            std::vector<std::uint64_t> idx(static_cast<std::size_t>(n_rows));
            std::iota(idx.begin(), idx.end(), 0);
            rng.shuffle(idx);
            const auto n_train = static_cast<std::size_t>(
                cfg.train_fraction * static_cast<double>(n_rows));
            return std::pair(std::vector<std::uint64_t>(idx.begin(),
                                                        idx.begin() + static_cast<std::ptrdiff_t>(n_train)),
                             std::vector<std::uint64_t>(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                                                        idx.end()));
        };
        const auto [train_r, test_r] = split_class(r.values.rows(), "real");
        const auto [train_s, test_s] = split_class(s.values.rows(), "synthetic");

        const auto n_train = train_r.size() + train_s.size();
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n_train), p);
        Eigen::VectorXd y(static_cast<Eigen::Index>(n_train));
        Eigen::Index row = 0;
        for (auto i : train_r) {
            X.row(row) = r.values.row(static_cast<Eigen::Index>(i));
            y(row++) = 1.0;
        }
        for (auto i : train_s) {
            X.row(row) = s.values.row(static_cast<Eigen::Index>(i));
            y(row++) = 0.0;
        }

        ForestConfig forest_cfg = cfg.forest;
        forest_cfg.seed = fnv1a64_mix(rep_seed, "forest");
        const RandomForest forest = fit_random_forest(X, y, forest_cfg);

        std::vector<double> scores;
        std::vector<int> labels;
        scores.reserve(test_r.size() + test_s.size());
        Eigen::MatrixXd probe(1, p);
        for (auto i : test_r) {
            probe.row(0) = r.values.row(static_cast<Eigen::Index>(i));
            scores.push_back(forest.predict_row(probe, 0));
            labels.push_back(1);
        }
        for (auto i : test_s) {
            probe.row(0) = s.values.row(static_cast<Eigen::Index>(i));
            scores.push_back(forest.predict_row(probe, 0));
            labels.push_back(0);
        }
        values.push_back(auroc(scores, labels));
    }
    if (per_repeat) *per_repeat = values;
    return mean_std(values);
}

void write_metric_reports_csv(const std::vector<MetricReport>& reports,
                              const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "arm,real,synthetic,cosine_mean,cosine_std,euclidean_mean,euclidean_std,"
           "mmd_mean,mmd_std,rf_auroc_mean,rf_auroc_std,n_repeats,mmd_kernel\n";
    for (const auto& r : reports) {
        out << r.arm << ',' << r.real_label << ',' << r.synth_label << ','
            << format_double(r.cosine.mean) << ',' << format_double(r.cosine.std) << ','
            << format_double(r.euclidean.mean) << ',' << format_double(r.euclidean.std) << ','
            << format_double(r.mmd.mean) << ',' << format_double(r.mmd.std) << ','
            << format_double(r.rf_auroc.mean) << ',' << format_double(r.rf_auroc.std) << ','
            << r.n_repeats << ',' << r.mmd_kernel << '\n';
    }
    if (!out) throw Error("failed writing " + path.string());
}

namespace {

json mean_std_json(const MeanStd& v) {
    return json{{"mean", v.mean}, {"std", v.std}};
}

MeanStd mean_std_from_json(const json& j) {
    return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

}  // namespace

nlohmann::json metric_reports_to_json(const std::vector<MetricReport>& reports) {
    json out = json::array();
    for (const auto& r : reports) {
        out.push_back(json{{"arm", r.arm},
                           {"real", r.real_label},
                           {"synthetic", r.synth_label},
                           {"cosine", mean_std_json(r.cosine)},
                           {"euclidean", mean_std_json(r.euclidean)},
                           {"mmd", mean_std_json(r.mmd)},
                           {"rf_auroc", mean_std_json(r.rf_auroc)},
                           {"n_repeats", r.n_repeats},
                           {"mmd_kernel", r.mmd_kernel}});
    }
    return out;
}

std::vector<MetricReport> metric_reports_from_json(const nlohmann::json& parsed) {
    std::vector<MetricReport> reports;
    try {
        for (const auto& j : parsed) {
            MetricReport r;
            r.arm = j.at("arm").get<std::string>();
            r.real_label = j.at("real").get<std::string>();
            r.synth_label = j.at("synthetic").get<std::string>();
            r.cosine = mean_std_from_json(j.at("cosine"));
            r.euclidean = mean_std_from_json(j.at("euclidean"));
            r.mmd = mean_std_from_json(j.at("mmd"));
            r.rf_auroc = mean_std_from_json(j.at("rf_auroc"));
            r.n_repeats = j.at("n_repeats").get<int>();
            r.mmd_kernel = j.at("mmd_kernel").get<std::string>();
            reports.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad metric report payload: ") + e.what());
    }
    return reports;
}

void write_metric_reports_json(const std::vector<MetricReport>& reports,
                               const std::filesystem::path& path) {
    std::ofstream file(path);
    if (!file) throw Error("cannot open " + path.string() + " for writing");
    file << metric_reports_to_json(reports).dump(2) << '\n';
    if (!file) throw Error("failed writing " + path.string());
}

std::vector<MetricReport> read_metric_reports_json(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw Error("cannot open " + path.string());
    json parsed;
    try {
        file >> parsed;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return metric_reports_from_json(parsed);
}

AnnotationResult annotate_and_proportions(const ExpressionMatrix& labeled_real,
                                          const std::vector<std::string>& real_labels,
                                          const ExpressionMatrix& synthetic, int n_pcs) {
    require_comparable(labeled_real, synthetic);
    if (real_labels.size() != static_cast<std::size_t>(labeled_real.n_cells()))
        throw ShapeMismatchError("one label per real cell required");
    for (const auto& label : real_labels)
        if (trim(label).empty()) throw EmptyLabelError("cell label is empty");

    const PcaModel model = fit_pca(labeled_real.values, n_pcs);
    const Eigen::MatrixXd real_pc = pca_transform(model, labeled_real.values);
    const Eigen::MatrixXd synth_pc = pca_transform(model, synthetic.values);

    std::map<std::string, std::pair<Eigen::VectorXd, std::size_t>> sums;
    for (Eigen::Index i = 0; i < real_pc.rows(); ++i) {
        auto& slot = sums[real_labels[static_cast<std::size_t>(i)]];
        if (slot.second == 0) slot.first = Eigen::VectorXd::Zero(real_pc.cols());
        slot.first += real_pc.row(i).transpose();
        slot.second += 1;
    }
    std::vector<std::pair<std::string, Eigen::VectorXd>> centroids;
    for (auto& [label, slot] : sums)
        centroids.emplace_back(label, slot.first / static_cast<double>(slot.second));

    AnnotationResult result;
    result.labels.reserve(static_cast<std::size_t>(synth_pc.rows()));
    std::map<std::string, std::size_t> counts;
    for (const auto& [label, c] : centroids) counts[label] = 0;
    for (Eigen::Index i = 0; i < synth_pc.rows(); ++i) {
        const std::string* best = nullptr;
        double best_d = 0.0;
        for (const auto& [label, c] : centroids) {
            const double d = (synth_pc.row(i).transpose() - c).squaredNorm();
            if (!best || d < best_d) {  // map order breaks ties alphabetically
                best = &label;
                best_d = d;
            }
        }
        result.labels.push_back(*best);
        counts[*best] += 1;
    }

    const double total = static_cast<double>(synth_pc.rows());
    for (const auto& [label, count] : counts)
        result.table.rows.push_back(
            {label, count, 100.0 * static_cast<double>(count) / total});
    return result;
}

std::vector<MarkerRow> marker_summary(const ExpressionMatrix& m,
                                      const std::vector<std::string>& labels,
                                      const std::vector<std::string>& markers) {
    if (labels.size() != static_cast<std::size_t>(m.n_cells()))
        throw ShapeMismatchError("one label per cell required");
    std::vector<std::size_t> marker_cols;
    for (const auto& marker : markers) {
        const std::string symbol = normalize_symbol(marker);
        if (!m.genes.contains(symbol))
            throw UnknownMarkerError("marker " + symbol + " is not in the vocabulary");
        marker_cols.push_back(m.genes.index_of(symbol));
    }

    std::map<std::string, std::vector<Eigen::Index>> by_label;
    for (Eigen::Index i = 0; i < m.values.rows(); ++i)
        by_label[labels[static_cast<std::size_t>(i)]].push_back(i);

    std::vector<MarkerRow> rows;
    for (const auto& [label, cells] : by_label) {
        for (std::size_t j = 0; j < markers.size(); ++j) {
            const auto col = static_cast<Eigen::Index>(marker_cols[j]);
            double total = 0.0;
            std::size_t expressing = 0;
            for (auto i : cells) {
                const double v = m.values(i, col);
                total += v;
                if (v > 0.0) ++expressing;
            }
            const double n = static_cast<double>(cells.size());
            rows.push_back({label, normalize_symbol(markers[j]), total / n,
                            static_cast<double>(expressing) / n});
        }
    }
    return rows;
}

void write_marker_summary_csv(const std::vector<MarkerRow>& rows,
                              const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "cell_type,marker,mean_expression,expressing_fraction\n";
    for (const auto& r : rows)
        out << r.label << ',' << r.marker << ',' << format_double(r.mean) << ','
            << format_double(r.fraction) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace llm4grn
