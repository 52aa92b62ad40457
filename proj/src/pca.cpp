#include "llm4grn/pca.hpp"

#include <algorithm>
#include <cmath>

namespace llm4grn {

namespace {

// Largest-magnitude loading made positive so eigenvector sign is stable
// across solver implementations.
void fix_signs(Eigen::MatrixXd& components) {
    for (Eigen::Index c = 0; c < components.cols(); ++c) {
        Eigen::Index at = 0;
        components.col(c).cwiseAbs().maxCoeff(&at);
        if (components(at, c) < 0.0) components.col(c) = -components.col(c);
    }
}

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& X, int n_components) {
    if (X.rows() < 2) throw Error("PCA needs at least two rows");
    if (n_components < 1) throw Error("component count must be positive");

    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::Index rank_bound = std::min<Eigen::Index>(n - 1, p);
    const Eigen::Index k = std::min<Eigen::Index>(n_components, rank_bound);

    PcaModel model;
    model.mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();

    model.components.resize(p, k);
    model.explained_variance.resize(k);

    if (p <= n) {
        const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
        for (Eigen::Index c = 0; c < k; ++c) {
            const Eigen::Index src = p - 1 - c;  // solver orders ascending
            model.components.col(c) = solver.eigenvectors().col(src);
            model.explained_variance(c) = std::max(0.0, solver.eigenvalues()(src));
        }
    } else {
        // Gram trick: eigenvectors of the n × n inner-product matrix map
        // back to gene space, avoiding the p × p covariance.
        const Eigen::MatrixXd gram = centered * centered.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
        for (Eigen::Index c = 0; c < k; ++c) {
            const Eigen::Index src = n - 1 - c;
            const double lambda = std::max(0.0, solver.eigenvalues()(src));
            model.explained_variance(c) = lambda / static_cast<double>(n - 1);
            if (lambda > 1e-12) {
                model.components.col(c) =
                    centered.transpose() * solver.eigenvectors().col(src) / std::sqrt(lambda);
            } else {
                model.components.col(c).setZero();
                model.components(c % p, c) = 1.0;  // arbitrary unit fill past the rank
            }
        }
    }
    fix_signs(model.components);
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.mean.size())
        throw ShapeMismatchError("matrix columns do not match the fitted gene count");
    return (X.rowwise() - model.mean.transpose()) * model.components;
}

}  // namespace llm4grn
