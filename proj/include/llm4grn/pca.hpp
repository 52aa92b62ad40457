#pragma once

#include <Eigen/Dense>

#include "llm4grn/common.hpp"

namespace llm4grn {

// Principal components of a cells × genes matrix. Components are
// orthonormal columns with a deterministic sign (largest-magnitude
// loading positive). The effective component count is capped by the
// data rank bound min(cells − 1, genes).
struct PcaModel {
    Eigen::VectorXd mean;                // per-gene mean of the fit data
    Eigen::MatrixXd components;          // genes × n_components
    Eigen::VectorXd explained_variance;  // per component

    Eigen::Index n_components() const { return components.cols(); }
};

PcaModel fit_pca(const Eigen::MatrixXd& X, int n_components);

// Projects rows of X onto the fitted components.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X);

}  // namespace llm4grn
