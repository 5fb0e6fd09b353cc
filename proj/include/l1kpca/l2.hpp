#pragma once

#include <memory>

#include <Eigen/Core>

#include "l1kpca/kernel.hpp"

namespace l1kpca {

/// Top eigenpairs of a Gram matrix, eigenvalues descending.
struct EigenModel {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;  // n x p, unit columns
  KernelSpec spec;
  std::shared_ptr<const Dataset> train;

  Eigen::Index num_components() const { return eigenvalues.size(); }
};

/// Standard (L2-norm) kernel PCA without feature-space centering.
///
/// Each eigenvector's largest-magnitude entry is made positive. Small negative
/// eigenvalues (>= -1e-8 * mu_1) are clipped to zero; larger ones mean the
/// kernel is not PSD and raise InvalidData.
EigenModel l2_fit(const GramMatrix& k, Eigen::Index components,
                  std::shared_ptr<const Dataset> train = nullptr);

/// Column j = G u_j / sqrt(mu_j) for a Gram or cross-Gram block G (m x n).
Eigen::MatrixXd l2_scores(const EigenModel& model, const Eigen::MatrixXd& gram_or_cross);

/// Number of leading eigenvalues strictly above 1e-12 * mu_1.
Eigen::Index effective_rank(const EigenModel& model);

}  // namespace l1kpca
