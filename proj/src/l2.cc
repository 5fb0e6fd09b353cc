#include "l1kpca/l2.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "l1kpca/error.hpp"

namespace l1kpca {

EigenModel l2_fit(const GramMatrix& k, Eigen::Index components,
                  std::shared_ptr<const Dataset> train) {
  const Eigen::Index n = k.size();
  if (components < 1 || components > n) {
    throw InvalidData("number of components must be in [1, n]; got " + std::to_string(components));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k.entries());
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigensolver did not converge");
  }
  // Eigen returns ascending order.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const double top = std::max(values(n - 1), 0.0);

  EigenModel model;
  model.spec = k.spec();
  model.train = std::move(train);
  model.eigenvalues.resize(components);
  model.vectors.resize(n, components);
  for (Eigen::Index j = 0; j < components; ++j) {
    double mu = values(n - 1 - j);
    if (mu < 0.0) {
      if (-mu > 1e-8 * top) {
        throw InvalidData("kernel is not positive semidefinite: eigenvalue " + std::to_string(mu) +
                          " among the leading components");
      }
      mu = 0.0;
    }
    model.eigenvalues(j) = mu;
    Eigen::VectorXd u = vectors.col(n - 1 - j);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u(arg) < 0.0) u = -u;
    model.vectors.col(j) = u;
  }
  return model;
}

Eigen::MatrixXd l2_scores(const EigenModel& model, const Eigen::MatrixXd& gram_or_cross) {
  if (gram_or_cross.cols() != model.vectors.rows()) {
    throw InvalidData("score input has " + std::to_string(gram_or_cross.cols()) +
                      " columns, model expects " + std::to_string(model.vectors.rows()));
  }
  const double top = model.eigenvalues.size() > 0 ? model.eigenvalues(0) : 0.0;
  const double tol = 1e-12 * std::max(top, 0.0);
  Eigen::MatrixXd scores = gram_or_cross * model.vectors;
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    const double mu = model.eigenvalues(j);
    if (!(mu > tol)) {
      throw DegenerateComponent("eigenvalue " + std::to_string(j) + " is numerically zero",
                                static_cast<std::size_t>(j));
    }
    scores.col(j) /= std::sqrt(mu);
  }
  return scores;
}

Eigen::Index effective_rank(const EigenModel& model) {
  if (model.eigenvalues.size() == 0) return 0;
  const double tol = 1e-12 * model.eigenvalues(0);
  Eigen::Index r = 0;
  while (r < model.eigenvalues.size() && model.eigenvalues(r) > tol) ++r;
  return r;
}

}  // namespace l1kpca
