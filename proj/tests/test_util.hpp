#pragma once

// Helpers shared by the unit and acceptance suites. Everything here is an
// independent recomputation and deliberately avoids the library's fast paths.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "l1kpca/kernel.hpp"
#include "l1kpca/l1.hpp"

namespace l1kpca::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
  }
  return m;
}

inline SignVector random_signs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::int8_t> e(n);
  for (auto& x : e) x = (gen() & 1U) ? 1 : -1;
  return SignVector(std::move(e));
}

inline GramMatrix make_gram(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (const double v : r) m(i, j++) = v;
    ++i;
  }
  return GramMatrix(m, KernelSpec::linear());
}

/// Naive triple loop c'Kc.
inline double naive_quadratic(const Eigen::MatrixXd& k, const SignVector& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) s += k(i, j) * c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(j)];
  }
  return s;
}

/// Brute force over all 2^n sign vectors (no symmetry reduction, no Gray code).
struct BruteForce {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> all;
};

inline BruteForce brute_force(const Eigen::MatrixXd& k) {
  const auto n = static_cast<std::size_t>(k.rows());
  BruteForce out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::int8_t> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = (mask >> i) & 1U ? -1 : 1;
    const double v = naive_quadratic(k, SignVector(e));
    out.all.push_back(v);
    out.best = std::max(out.best, v);
  }
  return out;
}

inline double min_eigenvalue(const Eigen::MatrixXd& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Fixed-point check: c_i == sgn((Kc)_i) wherever |(Kc)_i| > tol.
inline bool is_fixed_point(const Eigen::MatrixXd& k, const SignVector& c, double tol) {
  const Eigen::VectorXd kc = k * c.to_vector();
  for (Eigen::Index i = 0; i < kc.size(); ++i) {
    if (kc(i) > tol && c[static_cast<std::size_t>(i)] != 1) return false;
    if (kc(i) < -tol && c[static_cast<std::size_t>(i)] != -1) return false;
  }
  return true;
}

/// Explicit input-space loadings for a linear-kernel L1 model: deflate the
/// feature rows directly and form u_j = F_j' c_j / sqrt(c_j' F_j F_j' c_j).
inline Eigen::MatrixXd explicit_linear_loadings(const Eigen::MatrixXd& data, const KpcaModel& model) {
  Eigen::MatrixXd features = data;
  Eigen::MatrixXd loadings(data.cols(), static_cast<Eigen::Index>(model.components.size()));
  for (std::size_t j = 0; j < model.components.size(); ++j) {
    const Eigen::VectorXd c = model.components[j].sign_vector.to_vector();
    Eigen::VectorXd y = features.transpose() * c;
    const Eigen::VectorXd u = y / y.norm();
    loadings.col(static_cast<Eigen::Index>(j)) = u;
    features = features - (features * u) * u.transpose();
  }
  return loadings;
}

/// Input-space form of the linear-kernel iteration:
/// w^k = sum_i a_i c^k_i, c^{k+1}_i = sgn(a_i' w^k), previous sign kept in the band.
inline std::vector<SignVector> input_space_sequence(const Eigen::MatrixXd& data,
                                                    const SignVector& start, double tol,
                                                    std::size_t max_steps) {
  std::vector<SignVector> seq{start};
  Eigen::VectorXd c = start.to_vector();
  for (std::size_t step = 0; step < max_steps; ++step) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(data.cols());
    for (Eigen::Index i = 0; i < data.rows(); ++i) w += data.row(i).transpose() * c(i);
    Eigen::VectorXd next = c;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const double proj = data.row(i).dot(w);
      if (proj > tol) next(i) = 1.0;
      else if (proj < -tol) next(i) = -1.0;
    }
    if (next == c) break;
    c = next;
    seq.push_back(SignVector::from_signs(c));
  }
  return seq;
}

}  // namespace l1kpca::testing
