#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "l1kpca/convergence.hpp"
#include "l1kpca/kernel.hpp"

namespace l1kpca {

/// Vector with every entry exactly -1 or +1.
class SignVector {
 public:
  SignVector() = default;
  /// Throws InvalidData if any entry is not +-1.
  explicit SignVector(std::vector<std::int8_t> entries);

  static SignVector ones(std::size_t n);
  /// Sign of each entry of `values`; zero maps to +1.
  static SignVector from_signs(const Eigen::Ref<const Eigen::VectorXd>& values);

  std::size_t size() const { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  std::span<const std::int8_t> entries() const { return entries_; }
  Eigen::VectorXd to_vector() const;
  SignVector negated() const;

  bool operator==(const SignVector&) const = default;

 private:
  std::vector<std::int8_t> entries_;
};

struct SolverOptions {
  // Zero band for sgn((Kc)_i). Unset: 1e-12 * n * max|K|.
  std::optional<double> tol_zero;
  // Quadratic-form termination threshold. Unset: 1e-9 * max|K|.
  std::optional<double> eps_term;
  std::size_t max_iter = 1000;
  std::size_t starts = 8;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  // Keep every deflated Gram matrix on the fitted model (p n^2 doubles).
  bool keep_kernel_chain = true;

  double resolved_tol_zero(const GramMatrix& k) const;
  double resolved_eps_term(const GramMatrix& k) const;
};

struct ComponentModel {
  SignVector sign_vector;
  double objective = 0.0;  // c'Kc
  ConvergenceReport report;
  Eigen::VectorXd train_scores;
};

struct KpcaModel {
  std::vector<ComponentModel> components;
  // kernel_chain[j] is the Gram matrix component j was fit on.
  std::vector<GramMatrix> kernel_chain;
  KernelSpec spec;
  std::shared_ptr<const Dataset> train;

  std::size_t num_components() const { return components.size(); }
};

/// One fixed-point step: c'_i = sgn((Kc)_i), keeping c_i where
/// |(Kc)_i| <= tol_zero.
SignVector sign_update(const GramMatrix& k, const SignVector& c, double tol_zero);

/// Deterministic first start: sgn of the Gram row sums (zero band maps to +1).
SignVector row_sum_start(const GramMatrix& k, double tol_zero);

/// Iterates sign_update from `start` until the sign vector stops changing or
/// the paper-style quadratic form (dc)'K(dc) drops below eps_term.
///
/// Throws NonConvergence after max_iter updates and DegenerateComponent when
/// the terminal c'Kc is within tol_zero of zero.
ComponentModel fit_component(const GramMatrix& k, const SignVector& start,
                             const SolverOptions& options = {});

/// Multi-start fit of `components` sequential components with deflation.
KpcaModel fit(const GramMatrix& k, std::size_t components, const SolverOptions& options = {},
              std::shared_ptr<const Dataset> train = nullptr);

/// Like fit, but stops early (without error) once the deflated kernel is
/// exhausted. At least one component must succeed.
KpcaModel fit_up_to(const GramMatrix& k, std::size_t max_components,
                    const SolverOptions& options = {},
                    std::shared_ptr<const Dataset> train = nullptr);

/// K - (Kc)(Kc)' / (c'Kc), computed symmetrically.
GramMatrix deflate(const GramMatrix& k, const SignVector& c, std::optional<double> tol_zero = {});

/// (Kc) / sqrt(c'Kc).
Eigen::VectorXd train_scores(const GramMatrix& k, const SignVector& c,
                             std::optional<double> tol_zero = {});

/// Rebuilds `model.kernel_chain` from its training data and sign vectors.
void rebuild_kernel_chain(KpcaModel& model, const GramOptions& options = {});

/// Scores of the query rows on every component (m x p), via a deflated
/// cross-Gram chain. `query` must be standardized with the training statistics.
Eigen::MatrixXd transform(const KpcaModel& model, const Dataset& query,
                          const GramOptions& options = {});

/// Same chain, starting from a caller-supplied m x n cross-Gram block.
Eigen::MatrixXd transform_cross(const KpcaModel& model, const Eigen::MatrixXd& cross);

/// Training scores as an n x p matrix.
Eigen::MatrixXd score_matrix(const KpcaModel& model);

}  // namespace l1kpca
