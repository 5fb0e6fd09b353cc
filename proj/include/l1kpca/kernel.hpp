#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace l1kpca {

/// Column-standardized sample matrix (rows = samples, columns = features).
///
/// `column_means` and `column_stds` are the statistics used to standardize
/// `values`; apply them to held-out data with `standardize_like`.
struct Dataset {
  Eigen::MatrixXd values;
  std::optional<std::vector<int>> labels;  // 1 = outlier
  Eigen::RowVectorXd column_means;
  Eigen::RowVectorXd column_stds;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// Centers each column and scales it to unit sample standard deviation
/// (divisor n - 1). Constant columns become zeros and record std 1.
Dataset standardize(const Eigen::MatrixXd& raw);

/// Applies `reference`'s recorded column statistics to `raw`.
Dataset standardize_like(const Dataset& reference, const Eigen::MatrixXd& raw);

/// Wraps an already-prepared matrix without transforming it (identity
/// statistics). Used for data the caller wants to feed to kernels verbatim.
Dataset as_is(const Eigen::MatrixXd& values);

enum class KernelFamily { kLinear, kGaussian, kPolynomial };

/// linear:     k(a, b) = a'b
/// gaussian:   k(a, b) = exp(-|a - b|^2 / (2 sigma^2))
/// polynomial: k(a, b) = (a'b + offset)^degree
struct KernelSpec {
  KernelFamily family = KernelFamily::kLinear;
  double sigma = 1.0;
  int degree = 2;
  double offset = 1.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec gaussian(double sigma);
  static KernelSpec polynomial(int degree, double offset);

  /// Throws InvalidData on sigma <= 0 (gaussian) or degree < 1 (polynomial).
  void validate() const;
  std::string describe() const;

  bool operator==(const KernelSpec&) const = default;
};

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Symmetric matrix of pairwise feature-space inner products.
///
/// Immutable once built. Construction checks squareness, finiteness and
/// symmetry; it does not check positive semidefiniteness.
class GramMatrix {
 public:
  GramMatrix(Eigen::MatrixXd entries, KernelSpec spec);

  const Eigen::MatrixXd& entries() const { return entries_; }
  const KernelSpec& spec() const { return spec_; }
  Eigen::Index size() const { return entries_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  double max_abs() const { return max_abs_; }

 private:
  Eigen::MatrixXd entries_;
  KernelSpec spec_;
  double max_abs_ = 0.0;
};

struct GramOptions {
  std::size_t max_samples = 20000;
  unsigned threads = 0;  // 0 = hardware concurrency
};

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b);

GramMatrix gram(const KernelSpec& spec, const Dataset& data, const GramOptions& options = {});

/// m x n matrix with entry (i, j) = k(query_i, train_j).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Dataset& train, const Dataset& query,
                           const GramOptions& options = {});

}  // namespace l1kpca
