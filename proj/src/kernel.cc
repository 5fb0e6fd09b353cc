#include "l1kpca/kernel.hpp"

#include <cmath>
#include <sstream>

#include "l1kpca/error.hpp"
#include "l1kpca/parallel.hpp"

namespace l1kpca {
namespace {

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidData(std::string(what) + " contains non-finite entries");
  }
}

void check_nonempty(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InvalidData(std::string(what) + " is empty");
  }
}

// Gaussian evaluation on column views; the squared distance is formed from
// the difference directly rather than |a|^2 + |b|^2 - 2a'b.
template <typename A, typename B>
double eval_unchecked(const KernelSpec& spec, const A& a, const B& b) {
  switch (spec.family) {
    case KernelFamily::kLinear:
      return a.dot(b);
    case KernelFamily::kGaussian:
      return std::exp(-(a - b).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
    case KernelFamily::kPolynomial:
      return std::pow(a.dot(b) + spec.offset, spec.degree);
  }
  return 0.0;
}

}  // namespace

Dataset standardize(const Eigen::MatrixXd& raw) {
  check_nonempty(raw, "data matrix");
  check_finite(raw, "data matrix");

  const Eigen::Index n = raw.rows();
  Dataset out;
  out.column_means = raw.colwise().mean();
  out.column_stds = Eigen::RowVectorXd::Ones(raw.cols());
  out.values = raw.rowwise() - out.column_means;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    if (n < 2) {
      out.values.col(j).setZero();
      continue;
    }
    const double sd = std::sqrt(out.values.col(j).squaredNorm() / static_cast<double>(n - 1));
    // Constant up to representation error of the mean.
    if (sd <= 1e-14 * std::abs(out.column_means(j)) || sd == 0.0) {
      out.values.col(j).setZero();
    } else {
      out.column_stds(j) = sd;
      out.values.col(j) /= sd;
    }
  }
  return out;
}

Dataset standardize_like(const Dataset& reference, const Eigen::MatrixXd& raw) {
  check_finite(raw, "data matrix");
  if (raw.cols() != reference.column_means.size()) {
    std::ostringstream msg;
    msg << "feature dimension mismatch: expected " << reference.column_means.size() << ", got "
        << raw.cols();
    throw InvalidData(msg.str());
  }
  Dataset out;
  out.column_means = reference.column_means;
  out.column_stds = reference.column_stds;
  out.values = (raw.rowwise() - out.column_means).array().rowwise() / out.column_stds.array();
  return out;
}

Dataset as_is(const Eigen::MatrixXd& values) {
  check_nonempty(values, "data matrix");
  check_finite(values, "data matrix");
  Dataset out;
  out.values = values;
  out.column_means = Eigen::RowVectorXd::Zero(values.cols());
  out.column_stds = Eigen::RowVectorXd::Ones(values.cols());
  return out;
}

KernelSpec KernelSpec::gaussian(double sigma) {
  KernelSpec spec;
  spec.family = KernelFamily::kGaussian;
  spec.sigma = sigma;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  KernelSpec spec;
  spec.family = KernelFamily::kPolynomial;
  spec.degree = degree;
  spec.offset = offset;
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (family == KernelFamily::kGaussian && !(sigma > 0.0 && std::isfinite(sigma))) {
    throw InvalidData("gaussian kernel requires sigma > 0");
  }
  if (family == KernelFamily::kPolynomial && (degree < 1 || !std::isfinite(offset))) {
    throw InvalidData("polynomial kernel requires degree >= 1 and a finite offset");
  }
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family) {
    case KernelFamily::kLinear:
      os << "linear";
      break;
    case KernelFamily::kGaussian:
      os << "gaussian(sigma=" << sigma << ")";
      break;
    case KernelFamily::kPolynomial:
      os << "poly(degree=" << degree << ",offset=" << offset << ")";
      break;
  }
  return os.str();
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kLinear:
      return "linear";
    case KernelFamily::kGaussian:
      return "gaussian";
    case KernelFamily::kPolynomial:
      return "poly";
  }
  return "linear";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "linear") return KernelFamily::kLinear;
  if (name == "gaussian" || name == "rbf") return KernelFamily::kGaussian;
  if (name == "poly" || name == "polynomial") return KernelFamily::kPolynomial;
  throw InvalidData("unknown kernel family '" + name + "'");
}

GramMatrix::GramMatrix(Eigen::MatrixXd entries, KernelSpec spec)
    : entries_(std::move(entries)), spec_(spec) {
  if (entries_.rows() != entries_.cols()) throw InvalidData("Gram matrix must be square");
  if (entries_.rows() < 1) throw InvalidData("Gram matrix is empty");
  check_finite(entries_, "Gram matrix");
  max_abs_ = entries_.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, max_abs_);
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (std::abs(entries_(i, j) - entries_(j, i)) > tol) {
        throw InvalidData("Gram matrix is not symmetric");
      }
    }
  }
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw InvalidData("kernel arguments differ in dimension");
  spec.validate();
  return eval_unchecked(spec, a, b);
}

GramMatrix gram(const KernelSpec& spec, const Dataset& data, const GramOptions& options) {
  spec.validate();
  check_nonempty(data.values, "data matrix");
  const Eigen::Index n = data.rows();
  if (static_cast<std::size_t>(n) > options.max_samples) {
    throw InstanceTooLarge("n = " + std::to_string(n) + " exceeds the Gram size cap of " +
                           std::to_string(options.max_samples));
  }
  // Samples as columns for contiguous access.
  const Eigen::MatrixXd samples = data.values.transpose();
  Eigen::MatrixXd k(n, n);
  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t col) {
    const auto j = static_cast<Eigen::Index>(col);
    for (Eigen::Index i = 0; i <= j; ++i) {
      k(i, j) = eval_unchecked(spec, samples.col(i), samples.col(j));
    }
  });
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) k(i, j) = k(j, i);
  }
  return GramMatrix(std::move(k), spec);
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Dataset& train, const Dataset& query,
                           const GramOptions& options) {
  spec.validate();
  if (train.cols() != query.cols()) {
    throw InvalidData("cross_gram: train and query differ in feature dimension");
  }
  const Eigen::MatrixXd train_t = train.values.transpose();
  const Eigen::MatrixXd query_t = query.values.transpose();
  const Eigen::Index m = query.rows();
  const Eigen::Index n = train.rows();
  Eigen::MatrixXd out(m, n);
  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t col) {
    const auto j = static_cast<Eigen::Index>(col);
    for (Eigen::Index i = 0; i < m; ++i) {
      out(i, j) = eval_unchecked(spec, query_t.col(i), train_t.col(j));
    }
  });
  return out;
}

}  // namespace l1kpca
