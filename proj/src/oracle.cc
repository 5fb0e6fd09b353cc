#include "l1kpca/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "l1kpca/error.hpp"

namespace l1kpca {
namespace {

// Sign bits: bit i set means c_i = -1. Lexicographic order on c under
// +1 < -1 is the order of the bit strings read from index 0.
bool lex_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

double quadratic_objective(const GramMatrix& k, const SignVector& c) {
  if (static_cast<Eigen::Index>(c.size()) != k.size()) {
    throw InvalidData("sign vector length does not match Gram size");
  }
  const Eigen::VectorXd v = c.to_vector();
  return v.dot(k.entries() * v);
}

double maxcut_objective(const GramMatrix& k, const SignVector& c) {
  if (static_cast<Eigen::Index>(c.size()) != k.size()) {
    throw InvalidData("sign vector length does not match Gram size");
  }
  const Eigen::Index n = k.size();
  const double total = k.entries().sum();
  double cut = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double diff = static_cast<double>(c[i] - c[j]);
      cut += -k(i, j) * diff * diff;
    }
  }
  return total + cut;
}

OracleResult enumerate(const GramMatrix& k, std::size_t limit, bool keep_histogram) {
  const auto n = static_cast<std::size_t>(k.size());
  if (n > limit) {
    throw InstanceTooLarge("exhaustive search limited to n <= " + std::to_string(limit) +
                           "; got n = " + std::to_string(n));
  }
  if (n > 62) throw InstanceTooLarge("exhaustive search cannot index more than 62 free signs");
  const Eigen::MatrixXd& kmat = k.entries();
  const double scale = std::max(kmat.cwiseAbs().sum(), 1e-300);
  const double tie_tol = 1e-12 * scale;

  Eigen::VectorXd c = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  Eigen::VectorXd kc = kmat * c;
  double objective = c.dot(kc);

  std::vector<std::uint8_t> bits(n, 0);
  std::vector<std::uint8_t> best_bits = bits;
  double best = objective;

  std::vector<double> histogram;
  const std::uint64_t total = n > 0 ? (std::uint64_t{1} << (n - 1)) : 1;
  if (keep_histogram) histogram.reserve(total);
  if (keep_histogram) histogram.push_back(objective);

  for (std::uint64_t step = 1; step < total; ++step) {
    // Gray code: flip free sign (index 1 + ctz(step)).
    const auto i = static_cast<Eigen::Index>(1 + std::countr_zero(step));
    const double ci = c(i);
    objective += -4.0 * ci * kc(i) + 4.0 * kmat(i, i);
    kc.noalias() -= (2.0 * ci) * kmat.col(i);
    c(i) = -ci;
    bits[static_cast<std::size_t>(i)] ^= 1U;
    if ((step & 1023U) == 0) {
      // Resync the running values against drift.
      kc.noalias() = kmat * c;
      objective = c.dot(kc);
    }
    if (keep_histogram) histogram.push_back(objective);
    if (objective > best + tie_tol ||
        (objective >= best - tie_tol && lex_less(bits, best_bits))) {
      best = std::max(best, objective);
      best_bits = bits;
    }
  }

  std::vector<std::int8_t> signs(n);
  for (std::size_t i = 0; i < n; ++i) signs[i] = best_bits[i] ? -1 : 1;
  OracleResult out;
  out.best_sign = SignVector(std::move(signs));
  out.best_objective = quadratic_objective(k, out.best_sign);
  if (keep_histogram) {
    std::sort(histogram.begin(), histogram.end());
    out.objective_histogram = std::move(histogram);
  }
  return out;
}

}  // namespace l1kpca
