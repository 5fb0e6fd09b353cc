#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace l1kpca {

enum class Termination { kSignFixed, kQuadraticFormZero, kMaxIter };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

/// Iteration history of one run of the sign-vector fixed-point solver.
///
/// `norm_trace[k]` is the L2 norm of the feasible iterate produced from the
/// k-th sign vector, sqrt(c'Kc) / sum_i |(Kc)_i|. It never increases.
/// `rate_estimates[k]` is the per-step contraction ratio c'Kc / sum_i |(Kc)_i|.
struct ConvergenceReport {
  std::size_t iterations = 0;
  std::vector<double> norm_trace;
  Termination terminated_by = Termination::kMaxIter;
  std::vector<double> rate_estimates;
  double lagrange_multiplier = 0.0;
  // Number of (Kc)_i entries that fell inside the zero band over all steps.
  std::size_t zero_band_hits = 0;
};

}  // namespace l1kpca
