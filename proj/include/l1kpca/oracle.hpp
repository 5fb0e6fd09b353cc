#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "l1kpca/kernel.hpp"
#include "l1kpca/l1.hpp"

namespace l1kpca {

struct OracleResult {
  SignVector best_sign;
  double best_objective = 0.0;
  // Objective of every sign vector with c_0 = +1, ascending.
  std::optional<std::vector<double>> objective_histogram;
};

/// Exhaustive maximization of c'Kc over {-1, +1}^n with c_0 fixed to +1.
///
/// Walks the remaining n - 1 signs in Gray-code order so each step costs O(n).
/// Ties go to the lexicographically smallest vector under the encoding
/// +1 -> 0, -1 -> 1 (so all-ones wins among equals). Throws InstanceTooLarge
/// when n > limit.
OracleResult enumerate(const GramMatrix& k, std::size_t limit = 20, bool keep_histogram = false);

/// sum_ij K_ij + sum_{i<j} (-K_ij)(c_i - c_j)^2, which equals c'Kc.
double maxcut_objective(const GramMatrix& k, const SignVector& c);

/// c'Kc evaluated directly.
double quadratic_objective(const GramMatrix& k, const SignVector& c);

}  // namespace l1kpca
