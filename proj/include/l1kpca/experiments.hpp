#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "l1kpca/kernel.hpp"
#include "l1kpca/l1.hpp"
#include "l1kpca/l2.hpp"

namespace l1kpca {

/// Low-rank factor model with dense noise and row corruption.
///
///   base  = U V' + N(0, dense_noise_std^2),  U: n x rank, V: d x rank ~ N(0, 1)
///   noisy = base, plus N(0, noise_scale^2) on every entry of ceil(r% n) rows
struct SynthConfig {
  std::size_t n = 200;
  std::size_t d = 20;
  std::size_t rank = 5;
  double r_percent = 0.0;
  double noise_scale = 5.0;
  double dense_noise_std = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  Eigen::MatrixXd noisy_raw;
  Eigen::MatrixXd normal_raw;
  Dataset noisy;   // standardized on its own statistics, labels = mask
  Dataset normal;  // standardized on its own statistics
  std::vector<int> outlier_mask;
  std::vector<std::size_t> corrupted_rows;  // ascending
};

SynthData synth_generate(const SynthConfig& config);

/// 100 * (sum of squared normal-sample scores on the given unit loadings)
///     / (sum of the top-p eigenvalues of the normal Gram).
/// `normal_scores` is m x p with m = k_normal.size().
double total_explained_variation(const GramMatrix& k_normal, const Eigen::MatrixXd& normal_scores);

double total_explained_variation(const GramMatrix& k_normal, const KpcaModel& noisy_model,
                                 const Dataset& normal);
double total_explained_variation(const GramMatrix& k_normal, const EigenModel& noisy_model,
                                 const Dataset& normal);

struct RobustnessResult {
  double r_percent = 0.0;
  KernelSpec kernel;
  double tev_l1 = 0.0;
  double tev_l2 = 0.0;
  std::size_t p = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> tev_l1_per_seed;
  std::vector<double> tev_l2_per_seed;
  double noise_scale = 0.0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t rank = 0;
};

struct SweepConfig {
  std::vector<double> r_grid{5, 10, 15, 20, 25, 30};
  std::vector<KernelSpec> kernels{KernelSpec::linear()};
  SynthConfig base;
  std::size_t components = 4;
  std::vector<std::uint64_t> seeds{0};
  SolverOptions solver;
  unsigned threads = 0;
};

/// Seed for the (seed, r) cell so every grid cell draws independent data
/// regardless of evaluation order.
std::uint64_t cell_seed(std::uint64_t seed, double r_percent);

/// One row per (r, kernel), averaged over seeds. Rows ordered by r then kernel.
std::vector<RobustnessResult> robustness_sweep(const SweepConfig& config);

struct BenchInput {
  std::string name;
  Dataset data;
};

struct BenchRow {
  std::string dataset;
  std::string kernel;
  std::string method;  // "l1" or "l2"
  double seconds = 0.0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t components = 0;
};

struct BenchOptions {
  std::size_t component_cap = 50;
  SolverOptions solver;
};

/// Number of components extracted for "all principal components" runs.
std::size_t default_components(std::size_t n, std::size_t d, std::size_t cap = 50);

/// Wall-clock seconds for a full L1 fit and a full L2 fit (Gram included in
/// both). Runs serially.
std::vector<BenchRow> runtime_bench(const std::vector<BenchInput>& datasets,
                                    const std::vector<KernelSpec>& specs,
                                    const BenchOptions& options = {});

}  // namespace l1kpca
