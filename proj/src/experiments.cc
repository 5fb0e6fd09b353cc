#include "l1kpca/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "l1kpca/error.hpp"
#include "l1kpca/parallel.hpp"
#include "l1kpca/rng.hpp"

namespace l1kpca {
namespace {

Eigen::MatrixXd standard_normal(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  // Row-major fill order is part of the reproducibility contract.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(gen);
  }
  return m;
}

double top_eigen_sum(const GramMatrix& k, Eigen::Index p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k.entries(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge");
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::Index n = values.size();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < std::min(p, n); ++j) sum += std::max(values(n - 1 - j), 0.0);
  return sum;
}

}  // namespace

void SynthConfig::validate() const {
  if (n < 1 || d < 1) throw InvalidData("synthetic data needs n >= 1 and d >= 1");
  if (rank > std::min(n, d)) throw InvalidData("rank must not exceed min(n, d)");
  if (!(r_percent >= 0.0 && r_percent < 100.0)) throw InvalidData("r_percent must be in [0, 100)");
  if (!(noise_scale >= 0.0) || !(dense_noise_std >= 0.0)) {
    throw InvalidData("noise magnitudes must be nonnegative");
  }
}

SynthData synth_generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 gen(config.seed);
  const Eigen::MatrixXd u = standard_normal(config.n, config.rank, gen);
  const Eigen::MatrixXd v = standard_normal(config.d, config.rank, gen);
  const Eigen::MatrixXd dense = standard_normal(config.n, config.d, gen);
  Eigen::MatrixXd noisy = u * v.transpose() + config.dense_noise_std * dense;

  // ceil(r% * n); the small offset absorbs representation error in r * n / 100.
  const double exact = config.r_percent * static_cast<double>(config.n) / 100.0;
  const auto corrupted = static_cast<std::size_t>(std::ceil(exact - 1e-9));

  std::vector<std::size_t> rows(config.n);
  std::iota(rows.begin(), rows.end(), 0);
  for (std::size_t i = 0; i < corrupted; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, config.n - 1);
    std::swap(rows[i], rows[pick(gen)]);
  }
  rows.resize(corrupted);
  std::sort(rows.begin(), rows.end());

  const Eigen::MatrixXd noise = standard_normal(corrupted, config.d, gen);
  std::vector<int> mask(config.n, 0);
  for (std::size_t r = 0; r < corrupted; ++r) {
    const auto row = static_cast<Eigen::Index>(rows[r]);
    noisy.row(row) += config.noise_scale * noise.row(static_cast<Eigen::Index>(r));
    mask[rows[r]] = 1;
  }

  Eigen::MatrixXd normal(static_cast<Eigen::Index>(config.n - corrupted), noisy.cols());
  Eigen::Index next = 0;
  for (std::size_t i = 0; i < config.n; ++i) {
    if (!mask[i]) normal.row(next++) = noisy.row(static_cast<Eigen::Index>(i));
  }

  SynthData out;
  out.noisy_raw = std::move(noisy);
  out.normal_raw = std::move(normal);
  out.noisy = standardize(out.noisy_raw);
  out.noisy.labels = mask;
  out.normal = standardize(out.normal_raw);
  out.outlier_mask = std::move(mask);
  out.corrupted_rows = std::move(rows);
  return out;
}

double total_explained_variation(const GramMatrix& k_normal, const Eigen::MatrixXd& normal_scores) {
  if (normal_scores.rows() != k_normal.size()) {
    throw InvalidData("score rows do not match the normal Gram size");
  }
  const double numerator = normal_scores.squaredNorm();
  const double denominator = top_eigen_sum(k_normal, normal_scores.cols());
  if (!(denominator > 1e-12 * std::max(k_normal.max_abs(), 1e-300))) {
    throw DegenerateComponent("normal Gram has no variance to explain");
  }
  return 100.0 * numerator / denominator;
}

double total_explained_variation(const GramMatrix& k_normal, const KpcaModel& noisy_model,
                                 const Dataset& normal) {
  return total_explained_variation(k_normal, transform(noisy_model, normal));
}

double total_explained_variation(const GramMatrix& k_normal, const EigenModel& noisy_model,
                                 const Dataset& normal) {
  if (!noisy_model.train) throw InvalidData("L2 model has no training data");
  return total_explained_variation(
      k_normal, l2_scores(noisy_model, cross_gram(noisy_model.spec, *noisy_model.train, normal)));
}

std::uint64_t cell_seed(std::uint64_t seed, double r_percent) {
  return mix_seed(seed, std::bit_cast<std::uint64_t>(r_percent));
}

std::vector<RobustnessResult> robustness_sweep(const SweepConfig& config) {
  if (config.r_grid.empty() || config.kernels.empty() || config.seeds.empty()) {
    throw InvalidData("robustness sweep needs a nonempty r grid, kernel list and seed list");
  }
  for (const auto& spec : config.kernels) spec.validate();

  const std::size_t num_seeds = config.seeds.size();
  const std::size_t num_kernels = config.kernels.size();
  const std::size_t cells = config.r_grid.size() * num_seeds;
  // [cell][kernel] -> (tev_l1, tev_l2)
  std::vector<std::vector<std::pair<double, double>>> values(cells);

  parallel_for(cells, config.threads, [&](std::size_t cell) {
    const double r = config.r_grid[cell / num_seeds];
    const std::uint64_t seed = config.seeds[cell % num_seeds];
    SynthConfig synth = config.base;
    synth.r_percent = r;
    synth.seed = cell_seed(seed, r);
    const SynthData data = synth_generate(synth);
    auto noisy = std::make_shared<const Dataset>(data.noisy);

    SolverOptions solver = config.solver;
    solver.seed = synth.seed;
    solver.threads = 1;
    solver.keep_kernel_chain = false;
    const GramOptions gram_opts{.max_samples = 20000, .threads = 1};

    auto& row = values[cell];
    row.reserve(num_kernels);
    try {
      for (const auto& spec : config.kernels) {
        const GramMatrix k_noisy = gram(spec, *noisy, gram_opts);
        const GramMatrix k_normal = gram(spec, data.normal, gram_opts);
        const KpcaModel l1 = fit(k_noisy, config.components, solver, noisy);
        const EigenModel l2 = l2_fit(k_noisy, static_cast<Eigen::Index>(config.components), noisy);
        row.emplace_back(total_explained_variation(k_normal, l1, data.normal),
                         total_explained_variation(k_normal, l2, data.normal));
      }
    } catch (const Error& e) {
      throw NumericalFailure("robustness cell r=" + std::to_string(r) +
                             " seed=" + std::to_string(seed) + ": " + e.what());
    }
  });

  std::vector<RobustnessResult> out;
  for (std::size_t ri = 0; ri < config.r_grid.size(); ++ri) {
    for (std::size_t ki = 0; ki < num_kernels; ++ki) {
      RobustnessResult res;
      res.r_percent = config.r_grid[ri];
      res.kernel = config.kernels[ki];
      res.p = config.components;
      res.seeds = config.seeds;
      res.noise_scale = config.base.noise_scale;
      res.n = config.base.n;
      res.d = config.base.d;
      res.rank = config.base.rank;
      for (std::size_t si = 0; si < num_seeds; ++si) {
        const auto& [l1, l2] = values[ri * num_seeds + si][ki];
        res.tev_l1_per_seed.push_back(l1);
        res.tev_l2_per_seed.push_back(l2);
      }
      res.tev_l1 = std::accumulate(res.tev_l1_per_seed.begin(), res.tev_l1_per_seed.end(), 0.0) /
                   static_cast<double>(num_seeds);
      res.tev_l2 = std::accumulate(res.tev_l2_per_seed.begin(), res.tev_l2_per_seed.end(), 0.0) /
                   static_cast<double>(num_seeds);
      out.push_back(std::move(res));
    }
  }
  return out;
}

std::size_t default_components(std::size_t n, std::size_t d, std::size_t cap) {
  return std::max<std::size_t>(1, std::min({n, d, cap}));
}

std::vector<BenchRow> runtime_bench(const std::vector<BenchInput>& datasets,
                                    const std::vector<KernelSpec>& specs,
                                    const BenchOptions& options) {
  using Clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (const auto& input : datasets) {
    const auto n = static_cast<std::size_t>(input.data.rows());
    const auto d = static_cast<std::size_t>(input.data.cols());
    const std::size_t p = default_components(n, d, options.component_cap);
    for (const auto& spec : specs) {
      SolverOptions solver = options.solver;
      solver.keep_kernel_chain = false;
      const GramOptions gram_opts{.max_samples = 20000, .threads = options.solver.threads};

      auto t0 = Clock::now();
      const GramMatrix k1 = gram(spec, input.data, gram_opts);
      const KpcaModel l1 = fit_up_to(k1, p, solver);
      const double l1_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

      t0 = Clock::now();
      const GramMatrix k2 = gram(spec, input.data, gram_opts);
      const EigenModel l2 = l2_fit(k2, static_cast<Eigen::Index>(p));
      const double l2_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

      rows.push_back({input.name, spec.describe(), "l1", l1_seconds, n, d, l1.num_components()});
      rows.push_back({input.name, spec.describe(), "l2", l2_seconds, n, d,
                      static_cast<std::size_t>(l2.num_components())});
    }
  }
  return rows;
}

}  // namespace l1kpca
