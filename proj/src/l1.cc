#include "l1kpca/l1.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <string>

#include "l1kpca/error.hpp"
#include "l1kpca/parallel.hpp"
#include "l1kpca/rng.hpp"

namespace l1kpca {
namespace {

void check_dims(const GramMatrix& k, const SignVector& c) {
  if (static_cast<Eigen::Index>(c.size()) != k.size()) {
    throw InvalidData("sign vector length " + std::to_string(c.size()) +
                      " does not match Gram size " + std::to_string(k.size()));
  }
}

SignVector random_start(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::int8_t> entries(n);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) bits = gen();
    entries[i] = (bits & 1U) ? std::int8_t{1} : std::int8_t{-1};
    bits >>= 1U;
  }
  return SignVector(std::move(entries));
}

KpcaModel fit_sequence(const GramMatrix& k, std::size_t components, const SolverOptions& options,
                       std::shared_ptr<const Dataset> train, bool stop_when_exhausted) {
  const auto n = static_cast<std::size_t>(k.size());
  if (components < 1 || components > n) {
    throw InvalidData("number of components must be in [1, n]; got " +
                      std::to_string(components) + " with n = " + std::to_string(n));
  }
  if (train && static_cast<std::size_t>(train->rows()) != n) {
    throw InvalidData("training data does not match the Gram matrix size");
  }
  // Thresholds are pinned to the scale of the undeflated kernel so that an
  // exhausted deflated kernel reads as degenerate.
  SolverOptions per_start = options;
  per_start.tol_zero = options.resolved_tol_zero(k);
  per_start.eps_term = options.resolved_eps_term(k);
  const std::size_t starts = std::max<std::size_t>(options.starts, 1);

  KpcaModel model;
  model.spec = k.spec();
  model.train = std::move(train);

  GramMatrix current = k;
  for (std::size_t j = 0; j < components; ++j) {
    std::vector<std::optional<ComponentModel>> candidates(starts);
    try {
      parallel_for(starts, options.threads, [&](std::size_t s) {
        const SignVector start =
            s == 0 ? row_sum_start(current, *per_start.tol_zero)
                   : random_start(n, mix_seed(options.seed, j, s));
        try {
          candidates[s] = fit_component(current, start, per_start);
        } catch (const DegenerateComponent&) {
          // A degenerate start does not sink the component if another start succeeds.
        }
      });
    } catch (const NonConvergence& e) {
      throw NonConvergence("component " + std::to_string(j) + ": " + e.what(), e.report(), j);
    }

    const ComponentModel* best = nullptr;
    for (const auto& cand : candidates) {
      if (cand && (best == nullptr || cand->objective > best->objective)) best = &*cand;
    }
    if (best == nullptr) {
      if (stop_when_exhausted && j > 0) break;
      throw DegenerateComponent(
          "component " + std::to_string(j) + ": c'Kc vanished for every start (kernel exhausted)",
          j);
    }

    model.components.push_back(*best);
    if (j + 1 == components) {
      if (options.keep_kernel_chain) model.kernel_chain.push_back(std::move(current));
      break;
    }
    GramMatrix next = deflate(current, best->sign_vector, per_start.tol_zero);
    if (options.keep_kernel_chain) model.kernel_chain.push_back(std::move(current));
    current = std::move(next);
  }
  return model;
}

}  // namespace

SignVector::SignVector(std::vector<std::int8_t> entries) : entries_(std::move(entries)) {
  for (const auto e : entries_) {
    if (e != 1 && e != -1) throw InvalidData("sign vector entries must be -1 or +1");
  }
}

SignVector SignVector::ones(std::size_t n) {
  return SignVector(std::vector<std::int8_t>(n, 1));
}

SignVector SignVector::from_signs(const Eigen::Ref<const Eigen::VectorXd>& values) {
  std::vector<std::int8_t> entries(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) entries[i] = values(i) < 0.0 ? -1 : 1;
  return SignVector(std::move(entries));
}

Eigen::VectorXd SignVector::to_vector() const {
  Eigen::VectorXd v(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) v(static_cast<Eigen::Index>(i)) = entries_[i];
  return v;
}

SignVector SignVector::negated() const {
  std::vector<std::int8_t> flipped(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) flipped[i] = static_cast<std::int8_t>(-entries_[i]);
  return SignVector(std::move(flipped));
}

double SolverOptions::resolved_tol_zero(const GramMatrix& k) const {
  return tol_zero.value_or(1e-12 * static_cast<double>(k.size()) * k.max_abs());
}

double SolverOptions::resolved_eps_term(const GramMatrix& k) const {
  return eps_term.value_or(1e-9 * k.max_abs());
}

SignVector sign_update(const GramMatrix& k, const SignVector& c, double tol_zero) {
  check_dims(k, c);
  const Eigen::VectorXd kc = k.entries() * c.to_vector();
  std::vector<std::int8_t> next(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = kc(static_cast<Eigen::Index>(i));
    next[i] = v > tol_zero ? 1 : (v < -tol_zero ? -1 : static_cast<std::int8_t>(c[i]));
  }
  return SignVector(std::move(next));
}

SignVector row_sum_start(const GramMatrix& k, double tol_zero) {
  const Eigen::VectorXd sums = k.entries().rowwise().sum();
  std::vector<std::int8_t> entries(sums.size());
  for (Eigen::Index i = 0; i < sums.size(); ++i) entries[i] = sums(i) < -tol_zero ? -1 : 1;
  return SignVector(std::move(entries));
}

ComponentModel fit_component(const GramMatrix& k, const SignVector& start,
                             const SolverOptions& options) {
  check_dims(k, start);
  const double tol = options.resolved_tol_zero(k);
  const double eps = options.resolved_eps_term(k);
  const Eigen::MatrixXd& kmat = k.entries();
  const Eigen::Index n = k.size();

  ConvergenceReport report;
  Eigen::VectorXd c = start.to_vector();
  Eigen::VectorXd kc = kmat * c;
  Eigen::VectorXd next(n);
  bool converged = false;

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    const double quad = c.dot(kc);
    const double abs_sum = kc.lpNorm<1>();
    report.norm_trace.push_back(abs_sum > 0.0 ? std::sqrt(std::max(quad, 0.0)) / abs_sum : 0.0);
    report.rate_estimates.push_back(abs_sum > 0.0 ? quad / abs_sum : 0.0);

    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = kc(i);
      if (v > tol) {
        next(i) = 1.0;
      } else if (v < -tol) {
        next(i) = -1.0;
      } else {
        next(i) = c(i);
        ++report.zero_band_hits;
      }
      changed = changed || next(i) != c(i);
    }
    report.iterations = iter + 1;
    if (!changed) {
      report.terminated_by = Termination::kSignFixed;
      converged = true;
      break;
    }

    Eigen::VectorXd k_next = kmat * next;
    // (c - c')'K(c - c') with K(c - c') = Kc - Kc'.
    const double step_quad = (c - next).dot(kc - k_next);
    c.swap(next);
    kc.swap(k_next);
    if (step_quad <= eps) {
      report.terminated_by = Termination::kQuadraticFormZero;
      converged = true;
      break;
    }
  }

  if (!converged) {
    report.terminated_by = Termination::kMaxIter;
    throw NonConvergence("sign iteration did not settle within " +
                             std::to_string(options.max_iter) + " updates",
                         std::move(report));
  }

  const double objective = c.dot(kc);
  if (!(objective > tol)) {
    throw DegenerateComponent("c'Kc = " + std::to_string(objective) +
                              " is within the zero band; no variance left to extract");
  }
  const double x_norm = std::sqrt(objective) / kc.lpNorm<1>();
  report.lagrange_multiplier = 1.0 / (2.0 * x_norm);

  ComponentModel out;
  out.sign_vector = SignVector::from_signs(c);
  out.objective = objective;
  out.report = std::move(report);
  out.train_scores = kc / std::sqrt(objective);
  return out;
}

KpcaModel fit(const GramMatrix& k, std::size_t components, const SolverOptions& options,
              std::shared_ptr<const Dataset> train) {
  return fit_sequence(k, components, options, std::move(train), false);
}

KpcaModel fit_up_to(const GramMatrix& k, std::size_t max_components, const SolverOptions& options,
                    std::shared_ptr<const Dataset> train) {
  return fit_sequence(k, max_components, options, std::move(train), true);
}

GramMatrix deflate(const GramMatrix& k, const SignVector& c, std::optional<double> tol_zero) {
  check_dims(k, c);
  const double tol = tol_zero.value_or(1e-12 * static_cast<double>(k.size()) * k.max_abs());
  const Eigen::VectorXd v = k.entries() * c.to_vector();
  const double s = c.to_vector().dot(v);
  if (!(s > tol)) throw DegenerateComponent("cannot deflate along a direction with c'Kc <= tol");
  const Eigen::Index n = k.size();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      out(i, j) = k(i, j) - v(i) * v(j) / s;
      out(j, i) = out(i, j);
    }
  }
  return GramMatrix(std::move(out), k.spec());
}

Eigen::VectorXd train_scores(const GramMatrix& k, const SignVector& c,
                             std::optional<double> tol_zero) {
  check_dims(k, c);
  const double tol = tol_zero.value_or(1e-12 * static_cast<double>(k.size()) * k.max_abs());
  const Eigen::VectorXd v = k.entries() * c.to_vector();
  const double s = c.to_vector().dot(v);
  if (!(s > tol)) throw DegenerateComponent("c'Kc <= tol; scores undefined");
  return v / std::sqrt(s);
}

void rebuild_kernel_chain(KpcaModel& model, const GramOptions& options) {
  if (!model.train) throw InvalidData("model has no training data to rebuild its kernels from");
  model.kernel_chain.clear();
  GramMatrix current = gram(model.spec, *model.train, options);
  const double tol = 1e-12 * static_cast<double>(current.size()) * current.max_abs();
  for (std::size_t j = 0; j < model.components.size(); ++j) {
    if (j + 1 == model.components.size()) {
      model.kernel_chain.push_back(std::move(current));
      break;
    }
    GramMatrix next = deflate(current, model.components[j].sign_vector, tol);
    model.kernel_chain.push_back(std::move(current));
    current = std::move(next);
  }
}

Eigen::MatrixXd transform_cross(const KpcaModel& model, const Eigen::MatrixXd& cross) {
  const Eigen::Index p = static_cast<Eigen::Index>(model.components.size());
  if (p == 0) throw InvalidData("model has no components");
  const auto n = static_cast<Eigen::Index>(model.components.front().sign_vector.size());
  if (cross.cols() != n) {
    throw InvalidData("cross-Gram has " + std::to_string(cross.cols()) + " columns, model has n = " +
                      std::to_string(n));
  }
  Eigen::MatrixXd g = cross;
  Eigen::MatrixXd scores(cross.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const ComponentModel& comp = model.components[static_cast<std::size_t>(j)];
    const double root = std::sqrt(comp.objective);
    const Eigen::VectorXd gc = g * comp.sign_vector.to_vector();
    scores.col(j) = gc / root;
    if (j + 1 < p) {
      // K^j c_j = train_scores_j * sqrt(s_j), so the update is gc t' / sqrt(s_j).
      g.noalias() -= (gc / root) * comp.train_scores.transpose();
    }
  }
  return scores;
}

Eigen::MatrixXd transform(const KpcaModel& model, const Dataset& query, const GramOptions& options) {
  if (!model.train) throw InvalidData("model has no training data; cannot score new samples");
  if (query.cols() != model.train->cols()) {
    throw InvalidData("query has " + std::to_string(query.cols()) + " features, model expects " +
                      std::to_string(model.train->cols()));
  }
  return transform_cross(model, cross_gram(model.spec, *model.train, query, options));
}

Eigen::MatrixXd score_matrix(const KpcaModel& model) {
  if (model.components.empty()) return {};
  const Eigen::Index n = model.components.front().train_scores.size();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(model.components.size()));
  for (std::size_t j = 0; j < model.components.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = model.components[j].train_scores;
  }
  return out;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kSignFixed:
      return "sign_fixed";
    case Termination::kQuadraticFormZero:
      return "quadratic_form_zero";
    case Termination::kMaxIter:
      return "max_iter";
  }
  return "max_iter";
}

Termination termination_from_string(std::string_view s) {
  if (s == "sign_fixed") return Termination::kSignFixed;
  if (s == "quadratic_form_zero") return Termination::kQuadraticFormZero;
  if (s == "max_iter") return Termination::kMaxIter;
  throw SchemaError("unknown termination kind '" + std::string(s) + "'");
}

}  // namespace l1kpca
