#include "l1kpca/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "l1kpca/error.hpp"

namespace l1kpca {

double select_alpha(std::span<const double> variances) {
  if (variances.empty()) throw DegenerateComponent("no component variances given");
  for (const double v : variances) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidData("variances must be finite and >= 0");
  }
  std::vector<double> sorted(variances.begin(), variances.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (!(total > 0.0)) throw DegenerateComponent("all component variances are zero");

  // Walk cutoffs from the largest down; the first feasible one is the largest.
  const double need = 0.8 * total;
  double kept = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double cutoff = sorted[i];
    while (i < sorted.size() && sorted[i] == cutoff) kept += sorted[i++];
    if (need <= kept) return cutoff;
  }
  return sorted.back();
}

std::vector<std::size_t> retained_components(std::span<const double> variances, double alpha) {
  const double top = variances.empty() ? 0.0 : *std::max_element(variances.begin(), variances.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < variances.size(); ++j) {
    if (variances[j] >= alpha && variances[j] >= 1e-12 * top && variances[j] > 0.0) out.push_back(j);
  }
  return out;
}

Eigen::VectorXd outlier_scores(const DetectionModel& model) {
  if (model.retained.empty()) throw DegenerateComponent("detector retains no components");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(model.scores.rows());
  for (const std::size_t j : model.retained) {
    const auto col = static_cast<Eigen::Index>(j);
    if (col >= model.scores.cols() || col >= model.variances.size()) {
      throw InvalidData("retained component index out of range");
    }
    const double lambda = model.variances(col);
    if (!(lambda > 0.0)) {
      throw DegenerateComponent("retained component " + std::to_string(j) + " has zero variance", j);
    }
    s += model.scores.col(col).array().square().matrix() / lambda;
  }
  return s;
}

std::vector<int> classify(const Eigen::VectorXd& scores, double threshold) {
  std::vector<int> flags(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) flags[static_cast<std::size_t>(i)] = scores(i) > threshold ? 1 : 0;
  return flags;
}

PRCurve pr_auc(const Eigen::VectorXd& scores, std::span<const int> labels) {
  if (static_cast<std::size_t>(scores.size()) != labels.size()) {
    throw InvalidData("scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (const int l : labels) {
    if (l != 0 && l != 1) throw InvalidData("labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  if (positives == 0) throw InvalidData("precision-recall needs at least one positive label");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });

  PRCurve curve;
  std::size_t tp = 0;
  std::size_t flagged = 0;
  double prev_recall = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double cutoff = scores(static_cast<Eigen::Index>(order[i]));
    // Equal scores form a single threshold step.
    while (i < order.size() && scores(static_cast<Eigen::Index>(order[i])) == cutoff) {
      tp += static_cast<std::size_t>(labels[order[i]]);
      ++flagged;
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(flagged);
    curve.auc += (recall - prev_recall) * precision;
    prev_recall = recall;
    curve.points.push_back({cutoff, recall, precision});
  }
  std::reverse(curve.points.begin(), curve.points.end());
  return curve;
}

Eigen::VectorXd column_variances(const Eigen::MatrixXd& scores) {
  const auto n = static_cast<double>(scores.rows());
  const Eigen::RowVectorXd mean = scores.colwise().mean();
  return ((scores.rowwise() - mean).colwise().squaredNorm() / n).transpose();
}

DetectionModel build_detector(const Eigen::MatrixXd& scores) {
  if (scores.rows() < 1 || scores.cols() < 1) throw InvalidData("empty score matrix");
  DetectionModel model;
  model.scores = scores;
  model.variances = column_variances(scores);
  const std::span<const double> vars(model.variances.data(),
                                     static_cast<std::size_t>(model.variances.size()));
  model.alpha = select_alpha(vars);
  model.retained = retained_components(vars, model.alpha);
  if (model.retained.empty()) throw DegenerateComponent("no component passes the variance cutoff");
  return model;
}

DetectionModel build_detector(const KpcaModel& model) {
  return build_detector(score_matrix(model));
}

DetectionModel build_detector(const EigenModel& model, const GramMatrix& k) {
  const Eigen::Index rank = effective_rank(model);
  if (rank == 0) throw DegenerateComponent("L2 model has no nonzero eigenvalue");
  EigenModel trimmed = model;
  trimmed.eigenvalues = model.eigenvalues.head(rank);
  trimmed.vectors = model.vectors.leftCols(rank);
  return build_detector(l2_scores(trimmed, k.entries()));
}

}  // namespace l1kpca
