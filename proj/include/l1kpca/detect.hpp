#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "l1kpca/l1.hpp"
#include "l1kpca/l2.hpp"

namespace l1kpca {

/// Outlier detector in the scaled principal-score space.
///
/// A sample is an outlier when sum_{j retained} Y_ij^2 / lambda_j exceeds the
/// threshold, with `retained` = { j : lambda_j >= alpha }.
struct DetectionModel {
  Eigen::MatrixXd scores;       // n x p
  Eigen::VectorXd variances;    // lambda_j, population variance of column j
  double alpha = 0.0;
  std::vector<std::size_t> retained;
  std::optional<double> threshold;
};

struct PRPoint {
  double cutoff;  // samples with score >= cutoff are flagged
  double recall;
  double precision;
};

struct PRCurve {
  std::vector<PRPoint> points;  // ascending cutoff, so recall never increases
  double auc = 0.0;             // average precision
};

/// Largest alpha among the variances such that the variances >= alpha hold at
/// least 80% of the total.
double select_alpha(std::span<const double> variances);

/// Indices j with lambda_j >= alpha and lambda_j >= 1e-12 * max lambda.
std::vector<std::size_t> retained_components(std::span<const double> variances, double alpha);

Eigen::VectorXd outlier_scores(const DetectionModel& model);

/// 1 where score > threshold.
std::vector<int> classify(const Eigen::VectorXd& scores, double threshold);

/// Precision-recall sweep over distinct score values; AUC as average precision.
PRCurve pr_auc(const Eigen::VectorXd& scores, std::span<const int> labels);

/// Builds a detector from an arbitrary n x p score matrix.
DetectionModel build_detector(const Eigen::MatrixXd& scores);

/// Detector on the training scores of an L1 model.
DetectionModel build_detector(const KpcaModel& model);

/// Detector on the training scores of an L2 model; components whose
/// eigenvalue is numerically zero are dropped first.
DetectionModel build_detector(const EigenModel& model, const GramMatrix& k);

/// Population variance (divisor n) of every column.
Eigen::VectorXd column_variances(const Eigen::MatrixXd& scores);

}  // namespace l1kpca
