#include <cmath>

#include "gtest/gtest.h"
#include "l1kpca/detect.hpp"
#include "l1kpca/error.hpp"
#include "test_util.hpp"

namespace l1kpca {
namespace {

double alpha_of(std::vector<double> v) { return select_alpha(v); }

TEST(SelectAlpha, Examples) {
  EXPECT_DOUBLE_EQ(alpha_of({1}), 1.0);
  EXPECT_DOUBLE_EQ(alpha_of({5, 3, 1, 1}), 3.0);
  EXPECT_DOUBLE_EQ(alpha_of({4, 4, 2}), 4.0);
  EXPECT_DOUBLE_EQ(alpha_of({1, 3, 1, 5}), 3.0);
  EXPECT_THROW(alpha_of({0, 0}), DegenerateComponent);
  EXPECT_THROW(alpha_of({}), DegenerateComponent);
}

TEST(SelectAlpha, RetainedShareIsAtLeastEightyPercent) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Eigen::MatrixXd r = testing::random_matrix(1, 6, seed).cwiseAbs();
    const std::vector<double> v(r.data(), r.data() + 6);
    const double alpha = select_alpha(v);
    double kept = 0.0, total = 0.0, kept_strict = 0.0;
    double next_up = std::numeric_limits<double>::infinity();
    for (const double x : v) {
      total += x;
      if (x >= alpha) kept += x;
      if (x > alpha) next_up = std::min(next_up, x);
    }
    for (const double x : v) if (x >= next_up) kept_strict += x;
    EXPECT_GE(kept, 0.8 * total);
    // No larger cutoff is feasible.
    if (std::isfinite(next_up)) EXPECT_LT(kept_strict, 0.8 * total);
  }
}

TEST(OutlierScores, Examples) {
  DetectionModel m;
  m.scores.resize(2, 2);
  m.scores << 1, 2, 3, 4;
  m.variances = Eigen::Vector2d(1, 2);
  m.retained = {0, 1};
  const Eigen::VectorXd s = outlier_scores(m);
  EXPECT_DOUBLE_EQ(s(0), 3.0);
  EXPECT_DOUBLE_EQ(s(1), 17.0);
  EXPECT_EQ(classify(s, 10.0), (std::vector<int>{0, 1}));
  EXPECT_EQ(classify(s, -1.0), (std::vector<int>{1, 1}));
  EXPECT_EQ(classify(s, 17.0), (std::vector<int>{0, 0}));

  DetectionModel one;
  one.scores.resize(2, 1);
  one.scores << std::sqrt(4.0), 0.0;
  one.variances = Eigen::VectorXd::Constant(1, 4.0);
  one.retained = {0};
  const Eigen::VectorXd s1 = outlier_scores(one);
  EXPECT_DOUBLE_EQ(s1(0), 1.0);
  EXPECT_DOUBLE_EQ(s1(1), 0.0);

  one.variances(0) = 0.0;
  EXPECT_THROW(outlier_scores(one), DegenerateComponent);
}

TEST(PrAuc, Examples) {
  const std::vector<int> labels{1, 0, 1, 0};
  const PRCurve c = pr_auc(Eigen::Vector4d(0.9, 0.8, 0.7, 0.6), labels);
  EXPECT_NEAR(c.auc, 0.5 * (1.0 + 2.0 / 3.0), 1e-15);
  EXPECT_NEAR(c.auc, 0.8333, 1e-4);
  ASSERT_EQ(c.points.size(), 4u);
  EXPECT_DOUBLE_EQ(c.points.front().cutoff, 0.6);
  EXPECT_DOUBLE_EQ(c.points.back().cutoff, 0.9);

  const PRCurve sep = pr_auc(Eigen::Vector4d(0.1, 0.9, 0.2, 0.8), std::vector<int>{0, 1, 0, 1});
  EXPECT_EQ(sep.auc, 1.0);

  const PRCurve flat = pr_auc(Eigen::Vector4d(1, 1, 1, 1), std::vector<int>{0, 1, 0, 0});
  EXPECT_DOUBLE_EQ(flat.auc, 0.25);
  EXPECT_EQ(flat.points.size(), 1u);

  EXPECT_THROW(pr_auc(Eigen::Vector2d(1, 2), std::vector<int>{0, 0}), InvalidData);
  EXPECT_THROW(pr_auc(Eigen::Vector2d(1, 2), std::vector<int>{0}), InvalidData);
}

// Independent average precision: sum over positives of precision at that
// positive's rank, computed with ties resolved pessimistically in groups.
double reference_ap(const Eigen::VectorXd& s, const std::vector<int>& labels) {
  double ap = 0.0;
  int positives = 0;
  for (const int l : labels) positives += l;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!labels[static_cast<std::size_t>(i)]) continue;
    int flagged = 0, tp = 0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (s(j) >= s(i)) {
        ++flagged;
        tp += labels[static_cast<std::size_t>(j)];
      }
    }
    ap += static_cast<double>(tp) / flagged;
  }
  return ap / positives;
}

TEST(PrAuc, MatchesReferenceAndStaysInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Eigen::VectorXd s = testing::random_matrix(25, 1, seed).col(0);
    // Quantize to force ties.
    s = (s * 2).array().round().matrix();
    std::vector<int> labels(25);
    const SignVector bits = testing::random_signs(25, seed + 7);
    for (std::size_t i = 0; i < 25; ++i) labels[i] = bits[i] > 0;
    labels[0] = 1;
    const PRCurve c = pr_auc(s, labels);
    EXPECT_NEAR(c.auc, reference_ap(s, labels), 1e-12);
    EXPECT_GE(c.auc, 0.0);
    EXPECT_LE(c.auc, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_LT(c.points[i - 1].cutoff, c.points[i].cutoff);
      EXPECT_GE(c.points[i - 1].recall, c.points[i].recall);
    }
  }
}

TEST(BuildDetector, SeparableSyntheticCase) {
  // Normals near the origin, outliers far out on the first axis.
  Eigen::MatrixXd scores = 0.1 * testing::random_matrix(40, 3, 11);
  std::vector<int> labels(40, 0);
  for (Eigen::Index i = 0; i < 4; ++i) {
    scores(i * 10, 0) += 10.0 + static_cast<double>(i);
    labels[static_cast<std::size_t>(i * 10)] = 1;
  }
  const DetectionModel m = build_detector(scores);
  EXPECT_FALSE(m.retained.empty());
  EXPECT_EQ(pr_auc(outlier_scores(m), labels).auc, 1.0);
  const Eigen::VectorXd v = column_variances(scores);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double mean = scores.col(j).mean();
    EXPECT_NEAR(v(j), (scores.col(j).array() - mean).square().sum() / 40.0, 1e-14);
  }
}

TEST(BuildDetector, L2DropsNullComponents) {
  const Dataset d = standardize(testing::random_matrix(10, 2, 3));
  const GramMatrix k = gram(KernelSpec::linear(), d);
  const EigenModel m = l2_fit(k, 4);
  const DetectionModel det = build_detector(m, k);
  EXPECT_EQ(det.scores.cols(), 2);
}

}  // namespace
}  // namespace l1kpca
