#include <cmath>

#include "gtest/gtest.h"
#include "l1kpca/error.hpp"
#include "l1kpca/l1.hpp"
#include "test_util.hpp"

namespace l1kpca {
namespace {

using testing::make_gram;

SignVector signs(std::initializer_list<int> v) {
  std::vector<std::int8_t> e;
  for (const int x : v) e.push_back(static_cast<std::int8_t>(x));
  return SignVector(e);
}

GramMatrix two_point() { return make_gram({{1, 1}, {1, 2}}); }

TEST(SignVector, RejectsNonSigns) {
  EXPECT_THROW(SignVector({1, 0, -1}), InvalidData);
  EXPECT_THROW(SignVector({2}), InvalidData);
  EXPECT_EQ(SignVector::from_signs(Eigen::Vector3d(0.0, -2.0, 3.0)), signs({1, -1, 1}));
}

TEST(SignUpdate, IdentityKernelKeepsSigns) {
  const GramMatrix k(Eigen::MatrixXd::Identity(3, 3), KernelSpec::linear());
  EXPECT_EQ(sign_update(k, signs({1, -1, 1}), 1e-12), signs({1, -1, 1}));
}

TEST(SignUpdate, ZeroEntryKeepsPreviousSign) {
  // Kc = [0, -1]
  EXPECT_EQ(sign_update(two_point(), signs({1, -1}), 1e-12), signs({1, -1}));
  // Kc = [2, 3]
  EXPECT_EQ(sign_update(two_point(), signs({1, 1}), 1e-12), signs({1, 1}));
}

TEST(FitComponent, IdentityTerminatesAfterOneUpdate) {
  const GramMatrix k(Eigen::MatrixXd::Identity(3, 3), KernelSpec::linear());
  const auto c0 = signs({1, -1, -1});
  const ComponentModel m = fit_component(k, c0);
  EXPECT_EQ(m.report.iterations, 1u);
  EXPECT_EQ(m.sign_vector, c0);
  EXPECT_DOUBLE_EQ(m.objective, 3.0);
  EXPECT_EQ(m.report.terminated_by, Termination::kSignFixed);
}

TEST(FitComponent, TwoPointGlobalOptimum) {
  const auto bf = testing::brute_force(two_point().entries());
  std::vector<double> all = bf.all;
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<double>{1, 1, 5, 5}));

  const ComponentModel m = fit_component(two_point(), signs({1, 1}));
  EXPECT_EQ(m.sign_vector, signs({1, 1}));
  EXPECT_DOUBLE_EQ(m.objective, 5.0);
  EXPECT_DOUBLE_EQ(m.objective, bf.best);
  // lambda* = 1 / (2 |x*|), |x*| = sqrt(5) / 5
  EXPECT_NEAR(m.report.lagrange_multiplier, std::sqrt(5.0) / 2.0, 1e-14);
}

TEST(FitComponent, TwoPointDegenerateFixedPoint) {
  const ComponentModel m = fit_component(two_point(), signs({1, -1}));
  EXPECT_EQ(m.sign_vector, signs({1, -1}));
  EXPECT_DOUBLE_EQ(m.objective, 1.0);
  EXPECT_GT(m.report.zero_band_hits, 0u);
}

TEST(FitComponent, ZeroKernelIsDegenerate) {
  const GramMatrix k(Eigen::MatrixXd::Zero(3, 3), KernelSpec::linear());
  EXPECT_THROW(fit_component(k, SignVector::ones(3)), DegenerateComponent);
}

TEST(FitComponent, MaxIterRaisesWithReport) {
  const Dataset d = standardize(testing::random_matrix(30, 3, 5));
  const GramMatrix k = gram(KernelSpec::linear(), d);
  // Find a start that needs more than one update.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SignVector c0 = testing::random_signs(30, seed);
    if (fit_component(k, c0).report.iterations < 2) continue;
    SolverOptions opts;
    opts.max_iter = 1;
    try {
      fit_component(k, c0, opts);
      FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
      EXPECT_EQ(e.report().iterations, 1u);
      EXPECT_EQ(e.report().terminated_by, Termination::kMaxIter);
      EXPECT_EQ(e.report().norm_trace.size(), 1u);
    }
    return;
  }
  FAIL() << "no multi-step instance found";
}

TEST(FitComponent, DimensionMismatch) {
  EXPECT_THROW(fit_component(two_point(), SignVector::ones(3)), InvalidData);
}

TEST(FitComponent, TraceInvariantsOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto spec = seed % 2 ? KernelSpec::gaussian(2.0) : KernelSpec::linear();
    const Dataset d = standardize(testing::random_matrix(20 + static_cast<Eigen::Index>(seed), 4, seed));
    const GramMatrix k = gram(spec, d);
    const ComponentModel m = fit_component(k, testing::random_signs(static_cast<std::size_t>(k.size()), seed + 100));
    const auto& tr = m.report.norm_trace;
    ASSERT_EQ(tr.size(), m.report.iterations);
    for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LE(tr[i], tr[i - 1] + 1e-12);
    for (const double r : m.report.rate_estimates) EXPECT_LE(r, 1.0 + 1e-12);
    EXPECT_LE(m.report.iterations, 100u);
    EXPECT_TRUE(testing::is_fixed_point(k.entries(), m.sign_vector, SolverOptions{}.resolved_tol_zero(k)));
    // train_scores = Kc / sqrt(c'Kc)
    const Eigen::VectorXd expected = k.entries() * m.sign_vector.to_vector() / std::sqrt(m.objective);
    EXPECT_LE((m.train_scores - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Fit, TwoPointMultiStartFindsOptimum) {
  for (std::uint64_t seed : {0u, 1u, 7u}) {
    SolverOptions opts;
    opts.starts = 4;
    opts.seed = seed;
    const KpcaModel m = fit(two_point(), 1, opts);
    EXPECT_DOUBLE_EQ(m.components[0].objective, 5.0);
  }
}

TEST(Fit, IdentityAllComponents) {
  for (const Eigen::Index n : {2, 4}) {
    const GramMatrix k(Eigen::MatrixXd::Identity(n, n), KernelSpec::linear());
    SolverOptions opts;
    // Only 4 of 16 sign vectors are optimal on the second deflated I_4.
    opts.starts = 64;
    const KpcaModel m = fit(k, static_cast<std::size_t>(n), opts);
    ASSERT_EQ(m.num_components(), static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < m.components.size(); ++j) {
      EXPECT_NEAR(m.components[j].objective, static_cast<double>(n), 1e-12) << "n=" << n << " j=" << j;
      if (j + 1 < m.components.size()) {
        const Eigen::VectorXd c = m.components[j].sign_vector.to_vector();
        EXPECT_LE(std::abs(c.dot(m.kernel_chain[j + 1].entries() * c)), 1e-9 * m.components[j].objective);
      }
    }
  }
  // n = 2: first deflation is I - (1/2) 11'.
  const GramMatrix k2(Eigen::MatrixXd::Identity(2, 2), KernelSpec::linear());
  const KpcaModel m2 = fit(k2, 2);
  Eigen::Matrix2d expected;
  expected << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LE((m2.kernel_chain[1].entries() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Fit, TwoComponentsOnLinearGram) {
  const Dataset d = standardize(testing::random_matrix(8, 3, 42));
  const GramMatrix k = gram(KernelSpec::linear(), d);
  const KpcaModel m = fit(k, 2);
  ASSERT_EQ(m.kernel_chain.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    const GramMatrix& kj = m.kernel_chain[j];
    EXPECT_TRUE(testing::is_fixed_point(kj.entries(), m.components[j].sign_vector,
                                        SolverOptions{}.resolved_tol_zero(k)));
  }
  const Eigen::VectorXd c0 = m.components[0].sign_vector.to_vector();
  EXPECT_LE(c0.dot(m.kernel_chain[1].entries() * c0), 1e-9 * m.components[0].objective);
}

TEST(Fit, ResultIndependentOfThreadCount) {
  const Dataset d = standardize(testing::random_matrix(50, 5, 3));
  const GramMatrix k = gram(KernelSpec::gaussian(3.0), d);
  SolverOptions a;
  a.threads = 1;
  a.seed = 9;
  SolverOptions b = a;
  b.threads = 4;
  const KpcaModel ma = fit(k, 3, a);
  const KpcaModel mb = fit(k, 3, b);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(ma.components[j].sign_vector, mb.components[j].sign_vector);
    EXPECT_EQ(ma.components[j].objective, mb.components[j].objective);
  }
}

TEST(Fit, ComponentCountValidated) {
  EXPECT_THROW(fit(two_point(), 0), InvalidData);
  EXPECT_THROW(fit(two_point(), 3), InvalidData);
}

TEST(Fit, ExhaustedKernelRaisesWithComponentIndex) {
  // Rank-1 kernel: the second component has nothing left.
  Eigen::VectorXd a(4);
  a << 1, -2, 0.5, 3;
  const GramMatrix k(a * a.transpose(), KernelSpec::linear());
  try {
    fit(k, 2);
    FAIL() << "expected DegenerateComponent";
  } catch (const DegenerateComponent& e) {
    ASSERT_TRUE(e.component().has_value());
    EXPECT_EQ(*e.component(), 1u);
  }
  const KpcaModel m = fit_up_to(k, 3);
  EXPECT_EQ(m.num_components(), 1u);
}

TEST(Deflate, AnnihilatesDirection) {
  const GramMatrix k(Eigen::MatrixXd::Identity(2, 2), KernelSpec::linear());
  const GramMatrix kd = deflate(k, signs({1, 1}));
  Eigen::Matrix2d expected;
  expected << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LE((kd.entries() - expected).cwiseAbs().maxCoeff(), 1e-15);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = standardize(testing::random_matrix(6, 4, seed));
    const GramMatrix g = gram(KernelSpec::gaussian(1.0), d);
    const SignVector c = testing::random_signs(6, seed + 1);
    const double s = testing::naive_quadratic(g.entries(), c);
    const GramMatrix gd = deflate(g, c);
    EXPECT_LE(std::abs(testing::naive_quadratic(gd.entries(), c)), 1e-9 * s);
    EXPECT_GE(testing::min_eigenvalue(gd.entries()), -1e-8 * g.max_abs());
  }
  EXPECT_THROW(deflate(two_point(), signs({1, -1}), 1.5), DegenerateComponent);
}

TEST(TrainScores, Examples) {
  const GramMatrix k(Eigen::MatrixXd::Identity(2, 2), KernelSpec::linear());
  const Eigen::VectorXd t = train_scores(k, signs({1, 1}));
  EXPECT_NEAR(t(0), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(t(1), 1 / std::sqrt(2.0), 1e-15);

  const Eigen::VectorXd t2 = train_scores(two_point(), signs({1, 1}));
  EXPECT_NEAR(t2(0), 2 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(t2(1), 3 / std::sqrt(5.0), 1e-15);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GramMatrix g = gram(KernelSpec::linear(), standardize(testing::random_matrix(9, 3, seed)));
    const SignVector c = testing::random_signs(9, seed + 50);
    const double s = testing::naive_quadratic(g.entries(), c);
    if (s < 1e-6) continue;
    const Eigen::VectorXd ts = train_scores(g, c);
    EXPECT_NEAR(ts.dot(c.to_vector()), std::sqrt(s), 1e-12 * std::max(1.0, s));
  }
}

TEST(Transform, SelfConsistency) {
  const Eigen::MatrixXd raw = testing::random_matrix(15, 4, 8);
  auto train = std::make_shared<const Dataset>(standardize(raw));
  for (const auto& spec : {KernelSpec::linear(), KernelSpec::gaussian(2.0)}) {
    const GramMatrix k = gram(spec, *train);
    const KpcaModel m = fit(k, 3, {}, train);
    const Eigen::MatrixXd scores = transform(m, *train);
    EXPECT_LE((scores - score_matrix(m)).cwiseAbs().maxCoeff(), 1e-9) << spec.describe();

    // A single training row scores as its train score.
    const Dataset one = standardize_like(*train, raw.row(4));
    const Eigen::MatrixXd s1 = transform(m, one);
    EXPECT_LE((s1.row(0) - score_matrix(m).row(4)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Transform, MatchesExplicitLinearProjection) {
  const Eigen::MatrixXd raw = testing::random_matrix(12, 4, 15);
  auto train = std::make_shared<const Dataset>(standardize(raw));
  const KpcaModel m = fit(gram(KernelSpec::linear(), *train), 2, {}, train);
  const Dataset query = standardize_like(*train, testing::random_matrix(3, 4, 16));
  const Eigen::MatrixXd chain = transform(m, query);
  const Eigen::MatrixXd loadings = testing::explicit_linear_loadings(train->values, m);
  const Eigen::MatrixXd explicit_scores = query.values * loadings;
  EXPECT_LE((chain - explicit_scores).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(transform(m, standardize(testing::random_matrix(3, 5, 1))), InvalidData);
}

TEST(Loadings, OrthonormalInLinearCase) {
  const Dataset d = standardize(testing::random_matrix(30, 6, 77));
  const KpcaModel m = fit(gram(KernelSpec::linear(), d), 5);
  const Eigen::MatrixXd u = testing::explicit_linear_loadings(d.values, m);
  const Eigen::MatrixXd gram_u = u.transpose() * u;
  EXPECT_LE((gram_u - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LinearEquivalence, KernelAndInputSpaceSequencesAgree) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = standardize(testing::random_matrix(25, 3, 300 + seed));
    const GramMatrix k = gram(KernelSpec::linear(), d);
    const double tol = SolverOptions{}.resolved_tol_zero(k);
    SignVector c = testing::random_signs(25, seed);
    std::vector<SignVector> kernel_seq{c};
    for (int step = 0; step < 100; ++step) {
      SignVector next = sign_update(k, c, tol);
      if (next == c) break;
      kernel_seq.push_back(next);
      c = next;
    }
    EXPECT_EQ(kernel_seq, testing::input_space_sequence(d.values, kernel_seq.front(), tol, 100));
  }
}

}  // namespace
}  // namespace l1kpca
