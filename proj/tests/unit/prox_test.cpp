#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "vrcg/errors.hpp"
#include "vrcg/prox.hpp"

namespace vrcg {
namespace {

using testing::random_feasible;

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

TEST(FeasibleSet, RejectsNonPositiveTau) {
  EXPECT_THROW(FeasibleSet::nuclear_ball(0.0), DomainError);
  EXPECT_THROW(FeasibleSet::trace_psd_cone(-1.0), DomainError);
}

TEST(ProxQuery, RejectsNonPositiveScale) {
  EXPECT_THROW(ProxQuery(Matrix::Zero(2, 2), 0.0, FeasibleSet::nuclear_ball(1.0)), DomainError);
}

TEST(PsiValue, ZeroAtFeasibleCenter) {
  const ProxQuery q(diag2(0.5, 0.25), 1.0, FeasibleSet::nuclear_ball(1.0));
  EXPECT_EQ(psi_value(q.center, q), 0.0);
}

TEST(PsiValue, InfiniteOffTheSet) {
  const ProxQuery q(diag2(0.5, 0.25), 1.0, FeasibleSet::nuclear_ball(1.0));
  EXPECT_TRUE(std::isinf(psi_value(diag2(2.0, 0.0), q)));
}

TEST(PsiValue, MatchesElementwiseEvaluation) {
  Rng rng(21);
  const FeasibleSet set = FeasibleSet::nuclear_ball(2.0);
  const ProxQuery q(rng.normal_matrix(4, 3), 0.7, set);
  for (int i = 0; i < 20; ++i) {
    const Matrix v = random_feasible(set, 4, 3, 2, rng);
    double ref = 0.0;
    for (Index r = 0; r < 4; ++r)
      for (Index c = 0; c < 3; ++c) ref += (v(r, c) - q.center(r, c)) * (v(r, c) - q.center(r, c));
    EXPECT_NEAR(psi_value(v, q), ref, 1e-12);
  }
}

TEST(PsiValue, ShapeMismatchThrows) {
  const ProxQuery q(Matrix::Zero(2, 2), 1.0, FeasibleSet::nuclear_ball(1.0));
  EXPECT_THROW(psi_value(Matrix::Zero(3, 2), q), DimensionError);
}

TEST(ExactProx, InteriorCenterUnchanged) {
  const ProxQuery q(diag2(3, 1), 1.0, FeasibleSet::nuclear_ball(4.0));
  EXPECT_LT((exact_prox(q) - diag2(3, 1)).norm(), 1e-12);
}

TEST(ExactProx, NuclearBallShrinksSpectrum) {
  const ProxQuery q(diag2(3, 1), 1.0, FeasibleSet::nuclear_ball(2.0));
  EXPECT_LT((exact_prox(q) - diag2(2, 0)).norm(), 1e-12);
}

TEST(ExactProx, PsdConeClipsThenProjects) {
  const ProxQuery q(diag2(3, -1), 1.0, FeasibleSet::trace_psd_cone(2.0));
  EXPECT_LT((exact_prox(q) - diag2(2, 0)).norm(), 1e-12);
}

TEST(ExactProx, BeatsRandomFeasiblePoints) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const bool psd = trial % 2 == 1;
    const FeasibleSet set = psd ? FeasibleSet::trace_psd_cone(1.5) : FeasibleSet::nuclear_ball(1.5);
    const Index n = 5;
    const ProxQuery q(3.0 * rng.normal_matrix(n, n), 0.5, set);
    const Matrix x = exact_prox(q);
    ASSERT_TRUE(set.contains(x));
    const double best = psi_value(x, q);
    for (int i = 0; i < 200; ++i)
      EXPECT_LE(best, psi_value(random_feasible(set, n, n, 3, rng), q) + 1e-12);
  }
}

TEST(ExactProx, Idempotent) {
  Rng rng(23);
  for (const FeasibleSet set : {FeasibleSet::nuclear_ball(1.0), FeasibleSet::trace_psd_cone(1.0)}) {
    const Matrix once = exact_prox(ProxQuery(4.0 * rng.normal_matrix(6, 6), 1.0, set));
    const Matrix twice = exact_prox(ProxQuery(once, 1.0, set));
    EXPECT_LT((once - twice).norm(), 1e-8);
  }
}

TEST(WeakProx, FeasibleLowRankCenterReturnedUnchanged) {
  Rng rng(24);
  const FeasibleSet set = FeasibleSet::nuclear_ball(3.0);
  const Matrix c = random_feasible(set, 6, 5, 2, rng);
  WeakProxConfig cfg;
  cfg.target_rank = 2;
  const WeakProxResult out = weak_prox(ProxQuery(c, 1.0, set), cfg, 5);
  EXPECT_LT((out.point - c).norm(), 1e-8);
}

TEST(WeakProx, RankOneExample) {
  WeakProxConfig cfg;
  cfg.target_rank = 1;
  const WeakProxResult out =
      weak_prox(ProxQuery(diag2(3, 1), 1.0, FeasibleSet::nuclear_ball(2.0)), cfg, 1);
  EXPECT_LT((out.point - diag2(2, 0)).norm(), 1e-10);
}

TEST(WeakProx, GuaranteeAgainstRandomRankTwoComparators) {
  Rng rng(25);
  const FeasibleSet set = FeasibleSet::nuclear_ball(1.0);
  const ProxQuery q(rng.normal_matrix(6, 6), 1.0, set);
  WeakProxConfig cfg;
  cfg.target_rank = 2;
  const Matrix v = weak_prox(q, cfg, 9).point;
  ASSERT_TRUE(set.contains(v));
  for (int i = 0; i < 500; ++i) {
    const Matrix z = random_feasible(set, 6, 6, 2, rng);
    EXPECT_TRUE(check_weak_guarantee(v, z, q, 1e-9));
  }
}

TEST(WeakProx, RejectsRankAboveDimension) {
  WeakProxConfig cfg;
  cfg.target_rank = 3;
  EXPECT_THROW(weak_prox(ProxQuery(diag2(1, 1), 1.0, FeasibleSet::nuclear_ball(1.0)), cfg, 1),
               DomainError);
}

TEST(WeakProx, Idempotent) {
  Rng rng(26);
  WeakProxConfig cfg;
  cfg.target_rank = 2;
  for (const FeasibleSet set : {FeasibleSet::nuclear_ball(1.0), FeasibleSet::trace_psd_cone(1.0)}) {
    const Matrix once = weak_prox(ProxQuery(rng.normal_matrix(7, 7), 1.0, set), cfg, 3).point;
    const Matrix twice = weak_prox(ProxQuery(once, 1.0, set), cfg, 4).point;
    EXPECT_LT((once - twice).norm(), 1e-8);
  }
}

TEST(CheckWeakGuarantee, ReflexiveAndExactIsOptimal) {
  Rng rng(27);
  const FeasibleSet set = FeasibleSet::trace_psd_cone(1.0);
  const ProxQuery q(symmetric_part(rng.normal_matrix(5, 5)), 1.0, set);
  const Matrix z = random_feasible(set, 5, 5, 3, rng);
  EXPECT_TRUE(check_weak_guarantee(z, z, q, 0.0));
  EXPECT_TRUE(check_weak_guarantee(exact_prox(q), z, q, 0.0));
}

TEST(CheckWeakGuarantee, WeakOutputVsBestRankRPoint) {
  Rng rng(28);
  const FeasibleSet set = FeasibleSet::nuclear_ball(5.0);
  const ProxQuery q(3.0 * rng.normal_matrix(5, 5), 1.0, set);
  WeakProxConfig cfg;
  cfg.target_rank = 2;
  const Matrix v = weak_prox(q, cfg, 1).point;
  const Matrix exact = exact_prox(q);
  // The exact prox has higher rank here, so it may beat the weak output.
  EXPECT_LE(psi_value(exact, q), psi_value(v, q) + 1e-12);
  // Best rank-2 feasible point: rank-2 truncation of the center, projected.
  const TruncatedSvd full = full_svd(q.center);
  const Vector s = simplex_projection(full.values.head(2), set.tau());
  const Matrix best = full.left.leftCols(2) * s.asDiagonal() * full.right.leftCols(2).transpose();
  EXPECT_TRUE(check_weak_guarantee(v, best, q, 1e-9));
}

}  // namespace
}  // namespace vrcg
