#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "invstat/qp.hpp"
#include "support.hpp"

namespace invstat {
namespace {

QpProblem scalar_problem() {
  // min q^2 with q >= 1.
  QpProblem pb;
  pb.R = Mat::Identity(1, 1);
  pb.A_eq = Mat(0, 1);
  pb.b_eq = Vec(0);
  pb.S = -Mat::Identity(1, 1);
  pb.v = Vec::Constant(1, -1.0);
  return pb;
}

TEST(Qp, LowerBoundBinds) {
  const QpSolution sol = solve_qp(scalar_problem());
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.q(0), 1.0, 1e-14);
  EXPECT_EQ(sol.active_set, std::vector<int>{0});
  EXPECT_NEAR(sol.objective, 1.0, 1e-14);
}

TEST(Qp, EqualitySplitsEvenly) {
  QpProblem pb;
  pb.R = Mat::Identity(3, 3);
  pb.A_eq = Mat::Ones(1, 3);
  pb.b_eq = Vec::Ones(1);
  pb.S = -Mat::Identity(3, 3);
  pb.v = Vec::Zero(3);
  const QpSolution sol = solve_qp(pb);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(sol.q(i), 1.0 / 3.0, 1e-14);
  EXPECT_TRUE(sol.active_set.empty());
}

TEST(Qp, WeightedSplitFollowsInverseWeights) {
  // min 2 q1^2 + q2^2 s.t. q1 + q2 = 3 -> q = (1, 2).
  QpProblem pb;
  pb.R = Vec((Vec(2) << 2.0, 1.0).finished()).asDiagonal();
  pb.A_eq = Mat::Ones(1, 2);
  pb.b_eq = Vec::Constant(1, 3.0);
  pb.S = Mat(0, 2);
  pb.v = Vec(0);
  const QpSolution sol = solve_qp(pb);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.q(0), 1.0, 1e-14);
  EXPECT_NEAR(sol.q(1), 2.0, 1e-14);
}

TEST(Qp, ContradictoryBoundsAreInfeasible) {
  QpProblem pb = scalar_problem();
  pb.S.resize(2, 1);
  pb.S << -1.0, 1.0;
  pb.v.resize(2);
  pb.v << -1.0, 0.5;
  EXPECT_EQ(solve_qp(pb).status, QpStatus::Infeasible);
}

TEST(Qp, InconsistentEqualitiesAreInfeasible) {
  QpProblem pb;
  pb.R = Mat::Identity(2, 2);
  pb.A_eq.resize(2, 2);
  pb.A_eq << 1, 1, 2, 2;
  pb.b_eq.resize(2);
  pb.b_eq << 1, 3;
  pb.S = Mat(0, 2);
  pb.v = Vec(0);
  EXPECT_EQ(solve_qp(pb).status, QpStatus::Infeasible);
}

TEST(Qp, RedundantEqualitiesAreTolerated) {
  QpProblem pb;
  pb.R = Mat::Identity(2, 2);
  pb.A_eq.resize(3, 2);
  pb.A_eq << 1, 1, 2, 2, -1, -1;
  pb.b_eq.resize(3);
  pb.b_eq << 1, 2, -1;
  pb.S = -Mat::Identity(2, 2);
  pb.v = Vec::Zero(2);
  const QpSolution sol = solve_qp(pb);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.q(0), 0.5, 1e-14);
  EXPECT_NEAR(sol.q(1), 0.5, 1e-14);
}

TEST(Qp, EqualitiesAndBoundsInfeasibleTogether) {
  // q1 + q2 = 1 with both q >= 1.
  QpProblem pb;
  pb.R = Mat::Identity(2, 2);
  pb.A_eq = Mat::Ones(1, 2);
  pb.b_eq = Vec::Ones(1);
  pb.S = -Mat::Identity(2, 2);
  pb.v = Vec::Constant(2, -1.0);
  EXPECT_EQ(solve_qp(pb).status, QpStatus::Infeasible);
}

TEST(Qp, DimensionErrors) {
  QpProblem pb = scalar_problem();
  pb.v = Vec::Zero(2);
  EXPECT_THROW(solve_qp(pb), Error);
  pb = scalar_problem();
  pb.R(0, 0) = -1.0;
  EXPECT_THROW(solve_qp(pb), Error);
}

TEST(Qp, MatchesEnumerationOracle) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const QpProblem pb = testing::random_box_qp(rng, trial % 3 == 0);
    const auto ref = testing::enumerate_active_sets(pb.R, pb.A_eq, pb.b_eq, pb.S, pb.v);
    ASSERT_TRUE(ref.feasible);
    const QpSolution sol = solve_qp(pb);
    ASSERT_EQ(sol.status, QpStatus::Optimal) << "trial " << trial;
    EXPECT_LE((sol.q - ref.q).lpNorm<Eigen::Infinity>(), 1e-5) << "trial " << trial;
    EXPECT_TRUE(sol.kkt.within(1e-8)) << "trial " << trial << " worst " << sol.kkt.worst();
  }
}

TEST(Qp, ConstraintOrderDoesNotChangeAnswer) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const QpProblem pb = testing::random_box_qp(rng, true);
    std::vector<int> perm(static_cast<std::size_t>(pb.S.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    QpProblem shuffled = pb;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.S.row(static_cast<Eigen::Index>(i)) = pb.S.row(perm[i]);
      shuffled.v(static_cast<Eigen::Index>(i)) = pb.v(perm[i]);
    }
    const QpSolution a = solve_qp(pb);
    const QpSolution b = solve_qp(shuffled);
    ASSERT_EQ(a.status, QpStatus::Optimal);
    ASSERT_EQ(b.status, QpStatus::Optimal);
    EXPECT_LE((a.q - b.q).lpNorm<Eigen::Infinity>(), 1e-7);
  }
}

TEST(Qp, WarmStartGivesSameAnswer) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const QpProblem pb = testing::random_box_qp(rng);
    const QpSolution cold = solve_qp(pb);
    ASSERT_EQ(cold.status, QpStatus::Optimal);
    const QpSolution warm = solve_qp(pb, cold.active_set);
    ASSERT_EQ(warm.status, QpStatus::Optimal);
    EXPECT_LE((cold.q - warm.q).lpNorm<Eigen::Infinity>(), 1e-10);
    // A wrong or out-of-range guess must not hurt either.
    const std::vector<int> junk{0, 1, 2, 3, 4, 5, 6, 7, 99, -3};
    const QpSolution odd = solve_qp(pb, junk);
    ASSERT_EQ(odd.status, QpStatus::Optimal);
    EXPECT_LE((cold.q - odd.q).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(Qp, NoFeasibleDescentAtOptimum) {
  // Finite differences: moving along the equality nullspace in directions
  // that keep the active bounds satisfied never lowers the objective.
  std::mt19937 rng(19);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const QpProblem pb = testing::random_box_qp(rng, true);
    const QpSolution sol = solve_qp(pb);
    ASSERT_EQ(sol.status, QpStatus::Optimal);
    const Mat Z = pb.A_eq.fullPivLu().kernel();
    if (Z.cols() == 0 || (Z.cols() == 1 && Z.norm() == 0.0)) continue;
    for (int k = 0; k < 20; ++k) {
      Vec dir = Z * Vec::NullaryExpr(Z.cols(), [&] { return nd(rng); });
      const double h = 1e-6;
      const Vec moved = sol.q + h * dir;
      if ((pb.S * moved - pb.v).maxCoeff() > 1e-12) continue;
      const double f0 = sol.q.dot(pb.R * sol.q);
      const double f1 = moved.dot(pb.R * moved);
      EXPECT_GE(f1 - f0, -1e-10 * std::max(1.0, f0)) << "trial " << trial;
    }
  }
}

TEST(Qp, KktResidualsFlagBadPoints) {
  QpProblem pb;
  pb.R = Mat::Identity(3, 3);
  pb.A_eq = Mat::Ones(1, 3);
  pb.b_eq = Vec::Ones(1);
  pb.S = -Mat::Identity(3, 3);
  pb.v = Vec::Zero(3);
  Vec q(3);
  q << 1.0, 0.0, 0.0;  // feasible but not optimal
  EXPECT_GT(kkt_residuals(pb, q).stationarity, 0.1);
  q << 0.5, 0.5, 0.5;  // optimal direction but violates the equality
  EXPECT_NEAR(kkt_residuals(pb, q).primal_eq, 0.5, 1e-15);
  q << -0.1, 0.55, 0.55;
  EXPECT_NEAR(kkt_residuals(pb, q).primal_ineq, 0.1, 1e-15);
}

TEST(Qp, DegenerateVertexSolves) {
  // Three bounds meet at the optimum with one equality: more active rows
  // than free directions.
  QpProblem pb;
  pb.R = Mat::Identity(2, 2);
  pb.A_eq = Mat::Ones(1, 2);
  pb.b_eq = Vec::Constant(1, 2.0);
  pb.S.resize(3, 2);
  pb.S << -1, 0, 0, -1, -1, -1;
  pb.v.resize(3);
  pb.v << -1, -1, -2;
  const QpSolution sol = solve_qp(pb);
  ASSERT_EQ(sol.status, QpStatus::Optimal);
  EXPECT_NEAR(sol.q(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.q(1), 1.0, 1e-12);
}

}  // namespace
}  // namespace invstat
