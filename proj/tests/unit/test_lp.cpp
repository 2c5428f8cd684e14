#include <gtest/gtest.h>

#include "rpe/lp.hpp"

using namespace rpe;

TEST(Lp, SimpleMaximum) {
  // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3.
  LinearProgram lp;
  lp.c = {3, 2};
  lp.A_ub = {{1, 1}, {1, 3}, {1, 0}};
  lp.b_ub = {4, 6, 3};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpResult::Status::Optimal);
  EXPECT_NEAR(r.objective, 11, 1e-12);
  EXPECT_NEAR(r.x[0], 3, 1e-12);
  EXPECT_NEAR(r.x[1], 1, 1e-12);
}

TEST(Lp, Equalities) {
  LinearProgram lp;
  lp.c = {1, 0, -1};
  lp.A_eq = {{1, 1, 1}};
  lp.b_eq = {1};
  lp.A_ub = {{1, 0, 0}};
  lp.b_ub = {0.4};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpResult::Status::Optimal);
  EXPECT_NEAR(r.objective, 0.4, 1e-12);
}

TEST(Lp, InfeasibleAndUnbounded) {
  LinearProgram inf;
  inf.c = {1};
  inf.A_eq = {{1}};
  inf.b_eq = {-1};
  EXPECT_EQ(solve_lp(inf).status, LpResult::Status::Infeasible);
  LinearProgram unb;
  unb.c = {1, 1};
  unb.A_ub = {{1, -1}};
  unb.b_ub = {1};
  EXPECT_EQ(solve_lp(unb).status, LpResult::Status::Unbounded);
}

TEST(Lp, NegativeRightHandSide) {
  // x + y >= 2 written as -x - y <= -2; minimize x + 2y.
  LinearProgram lp;
  lp.c = {-1, -2};
  lp.A_ub = {{-1, -1}};
  lp.b_ub = {-2};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpResult::Status::Optimal);
  EXPECT_NEAR(r.objective, -2, 1e-12);
}

TEST(Lp, DegenerateCycleProne) {
  // Beale's example, which cycles under naive Dantzig pricing.
  LinearProgram lp;
  lp.c = {0.75, -150, 0.02, -6};
  lp.A_ub = {{0.25, -60, -0.04, 9}, {0.5, -90, -0.02, 3}, {0, 0, 1, 0}};
  lp.b_ub = {0, 0, 1};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpResult::Status::Optimal);
  EXPECT_NEAR(r.objective, 0.05, 1e-12);
}
