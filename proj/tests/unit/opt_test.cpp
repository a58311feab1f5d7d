#include <gtest/gtest.h>

#include <random>

#include "restore/opt/model.hpp"

using namespace restore::opt;

TEST(Simplex, SmallMaximisation) {
  // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3
  Model m;
  int x = m.add_variable(0, 3, -3);
  int y = m.add_variable(0, kInfinity, -2);
  m.add_row({{x, 1}, {y, 1}}, RowSense::LessEqual, 4);
  m.add_row({{x, 1}, {y, 3}}, RowSense::LessEqual, 6);
  Solution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -11.0, 1e-9);
  EXPECT_NEAR(s.values[x], 3.0, 1e-9);
  EXPECT_NEAR(s.values[y], 1.0, 1e-9);
}

TEST(Simplex, EqualityAndGreaterRows) {
  // min x + 2y + 3z  s.t. x + y + z = 10, y - z >= 2, x <= 4, shifted lower bound on z
  Model m;
  int x = m.add_variable(0, 4, 1);
  int y = m.add_variable(0, kInfinity, 2);
  int z = m.add_variable(1, kInfinity, 3);
  m.add_row({{x, 1}, {y, 1}, {z, 1}}, RowSense::Equal, 10);
  m.add_row({{y, 1}, {z, -1}}, RowSense::GreaterEqual, 2);
  Solution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.values[x], 4, 1e-9);
  EXPECT_NEAR(s.values[z], 1, 1e-9);
  EXPECT_NEAR(s.values[y], 5, 1e-9);
  EXPECT_NEAR(s.objective, 4 + 10 + 3, 1e-9);
  EXPECT_LT(m.max_violation(s.values), 1e-9);
}

TEST(Simplex, DetectsInfeasible) {
  Model m;
  int x = m.add_variable(0, 1, 1);
  m.add_row({{x, 1}}, RowSense::GreaterEqual, 2);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Infeasible);
}

TEST(Simplex, DetectsUnbounded) {
  Model m;
  int x = m.add_variable(0, kInfinity, -1);
  int y = m.add_variable(0, kInfinity, 0);
  m.add_row({{x, 1}, {y, -1}}, RowSense::LessEqual, 1);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Unbounded);
}

TEST(Simplex, RejectsInfiniteLowerBound) {
  Model m;
  EXPECT_THROW(m.add_variable(-kInfinity, 0, 0), std::invalid_argument);
}

TEST(Simplex, RedundantEqualities) {
  Model m;
  int x = m.add_variable(0, 10, 1);
  int y = m.add_variable(0, 10, 1);
  m.add_row({{x, 1}, {y, 1}}, RowSense::Equal, 5);
  m.add_row({{x, 2}, {y, 2}}, RowSense::Equal, 10);
  m.add_row({{x, 1}}, RowSense::GreaterEqual, 2);
  Solution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 5, 1e-9);
  EXPECT_LT(m.max_violation(s.values), 1e-9);
}

TEST(Simplex, NegativeLowerBounds) {
  // min x - y with x in [-3, 2], y in [-1, 4], x + y >= -2
  Model m;
  int x = m.add_variable(-3, 2, 1);
  int y = m.add_variable(-1, 4, -1);
  m.add_row({{x, 1}, {y, 1}}, RowSense::GreaterEqual, -2);
  Solution s = solve_lp(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.values[x], -3, 1e-9);
  EXPECT_NEAR(s.values[y], 4, 1e-9);
}

TEST(BranchAndBound, KnapsackMatchesEnumeration) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> w(1, 20), v(1, 30);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 8;
    std::vector<int> weight(n), value(n);
    for (int i = 0; i < n; ++i) { weight[i] = w(rng); value[i] = v(rng); }
    const int cap = 40;
    Model m;
    std::vector<Term> row;
    for (int i = 0; i < n; ++i) row.push_back({m.add_binary(-value[i]), double(weight[i])});
    m.add_row(row, RowSense::LessEqual, cap);
    Solution s = BranchAndBoundSolver{}.solve(m);
    ASSERT_EQ(s.status, SolveStatus::Optimal);

    int best = 0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      int tw = 0, tv = 0;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) { tw += weight[i]; tv += value[i]; }
      if (tw <= cap) best = std::max(best, tv);
    }
    EXPECT_NEAR(-s.objective, best, 1e-6) << "trial " << trial;
  }
}

TEST(BranchAndBound, GeneralIntegers) {
  // min -x - y  s.t. 2x + 2y <= 7, x - y <= 0.5, integers
  Model m;
  int x = m.add_variable(0, 10, -1, VarType::Integer);
  int y = m.add_variable(0, 10, -1, VarType::Integer);
  m.add_row({{x, 2}, {y, 2}}, RowSense::LessEqual, 7);
  m.add_row({{x, 1}, {y, -1}}, RowSense::LessEqual, 0.5);
  Solution s = BranchAndBoundSolver{}.solve(m);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -3, 1e-9);
}

TEST(BranchAndBound, InfeasibleInteger) {
  Model m;
  int x = m.add_variable(0, 10, 1, VarType::Integer);
  m.add_row({{x, 2}}, RowSense::Equal, 3);
  EXPECT_EQ(BranchAndBoundSolver{}.solve(m).status, SolveStatus::Infeasible);
}

TEST(BranchAndBound, NodeLimitReportsBound) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> w(10, 40);
  Model m;
  std::vector<Term> row;
  for (int i = 0; i < 25; ++i) row.push_back({m.add_binary(-w(rng)), double(w(rng))});
  m.add_row(row, RowSense::LessEqual, 150);
  MilpOptions opt;
  opt.node_limit = 5;
  Solution s = BranchAndBoundSolver{opt}.solve(m);
  EXPECT_EQ(s.status, SolveStatus::NodeLimit);
  EXPECT_LE(s.bound, s.objective);
}
