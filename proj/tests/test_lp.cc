#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mmsched/error.h"
#include "mmsched/lp.h"
#include "support.h"

using namespace mmsched;

TEST(Simplex, AgreesWithVertexEnumeration) {
  std::mt19937_64 rng(2024);
  int infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const LinearProgram lp = testsupport::random_lp(rng);
    const testsupport::OracleLp oracle = testsupport::vertex_enumeration(lp);
    const LpSolution sol = solve_lp(lp);
    if (!oracle.feasible) {
      ++infeasible;
      EXPECT_EQ(sol.status, LpStatus::kInfeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(sol.status, LpStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(sol.objective, oracle.objective, 1e-7) << "trial " << trial;
    for (std::size_t i = 0; i < lp.row_count(); ++i) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < lp.variable_count(); ++j) lhs += lp.rows[i][j] * sol.x[j];
      EXPECT_LE(lhs, lp.rhs[i] + 1e-7);
    }
    for (double x : sol.x) EXPECT_GE(x, 0.0);
  }
  EXPECT_GT(infeasible, 0);
}

TEST(Simplex, DetectsUnbounded) {
  LinearProgram lp(2);
  lp.objective = {1, 1};
  lp.add_row({1, -1}, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kUnbounded);
}

TEST(Simplex, DetectsInfeasible) {
  LinearProgram lp(1);
  lp.objective = {1};
  lp.add_row({1}, 1);
  lp.add_row({-1}, -2);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kInfeasible);
}

TEST(Simplex, TerminatesOnDegenerateCyclingProgram) {
  // Degenerate program on which the largest-coefficient rule cycles.
  LinearProgram lp(4);
  lp.objective = {0.75, -20, 0.5, -6};
  lp.add_row({0.25, -8, -1, 9}, 0);
  lp.add_row({0.5, -12, -0.5, 3}, 0);
  lp.add_row({0, 0, 1, 0}, 1);
  const LpSolution sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 1.25, 1e-12);
}

TEST(Simplex, EqualityAsTwoInequalities) {
  LinearProgram lp(2);
  lp.objective = {0, 0};
  lp.add_row({1, 2}, 3);
  lp.add_row({-1, -2}, -3);
  lp.add_row({1, 0}, 1);
  const LpSolution sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.x[0] + 2 * sol.x[1], 3.0, 1e-12);
}

TEST(Simplex, BadlyScaledRows) {
  LinearProgram lp(2);
  lp.objective = {1e-6, 2e-6};
  lp.add_row({1e6, 1e6}, 4e6);
  lp.add_row({1e-6, 3e-6}, 6e-6);
  const LpSolution sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 5e-6, 1e-15);
}

TEST(Simplex, ReturnsAVertex) {
  // Every optimum of this program is a face; a vertex has at most one
  // positive variable because there is one binding row.
  LinearProgram lp(3);
  lp.objective = {1, 1, 1};
  lp.add_row({1, 1, 1}, 2);
  const LpSolution sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  int positive = 0;
  for (double x : sol.x) positive += x > 1e-12;
  EXPECT_EQ(positive, 1);
  EXPECT_NEAR(sol.objective, 2.0, 1e-12);
}

TEST(Simplex, RejectsRaggedInput) {
  LinearProgram lp(2);
  lp.rows.push_back({1});
  lp.rhs.push_back(1);
  EXPECT_THROW(solve_lp(lp), Error);
  LinearProgram nan(1);
  nan.add_row({std::nan("")}, 1);
  EXPECT_THROW(solve_lp(nan), Error);
}

TEST(Simplex, Deterministic) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearProgram lp = testsupport::random_lp(rng);
    const LpSolution a = solve_lp(lp);
    const LpSolution b = solve_lp(lp);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.basis, b.basis);
  }
}

TEST(LpDump, FixedLayout) {
  LinearProgram lp(2);
  lp.objective = {1, 0.5};
  lp.add_row({1, 2}, 3);
  std::ostringstream out;
  dump_lp(lp, out);
  EXPECT_EQ(out.str(), "LP 2 1\nMAX 1 0.5\nR0 1 2 <= 3\n");
}
