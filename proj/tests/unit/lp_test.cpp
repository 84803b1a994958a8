#include <random>

#include <gtest/gtest.h>

#include "amort/lp.hpp"

using namespace amort;

namespace {

LpConstraint ge(std::map<std::string, Rational> coeffs, Rational rhs, std::string label = {}) {
  return {std::move(coeffs), std::move(rhs), std::move(label)};
}

LpProblem random_problem(unsigned seed) {
  std::mt19937 rng(seed);
  LpProblem p;
  std::size_t n = 1 + rng() % 6, m = 1 + rng() % 12;
  for (std::size_t i = 0; i < n; ++i) p.variables.push_back("y" + std::to_string(i));
  for (std::size_t j = 0; j < m; ++j) {
    LpConstraint c;
    for (const auto& v : p.variables) {
      if (rng() % 3 == 0) continue;
      c.coeffs[v] = Rational(int(rng() % 9) - 4, int(1 + rng() % 3));
    }
    c.rhs = Rational(int(rng() % 11) - 5, int(1 + rng() % 2));
    p.constraints.push_back(c);
  }
  std::map<std::string, Rational> obj;
  for (const auto& v : p.variables) obj[v] = Rational(int(rng() % 5), int(1 + rng() % 2));
  p.objectives = {obj};
  return p;
}

}  // namespace

TEST(Lp, SmallOptimum) {
  // min a + b  s.t.  a + 2b >= 4, 3a + b >= 3
  LpProblem p{{"a", "b"}, {ge({{"a", 1}, {"b", 2}}, 4), ge({{"a", 3}, {"b", 1}}, 3)}, {{{"a", 1}, {"b", 1}}}};
  LpSolution s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.objective, Rational(11, 5));
  EXPECT_EQ(s.valuation.at("a"), Rational(2, 5));
  EXPECT_EQ(s.valuation.at("b"), Rational(9, 5));
  for (const auto& c : p.constraints) EXPECT_TRUE(satisfies(c, s.valuation));
}

TEST(Lp, EmptyProblemIsOptimalAtZero) {
  LpSolution s = solve(LpProblem{{"a"}, {}, {{{"a", 1}}}});
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.valuation.at("a"), 0);
}

TEST(Lp, Unbounded) {
  LpProblem p{{"a"}, {ge({{"a", 1}}, 1)}, {{{"a", -1}}}};
  EXPECT_EQ(solve(p).status, LpStatus::Unbounded);
}

TEST(Lp, InfeasibleCoreIsMinimal) {
  LpProblem p{{"a", "b"},
              {ge({{"a", 1}}, 0, "fine"), ge({{"a", -1}}, -1, "a <= 1"), ge({{"b", 1}}, 5, "unrelated"),
               ge({{"a", 1}}, 2, "a >= 2")},
              {{{"a", 1}}}};
  LpSolution s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Infeasible);
  std::vector<std::size_t> want{1, 3};
  EXPECT_EQ(s.infeasible_core, want);
}

TEST(Lp, FalseConstantIsItsOwnCore) {
  LpProblem p{{"a"}, {ge({{"a", 1}}, 1), ge({}, 1, "0 >= 1")}, {{{"a", 1}}}};
  LpSolution s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Infeasible);
  EXPECT_EQ(s.infeasible_core, std::vector<std::size_t>{1});
}

TEST(Lp, LexicographicObjectives) {
  // a + b >= 2: the first objective only fixes a = 0, the second then minimises b
  LpProblem p{{"a", "b", "c"}, {ge({{"a", 1}, {"b", 1}}, 2), ge({{"c", 1}, {"b", -1}}, 0)}, {{{"a", 1}}, {{"c", 1}}}};
  LpSolution s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.objective, 0);
  EXPECT_EQ(s.valuation.at("a"), 0);
  EXPECT_EQ(s.valuation.at("b"), 2);
  EXPECT_EQ(s.valuation.at("c"), 2);
}

TEST(Lp, DegenerateCyclingExample) {
  // Beale's example, rewritten as a minimisation in >= form
  LpProblem p{{"x1", "x2", "x3", "x4"},
              {ge({{"x1", Rational(-1, 4)}, {"x2", 60}, {"x3", Rational(1, 25)}, {"x4", -9}}, 0),
               ge({{"x1", Rational(-1, 2)}, {"x2", 90}, {"x3", Rational(1, 50)}, {"x4", -3}}, 0),
               ge({{"x3", -1}}, -1)},
              {{{"x1", Rational(-3, 4)}, {"x2", 150}, {"x3", Rational(-1, 50)}, {"x4", 6}}}};
  LpSolution s = solve(p);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.objective, Rational(-1, 20));
}

TEST(Lp, NormaliseMovesEverythingLeft) {
  Constraint c{LinearExpr::var("a") + 2, LinearExpr::var("b", 3) + 5, "x"};
  LpConstraint l = normalise(c);
  EXPECT_EQ(l.coeffs.at("a"), 1);
  EXPECT_EQ(l.coeffs.at("b"), -3);
  EXPECT_EQ(l.rhs, 3);
  EXPECT_EQ(l.label, "x");
}

TEST(Lp, Dump) {
  LpProblem p{{"a", "b"}, {ge({{"a", 2}, {"b", -1}}, 1, "here")}, {{{"a", 1}, {"b", 1}}}};
  EXPECT_EQ(lp_dump(p), "min: a + b;\nc1: 2 a - b >= 1;  # here\n");
}

TEST(Lp, OracleSizeLimit) {
  LpProblem p;
  for (int i = 0; i < 7; ++i) p.variables.push_back("v" + std::to_string(i));
  EXPECT_THROW(enumerate_vertices_oracle(p), LpSizeExceeded);
}

class LpAgainstOracle : public ::testing::TestWithParam<unsigned> {};

TEST_P(LpAgainstOracle, SameVerdictAndObjective) {
  LpProblem p = random_problem(GetParam());
  LpSolution a = solve(p), b = enumerate_vertices_oracle(p);
  ASSERT_EQ(a.status, b.status);
  if (a.status == LpStatus::Optimal) {
    EXPECT_EQ(a.objective, b.objective);
    for (const auto& c : p.constraints) EXPECT_TRUE(satisfies(c, a.valuation));
  } else {
    // the reported core is itself infeasible
    LpProblem core{p.variables, {}, p.objectives};
    for (auto i : a.infeasible_core) core.constraints.push_back(p.constraints[i]);
    EXPECT_EQ(enumerate_vertices_oracle(core).status, LpStatus::Infeasible);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, LpAgainstOracle, ::testing::Range(1000u, 1060u));
