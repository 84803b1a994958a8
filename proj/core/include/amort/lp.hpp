#ifndef AMORT_LP_HPP
#define AMORT_LP_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "amort/prover.hpp"
#include "amort/resource.hpp"

namespace amort {

/// sum(coeffs) >= rhs
struct LpConstraint {
  std::map<std::string, Rational> coeffs;
  Rational rhs;
  std::string label;
};

/// Minimise `objectives` lexicographically subject to the constraints and
/// y >= 0 for every variable.
struct LpProblem {
  std::vector<std::string> variables;
  std::vector<LpConstraint> constraints;
  std::vector<std::map<std::string, Rational>> objectives;

  /// Every variable mentioned anywhere, declared ones first.
  std::vector<std::string> all_variables() const;
};

/// lhs - rhs >= 0 moved into LpConstraint form.
LpConstraint normalise(const Constraint& c);

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Valuation valuation;
  /// Value of the first objective.
  Rational objective;
  /// Irreducible infeasible subset (indices into the constraints).
  std::vector<std::size_t> infeasible_core;
};

/// Two-phase primal simplex with Bland's rule over exact rationals.
LpSolution solve(const LpProblem& p);

class LpSizeExceeded : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Brute force over all basic points (first objective only). At most 6
/// variables and 12 constraints. Never reports Unbounded, so the objective
/// should be bounded below, e.g. have nonnegative coefficients.
LpSolution enumerate_vertices_oracle(const LpProblem& p);

/// `min: ...;` line per objective then `cN: ... >= b;` per constraint.
std::string lp_dump(const LpProblem& p);

bool satisfies(const LpConstraint& c, const Valuation& v);

}  // namespace amort

#endif
