#ifndef AMORT_ANALYSIS_HPP
#define AMORT_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "amort/bytecode.hpp"
#include "amort/lp.hpp"
#include "amort/prover.hpp"
#include "amort/vcgen.hpp"
#include "amort/vm.hpp"

namespace amort {

/// Exit codes shared by the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitValidate = 3,
  kExitProof = 4,
  kExitInfeasible = 5,
  kExitBudgetViolation = 6,
  kExitStuck = 7,
  kExitFuelExhausted = 8,
};

struct VcOutcome {
  VerificationCondition vc;
  ProofResult proof;
  double millis = 0;
};

struct ProcedureSummary {
  std::string name;
  /// Metavariables occurring in this procedure's annotations.
  Valuation valuation;
  Assertion precondition;
  Assertion postcondition;
  std::map<std::size_t, Assertion> invariants;
};

struct AnalyzeOptions {
  ProverOptions prover;
  bool parallel = true;
};

struct AnalysisReport {
  std::vector<Diagnostic> diagnostics;
  std::vector<std::string> warnings;
  /// VC generation errors (unsupported instructions and the like).
  std::vector<std::string> errors;
  std::vector<VcOutcome> vcs;
  std::vector<Constraint> constraints;
  LpProblem problem;
  std::optional<LpSolution> solution;
  std::vector<ProcedureSummary> procedures;
  double millis = 0;

  bool proved() const;
  bool feasible() const { return solution && solution->status == LpStatus::Optimal; }
  int exit_code() const;
  /// Value of a metavariable in the solution.
  std::optional<Rational> value(const std::string& metavariable) const;
};

/// validate, gen_vcs, prove_vc for every VC, then one LP over the union of
/// the constraints, minimising the entry precondition's metavariables first
/// and all metavariables second.
AnalysisReport analyze(const Program& program, const AnalyzeOptions& opts = {});

/// Replaces every metavariable by its value.
Assertion instantiate(const Assertion& a, const Valuation& v);

std::set<std::string> metavariables(const Procedure& proc);

struct CheckRow {
  std::size_t size = 0;
  Rational budget;
  Rational consumed;
  std::string outcome;
  std::size_t steps = 0;
};

struct CheckReport {
  std::vector<CheckRow> rows;
  std::optional<std::string> failure;

  bool ok() const { return !failure; }
};

/// Runs the entry procedure on canonical inputs of sizes 0..max_size with
/// the precondition's resource as budget. Sizes at which the precondition
/// has no model are skipped.
CheckReport check(const Program& program, const Valuation& v, std::size_t max_size, std::size_t fuel = 1'000'000);

/// consumed / budget, or nullopt for a zero budget.
std::optional<Rational> tightness(const CheckRow& row);

}  // namespace amort

#endif
