#ifndef AMORT_PROVER_HPP
#define AMORT_PROVER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amort/assertion.hpp"
#include "amort/vcgen.hpp"

namespace amort {

/// lhs >= rhs over annotation metavariables.
struct Constraint {
  LinearExpr lhs;
  LinearExpr rhs;
  std::string origin;

  /// lhs - rhs
  LinearExpr difference() const { return lhs - rhs; }
  bool operator==(const Constraint& o) const { return lhs == o.lhs && rhs == o.rhs; }
};

std::string to_string(const Constraint& c);

struct ProofContext {
  std::vector<PureAtom> pure;
  std::vector<HeapAtom> heap;
  ResourceExpr resource;
};

std::string to_string(const ProofContext& c);

struct ProverOptions {
  /// Maximum number of list / tree unfoldings along one derivation path.
  std::size_t max_unfold_depth = 64;
  /// Global budget of search steps for one VC.
  std::size_t max_steps = 2'000'000;
};

struct ProofResult {
  bool proved = false;
  std::vector<Constraint> constraints;
  /// Deepest failing subgoal (on failure).
  std::string failure;
  bool bound_exceeded = false;
  std::size_t steps = 0;
};

/// Saturates the context: cell distinctness, non-null addresses and
/// list / tree unfolding where the pure part decides it. Contradictory
/// branches are dropped. `fresh` numbers the variables introduced.
/// Returns nullopt when the unfold bound is exceeded.
std::optional<std::vector<ProofContext>> saturate(const ProofContext& ctx, std::size_t& fresh,
                                                  const ProverOptions& opts = {});

struct ResourceMatch {
  ResourceExpr remainder;
  Constraint constraint;
};

/// Θ - goal and the constraint Θ >= goal.
ResourceMatch match_resource(const ResourceExpr& theta, const ResourceExpr& goal);

struct HeapMatch {
  ProofContext remaining;
  std::vector<Constraint> constraints;
  /// Witnesses chosen for the goal clause's existentials.
  std::map<std::string, Term> witnesses;
};

/// Ways the goal atoms (with `existentials` to solve) can be carved out of
/// the context heap, in search order, at most `limit`.
std::vector<HeapMatch> match_heap(const ProofContext& ctx, const std::vector<HeapAtom>& goal,
                                  const std::vector<std::string>& existentials = {}, std::size_t limit = 16);

/// Proves ctx |- goal, returning the constraints of the first derivation.
ProofResult prove(const ProofContext& ctx, const Goal& goal, const ProverOptions& opts = {});

/// Proves every clause of the antecedent against the consequent.
ProofResult prove_vc(const VerificationCondition& vc, const ProverOptions& opts = {});

}  // namespace amort

#endif
