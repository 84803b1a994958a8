#ifndef AMORT_ASSERTION_HPP
#define AMORT_ASSERTION_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "amort/resource.hpp"

namespace amort {

/// Terms of the restricted assertion language.
///
/// `ProgVar` names a procedure parameter or local: in pre/postconditions it
/// denotes the argument value, in loop invariants the current local value.
/// `Evar` is internal to the prover (unification variables) and never
/// produced by the parser.
struct Term {
  enum class Kind : std::uint8_t { Var, Null, Int, ProgVar, Ret, Evar };

  Kind kind = Kind::Null;
  std::string name;
  std::int64_t value = 0;

  static Term var(std::string n) { return {Kind::Var, std::move(n), 0}; }
  static Term null() { return {Kind::Null, {}, 0}; }
  static Term integer(std::int64_t z) { return {Kind::Int, {}, z}; }
  static Term prog_var(std::string n) { return {Kind::ProgVar, std::move(n), 0}; }
  static Term ret() { return {Kind::Ret, {}, 0}; }
  static Term evar(std::string n) { return {Kind::Evar, std::move(n), 0}; }

  bool is_literal() const { return kind == Kind::Null || kind == Kind::Int; }

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;
};

std::string to_string(const Term& t);

struct PureAtom {
  Term lhs;
  bool equal = true;  // false: disequality
  Term rhs;

  static PureAtom eq(Term a, Term b) { return {std::move(a), true, std::move(b)}; }
  static PureAtom ne(Term a, Term b) { return {std::move(a), false, std::move(b)}; }

  friend auto operator<=>(const PureAtom&, const PureAtom&) = default;
  friend bool operator==(const PureAtom&, const PureAtom&) = default;
};

std::string to_string(const PureAtom& p);

/// `pt(from, field, to)`, `lseg(annotation, from, to)` or `tree(annotation, from)`.
struct HeapAtom {
  enum class Kind : std::uint8_t { PointsTo, Lseg, Tree };

  Kind kind = Kind::PointsTo;
  Term from;
  std::string field;
  Term to;
  ResourceExpr annotation;

  static HeapAtom points_to(Term a, std::string f, Term v) {
    return {Kind::PointsTo, std::move(a), std::move(f), std::move(v), {}};
  }
  static HeapAtom lseg(ResourceExpr theta, Term a, Term b) {
    return {Kind::Lseg, std::move(a), {}, std::move(b), std::move(theta)};
  }
  static HeapAtom tree(ResourceExpr theta, Term root) {
    return {Kind::Tree, std::move(root), {}, Term::null(), std::move(theta)};
  }

  friend bool operator==(const HeapAtom&, const HeapAtom&) = default;
};

std::string to_string(const HeapAtom& h);

/// Fields that list and tree cells are made of.
inline constexpr const char* kNextField = "next";
inline constexpr const char* kDataField = "data";
inline constexpr const char* kLeftField = "left";
inline constexpr const char* kRightField = "right";

/// `exists xs. pure ; heap ; resource`
struct Clause {
  std::vector<std::string> existentials;
  std::vector<PureAtom> pure;
  std::vector<HeapAtom> heap;
  ResourceExpr resource;

  friend bool operator==(const Clause&, const Clause&) = default;
};

std::string to_string(const Clause& c);

/// Nonempty disjunction of clauses.
struct Assertion {
  std::vector<Clause> clauses;

  static Assertion emp() { return Assertion{{Clause{}}}; }
  static Assertion of(Clause c) { return Assertion{{std::move(c)}}; }

  friend bool operator==(const Assertion&, const Assertion&) = default;
};

std::string to_string(const Assertion& a);

class GoalNode;
using Goal = std::shared_ptr<const GoalNode>;

/// Goal formulae: implications only ever occur positively, which the
/// constructors enforce.
class GoalNode {
public:
  enum class Kind : std::uint8_t { Star, Wand, Leaf, And, Implies, Forall, Exists };

  static Goal star(Assertion s, Goal g);
  static Goal wand(Assertion s, Goal g);
  static Goal leaf(Assertion s);
  static Goal conj(Goal a, Goal b);
  static Goal implies(PureAtom p, Goal g);
  static Goal forall(std::string x, Goal g);
  static Goal exists(std::string x, Goal g);

  Kind kind() const { return kind_; }
  const Assertion& assertion() const { return assertion_; }
  const PureAtom& atom() const { return atom_; }
  const std::string& variable() const { return variable_; }
  /// Continuation goal (Star, Wand, Implies, Forall, Exists) or left conjunct.
  const Goal& body() const { return first_; }
  const Goal& second() const { return second_; }

private:
  GoalNode() = default;

  Kind kind_ = Kind::Leaf;
  Assertion assertion_;
  PureAtom atom_;
  std::string variable_;
  Goal first_;
  Goal second_;
};

std::string to_string(const Goal& g);
std::size_t goal_size(const Goal& g);

/// Checks the goal grammar: children present, assertions nonempty, no
/// resource metavariable bound anywhere.
bool is_well_formed(const Goal& g);

/// Substitution on Var / ProgVar / Ret terms.
using TermMap = std::map<Term, Term>;

Term subst(const Term& t, const TermMap& m);
PureAtom subst(const PureAtom& p, const TermMap& m);
HeapAtom subst(const HeapAtom& h, const TermMap& m);
/// Capture-avoiding: bound existentials are renamed (primed) when they would
/// capture a variable of the substitution's range.
Clause subst(const Clause& c, const TermMap& m);
Assertion subst(const Assertion& a, const TermMap& m);
Goal subst(const Goal& g, const TermMap& m);

/// Free logical (Var) variable names.
std::set<std::string> free_vars(const Term& t);
std::set<std::string> free_vars(const Clause& c);
std::set<std::string> free_vars(const Assertion& a);
std::set<std::string> free_vars(const Goal& g);

/// All terms (of any kind) syntactically occurring.
void collect_terms(const Clause& c, std::set<Term>& out);
void collect_terms(const Goal& g, std::set<Term>& out);

std::set<std::string> metavariables(const Assertion& a);
std::set<std::string> metavariables(const Goal& g);

}  // namespace amort

#endif
