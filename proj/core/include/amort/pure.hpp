#ifndef AMORT_PURE_HPP
#define AMORT_PURE_HPP

#include <map>
#include <vector>

#include "amort/assertion.hpp"

namespace amort {

/// Equality closure of a set of (dis)equalities: union-find over terms plus a
/// disequality list. Distinct literals (null, integers) are always unequal.
class PureClosure {
public:
  PureClosure() = default;
  explicit PureClosure(const std::vector<PureAtom>& atoms);

  void add(const PureAtom& atom);

  bool contradictory() const { return contradictory_; }
  bool entails_equal(const Term& a, const Term& b) const;
  bool entails_distinct(const Term& a, const Term& b) const;
  bool entails(const PureAtom& atom) const;

  /// Canonical member of the class of `t` (the smallest term in it).
  Term representative(const Term& t) const;
  /// Every term mentioned so far.
  std::vector<Term> terms() const;
  const std::vector<PureAtom>& atoms() const { return atoms_; }

private:
  int node(const Term& t);
  int find(int i) const;
  int lookup(const Term& t) const;
  void merge(int a, int b);
  bool classes_conflict(int ra, int rb) const;
  void recheck();

  std::map<Term, int> ids_;
  std::vector<Term> terms_;
  mutable std::vector<int> parent_;
  std::vector<std::pair<int, int>> diseqs_;
  std::vector<PureAtom> atoms_;
  bool contradictory_ = false;
};

bool pure_entails(const std::vector<PureAtom>& pi, const PureAtom& p);
bool pure_contradiction(const std::vector<PureAtom>& pi);

}  // namespace amort

#endif
