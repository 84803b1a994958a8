#include "amort/pure.hpp"

namespace amort {

PureClosure::PureClosure(const std::vector<PureAtom>& atoms) {
  for (const auto& a : atoms) add(a);
}

int PureClosure::node(const Term& t) {
  auto [it, inserted] = ids_.try_emplace(t, static_cast<int>(terms_.size()));
  if (inserted) {
    terms_.push_back(t);
    parent_.push_back(it->second);
  }
  return it->second;
}

int PureClosure::lookup(const Term& t) const {
  auto it = ids_.find(t);
  return it == ids_.end() ? -1 : find(it->second);
}

int PureClosure::find(int i) const {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void PureClosure::merge(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  // keep the smaller term as root so representatives are stable
  if (terms_[b] < terms_[a]) std::swap(a, b);
  parent_[b] = a;
}

// Would identifying the classes rooted at ra and rb be inconsistent?
bool PureClosure::classes_conflict(int ra, int rb) const {
  if (ra == rb) return false;
  const Term* lit_a = nullptr;
  const Term* lit_b = nullptr;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!terms_[i].is_literal()) continue;
    int r = find(static_cast<int>(i));
    if (r == ra) lit_a = &terms_[i];
    if (r == rb) lit_b = &terms_[i];
  }
  if (lit_a && lit_b && *lit_a != *lit_b) return true;
  for (auto [x, y] : diseqs_) {
    int rx = find(x), ry = find(y);
    if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return true;
  }
  return false;
}

void PureClosure::recheck() {
  for (auto [x, y] : diseqs_) {
    if (find(x) == find(y)) {
      contradictory_ = true;
      return;
    }
  }
}

void PureClosure::add(const PureAtom& atom) {
  atoms_.push_back(atom);
  if (contradictory_) return;
  int a = node(atom.lhs);
  int b = node(atom.rhs);
  if (atom.equal) {
    if (classes_conflict(find(a), find(b))) {
      contradictory_ = true;
      return;
    }
    merge(a, b);
  } else {
    diseqs_.emplace_back(a, b);
    recheck();
  }
}

bool PureClosure::entails_equal(const Term& a, const Term& b) const {
  if (contradictory_ || a == b) return true;
  int ra = lookup(a), rb = lookup(b);
  return ra >= 0 && ra == rb;
}

bool PureClosure::entails_distinct(const Term& a, const Term& b) const {
  if (contradictory_) return true;
  if (a == b) return false;
  if (a.is_literal() && b.is_literal()) return true;
  int ra = lookup(a), rb = lookup(b);
  if (ra >= 0 && ra == rb) return false;
  if (ra < 0 && rb < 0) return false;
  if (ra < 0 || rb < 0) {
    // one side is unknown to the closure: only a literal in the other class helps
    const Term& unknown = ra < 0 ? a : b;
    int known = ra < 0 ? rb : ra;
    if (!unknown.is_literal()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (terms_[i].is_literal() && find(static_cast<int>(i)) == known && terms_[i] != unknown) return true;
    }
    return false;
  }
  return classes_conflict(ra, rb);
}

bool PureClosure::entails(const PureAtom& atom) const {
  return atom.equal ? entails_equal(atom.lhs, atom.rhs) : entails_distinct(atom.lhs, atom.rhs);
}

Term PureClosure::representative(const Term& t) const {
  int r = lookup(t);
  return r < 0 ? t : terms_[r];
}

std::vector<Term> PureClosure::terms() const { return terms_; }

bool pure_entails(const std::vector<PureAtom>& pi, const PureAtom& p) {
  return PureClosure(pi).entails(p);
}

bool pure_contradiction(const std::vector<PureAtom>& pi) {
  return PureClosure(pi).contradictory();
}

}  // namespace amort
