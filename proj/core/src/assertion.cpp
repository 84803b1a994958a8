#include "amort/assertion.hpp"

#include <sstream>
#include <stdexcept>

namespace amort {

std::string to_string(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var:
    case Term::Kind::ProgVar:
      return t.name;
    case Term::Kind::Null:
      return "null";
    case Term::Kind::Int:
      return std::to_string(t.value);
    case Term::Kind::Ret:
      return "ret";
    case Term::Kind::Evar:
      return "?" + t.name;
  }
  return "?";
}

std::string to_string(const PureAtom& p) {
  return to_string(p.lhs) + (p.equal ? " = " : " != ") + to_string(p.rhs);
}

std::string to_string(const HeapAtom& h) {
  switch (h.kind) {
    case HeapAtom::Kind::PointsTo:
      return "pt(" + to_string(h.from) + ", " + h.field + ", " + to_string(h.to) + ")";
    case HeapAtom::Kind::Lseg:
      return "lseg(" + to_string(h.annotation) + ", " + to_string(h.from) + ", " + to_string(h.to) + ")";
    case HeapAtom::Kind::Tree:
      return "tree(" + to_string(h.annotation) + ", " + to_string(h.from) + ")";
  }
  return "?";
}

std::string to_string(const Clause& c) {
  std::ostringstream out;
  if (!c.existentials.empty()) {
    out << "exists";
    for (const auto& x : c.existentials) out << ' ' << x;
    out << ". ";
  }
  for (std::size_t i = 0; i < c.pure.size(); ++i) out << (i ? ", " : "") << to_string(c.pure[i]);
  out << (c.pure.empty() ? "; " : " ; ");
  if (c.heap.empty()) out << "emp";
  for (std::size_t i = 0; i < c.heap.size(); ++i) out << (i ? ", " : "") << to_string(c.heap[i]);
  out << " ; " << to_string(c.resource);
  return out.str();
}

std::string to_string(const Assertion& a) {
  std::string out;
  for (std::size_t i = 0; i < a.clauses.size(); ++i) {
    if (i) out += " \\/ ";
    out += to_string(a.clauses[i]);
  }
  return out;
}

// ---- goals ----

Goal GoalNode::star(Assertion s, Goal g) {
  auto n = std::shared_ptr<GoalNode>(new GoalNode());
  n->kind_ = Kind::Star;
  n->assertion_ = std::move(s);
  n->first_ = std::move(g);
  return n;
}

Goal GoalNode::wand(Assertion s, Goal g) {
  auto n = std::shared_ptr<GoalNode>(new GoalNode());
  n->kind_ = Kind::Wand;
  n->assertion_ = std::move(s);
  n->first_ = std::move(g);
  return n;
}

Goal GoalNode::leaf(Assertion s) {
  auto n = std::shared_ptr<GoalNode>(new GoalNode());
  n->kind_ = Kind::Leaf;
  n->assertion_ = std::move(s);
  return n;
}

Goal GoalNode::conj(Goal a, Goal b) {
  auto n = std::shared_ptr<GoalNode>(new GoalNode());
  n->kind_ = Kind::And;
  n->first_ = std::move(a);
  n->second_ = std::move(b);
  return n;
}

Goal GoalNode::implies(PureAtom p, Goal g) {
  auto n = std::shared_ptr<GoalNode>(new GoalNode());
  n->kind_ = Kind::Implies;
  n->atom_ = std::move(p);
  n->first_ = std::move(g);
  return n;
}

Goal GoalNode::forall(std::string x, Goal g) {
  auto n = std::shared_ptr<GoalNode>(new GoalNode());
  n->kind_ = Kind::Forall;
  n->variable_ = std::move(x);
  n->first_ = std::move(g);
  return n;
}

Goal GoalNode::exists(std::string x, Goal g) {
  auto n = std::shared_ptr<GoalNode>(new GoalNode());
  n->kind_ = Kind::Exists;
  n->variable_ = std::move(x);
  n->first_ = std::move(g);
  return n;
}

namespace {

void print_goal(const Goal& g, std::ostringstream& out) {
  switch (g->kind()) {
    case GoalNode::Kind::Star:
      out << "(" << to_string(g->assertion()) << ") * ";
      print_goal(g->body(), out);
      break;
    case GoalNode::Kind::Wand:
      out << "(" << to_string(g->assertion()) << ") -* ";
      print_goal(g->body(), out);
      break;
    case GoalNode::Kind::Leaf:
      out << "(" << to_string(g->assertion()) << ")";
      break;
    case GoalNode::Kind::And:
      out << "[";
      print_goal(g->body(), out);
      out << "] /\\ [";
      print_goal(g->second(), out);
      out << "]";
      break;
    case GoalNode::Kind::Implies:
      out << to_string(g->atom()) << " -> ";
      print_goal(g->body(), out);
      break;
    case GoalNode::Kind::Forall:
      out << "forall " << g->variable() << ". ";
      print_goal(g->body(), out);
      break;
    case GoalNode::Kind::Exists:
      out << "exists " << g->variable() << ". ";
      print_goal(g->body(), out);
      break;
  }
}

bool assertion_well_formed(const Assertion& a) {
  return !a.clauses.empty();
}

}  // namespace

std::string to_string(const Goal& g) {
  std::ostringstream out;
  print_goal(g, out);
  return out.str();
}

std::size_t goal_size(const Goal& g) {
  if (!g) return 0;
  std::size_t n = 1;
  for (const auto& c : g->assertion().clauses) n += c.heap.size() + c.pure.size();
  return n + goal_size(g->body()) + goal_size(g->second());
}

bool is_well_formed(const Goal& g) {
  if (!g) return false;
  switch (g->kind()) {
    case GoalNode::Kind::Leaf:
      return assertion_well_formed(g->assertion()) && !g->body() && !g->second();
    case GoalNode::Kind::Star:
    case GoalNode::Kind::Wand:
      return assertion_well_formed(g->assertion()) && is_well_formed(g->body()) && !g->second();
    case GoalNode::Kind::And:
      return is_well_formed(g->body()) && is_well_formed(g->second());
    case GoalNode::Kind::Implies:
      return is_well_formed(g->body()) && !g->second();
    case GoalNode::Kind::Forall:
    case GoalNode::Kind::Exists:
      return !g->variable().empty() && g->variable()[0] != '$' && is_well_formed(g->body());
  }
  return false;
}

// ---- free variables ----

std::set<std::string> free_vars(const Term& t) {
  if (t.kind == Term::Kind::Var) return {t.name};
  return {};
}

namespace {

void add_term_vars(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::Var) out.insert(t.name);
}

void clause_vars(const Clause& c, std::set<std::string>& out) {
  std::set<std::string> inner;
  for (const auto& p : c.pure) {
    add_term_vars(p.lhs, inner);
    add_term_vars(p.rhs, inner);
  }
  for (const auto& h : c.heap) {
    add_term_vars(h.from, inner);
    if (h.kind != HeapAtom::Kind::Tree) add_term_vars(h.to, inner);
  }
  for (const auto& x : c.existentials) inner.erase(x);
  out.insert(inner.begin(), inner.end());
}

void goal_vars(const Goal& g, std::set<std::string>& out) {
  if (!g) return;
  for (const auto& c : g->assertion().clauses) clause_vars(c, out);
  switch (g->kind()) {
    case GoalNode::Kind::Implies:
      add_term_vars(g->atom().lhs, out);
      add_term_vars(g->atom().rhs, out);
      goal_vars(g->body(), out);
      break;
    case GoalNode::Kind::Forall:
    case GoalNode::Kind::Exists: {
      std::set<std::string> inner;
      goal_vars(g->body(), inner);
      inner.erase(g->variable());
      out.insert(inner.begin(), inner.end());
      break;
    }
    default:
      goal_vars(g->body(), out);
      goal_vars(g->second(), out);
  }
}

}  // namespace

std::set<std::string> free_vars(const Clause& c) {
  std::set<std::string> out;
  clause_vars(c, out);
  return out;
}

std::set<std::string> free_vars(const Assertion& a) {
  std::set<std::string> out;
  for (const auto& c : a.clauses) clause_vars(c, out);
  return out;
}

std::set<std::string> free_vars(const Goal& g) {
  std::set<std::string> out;
  goal_vars(g, out);
  return out;
}

void collect_terms(const Clause& c, std::set<Term>& out) {
  for (const auto& p : c.pure) {
    out.insert(p.lhs);
    out.insert(p.rhs);
  }
  for (const auto& h : c.heap) {
    out.insert(h.from);
    if (h.kind != HeapAtom::Kind::Tree) out.insert(h.to);
  }
}

void collect_terms(const Goal& g, std::set<Term>& out) {
  if (!g) return;
  for (const auto& c : g->assertion().clauses) collect_terms(c, out);
  if (g->kind() == GoalNode::Kind::Implies) {
    out.insert(g->atom().lhs);
    out.insert(g->atom().rhs);
  }
  collect_terms(g->body(), out);
  collect_terms(g->second(), out);
}

std::set<std::string> metavariables(const Assertion& a) {
  std::set<std::string> out;
  for (const auto& c : a.clauses) {
    for (const auto& v : c.resource.metavariables()) out.insert(v);
    for (const auto& h : c.heap) {
      for (const auto& v : h.annotation.metavariables()) out.insert(v);
    }
  }
  return out;
}

std::set<std::string> metavariables(const Goal& g) {
  std::set<std::string> out;
  if (!g) return out;
  out = metavariables(g->assertion());
  for (const auto& v : metavariables(g->body())) out.insert(v);
  for (const auto& v : metavariables(g->second())) out.insert(v);
  return out;
}

// ---- substitution ----

Term subst(const Term& t, const TermMap& m) {
  auto it = m.find(t);
  return it == m.end() ? t : it->second;
}

PureAtom subst(const PureAtom& p, const TermMap& m) {
  return {subst(p.lhs, m), p.equal, subst(p.rhs, m)};
}

HeapAtom subst(const HeapAtom& h, const TermMap& m) {
  HeapAtom out = h;
  out.from = subst(h.from, m);
  if (h.kind != HeapAtom::Kind::Tree) out.to = subst(h.to, m);
  return out;
}

namespace {

std::set<std::string> range_vars(const TermMap& m) {
  std::set<std::string> out;
  for (const auto& [_, v] : m) add_term_vars(v, out);
  return out;
}

/// Drops mappings for `bound` and picks replacement names for binders that
/// would capture a variable of the range. Returns the adjusted map.
TermMap enter_binders(const TermMap& m, std::vector<std::string>& bound,
                      const std::set<std::string>& body_vars) {
  TermMap inner = m;
  for (const auto& x : bound) inner.erase(Term::var(x));
  if (inner.empty()) return inner;
  auto range = range_vars(inner);
  std::set<std::string> taken = range;
  taken.insert(body_vars.begin(), body_vars.end());
  taken.insert(bound.begin(), bound.end());
  for (auto& x : bound) {
    if (!range.count(x)) continue;
    std::string fresh = x;
    do {
      fresh += "'";
    } while (taken.count(fresh));
    taken.insert(fresh);
    inner[Term::var(x)] = Term::var(fresh);
    x = fresh;
  }
  return inner;
}

}  // namespace

Clause subst(const Clause& c, const TermMap& m) {
  Clause out;
  out.existentials = c.existentials;
  std::set<std::string> body;
  clause_vars(Clause{{}, c.pure, c.heap, {}}, body);
  TermMap inner = enter_binders(m, out.existentials, body);
  out.pure.reserve(c.pure.size());
  for (const auto& p : c.pure) out.pure.push_back(subst(p, inner));
  out.heap.reserve(c.heap.size());
  for (const auto& h : c.heap) out.heap.push_back(subst(h, inner));
  out.resource = c.resource;
  return out;
}

Assertion subst(const Assertion& a, const TermMap& m) {
  Assertion out;
  out.clauses.reserve(a.clauses.size());
  for (const auto& c : a.clauses) out.clauses.push_back(subst(c, m));
  return out;
}

Goal subst(const Goal& g, const TermMap& m) {
  if (m.empty()) return g;
  switch (g->kind()) {
    case GoalNode::Kind::Star:
      return GoalNode::star(subst(g->assertion(), m), subst(g->body(), m));
    case GoalNode::Kind::Wand:
      return GoalNode::wand(subst(g->assertion(), m), subst(g->body(), m));
    case GoalNode::Kind::Leaf:
      return GoalNode::leaf(subst(g->assertion(), m));
    case GoalNode::Kind::And:
      return GoalNode::conj(subst(g->body(), m), subst(g->second(), m));
    case GoalNode::Kind::Implies:
      return GoalNode::implies(subst(g->atom(), m), subst(g->body(), m));
    case GoalNode::Kind::Forall:
    case GoalNode::Kind::Exists: {
      std::vector<std::string> bound{g->variable()};
      TermMap inner = enter_binders(m, bound, free_vars(g->body()));
      Goal body = subst(g->body(), inner);
      return g->kind() == GoalNode::Kind::Forall ? GoalNode::forall(bound[0], body)
                                                 : GoalNode::exists(bound[0], body);
    }
  }
  throw std::logic_error("unknown goal kind");
}

}  // namespace amort
