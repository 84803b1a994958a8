#include "amort/prover.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>

#include "amort/pure.hpp"

namespace amort {

std::string to_string(const Constraint& c) { return to_string(c.lhs) + " >= " + to_string(c.rhs); }

std::string to_string(const ProofContext& c) {
  Clause cl;
  cl.pure = c.pure;
  cl.heap = c.heap;
  cl.resource = c.resource;
  return to_string(cl);
}

ResourceMatch match_resource(const ResourceExpr& theta, const ResourceExpr& goal) {
  return {theta - goal, Constraint{theta, goal, "resource match"}};
}

namespace {

struct ConstraintNode {
  Constraint c;
  std::shared_ptr<const ConstraintNode> next;
};
using ConstraintList = std::shared_ptr<const ConstraintNode>;

std::vector<Constraint> flatten(const ConstraintList& l) {
  std::vector<Constraint> out;
  for (const ConstraintNode* n = l.get(); n; n = n->next.get()) out.push_back(n->c);
  std::reverse(out.begin(), out.end());
  return out;
}

/// Unification variables, collected constraints and the fresh-name counter.
/// Copied at every choice point, so backtracking is just dropping a copy.
struct Search {
  std::map<std::string, Term> evars;
  ConstraintList constraints;
  std::size_t fresh = 0;
};

struct Ctx {
  PureClosure pi;
  std::vector<HeapAtom> sigma;
  LinearExpr theta;
  std::size_t unfolds = 0;
};

/// Names bound by goal quantifiers and clause existentials.
using GoalEnv = std::map<std::string, Term>;

/// After matching a segment, `t3` must not be one of the consumed nodes.
struct Obligation {
  Term t3;
  std::optional<Term> node;     // single peeled node
  std::optional<Term> seg_end;  // end of an absorbed segment
  std::vector<HeapAtom> others;
};

bool is_evar(const Term& t) { return t.kind == Term::Kind::Evar; }

Term chase(Term t, const Search& s) {
  while (is_evar(t)) {
    auto it = s.evars.find(t.name);
    if (it == s.evars.end()) break;
    t = it->second;
  }
  return t;
}

Term in_env(const Term& t, const GoalEnv& env) {
  if (t.kind == Term::Kind::Var) {
    auto it = env.find(t.name);
    if (it != env.end()) return it->second;
  }
  return t;
}

HeapAtom in_env(HeapAtom h, const GoalEnv& env) {
  h.from = in_env(h.from, env);
  h.to = in_env(h.to, env);
  return h;
}

std::string fresh_name(std::size_t& counter, const char* hint) {
  return std::string("_") + hint + std::to_string(counter++);
}

// ---------------------------------------------------------------------------
// saturation

void add_fact(Ctx& c, const PureAtom& p, bool& changed) {
  if (c.pi.entails(p)) return;
  c.pi.add(p);
  changed = true;
}

/// Replaces sigma[i] (an lseg known to be nonempty) by its first node.
void unfold_lseg(Ctx& c, std::size_t i, std::size_t& fresh) {
  HeapAtom a = c.sigma[i];
  Term n = Term::var(fresh_name(fresh, "n"));
  Term d = Term::var(fresh_name(fresh, "d"));
  bool dummy = false;
  add_fact(c, PureAtom::ne(a.from, a.to), dummy);
  std::vector<HeapAtom> repl{HeapAtom::points_to(a.from, kNextField, n),
                             HeapAtom::points_to(a.from, kDataField, d),
                             HeapAtom::lseg(a.annotation, n, a.to)};
  c.sigma.erase(c.sigma.begin() + static_cast<std::ptrdiff_t>(i));
  c.sigma.insert(c.sigma.begin() + static_cast<std::ptrdiff_t>(i), repl.begin(), repl.end());
  c.theta += a.annotation;
  ++c.unfolds;
}

void unfold_tree(Ctx& c, std::size_t i, std::size_t& fresh) {
  HeapAtom a = c.sigma[i];
  Term l = Term::var(fresh_name(fresh, "l"));
  Term r = Term::var(fresh_name(fresh, "r"));
  Term d = Term::var(fresh_name(fresh, "d"));
  std::vector<HeapAtom> repl{HeapAtom::points_to(a.from, kLeftField, l),
                             HeapAtom::points_to(a.from, kRightField, r),
                             HeapAtom::points_to(a.from, kDataField, d), HeapAtom::tree(a.annotation, l),
                             HeapAtom::tree(a.annotation, r)};
  c.sigma.erase(c.sigma.begin() + static_cast<std::ptrdiff_t>(i));
  c.sigma.insert(c.sigma.begin() + static_cast<std::ptrdiff_t>(i), repl.begin(), repl.end());
  c.theta += a.annotation;
  ++c.unfolds;
}

/// One round of the pure rules; returns true if Π grew.
bool cell_facts(Ctx& c) {
  bool changed = false;
  for (std::size_t i = 0; i < c.sigma.size(); ++i) {
    const HeapAtom& a = c.sigma[i];
    if (a.kind != HeapAtom::Kind::PointsTo) continue;
    add_fact(c, PureAtom::ne(a.from, Term::null()), changed);
    for (std::size_t j = i + 1; j < c.sigma.size(); ++j) {
      const HeapAtom& b = c.sigma[j];
      if (b.kind == HeapAtom::Kind::PointsTo && b.field == a.field) add_fact(c, PureAtom::ne(a.from, b.from), changed);
    }
    if (c.pi.contradictory()) return true;
  }
  return changed;
}

std::vector<Ctx> saturate_ctx(Ctx start, std::size_t& fresh, std::size_t max_unfold, bool& exceeded) {
  std::vector<Ctx> done;
  std::vector<Ctx> work{std::move(start)};
  while (!work.empty()) {
    Ctx c = std::move(work.back());
    work.pop_back();
    while (true) {
      if (c.pi.contradictory()) break;
      if (cell_facts(c)) continue;
      if (c.unfolds > max_unfold) {
        exceeded = true;
        return {};
      }
      bool changed = false;
      for (std::size_t i = 0; i < c.sigma.size() && !changed; ++i) {
        const HeapAtom& a = c.sigma[i];
        if (a.kind == HeapAtom::Kind::Lseg) {
          if (c.pi.entails_equal(a.from, a.to)) {
            c.sigma.erase(c.sigma.begin() + static_cast<std::ptrdiff_t>(i));
            changed = true;
          } else if (c.pi.entails_equal(a.from, Term::null())) {
            Term end = a.to;
            c.sigma.erase(c.sigma.begin() + static_cast<std::ptrdiff_t>(i));
            c.pi.add(PureAtom::eq(end, Term::null()));
            changed = true;
          } else if (c.pi.entails_distinct(a.from, a.to)) {
            unfold_lseg(c, i, fresh);
            changed = true;
          } else if (c.pi.entails_distinct(a.from, Term::null())) {
            // either empty (from = to) or a first node
            Ctx empty = c;
            empty.pi.add(PureAtom::eq(a.from, a.to));
            empty.sigma.erase(empty.sigma.begin() + static_cast<std::ptrdiff_t>(i));
            work.push_back(std::move(empty));
            unfold_lseg(c, i, fresh);
            changed = true;
          }
        } else if (a.kind == HeapAtom::Kind::Tree) {
          if (c.pi.entails_equal(a.from, Term::null())) {
            c.sigma.erase(c.sigma.begin() + static_cast<std::ptrdiff_t>(i));
            changed = true;
          } else if (c.pi.entails_distinct(a.from, Term::null())) {
            unfold_tree(c, i, fresh);
            changed = true;
          }
        }
      }
      if (!changed) {
        done.push_back(std::move(c));
        break;
      }
    }
  }
  // branches were explored depth-first from the back; restore source order
  std::reverse(done.begin(), done.end());
  return done;
}

Ctx make_ctx(const ProofContext& p) {
  Ctx c;
  for (const auto& a : p.pure) c.pi.add(a);
  c.sigma = p.heap;
  c.theta = p.resource;
  return c;
}

ProofContext export_ctx(const Ctx& c) {
  ProofContext p;
  p.pure = c.pi.atoms();
  p.heap = c.sigma;
  p.resource = c.theta;
  return p;
}

// ---------------------------------------------------------------------------
// search

using Cont = std::function<bool(Search&)>;
using ClauseCont = std::function<bool(Ctx&, Search&)>;
using HeapCont = std::function<bool(Ctx&, Search&, std::vector<Obligation>&)>;

class Engine {
public:
  Engine(const ProverOptions& opts, bool strict) : opts_(opts), strict_(strict) {}

  bool aborted() const { return aborted_; }
  bool bound_exceeded() const { return bound_exceeded_; }
  std::size_t steps() const { return steps_; }
  const std::string& failure() const { return failure_; }

  bool prove(Ctx ctx, const Goal& g, const GoalEnv& env, Search st, int depth, const Cont& k) {
    bool exceeded = false;
    auto branches = saturate_ctx(std::move(ctx), st.fresh, opts_.max_unfold_depth, exceeded);
    if (exceeded) {
      bound_exceeded_ = true;
      aborted_ = true;
      fail(1 << 29, "unfold depth bound " + std::to_string(opts_.max_unfold_depth) + " exceeded");
      return false;
    }
    return prove_branches(branches, 0, g, env, st, depth, k);
  }

  bool match_atoms(const Ctx& ctx, const std::vector<HeapAtom>& goal, const std::vector<Obligation>& obs,
                   const Search& st, int depth, const HeapCont& k) {
    if (!tick()) return false;
    if (goal.empty()) {
      Ctx c = ctx;
      Search s = st;
      std::vector<Obligation> o = obs;
      return k(c, s, o);
    }
    // atoms whose root is already known first
    std::size_t idx = 0;
    for (std::size_t i = 0; i < goal.size(); ++i) {
      if (!is_evar(chase(goal[i].from, st))) {
        idx = i;
        break;
      }
    }
    HeapAtom a = goal[idx];
    std::vector<HeapAtom> rest = goal;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(idx));
    switch (a.kind) {
      case HeapAtom::Kind::PointsTo:
        return match_pt(ctx, a, rest, obs, st, depth, k);
      case HeapAtom::Kind::Lseg:
        return match_lseg(ctx, a, rest, obs, st, depth, k);
      case HeapAtom::Kind::Tree:
        return match_tree(ctx, a, rest, obs, st, depth, k);
    }
    return false;
  }

  Term ground(const Term& t, const GoalEnv& env, Search& st) {
    Term r = chase(in_env(t, env), st);
    if (is_evar(r)) {
      Term v = Term::var(fresh_name(st.fresh, "b"));
      st.evars[r.name] = v;
      return v;
    }
    return r;
  }

  /// Adds a clause to the context; existentials become fresh variables.
  Ctx extend(const Ctx& ctx, const Clause& c, const GoalEnv& env, Search& st) {
    GoalEnv e = env;
    for (const auto& x : c.existentials) e[x] = Term::var(fresh_name(st.fresh, "x"));
    Ctx out = ctx;
    for (const auto& p : c.pure) out.pi.add({ground(p.lhs, e, st), p.equal, ground(p.rhs, e, st)});
    for (const auto& h : c.heap) {
      HeapAtom g = h;
      g.from = ground(h.from, e, st);
      if (h.kind != HeapAtom::Kind::Tree) g.to = ground(h.to, e, st);
      out.sigma.push_back(g);
    }
    out.theta += c.resource;
    return out;
  }

  std::string origin;

private:
  bool tick() {
    if (aborted_) return false;
    if (++steps_ > opts_.max_steps) {
      aborted_ = true;
      fail(1 << 29, "search step budget exhausted");
      return false;
    }
    return true;
  }

  // Later stages at the same depth got further: a leftover heap means every
  // goal atom was matched.
  void fail(int depth, const std::string& why, int stage = 0) {
    long long rank = (long long)depth * 2 + stage;
    if (rank >= failure_depth_) {
      failure_depth_ = rank;
      failure_ = why;
    }
  }

  std::string show(const HeapAtom& a, const Search& s) const {
    HeapAtom b = a;
    b.from = chase(a.from, s);
    b.to = chase(a.to, s);
    return to_string(b);
  }

  bool add_constraint(const LinearExpr& lhs, const LinearExpr& rhs, Search& s, const std::string& why) {
    LinearExpr d = lhs - rhs;
    if (d.is_constant()) {
      if (d.constant() >= 0) return true;
      if (strict_) return false;
    }
    s.constraints = std::make_shared<const ConstraintNode>(
        ConstraintNode{Constraint{lhs, rhs, origin + ": " + why}, s.constraints});
    return true;
  }

  bool equate(const LinearExpr& a, const LinearExpr& b, Search& s, const std::string& why) {
    return add_constraint(a, b, s, why) && add_constraint(b, a, s, why);
  }

  /// Binds an unbound goal term to a context term, or checks Π-equality.
  bool unify(const Ctx& ctx, const Term& ctx_term, const Term& goal_term, Search& s) const {
    Term g = chase(goal_term, s);
    if (is_evar(g)) {
      s.evars[g.name] = ctx_term;
      return true;
    }
    return ctx.pi.entails_equal(ctx_term, g);
  }

  bool prove_branches(const std::vector<Ctx>& branches, std::size_t i, const Goal& g, const GoalEnv& env,
                      Search& st, int depth, const Cont& k) {
    if (i == branches.size()) return k(st);
    return prove_sat(branches[i], g, env, st, depth,
                     [&](Search& s2) { return prove_branches(branches, i + 1, g, env, s2, depth, k); });
  }

  bool prove_sat(const Ctx& ctx, const Goal& g, const GoalEnv& env, Search st, int depth, const Cont& k) {
    if (!tick()) return false;
    switch (g->kind()) {
      case GoalNode::Kind::Leaf:
        for (const auto& c : g->assertion().clauses) {
          bool ok = match_clause(ctx, c, env, st, depth, [&](Ctx& left, Search& s2) {
            if (!left.sigma.empty()) {
              std::string leftover;
              for (const auto& h : left.sigma) leftover += (leftover.empty() ? "" : ", ") + to_string(h);
              fail(depth, "leftover heap: " + leftover, 1);
              return false;
            }
            return k(s2);
          });
          if (ok) return true;
        }
        return false;
      case GoalNode::Kind::Star:
        for (const auto& c : g->assertion().clauses) {
          bool ok = match_clause(ctx, c, env, st, depth, [&](Ctx& left, Search& s2) {
            return prove_sat(left, g->body(), env, s2, depth + 1, k);
          });
          if (ok) return true;
        }
        return false;
      case GoalNode::Kind::Wand:
        return wand(ctx, g, 0, env, st, depth, k);
      case GoalNode::Kind::And:
        return prove_sat(ctx, g->body(), env, st, depth + 1,
                         [&](Search& s2) { return prove_sat(ctx, g->second(), env, s2, depth + 1, k); });
      case GoalNode::Kind::Implies: {
        Ctx c = ctx;
        c.pi.add({ground(g->atom().lhs, env, st), g->atom().equal, ground(g->atom().rhs, env, st)});
        if (c.pi.contradictory()) return k(st);
        return prove(std::move(c), g->body(), env, st, depth + 1, k);
      }
      case GoalNode::Kind::Forall: {
        GoalEnv e = env;
        e[g->variable()] = Term::var(fresh_name(st.fresh, "u"));
        return prove_sat(ctx, g->body(), e, st, depth + 1, k);
      }
      case GoalNode::Kind::Exists: {
        GoalEnv e = env;
        e[g->variable()] = Term::evar(fresh_name(st.fresh, "e"));
        return prove_sat(ctx, g->body(), e, st, depth + 1, k);
      }
    }
    return false;
  }

  bool wand(const Ctx& ctx, const Goal& g, std::size_t i, const GoalEnv& env, Search& st, int depth,
            const Cont& k) {
    const auto& clauses = g->assertion().clauses;
    if (i == clauses.size()) return k(st);
    Search s = st;
    Ctx c = extend(ctx, clauses[i], env, s);
    return prove(std::move(c), g->body(), env, s, depth + 1,
                 [&](Search& s2) { return wand(ctx, g, i + 1, env, s2, depth, k); });
  }

  bool match_clause(const Ctx& ctx, const Clause& c, const GoalEnv& env, const Search& st0, int depth,
                    const ClauseCont& k) {
    Search st = st0;
    GoalEnv e = env;
    for (const auto& x : c.existentials) e[x] = Term::evar(fresh_name(st.fresh, "e"));
    std::vector<HeapAtom> goal;
    for (const auto& h : c.heap) goal.push_back(in_env(h, e));
    std::vector<PureAtom> pure;
    for (const auto& p : c.pure) pure.push_back({in_env(p.lhs, e), p.equal, in_env(p.rhs, e)});
    return match_atoms(ctx, goal, {}, st, depth, [&](Ctx& left, Search& s, std::vector<Obligation>& obs) {
      return finish_clause(left, pure, 0, obs, 0, c.resource, s, depth, k);
    });
  }

  std::vector<Term> candidates(const Ctx& ctx) const {
    std::set<Term> reps{Term::null()};
    for (const auto& t : ctx.pi.terms()) reps.insert(ctx.pi.representative(t));
    for (const auto& h : ctx.sigma) {
      reps.insert(ctx.pi.representative(h.from));
      if (h.kind != HeapAtom::Kind::Tree) reps.insert(ctx.pi.representative(h.to));
    }
    return {reps.begin(), reps.end()};
  }

  // Pure part, segment obligations, then the resource part.
  bool finish_clause(Ctx& ctx, const std::vector<PureAtom>& pure, std::size_t j, std::vector<Obligation>& obs,
                     std::size_t o, const ResourceExpr& theta, Search& s, int depth, const ClauseCont& k) {
    if (!tick()) return false;
    if (j < pure.size()) {
      const PureAtom& p = pure[j];
      Term l = chase(p.lhs, s), r = chase(p.rhs, s);
      if (is_evar(l) || is_evar(r)) {
        if (p.equal) {
          Search s2 = s;
          if (is_evar(l)) {
            s2.evars[l.name] = r;
          } else {
            s2.evars[r.name] = l;
          }
          return finish_clause(ctx, pure, j + 1, obs, o, theta, s2, depth, k);
        }
        const Term& free = is_evar(l) ? l : r;
        for (const auto& cand : candidates(ctx)) {
          Search s2 = s;
          s2.evars[free.name] = cand;
          if (finish_clause(ctx, pure, j, obs, o, theta, s2, depth, k)) return true;
        }
        return false;
      }
      if (!ctx.pi.entails({l, p.equal, r})) {
        fail(depth, "pure fact not entailed: " + to_string(PureAtom{l, p.equal, r}));
        return false;
      }
      return finish_clause(ctx, pure, j + 1, obs, o, theta, s, depth, k);
    }
    if (o < obs.size()) {
      Term t3 = chase(obs[o].t3, s);
      if (is_evar(t3)) {
        for (const auto& cand : candidates(ctx)) {
          Search s2 = s;
          s2.evars[t3.name] = cand;
          if (finish_clause(ctx, pure, j, obs, o, theta, s2, depth, k)) return true;
        }
        return false;
      }
      if (!discharge(ctx, obs[o], t3)) {
        fail(depth, "cannot show " + to_string(t3) + " lies outside the matched segment");
        return false;
      }
      return finish_clause(ctx, pure, j, obs, o + 1, theta, s, depth, k);
    }
    Search s2 = s;
    if (!add_constraint(ctx.theta, theta, s2, "resource")) {
      fail(depth, "insufficient resource: " + to_string(ctx.theta) + " < " + to_string(theta));
      return false;
    }
    Ctx left = ctx;
    left.theta -= theta;
    return k(left, s2);
  }

  bool discharge(const Ctx& ctx, const Obligation& ob, const Term& t3) const {
    if (ob.seg_end && ctx.pi.entails_equal(t3, *ob.seg_end)) return true;
    if (ob.node && ctx.pi.entails_distinct(t3, *ob.node)) return true;
    return outside(ctx.pi, ob.others, t3);
  }

  // t3 is null, owns a list/tree cell, or starts a segment that ends outside.
  static bool outside(const PureClosure& pi, const std::vector<HeapAtom>& others, const Term& t3) {
    if (pi.entails_equal(t3, Term::null())) return true;
    for (const auto& h : others) {
      if (!pi.entails_equal(h.from, t3)) continue;
      if (h.kind == HeapAtom::Kind::PointsTo && (h.field == kNextField || h.field == kDataField)) return true;
      if (h.kind == HeapAtom::Kind::Tree) return true;
    }
    for (std::size_t i = 0; i < others.size(); ++i) {
      const HeapAtom& h = others[i];
      if (h.kind != HeapAtom::Kind::Lseg || !pi.entails_equal(h.from, t3)) continue;
      std::vector<HeapAtom> rest = others;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      if (outside(pi, rest, h.to)) return true;
    }
    return false;
  }

  static std::vector<HeapAtom> without(const std::vector<HeapAtom>& v, std::size_t a,
                                       std::size_t b = std::size_t(-1), std::size_t c = std::size_t(-1)) {
    std::vector<HeapAtom> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i != a && i != b && i != c) out.push_back(v[i]);
    }
    return out;
  }

  std::optional<std::size_t> cell_at(const Ctx& ctx, const Term& addr, const char* field) const {
    for (std::size_t i = 0; i < ctx.sigma.size(); ++i) {
      const HeapAtom& h = ctx.sigma[i];
      if (h.kind == HeapAtom::Kind::PointsTo && h.field == field && ctx.pi.entails_equal(h.from, addr)) return i;
    }
    return std::nullopt;
  }

  bool match_pt(const Ctx& ctx, const HeapAtom& a, const std::vector<HeapAtom>& rest,
                const std::vector<Obligation>& obs, const Search& st, int depth, const HeapCont& k) {
    for (std::size_t j = 0; j < ctx.sigma.size(); ++j) {
      const HeapAtom& c = ctx.sigma[j];
      if (c.kind != HeapAtom::Kind::PointsTo || c.field != a.field) continue;
      Search s = st;
      if (!unify(ctx, c.from, a.from, s) || !unify(ctx, c.to, a.to, s)) continue;
      Ctx c2 = ctx;
      c2.sigma = without(ctx.sigma, j);
      if (match_atoms(c2, rest, obs, s, depth, k)) return true;
      if (aborted_) return false;
    }
    fail(depth, "no context cell matches " + show(a, st));
    return false;
  }

  bool match_lseg(const Ctx& ctx, const HeapAtom& a, const std::vector<HeapAtom>& rest,
                  const std::vector<Obligation>& obs, const Search& st, int depth, const HeapCont& k) {
    Term f = chase(a.from, st), t = chase(a.to, st);
    // empty segment
    if (!is_evar(f) && !is_evar(t)) {
      if (ctx.pi.entails_equal(f, t)) return match_atoms(ctx, rest, obs, st, depth, k);
    } else {
      Search s = st;
      if (is_evar(f)) {
        s.evars[f.name] = t;
      } else {
        s.evars[t.name] = f;
      }
      if (match_atoms(ctx, rest, obs, s, depth, k)) return true;
      if (aborted_) return false;
    }
    // absorb a whole context segment with the same start
    for (std::size_t j = 0; j < ctx.sigma.size(); ++j) {
      const HeapAtom& c = ctx.sigma[j];
      if (c.kind != HeapAtom::Kind::Lseg) continue;
      Search s = st;
      if (!unify(ctx, c.from, a.from, s)) continue;
      if (c.annotation != a.annotation && !equate(c.annotation, a.annotation, s, "segment annotation")) continue;
      Ctx c2 = ctx;
      c2.sigma = without(ctx.sigma, j);
      std::vector<HeapAtom> rest2{HeapAtom::lseg(a.annotation, c.to, a.to)};
      rest2.insert(rest2.end(), rest.begin(), rest.end());
      std::vector<Obligation> obs2 = obs;
      obs2.push_back({a.to, std::nullopt, c.to, c2.sigma});
      if (match_atoms(c2, rest2, obs2, s, depth, k)) return true;
      if (aborted_) return false;
    }
    // peel the first node off the context
    for (std::size_t j = 0; j < ctx.sigma.size(); ++j) {
      const HeapAtom& c = ctx.sigma[j];
      if (c.kind != HeapAtom::Kind::PointsTo || c.field != kNextField) continue;
      Search s = st;
      if (!unify(ctx, c.from, a.from, s)) continue;
      auto d = cell_at(ctx, c.from, kDataField);
      if (!d) continue;
      if (!add_constraint(ctx.theta, a.annotation, s, "segment node")) continue;
      Ctx c2 = ctx;
      c2.sigma = without(ctx.sigma, j, *d);
      c2.theta -= a.annotation;
      std::vector<HeapAtom> rest2{HeapAtom::lseg(a.annotation, c.to, a.to)};
      rest2.insert(rest2.end(), rest.begin(), rest.end());
      std::vector<Obligation> obs2 = obs;
      obs2.push_back({a.to, c.from, std::nullopt, c2.sigma});
      if (match_atoms(c2, rest2, obs2, s, depth, k)) return true;
      if (aborted_) return false;
    }
    fail(depth, "no match for " + show(a, st));
    return false;
  }

  bool match_tree(const Ctx& ctx, const HeapAtom& a, const std::vector<HeapAtom>& rest,
                  const std::vector<Obligation>& obs, const Search& st, int depth, const HeapCont& k) {
    Term r = chase(a.from, st);
    if (!is_evar(r)) {
      if (ctx.pi.entails_equal(r, Term::null())) return match_atoms(ctx, rest, obs, st, depth, k);
    } else {
      Search s = st;
      s.evars[r.name] = Term::null();
      if (match_atoms(ctx, rest, obs, s, depth, k)) return true;
      if (aborted_) return false;
    }
    for (std::size_t j = 0; j < ctx.sigma.size(); ++j) {
      const HeapAtom& c = ctx.sigma[j];
      if (c.kind != HeapAtom::Kind::Tree) continue;
      Search s = st;
      if (!unify(ctx, c.from, a.from, s)) continue;
      if (c.annotation != a.annotation && !equate(c.annotation, a.annotation, s, "tree annotation")) continue;
      Ctx c2 = ctx;
      c2.sigma = without(ctx.sigma, j);
      if (match_atoms(c2, rest, obs, s, depth, k)) return true;
      if (aborted_) return false;
    }
    for (std::size_t j = 0; j < ctx.sigma.size(); ++j) {
      const HeapAtom& c = ctx.sigma[j];
      if (c.kind != HeapAtom::Kind::PointsTo || c.field != kLeftField) continue;
      Search s = st;
      if (!unify(ctx, c.from, a.from, s)) continue;
      auto rc = cell_at(ctx, c.from, kRightField);
      auto dc = cell_at(ctx, c.from, kDataField);
      if (!rc || !dc) continue;
      if (!add_constraint(ctx.theta, a.annotation, s, "tree node")) continue;
      Ctx c2 = ctx;
      c2.sigma = without(ctx.sigma, j, *rc, *dc);
      c2.theta -= a.annotation;
      std::vector<HeapAtom> rest2{HeapAtom::tree(a.annotation, c.to),
                                  HeapAtom::tree(a.annotation, ctx.sigma[*rc].to)};
      rest2.insert(rest2.end(), rest.begin(), rest.end());
      if (match_atoms(c2, rest2, obs, s, depth, k)) return true;
      if (aborted_) return false;
    }
    fail(depth, "no match for " + show(a, st));
    return false;
  }

  const ProverOptions& opts_;
  bool strict_;
  bool aborted_ = false;
  bool bound_exceeded_ = false;
  std::size_t steps_ = 0;
  std::string failure_;
  long long failure_depth_ = -1;
};

ProofResult run_engine(const std::vector<ProofContext>& antecedents, const Goal& goal, const ProverOptions& opts,
                       const std::string& id) {
  ProofResult result;
  for (bool strict : {true, false}) {
    Engine eng(opts, strict);
    eng.origin = id;
    std::optional<Search> final;
    std::function<bool(std::size_t, Search&)> chain = [&](std::size_t i, Search& st) -> bool {
      if (i == antecedents.size()) {
        final = st;
        return true;
      }
      return eng.prove(make_ctx(antecedents[i]), goal, {}, st, 0, [&](Search& s2) { return chain(i + 1, s2); });
    };
    Search st0;
    bool ok = chain(0, st0);
    result.steps += eng.steps();
    if (ok) {
      result.proved = true;
      result.constraints = flatten(final->constraints);
      result.failure.clear();
      return result;
    }
    if (strict || result.failure.empty()) result.failure = eng.failure();
    if (eng.aborted()) {
      result.bound_exceeded = eng.bound_exceeded() || result.bound_exceeded;
      result.failure = eng.failure();
      return result;
    }
  }
  return result;
}

}  // namespace

std::optional<std::vector<ProofContext>> saturate(const ProofContext& ctx, std::size_t& fresh,
                                                  const ProverOptions& opts) {
  bool exceeded = false;
  auto out = saturate_ctx(make_ctx(ctx), fresh, opts.max_unfold_depth, exceeded);
  if (exceeded) return std::nullopt;
  std::vector<ProofContext> res;
  for (const auto& c : out) res.push_back(export_ctx(c));
  return res;
}

std::vector<HeapMatch> match_heap(const ProofContext& ctx, const std::vector<HeapAtom>& goal,
                                  const std::vector<std::string>& existentials, std::size_t limit) {
  ProverOptions opts;
  Engine eng(opts, false);
  eng.origin = "match";
  Search st;
  GoalEnv env;
  for (const auto& x : existentials) env[x] = Term::evar("w_" + x);
  std::vector<HeapAtom> g;
  for (const auto& h : goal) g.push_back(in_env(h, env));
  std::vector<HeapMatch> out;
  eng.match_atoms(make_ctx(ctx), g, {}, st, 0, [&](Ctx& left, Search& s, std::vector<Obligation>&) {
    HeapMatch m;
    m.remaining = export_ctx(left);
    m.constraints = flatten(s.constraints);
    for (const auto& x : existentials) {
      Term t = chase(env[x], s);
      if (!is_evar(t)) m.witnesses[x] = t;
    }
    out.push_back(std::move(m));
    return out.size() >= limit;
  });
  return out;
}

ProofResult prove(const ProofContext& ctx, const Goal& goal, const ProverOptions& opts) {
  return run_engine({ctx}, goal, opts, "goal");
}

ProofResult prove_vc(const VerificationCondition& vc, const ProverOptions& opts) {
  std::vector<ProofContext> ants;
  std::size_t counter = 0;
  for (const auto& c : vc.antecedent.clauses) {
    TermMap m;
    for (const auto& x : c.existentials) m[Term::var(x)] = Term::var(fresh_name(counter, "k"));
    ProofContext p;
    for (const auto& a : c.pure) p.pure.push_back(subst(a, m));
    for (const auto& h : c.heap) p.heap.push_back(subst(h, m));
    p.resource = c.resource;
    ants.push_back(std::move(p));
  }
  ProofResult r = run_engine(ants, vc.consequent, opts, vc.id());
  if (!r.proved) r.failure = vc.id() + ": " + r.failure;
  return r;
}

}  // namespace amort
