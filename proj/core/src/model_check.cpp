#include "amort/model_check.hpp"

#include <algorithm>

namespace amort {

std::string to_string(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int:
      return std::to_string(v.z);
    case Value::Kind::Addr:
      return "@" + std::to_string(v.a);
    case Value::Kind::Null:
      return "null";
  }
  return "?";
}

std::string to_string(const Heap& h) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : h) {
    if (!first) out += ", ";
    first = false;
    out += "@" + std::to_string(k.first) + "." + k.second + " = " + to_string(v);
  }
  return out + "}";
}

namespace {

struct StepBudget {
  std::size_t used = 0;
  std::size_t max;
  void tick() {
    if (++used > max) throw OracleSizeExceeded("oracle step budget exceeded");
  }
};

std::optional<Value> eval(const Term& t, const Env& env) {
  switch (t.kind) {
    case Term::Kind::Null:
      return Value::null();
    case Term::Kind::Int:
      return Value::integer(t.value);
    default: {
      auto it = env.find(t);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
  }
}

/// Binds an unbound term or checks a bound one against `v`.
bool unify(const Term& t, const Value& v, Env& env) {
  auto cur = eval(t, env);
  if (cur) return *cur == v;
  env[t] = v;
  return true;
}

void add_addresses(const Value& v, std::set<Address>& out) {
  if (v.is_addr()) out.insert(v.a);
}

std::set<Address> addresses_of(const Heap& h, const Env& env) {
  std::set<Address> out;
  for (const auto& [k, v] : h) {
    out.insert(k.first);
    add_addresses(v, out);
  }
  for (const auto& [_, v] : env) add_addresses(v, out);
  return out;
}

void collect_literals(const Term& t, std::set<std::int64_t>& out) {
  if (t.kind == Term::Kind::Int) out.insert(t.value);
}

std::set<std::int64_t> literals_of(const std::set<Term>& terms) {
  std::set<std::int64_t> out{0};
  for (const auto& t : terms) collect_literals(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// model generation

class Generator {
public:
  Generator(const Clause& c, const Valuation& val, const GenerateOptions& opts,
            const std::function<bool(const Model&)>& visit)
      : c_(c), val_(val), opts_(opts), visit_(visit) {
    budget_.max = 2'000'000;
  }

  void run(const Env& base) {
    State st;
    st.env = base;
    for (const auto& x : c_.existentials) st.env.erase(Term::var(x));
    Address top = opts_.first_address;
    for (Address a : addresses_of(opts_.frame, base)) top = std::max(top, a + 1);
    st.next = top;
    st.demand = c_.resource.evaluate(val_);
    base_ = base;
    atoms(0, st);
  }

private:
  struct State {
    Env env;
    Heap heap;
    Address next = 1;
    Rational demand;
    std::vector<Address> nodes;  // nodes of the atom being built
  };

  using Cont = std::function<void(State&)>;

  bool cell_free(const State& st, Address a, const std::string& f) const {
    return !st.heap.count({a, f}) && !opts_.frame.count({a, f});
  }

  bool fields_free(const State& st, Address a, const std::vector<std::string>& fields) const {
    for (const auto& f : fields) {
      if (!cell_free(st, a, f)) return false;
    }
    return true;
  }

  bool room(const State& st, std::size_t cells) const { return st.heap.size() + cells <= opts_.max_cells; }

  std::vector<Value> domain(State& st, const Term* t, Address& fresh) {
    std::vector<Value> out;
    if (t) {
      auto it = opts_.preferred.find(*t);
      if (it != opts_.preferred.end()) out.push_back(it->second);
    }
    fresh = st.next;
    out.push_back(Value::addr(fresh));
    Heap both = st.heap;
    both.insert(opts_.frame.begin(), opts_.frame.end());
    for (Address a : addresses_of(both, st.env)) out.push_back(Value::addr(a));
    out.push_back(Value::null());
    out.push_back(Value::integer(0));
    for (auto z : opts_.literals) {
      if (z != 0) out.push_back(Value::integer(z));
    }
    std::vector<Value> uniq;
    for (const auto& v : out) {
      if (std::find(uniq.begin(), uniq.end(), v) == uniq.end()) uniq.push_back(v);
    }
    return uniq;
  }

  // Chooses a value for `t` (bound or over the domain) and continues.
  void with_value(State& st, const Term& t, const std::function<void(State&, const Value&)>& k) {
    if (auto v = eval(t, st.env)) {
      k(st, *v);
      return;
    }
    Address fresh;
    for (const auto& v : domain(st, &t, fresh)) {
      if (stop_) return;
      State s = st;
      if (v.is_addr() && v.a == fresh) ++s.next;
      s.env[t] = v;
      k(s, v);
    }
  }

  // Chooses an address for a new node carrying `fields`: the bound value of
  // `t`, or (unbound / anonymous) a fresh address or an existing unallocated one.
  void with_node(State& st, const Term* t, const std::vector<std::string>& fields,
                 const std::function<void(State&, Address)>& k) {
    if (!room(st, fields.size())) return;
    if (t) {
      if (auto v = eval(*t, st.env)) {
        if (!v->is_addr() || !fields_free(st, v->a, fields)) return;
        k(st, v->a);
        return;
      }
    }
    std::vector<Address> cands;
    if (t) {
      auto it = opts_.preferred.find(*t);
      if (it != opts_.preferred.end() && it->second.is_addr()) cands.push_back(it->second.a);
    }
    cands.push_back(st.next);
    Heap both = st.heap;
    both.insert(opts_.frame.begin(), opts_.frame.end());
    for (Address a : addresses_of(both, st.env)) cands.push_back(a);
    std::set<Address> tried;
    for (Address a : cands) {
      if (stop_) return;
      if (!tried.insert(a).second) continue;
      if (!fields_free(st, a, fields)) continue;
      if (std::find(st.nodes.begin(), st.nodes.end(), a) != st.nodes.end()) continue;
      State s = st;
      if (a == st.next) ++s.next;
      if (t) s.env[*t] = Value::addr(a);
      k(s, a);
    }
  }

  std::vector<std::size_t> sizes(const State& st, std::size_t per_node) const {
    if (opts_.fixed_size) return {*opts_.fixed_size};
    std::vector<std::size_t> out;
    std::size_t left = opts_.max_cells >= st.heap.size() ? opts_.max_cells - st.heap.size() : 0;
    for (std::size_t n = 0; n * per_node <= left; ++n) out.push_back(n);
    return out;
  }

  void atoms(std::size_t i, State& st) {
    if (stop_) return;
    budget_.tick();
    if (i == c_.heap.size()) {
      pure(0, st);
      return;
    }
    const HeapAtom& h = c_.heap[i];
    switch (h.kind) {
      case HeapAtom::Kind::PointsTo:
        with_node(st, &h.from, {h.field}, [&](State& s1, Address a) {
          s1.heap[{a, h.field}] = Value::null();
          with_value(s1, h.to, [&](State& s2, const Value& v) {
            s2.heap[{a, h.field}] = v;
            atoms(i + 1, s2);
          });
        });
        break;
      case HeapAtom::Kind::Lseg:
        for (std::size_t n : sizes(st, 2)) {
          if (stop_) return;
          State s = st;
          s.nodes.clear();
          lseg(i, h, n, s);
        }
        break;
      case HeapAtom::Kind::Tree:
        if (opts_.fixed_size) {
          State s = st;
          s.nodes.clear();
          fixed_tree(i, h, *opts_.fixed_size, s);
        } else {
          State s = st;
          s.nodes.clear();
          Rational per = h.annotation.evaluate(val_);
          tree_node(s, &h.from, per, [&](State& s2, const Value&) { atoms(i + 1, s2); });
        }
        break;
    }
  }

  void lseg(std::size_t i, const HeapAtom& h, std::size_t n, State& st) {
    if (n == 0) {
      auto x = eval(h.from, st.env);
      auto y = eval(h.to, st.env);
      if (x && y) {
        if (*x == *y) atoms(i + 1, st);
      } else if (x) {
        st.env[h.to] = *x;
        atoms(i + 1, st);
      } else if (y) {
        st.env[h.from] = *y;
        atoms(i + 1, st);
      } else {
        with_value(st, h.from, [&](State& s, const Value& v) {
          s.env[h.to] = v;
          atoms(i + 1, s);
        });
      }
      return;
    }
    if (!room(st, 2 * n)) return;
    lseg_nodes(i, h, n, st);
  }

  void lseg_nodes(std::size_t i, const HeapAtom& h, std::size_t n, State& st) {
    const std::vector<std::string> fields{kNextField, kDataField};
    const Term* t = st.nodes.empty() ? &h.from : nullptr;
    with_node(st, t, fields, [&](State& s, Address a) {
      s.nodes.push_back(a);
      s.heap[{a, kNextField}] = Value::null();
      s.heap[{a, kDataField}] = Value::integer(0);
      if (s.nodes.size() < n) {
        lseg_nodes(i, h, n, s);
        return;
      }
      with_value(s, h.to, [&](State& s2, const Value& end) {
        if (end.is_addr() && std::find(s2.nodes.begin(), s2.nodes.end(), end.a) != s2.nodes.end()) return;
        for (std::size_t k = 0; k < s2.nodes.size(); ++k) {
          s2.heap[{s2.nodes[k], kNextField}] = k + 1 < s2.nodes.size() ? Value::addr(s2.nodes[k + 1]) : end;
        }
        s2.demand += h.annotation.evaluate(val_) * static_cast<long long>(n);
        s2.nodes.clear();
        atoms(i + 1, s2);
      });
    });
  }

  void tree_node(State& st, const Term* t, const Rational& per,
                 const std::function<void(State&, const Value&)>& k) {
    if (stop_) return;
    budget_.tick();
    {
      State s = st;
      if (!t || unify(*t, Value::null(), s.env)) k(s, Value::null());
    }
    const std::vector<std::string> fields{kLeftField, kRightField, kDataField};
    with_node(st, t, fields, [&](State& s, Address a) {
      s.nodes.push_back(a);
      s.heap[{a, kLeftField}] = Value::null();
      s.heap[{a, kRightField}] = Value::null();
      s.heap[{a, kDataField}] = Value::integer(0);
      s.demand += per;
      tree_node(s, nullptr, per, [&](State& s2, const Value& l) {
        tree_node(s2, nullptr, per, [&](State& s3, const Value& r) {
          s3.heap[{a, kLeftField}] = l;
          s3.heap[{a, kRightField}] = r;
          k(s3, Value::addr(a));
        });
      });
    });
  }

  void fixed_tree(std::size_t i, const HeapAtom& h, std::size_t n, State& st) {
    if (n == 0) {
      if (unify(h.from, Value::null(), st.env)) atoms(i + 1, st);
      return;
    }
    if (!room(st, 3 * n)) return;
    fixed_tree_nodes(i, h, n, st);
  }

  void fixed_tree_nodes(std::size_t i, const HeapAtom& h, std::size_t n, State& st) {
    const std::vector<std::string> fields{kLeftField, kRightField, kDataField};
    const Term* t = st.nodes.empty() ? &h.from : nullptr;
    with_node(st, t, fields, [&](State& s, Address a) {
      s.nodes.push_back(a);
      s.heap[{a, kLeftField}] = Value::null();
      s.heap[{a, kRightField}] = Value::null();
      s.heap[{a, kDataField}] = Value::integer(0);
      if (s.nodes.size() < n) {
        fixed_tree_nodes(i, h, n, s);
        return;
      }
      // level order: node k has children 2k+1 and 2k+2
      for (std::size_t k = 0; k < n; ++k) {
        if (2 * k + 1 < n) s.heap[{s.nodes[k], kLeftField}] = Value::addr(s.nodes[2 * k + 1]);
        if (2 * k + 2 < n) s.heap[{s.nodes[k], kRightField}] = Value::addr(s.nodes[2 * k + 2]);
      }
      s.demand += h.annotation.evaluate(val_) * static_cast<long long>(n);
      s.nodes.clear();
      atoms(i + 1, s);
    });
  }

  void pure(std::size_t j, State& st) {
    if (stop_) return;
    if (j == c_.pure.size()) {
      extras(0, st);
      return;
    }
    const PureAtom& p = c_.pure[j];
    auto l = eval(p.lhs, st.env);
    auto r = eval(p.rhs, st.env);
    if (l && r) {
      if ((*l == *r) == p.equal) pure(j + 1, st);
      return;
    }
    if (p.equal && (l || r)) {
      st.env[l ? p.rhs : p.lhs] = l ? *l : *r;
      pure(j + 1, st);
      return;
    }
    with_value(st, l ? p.rhs : p.lhs, [&](State& s, const Value&) { pure(j, s); });
  }

  void extras(std::size_t j, State& st) {
    if (stop_) return;
    if (j == opts_.extra_terms.size()) {
      emit(st);
      return;
    }
    with_value(st, opts_.extra_terms[j], [&](State& s, const Value&) { extras(j + 1, s); });
  }

  void emit(State& st) {
    Model m;
    m.env = st.env;
    for (const auto& x : c_.existentials) {
      m.env.erase(Term::var(x));
      auto it = base_.find(Term::var(x));
      if (it != base_.end()) m.env.insert(*it);
    }
    m.heap = st.heap;
    m.demand = st.demand;
    m.next_address = st.next;
    if (m.demand < 0) return;
    if (!visit_(m)) stop_ = true;
  }

  const Clause& c_;
  const Valuation& val_;
  const GenerateOptions& opts_;
  const std::function<bool(const Model&)>& visit_;
  Env base_;
  StepBudget budget_;
  bool stop_ = false;
};

// ---------------------------------------------------------------------------
// satisfaction of assertions and goals

class Checker {
public:
  Checker(const Valuation& val, const OracleLimits& limits, std::set<std::int64_t> literals)
      : val_(val), limits_(limits), literals_(std::move(literals)) {
    budget_.max = limits.max_steps;
  }

  using Done = std::function<bool(const Heap& rest, const Env& env, const Rational& demand)>;

  bool clause(const Clause& c, const Env& env, const Heap& heap, const Done& k) {
    Env e = env;
    for (const auto& x : c.existentials) e.erase(Term::var(x));
    return atoms(c, 0, e, heap, Rational(0), [&](const Heap& rest, const Env& e2, const Rational& d) {
      return k(rest, e2, d + c.resource.evaluate(val_));
    });
  }

  bool assertion(const Assertion& s, const Env& env, const Heap& heap, const Rational& r) {
    for (const auto& c : s.clauses) {
      bool ok = clause(c, env, heap, [&](const Heap& rest, const Env&, const Rational& d) {
        return rest.empty() && d <= r;
      });
      if (ok) return true;
    }
    return false;
  }

  bool goal(const Goal& g, const Env& env, const Heap& heap, const Rational& r) {
    budget_.tick();
    switch (g->kind()) {
      case GoalNode::Kind::Leaf:
        return assertion(g->assertion(), env, heap, r);
      case GoalNode::Kind::Star:
        for (const auto& c : g->assertion().clauses) {
          bool ok = clause(c, env, heap, [&](const Heap& rest, const Env&, const Rational& d) {
            return d <= r && goal(g->body(), env, rest, r - d);
          });
          if (ok) return true;
        }
        return false;
      case GoalNode::Kind::Wand: {
        for (const auto& c : g->assertion().clauses) {
          GenerateOptions opts;
          opts.max_cells = limits_.max_wand_cells;
          opts.frame = heap;
          opts.literals = literals_;
          bool all = true;
          generate_models(c, env, val_, opts, [&](const Model& m) {
            budget_.tick();
            Heap joined = heap;
            joined.insert(m.heap.begin(), m.heap.end());
            if (!goal(g->body(), m.env, joined, r + m.demand)) all = false;
            return all;
          });
          if (!all) return false;
        }
        return true;
      }
      case GoalNode::Kind::And:
        return goal(g->body(), env, heap, r) && goal(g->second(), env, heap, r);
      case GoalNode::Kind::Implies: {
        auto l = eval(g->atom().lhs, env);
        auto rr = eval(g->atom().rhs, env);
        if (!l || !rr) throw std::logic_error("unbound term in implication: " + to_string(g->atom()));
        if ((*l == *rr) != g->atom().equal) return true;
        return goal(g->body(), env, heap, r);
      }
      case GoalNode::Kind::Forall:
      case GoalNode::Kind::Exists: {
        bool forall = g->kind() == GoalNode::Kind::Forall;
        Env e = env;
        for (const auto& v : domain(env, heap)) {
          e[Term::var(g->variable())] = v;
          bool ok = goal(g->body(), e, heap, r);
          if (forall && !ok) return false;
          if (!forall && ok) return true;
        }
        return forall;
      }
    }
    return false;
  }

private:
  std::vector<Value> domain(const Env& env, const Heap& heap) const {
    std::vector<Value> out{Value::null()};
    for (auto z : literals_) out.push_back(Value::integer(z));
    auto addrs = addresses_of(heap, env);
    Address fresh = 1;
    for (Address a : addrs) {
      out.push_back(Value::addr(a));
      fresh = std::max(fresh, a + 1);
    }
    out.push_back(Value::addr(fresh));
    return out;
  }

  // Values an unbound term may take when read off `heap`.
  std::vector<Value> heap_domain(const Env& env, const Heap& heap) const { return domain(env, heap); }

  bool atoms(const Clause& c, std::size_t i, Env& env, const Heap& heap, const Rational& demand, const Done& k) {
    budget_.tick();
    if (i == c.heap.size()) return pure(c, 0, env, heap, demand, k);
    const HeapAtom& h = c.heap[i];
    auto next = [&](Env& e, const Heap& rest, const Rational& d) { return atoms(c, i + 1, e, rest, d, k); };
    switch (h.kind) {
      case HeapAtom::Kind::PointsTo: {
        auto take = [&](Address a, const Value& v) {
          Env e = env;
          if (!unify(h.from, Value::addr(a), e) || !unify(h.to, v, e)) return false;
          Heap rest = heap;
          rest.erase({a, h.field});
          return next(e, rest, demand);
        };
        if (auto a = eval(h.from, env)) {
          if (!a->is_addr()) return false;
          auto it = heap.find({a->a, h.field});
          return it != heap.end() && take(a->a, it->second);
        }
        for (const auto& [key, v] : heap) {
          if (key.second == h.field && take(key.first, v)) return true;
        }
        return false;
      }
      case HeapAtom::Kind::Lseg: {
        Rational per = h.annotation.evaluate(val_);
        auto start = [&](const Value& x) {
          Env e = env;
          if (!unify(h.from, x, e)) return false;
          std::vector<Address> seen;
          return walk(h, per, x, seen, e, heap, demand, next);
        };
        if (auto x = eval(h.from, env)) return start(*x);
        for (const auto& x : heap_domain(env, heap)) {
          if (start(x)) return true;
        }
        return false;
      }
      case HeapAtom::Kind::Tree: {
        Rational per = h.annotation.evaluate(val_);
        auto start = [&](const Value& x) {
          Env e = env;
          if (!unify(h.from, x, e)) return false;
          return subtree(per, x, heap, demand, [&](const Heap& rest, const Rational& d) { return next(e, rest, d); });
        };
        if (auto x = eval(h.from, env)) return start(*x);
        for (const auto& x : heap_domain(env, heap)) {
          if (start(x)) return true;
        }
        return false;
      }
    }
    return false;
  }

  template <typename Next>
  bool walk(const HeapAtom& h, const Rational& per, const Value& cur, std::vector<Address>& seen, Env& env,
            const Heap& heap, const Rational& demand, Next& next) {
    budget_.tick();
    auto y = eval(h.to, env);
    if (y) {
      if (*y == cur) return next(env, heap, demand);
    } else if (!cur.is_addr() || std::find(seen.begin(), seen.end(), cur.a) == seen.end()) {
      Env e = env;
      e[h.to] = cur;
      if (next(e, heap, demand)) return true;
    }
    if (!cur.is_addr()) return false;
    if (std::find(seen.begin(), seen.end(), cur.a) != seen.end()) return false;
    auto n = heap.find({cur.a, kNextField});
    auto d = heap.find({cur.a, kDataField});
    if (n == heap.end() || d == heap.end()) return false;
    Value succ = n->second;
    Heap rest = heap;
    rest.erase({cur.a, kNextField});
    rest.erase({cur.a, kDataField});
    seen.push_back(cur.a);
    bool ok = walk(h, per, succ, seen, env, rest, demand + per, next);
    seen.pop_back();
    return ok;
  }

  bool subtree(const Rational& per, const Value& root, const Heap& heap, const Rational& demand,
               const std::function<bool(const Heap&, const Rational&)>& k) {
    budget_.tick();
    if (root.is_null()) return k(heap, demand);
    if (!root.is_addr()) return false;
    auto l = heap.find({root.a, kLeftField});
    auto r = heap.find({root.a, kRightField});
    auto d = heap.find({root.a, kDataField});
    if (l == heap.end() || r == heap.end() || d == heap.end()) return false;
    Value lv = l->second, rv = r->second;
    Heap rest = heap;
    rest.erase({root.a, kLeftField});
    rest.erase({root.a, kRightField});
    rest.erase({root.a, kDataField});
    return subtree(per, lv, rest, demand + per, [&](const Heap& h2, const Rational& d2) {
      return subtree(per, rv, h2, d2, k);
    });
  }

  bool pure(const Clause& c, std::size_t j, Env& env, const Heap& heap, const Rational& demand, const Done& k) {
    if (j == c.pure.size()) return k(heap, env, demand);
    const PureAtom& p = c.pure[j];
    auto l = eval(p.lhs, env);
    auto r = eval(p.rhs, env);
    if (l && r) return (*l == *r) == p.equal && pure(c, j + 1, env, heap, demand, k);
    const Term& free = l ? p.rhs : p.lhs;
    for (const auto& v : domain(env, heap)) {
      Env e = env;
      e[free] = v;
      if (pure(c, j, e, heap, demand, k)) return true;
    }
    return false;
  }

  const Valuation& val_;
  const OracleLimits& limits_;
  std::set<std::int64_t> literals_;
  StepBudget budget_;
};

std::set<std::int64_t> literals_in(const Assertion& s) {
  std::set<Term> terms;
  for (const auto& c : s.clauses) collect_terms(c, terms);
  return literals_of(terms);
}

}  // namespace

bool model_check(const Assertion& s, const Env& env, const Heap& heap, const Rational& r, const Valuation& v,
                 const OracleLimits& limits) {
  if (heap.size() > limits.max_cells) throw OracleSizeExceeded("heap exceeds oracle size");
  Checker ch(v, limits, literals_in(s));
  return ch.assertion(s, env, heap, r);
}

bool model_check_goal(const Goal& g, const Env& env, const Heap& heap, const Rational& r, const Valuation& v,
                      const OracleLimits& limits) {
  if (heap.size() > limits.max_cells) throw OracleSizeExceeded("heap exceeds oracle size");
  std::set<Term> terms;
  collect_terms(g, terms);
  Checker ch(v, limits, literals_of(terms));
  return ch.goal(g, env, heap, r);
}

void generate_models(const Clause& c, const Env& base, const Valuation& v, const GenerateOptions& opts,
                     const std::function<bool(const Model&)>& visit) {
  Generator gen(c, v, opts, visit);
  gen.run(base);
}

std::optional<Counterexample> find_counterexample(const Assertion& s, const Goal& g, const Valuation& v,
                                                  const Rational& max_resource, const OracleLimits& limits) {
  std::set<Term> terms;
  collect_terms(g, terms);
  for (const auto& c : s.clauses) collect_terms(c, terms);
  auto literals = literals_of(terms);

  GenerateOptions opts;
  opts.max_cells = limits.max_cells;
  opts.literals = literals;
  for (const auto& x : free_vars(g)) opts.extra_terms.push_back(Term::var(x));
  for (const auto& t : terms) {
    if (t.kind == Term::Kind::ProgVar || t.kind == Term::Kind::Ret) opts.extra_terms.push_back(t);
  }

  Checker ch(v, limits, literals);
  std::optional<Counterexample> found;
  for (std::size_t i = 0; i < s.clauses.size() && !found; ++i) {
    generate_models(s.clauses[i], {}, v, opts, [&](const Model& m) {
      if (m.demand > max_resource) return true;
      std::vector<Rational> rs{m.demand};
      for (long long r = 0; r <= max_resource; ++r) {
        if (Rational(r) > m.demand) rs.push_back(Rational(r));
      }
      for (const auto& r : rs) {
        if (!ch.goal(g, m.env, m.heap, r)) {
          found = Counterexample{i, m.env, m.heap, r};
          return false;
        }
      }
      return true;
    });
  }
  return found;
}

}  // namespace amort
