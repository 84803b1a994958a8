#include "amort/vcgen.hpp"

#include <algorithm>

namespace amort {

std::string VerificationCondition::id() const {
  return procedure + "@" + (offset ? std::to_string(*offset) : std::string("entry"));
}

VcGenError::VcGenError(std::string procedure, std::optional<std::size_t> offset, const std::string& message)
    : std::runtime_error(procedure + (offset ? "@" + std::to_string(*offset) : std::string()) + ": " + message),
      procedure_(std::move(procedure)),
      offset_(offset) {}

namespace {

Assertion single(HeapAtom h) {
  Clause c;
  c.heap.push_back(std::move(h));
  return Assertion::of(std::move(c));
}

Term default_term(ValueType t) { return t == ValueType::Int ? Term::integer(0) : Term::null(); }

Goal cmp_goal(Cmp cmp, const Term& a, const Term& b, const Goal& taken, const Goal& fallthrough) {
  switch (cmp) {
    case Cmp::Eq:
      return GoalNode::conj(GoalNode::implies(PureAtom::eq(a, b), taken),
                            GoalNode::implies(PureAtom::ne(a, b), fallthrough));
    case Cmp::Ne:
      return GoalNode::conj(GoalNode::implies(PureAtom::ne(a, b), taken),
                            GoalNode::implies(PureAtom::eq(a, b), fallthrough));
    default:
      return GoalNode::conj(fallthrough, taken);
  }
}

}  // namespace

Goal wlp(const Procedure& proc, std::size_t pc, const SymState& state, const SuccessorGoal& succ,
         const Program& program, FreshNames& fresh) {
  const Instruction& instr = proc.code.at(pc);
  SymState st = state;
  auto fail = [&](const std::string& msg) -> VcGenError { return VcGenError(proc.name, pc, msg); };
  auto pop = [&]() {
    if (st.stack.empty()) throw fail("symbolic operand stack underflow");
    Term t = st.stack.back();
    st.stack.pop_back();
    return t;
  };
  auto next = [&](const SymState& s) { return succ(pc + 1, s); };

  return std::visit(
      [&](const auto& x) -> Goal {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ins::IConst>) {
          st.stack.push_back(Term::integer(x.value));
          return next(st);
        } else if constexpr (std::is_same_v<T, ins::IBinop>) {
          pop();
          pop();
          std::string v = fresh("n");
          st.stack.push_back(Term::var(v));
          return GoalNode::forall(v, next(st));
        } else if constexpr (std::is_same_v<T, ins::Pop>) {
          pop();
          return next(st);
        } else if constexpr (std::is_same_v<T, ins::Load>) {
          st.stack.push_back(st.locals.at(x.index));
          return next(st);
        } else if constexpr (std::is_same_v<T, ins::Store>) {
          st.locals.at(x.index) = pop();
          return next(st);
        } else if constexpr (std::is_same_v<T, ins::AConstNull>) {
          st.stack.push_back(Term::null());
          return next(st);
        } else if constexpr (std::is_same_v<T, ins::BinaryCmp>) {
          Term z1 = pop();
          Term z2 = pop();
          return cmp_goal(x.cmp, z1, z2, succ(x.target, st), next(st));
        } else if constexpr (std::is_same_v<T, ins::UnaryCmp>) {
          Term z = pop();
          return cmp_goal(x.cmp, z, Term::integer(0), succ(x.target, st), next(st));
        } else if constexpr (std::is_same_v<T, ins::IfNull>) {
          Term a = pop();
          return GoalNode::conj(GoalNode::implies(PureAtom::ne(a, Term::null()), next(st)),
                                GoalNode::implies(PureAtom::eq(a, Term::null()), succ(x.target, st)));
        } else if constexpr (std::is_same_v<T, ins::Goto>) {
          return succ(x.target, st);
        } else if constexpr (std::is_same_v<T, ins::New>) {
          std::string v = fresh("a");
          Clause cells;
          for (const auto& [f, ty] : x.desc.entries) {
            cells.heap.push_back(HeapAtom::points_to(Term::var(v), f, default_term(ty)));
          }
          st.stack.push_back(Term::var(v));
          return GoalNode::forall(v, GoalNode::wand(Assertion::of(cells), next(st)));
        } else if constexpr (std::is_same_v<T, ins::GetField>) {
          Term a = pop();
          std::string v = fresh("v");
          HeapAtom cell = HeapAtom::points_to(a, x.field, Term::var(v));
          st.stack.push_back(Term::var(v));
          return GoalNode::exists(v, GoalNode::star(single(cell), GoalNode::wand(single(cell), next(st))));
        } else if constexpr (std::is_same_v<T, ins::PutField>) {
          Term a = pop();
          Term v = pop();
          std::string w = fresh("w");
          return GoalNode::exists(
              w, GoalNode::star(single(HeapAtom::points_to(a, x.field, Term::var(w))),
                                GoalNode::wand(single(HeapAtom::points_to(a, x.field, v)), next(st))));
        } else if constexpr (std::is_same_v<T, ins::Free>) {
          Term a = pop();
          Clause cells;
          for (const auto& [f, _] : x.desc.entries) {
            std::string v = fresh("f");
            cells.existentials.push_back(v);
            cells.heap.push_back(HeapAtom::points_to(a, f, Term::var(v)));
          }
          return GoalNode::star(Assertion::of(cells), next(st));
        } else if constexpr (std::is_same_v<T, ins::Consume>) {
          Clause c;
          c.resource = LinearExpr(x.amount);
          return GoalNode::star(Assertion::of(c), next(st));
        } else if constexpr (std::is_same_v<T, ins::ConsumeDyn>) {
          throw fail("analysis-unsupported: consume_dyn is only supported by the interpreter");
        } else if constexpr (std::is_same_v<T, ins::Acquire>) {
          throw fail("analysis-unsupported: acquire is only supported by the interpreter");
        } else if constexpr (std::is_same_v<T, ins::Return>) {
          Term v = pop();
          TermMap m{{Term::ret(), v}};
          for (std::size_t j = 0; j < proc.params.size(); ++j) m[Term::prog_var(proc.params[j].name)] = st.args.at(j);
          return GoalNode::leaf(subst(proc.postcondition, m));
        } else if constexpr (std::is_same_v<T, ins::Call>) {
          const Procedure* callee = program.find(x.callee);
          if (!callee) throw fail("call to undefined procedure '" + x.callee + "'");
          TermMap m;
          for (std::size_t j = 0; j < callee->params.size(); ++j) {
            m[Term::prog_var(callee->params[j].name)] = pop();
          }
          // logical variables shared by pre and post become existentials
          // chosen when the precondition is matched
          std::vector<std::string> shared;
          for (const auto& name : free_vars(callee->precondition)) {
            std::string u = fresh("s");
            m[Term::var(name)] = Term::var(u);
            shared.push_back(u);
          }
          Assertion pre = subst(callee->precondition, m);
          // variables only in the postcondition are existential there
          Assertion post = callee->postcondition;
          auto pre_vars = free_vars(callee->precondition);
          for (auto& c : post.clauses) {
            for (const auto& name : free_vars(c)) {
              if (!pre_vars.count(name)) c.existentials.push_back(name);
            }
          }
          std::string v = fresh("r");
          m[Term::ret()] = Term::var(v);
          post = subst(post, m);
          st.stack.push_back(Term::var(v));
          Goal g = GoalNode::star(pre, GoalNode::forall(v, GoalNode::wand(post, next(st))));
          for (auto it = shared.rbegin(); it != shared.rend(); ++it) g = GoalNode::exists(*it, g);
          return g;
        }
      },
      instr);
}

std::vector<VerificationCondition> gen_vcs(const Procedure& proc, const Program& program,
                                           std::vector<std::string>* warnings) {
  WlpOrder order = order_for_wlp(proc);
  for (std::size_t pc : order.unreachable) {
    if (warnings) warnings->push_back(proc.name + "@" + std::to_string(pc) + ": unreachable instruction skipped");
  }
  for (std::size_t t : order.back_edge_targets) {
    if (!proc.invariants.count(t)) throw VcGenError(proc.name, t, "missing invariant at offset " + std::to_string(t));
  }

  FreshNames fresh;
  const std::size_t n = proc.code.size();

  // Goal at each offset as a function of the incoming symbolic state.
  std::vector<SuccessorGoal> at(n);
  SuccessorGoal dispatch = [&](std::size_t off, const SymState& s) -> Goal {
    if (off >= n) throw VcGenError(proc.name, off, "control reaches a nonexistent offset");
    return at[off](off, s);
  };

  auto annotated = [&](std::size_t off) {
    return [&, off](std::size_t, const SymState& s) -> Goal {
      if (!s.stack.empty()) {
        throw VcGenError(proc.name, off, "operand stack must be empty at an annotated offset");
      }
      TermMap m;
      for (std::size_t j = 0; j < proc.local_count; ++j) m[Term::prog_var(proc.slot_name(j))] = s.locals.at(j);
      return GoalNode::leaf(subst(proc.invariants.at(off), m));
    };
  };
  auto body = [&](std::size_t off) {
    return [&, off](std::size_t, const SymState& s) -> Goal { return wlp(proc, off, s, dispatch, program, fresh); };
  };
  for (std::size_t pc = 0; pc < n; ++pc) {
    if (proc.invariants.count(pc)) {
      at[pc] = annotated(pc);
    } else {
      at[pc] = body(pc);
    }
  }

  std::set<std::size_t> stored;
  for (const auto& i : proc.code) {
    if (auto* s = std::get_if<ins::Store>(&i)) stored.insert(s->index);
  }

  std::vector<VerificationCondition> out;
  for (auto it = order.order.rbegin(); it != order.order.rend(); ++it) {
    std::size_t pc = *it;
    if (order.unreachable.count(pc) || !proc.invariants.count(pc)) continue;
    SymState st;
    for (std::size_t j = 0; j < proc.local_count; ++j) st.locals.push_back(Term::prog_var(proc.slot_name(j)));
    for (std::size_t j = 0; j < proc.params.size(); ++j) {
      const std::string& name = proc.params[j].name;
      st.args.push_back(stored.count(j) ? Term::var(fresh("arg_" + name + "_")) : Term::prog_var(name));
    }
    Goal g = wlp(proc, pc, st, dispatch, program, fresh);
    out.push_back({proc.name, pc, proc.invariants.at(pc), g, "invariant at offset " + std::to_string(pc)});
  }

  SymState entry;
  for (std::size_t j = 0; j < proc.local_count; ++j) {
    entry.locals.push_back(j < proc.params.size() ? Term::prog_var(proc.params[j].name)
                                                  : Term::var(fresh("undef")));
  }
  for (const auto& p : proc.params) entry.args.push_back(Term::prog_var(p.name));
  out.push_back({proc.name, std::nullopt, proc.precondition, dispatch(0, entry), "procedure entry"});
  return out;
}

}  // namespace amort
