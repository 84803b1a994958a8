#include "amort/vm.hpp"

#include <random>
#include <sstream>

namespace amort {

AcquisitionPolicy AcquisitionPolicy::always(bool grant) { return script({grant}); }

AcquisitionPolicy AcquisitionPolicy::script(std::vector<bool> decisions) {
  if (decisions.empty()) throw std::invalid_argument("empty acquisition script");
  AcquisitionPolicy p;
  p.script_ = std::move(decisions);
  return p;
}

AcquisitionPolicy AcquisitionPolicy::random(std::uint64_t seed) {
  AcquisitionPolicy p;
  p.seed_ = seed;
  return p;
}

AcquisitionPolicy AcquisitionPolicy::parse(const std::string& spec, std::uint64_t seed) {
  if (spec == "random") return random(seed);
  std::vector<bool> out;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "grant" || item == "g" || item == "1") {
      out.push_back(true);
    } else if (item == "deny" || item == "d" || item == "0") {
      out.push_back(false);
    } else {
      throw std::invalid_argument("unknown policy entry '" + item + "'");
    }
  }
  return script(out);
}

bool AcquisitionPolicy::decide(std::size_t index, const ResourceValue&) const {
  if (seed_) {
    std::seed_seq seq{static_cast<std::uint32_t>(*seed_), static_cast<std::uint32_t>(*seed_ >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937 gen(seq);
    return (gen() & 1u) != 0;
  }
  return script_[index % script_.size()];
}

namespace {

struct StuckError {
  std::string reason;
};

Value pop(Frame& f) {
  if (f.stack.empty()) throw StuckError{"operand stack underflow"};
  Value v = f.stack.back();
  f.stack.pop_back();
  return v;
}

std::int64_t pop_int(Frame& f) {
  Value v = pop(f);
  if (!v.is_int()) throw StuckError{"expected an integer operand, found " + to_string(v)};
  return v.z;
}

Value pop_ref(Frame& f) {
  Value v = pop(f);
  if (!v.is_ref()) throw StuckError{"expected a reference operand, found " + to_string(v)};
  return v;
}

Address pop_addr(Frame& f) {
  Value v = pop(f);
  if (!v.is_addr()) throw StuckError{"expected an address operand, found " + to_string(v)};
  return v.a;
}

std::int64_t arith(BinOp op, std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  bool overflow = false;
  switch (op) {
    case BinOp::Add: overflow = __builtin_add_overflow(a, b, &r); break;
    case BinOp::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
    case BinOp::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
    case BinOp::Div:
    case BinOp::Rem:
      if (b == 0) throw StuckError{"division by zero"};
      if (a == INT64_MIN && b == -1) throw StuckError{"arithmetic overflow"};
      r = op == BinOp::Div ? a / b : a % b;
      break;
  }
  if (overflow) throw StuckError{"arithmetic overflow"};
  return r;
}

bool compare(Cmp c, std::int64_t a, std::int64_t b) {
  switch (c) {
    case Cmp::Eq: return a == b;
    case Cmp::Ne: return a != b;
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
  }
  return false;
}

Value default_value(ValueType t) { return t == ValueType::Int ? Value::integer(0) : Value::null(); }

const Instruction& current(const Procedure& proc, const Frame& f) {
  if (f.pc >= proc.code.size()) throw StuckError{"pc out of range"};
  return proc.code[f.pc];
}

void frame_rule(const Procedure& proc, Frame& f) {
  const Instruction& i = current(proc, f);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ins::IConst>) {
          f.stack.push_back(Value::integer(x.value));
          ++f.pc;
        } else if constexpr (std::is_same_v<T, ins::IBinop>) {
          std::int64_t z1 = pop_int(f);
          std::int64_t z2 = pop_int(f);
          f.stack.push_back(Value::integer(arith(x.op, z1, z2)));
          ++f.pc;
        } else if constexpr (std::is_same_v<T, ins::Pop>) {
          pop(f);
          ++f.pc;
        } else if constexpr (std::is_same_v<T, ins::Load>) {
          if (x.index >= f.locals.size() || !f.locals[x.index]) throw StuckError{"load of undefined local"};
          f.stack.push_back(*f.locals[x.index]);
          ++f.pc;
        } else if constexpr (std::is_same_v<T, ins::Store>) {
          if (x.index >= f.locals.size()) throw StuckError{"store index out of range"};
          f.locals[x.index] = pop(f);
          ++f.pc;
        } else if constexpr (std::is_same_v<T, ins::AConstNull>) {
          f.stack.push_back(Value::null());
          ++f.pc;
        } else if constexpr (std::is_same_v<T, ins::BinaryCmp>) {
          Value v1 = pop(f);
          Value v2 = pop(f);
          bool taken;
          if (v1.is_int() && v2.is_int()) {
            taken = compare(x.cmp, v1.z, v2.z);
          } else if (v1.is_ref() && v2.is_ref() && (x.cmp == Cmp::Eq || x.cmp == Cmp::Ne)) {
            taken = (v1 == v2) == (x.cmp == Cmp::Eq);
          } else {
            throw StuckError{"incomparable operands " + to_string(v1) + " and " + to_string(v2)};
          }
          f.pc = taken ? x.target : f.pc + 1;
        } else if constexpr (std::is_same_v<T, ins::UnaryCmp>) {
          std::int64_t z = pop_int(f);
          f.pc = compare(x.cmp, z, 0) ? x.target : f.pc + 1;
        } else if constexpr (std::is_same_v<T, ins::IfNull>) {
          Value a = pop_ref(f);
          f.pc = a.is_null() ? x.target : f.pc + 1;
        } else if constexpr (std::is_same_v<T, ins::Goto>) {
          f.pc = x.target;
        } else {
          throw StuckError{"not an intra-frame instruction: " + to_string(i)};
        }
      },
      i);
}

bool is_frame_instr(const Instruction& i) {
  return std::holds_alternative<ins::IConst>(i) || std::holds_alternative<ins::IBinop>(i) ||
         std::holds_alternative<ins::Pop>(i) || std::holds_alternative<ins::Load>(i) ||
         std::holds_alternative<ins::Store>(i) || std::holds_alternative<ins::AConstNull>(i) ||
         std::holds_alternative<ins::BinaryCmp>(i) || std::holds_alternative<ins::UnaryCmp>(i) ||
         std::holds_alternative<ins::IfNull>(i) || std::holds_alternative<ins::Goto>(i);
}

void mut_rule(const Procedure& proc, MutStep& s, Address& next_address) {
  Frame& f = s.frame;
  const Instruction& i = current(proc, f);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ins::New>) {
          Address a = next_address++;
          for (const auto& [fld, ty] : x.desc.entries) s.heap[{a, fld}] = default_value(ty);
          f.stack.push_back(Value::addr(a));
        } else if constexpr (std::is_same_v<T, ins::GetField>) {
          Address a = pop_addr(f);
          auto it = s.heap.find({a, x.field});
          if (it == s.heap.end()) throw StuckError{"getfield of absent cell @" + std::to_string(a) + "." + x.field};
          f.stack.push_back(it->second);
        } else if constexpr (std::is_same_v<T, ins::PutField>) {
          Address a = pop_addr(f);
          Value v = pop(f);
          auto it = s.heap.find({a, x.field});
          if (it == s.heap.end()) throw StuckError{"putfield to absent cell @" + std::to_string(a) + "." + x.field};
          it->second = v;
        } else if constexpr (std::is_same_v<T, ins::Free>) {
          Address a = pop_addr(f);
          for (const auto& [fld, _] : x.desc.entries) {
            if (!s.heap.count({a, fld})) throw StuckError{"free of absent cell @" + std::to_string(a) + "." + fld};
          }
          for (const auto& [fld, _] : x.desc.entries) s.heap.erase({a, fld});
        } else if constexpr (std::is_same_v<T, ins::Consume>) {
          s.consumed = ResourceValue(x.amount);
        } else if constexpr (std::is_same_v<T, ins::ConsumeDyn>) {
          s.consumed = res_of_int(pop_int(f));
        } else if constexpr (std::is_same_v<T, ins::Acquire>) {
          s.acquire_request = res_of_int(pop_int(f));
        } else {
          throw StuckError{"not a mutating instruction: " + to_string(i)};
        }
      },
      i);
  ++f.pc;
}

}  // namespace

std::variant<Frame, Stuck> step_frame(const Procedure& proc, Frame f) {
  std::size_t pc = f.pc;
  try {
    frame_rule(proc, f);
    return f;
  } catch (const StuckError& e) {
    return Stuck{e.reason, proc.name, pc};
  }
}

std::variant<MutStep, Stuck> step_mut(const Procedure& proc, Frame f, Heap h, Address& next_address) {
  std::size_t pc = f.pc;
  MutStep s{std::move(f), std::move(h), {}, {}, std::nullopt};
  Address next = next_address;
  try {
    mut_rule(proc, s, next);
  } catch (const StuckError& e) {
    return Stuck{e.reason, proc.name, pc};
  }
  next_address = next;
  return s;
}

void commit_acquire(MutStep& s, bool grant) {
  if (!s.acquire_request) return;
  s.frame.stack.push_back(Value::integer(grant ? 1 : 0));
  s.acquired = grant ? *s.acquire_request : ResourceValue{};
  s.acquire_request.reset();
}

StepResult step(MachineState state, const Program& program, const AcquisitionPolicy& policy) {
  if (state.frames.empty()) return Stuck{"no frames", "", 0};
  Frame& top = state.frames.back();
  const Procedure* proc = program.find(top.procedure);
  if (!proc) return Stuck{"unknown procedure " + top.procedure, top.procedure, top.pc};
  if (top.pc >= proc->code.size()) return Stuck{"pc out of range", proc->name, top.pc};
  const Instruction& i = proc->code[top.pc];

  if (is_frame_instr(i)) {
    auto r = step_frame(*proc, std::move(top));
    if (auto* s = std::get_if<Stuck>(&r)) return *s;
    state.frames.back() = std::get<Frame>(std::move(r));
    return StepResult(std::move(state));
  }

  if (auto* c = std::get_if<ins::Call>(&i)) {
    const Procedure* callee = program.find(c->callee);
    if (!callee) return Stuck{"call to undefined procedure " + c->callee, proc->name, top.pc};
    std::size_t k = callee->params.size();
    if (top.stack.size() < k) return Stuck{"too few arguments for " + c->callee, proc->name, top.pc};
    Frame fresh;
    fresh.procedure = callee->name;
    fresh.locals.assign(std::max(callee->local_count, k), std::nullopt);
    // argument 0 is the top of the caller's stack
    for (std::size_t j = 0; j < k; ++j) {
      fresh.locals[j] = top.stack.back();
      top.stack.pop_back();
    }
    state.frames.push_back(std::move(fresh));
    return StepResult(std::move(state));
  }

  if (std::holds_alternative<ins::Return>(i)) {
    if (top.stack.empty()) return Stuck{"return with empty stack", proc->name, top.pc};
    Value v = top.stack.back();
    if (state.frames.size() == 1) return Halt{std::move(state.heap), state.consumed, state.total, v};
    state.frames.pop_back();
    Frame& caller = state.frames.back();
    caller.stack.push_back(v);
    ++caller.pc;
    return StepResult(std::move(state));
  }

  std::size_t pc = top.pc;
  auto r = step_mut(*proc, std::move(top), std::move(state.heap), state.next_address);
  if (auto* s = std::get_if<Stuck>(&r)) return *s;
  MutStep m = std::get<MutStep>(std::move(r));
  if (m.acquire_request) {
    bool grant = policy.decide(state.acquire_requests++, *m.acquire_request);
    commit_acquire(m, grant);
  }
  ResourceValue total = combine(state.total, m.acquired);
  ResourceValue consumed = combine(state.consumed, m.consumed);
  if (!leq(consumed, total)) return BudgetViolation{proc->name, pc, consumed, total};
  state.frames.back() = std::move(m.frame);
  state.heap = std::move(m.heap);
  state.consumed = consumed;
  state.total = total;
  return StepResult(std::move(state));
}

MachineState initial_state(const Program& program, const std::vector<Value>& args, const RunOptions& opts) {
  MachineState st;
  st.total = opts.budget;
  st.heap = opts.heap;
  st.next_address = opts.next_address;
  if (st.next_address == 0) {
    st.next_address = 1;
    for (const auto& [k, v] : st.heap) {
      st.next_address = std::max(st.next_address, k.first + 1);
      if (v.is_addr()) st.next_address = std::max(st.next_address, v.a + 1);
    }
    for (const auto& v : args) {
      if (v.is_addr()) st.next_address = std::max(st.next_address, v.a + 1);
    }
  }
  const Procedure* entry = program.find(program.entry);
  if (!entry) throw std::invalid_argument("entry procedure '" + program.entry + "' is not defined");
  if (args.size() != entry->params.size()) {
    throw std::invalid_argument("entry procedure expects " + std::to_string(entry->params.size()) + " arguments");
  }
  Frame f;
  f.procedure = entry->name;
  f.locals.assign(entry->local_count, std::nullopt);
  for (std::size_t j = 0; j < args.size(); ++j) {
    bool is_int = entry->params[j].type == ValueType::Int;
    if (is_int != args[j].is_int()) {
      throw std::invalid_argument("argument " + entry->params[j].name + " has the wrong type");
    }
    f.locals[j] = args[j];
  }
  st.frames.push_back(std::move(f));
  return st;
}

RunResult run(const Program& program, const std::vector<Value>& args, const RunOptions& opts) {
  RunResult out{FuelExhausted{0}, 0, {}, opts.budget};
  MachineState st = initial_state(program, args, opts);
  if (opts.observer) opts.observer(st);
  while (out.steps < opts.fuel) {
    StepResult r = step(std::move(st), program, opts.policy);
    ++out.steps;
    if (auto* next = std::get_if<MachineState>(&r)) {
      st = std::move(*next);
      out.peak_consumed = st.consumed;
      out.final_total = st.total;
      if (opts.observer) opts.observer(st);
      continue;
    }
    if (auto* h = std::get_if<Halt>(&r)) {
      out.peak_consumed = h->consumed;
      out.final_total = h->total;
      out.outcome = std::move(*h);
    } else if (auto* s = std::get_if<Stuck>(&r)) {
      out.outcome = std::move(*s);
    } else {
      out.outcome = std::get<BudgetViolation>(std::move(r));
    }
    return out;
  }
  out.outcome = FuelExhausted{out.steps};
  return out;
}

std::string outcome_name(const Outcome& o) {
  switch (o.index()) {
    case 0: return "halt";
    case 1: return "stuck";
    case 2: return "budget_violation";
    default: return "fuel_exhausted";
  }
}

}  // namespace amort
