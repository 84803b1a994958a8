#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "amort/heap_builder.hpp"
#include "amort/vm.hpp"

using namespace amort;

namespace {

Program corpus(const std::string& name) {
  std::ifstream in(std::string(AMORT_CORPUS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

Procedure single(Instruction i) {
  Procedure p;
  p.name = "p";
  p.local_count = 2;
  p.code = {std::move(i), ins::Return{}};
  return p;
}

Frame frame(std::vector<Value> stack) {
  Frame f;
  f.procedure = "p";
  f.stack = std::move(stack);
  f.locals.assign(2, std::nullopt);
  return f;
}

// n-node list at addresses 1..n, data i at node i
Heap list(std::size_t n) {
  Heap h;
  for (Address a = 1; a <= n; ++a) {
    h[{a, "next"}] = a < n ? Value::addr(a + 1) : Value::null();
    h[{a, "data"}] = Value::integer(std::int64_t(a));
  }
  return h;
}

}  // namespace

TEST(StepFrame, IConstPushes) {
  auto r = step_frame(single(ins::IConst{5}), frame({Value::integer(7)}));
  Frame f = std::get<Frame>(r);
  EXPECT_EQ(f.stack, (std::vector<Value>{Value::integer(7), Value::integer(5)}));
  EXPECT_EQ(f.pc, 1u);
}

TEST(StepFrame, IfNullJumpsAndPops) {
  Procedure p = single(ins::IfNull{9});
  Frame f = std::get<Frame>(step_frame(p, frame({Value::null()})));
  EXPECT_EQ(f.pc, 9u);
  EXPECT_TRUE(f.stack.empty());
  Frame g = std::get<Frame>(step_frame(p, frame({Value::addr(3)})));
  EXPECT_EQ(g.pc, 1u);
}

TEST(StepFrame, ArithmeticTypeMismatchIsStuck) {
  auto r = step_frame(single(ins::IBinop{BinOp::Add}), frame({Value::integer(1), Value::addr(4)}));
  EXPECT_TRUE(std::holds_alternative<Stuck>(r));
}

TEST(StepFrame, TopOfStackIsLeftOperand) {
  Frame f = std::get<Frame>(step_frame(single(ins::IBinop{BinOp::Sub}), frame({Value::integer(1), Value::integer(5)})));
  EXPECT_EQ(f.stack, std::vector<Value>{Value::integer(4)});
  Frame g = std::get<Frame>(step_frame(single(ins::BinaryCmp{Cmp::Gt, 0}), frame({Value::integer(1), Value::integer(5)})));
  EXPECT_EQ(g.pc, 0u);
}

TEST(StepFrame, DivisionByZeroIsStuck) {
  auto r = step_frame(single(ins::IBinop{BinOp::Div}), frame({Value::integer(0), Value::integer(5)}));
  EXPECT_TRUE(std::holds_alternative<Stuck>(r));
}

TEST(StepFrame, LoadOfUndefinedLocalIsStuck) {
  EXPECT_TRUE(std::holds_alternative<Stuck>(step_frame(single(ins::Load{1}), frame({}))));
}

TEST(StepMut, PutFieldWritesExistingCell) {
  Heap h{{{1, "f"}, Value::integer(0)}, {{1, "g"}, Value::integer(9)}};
  Address next = 2;
  auto r = step_mut(single(ins::PutField{"f"}), frame({Value::integer(3), Value::addr(1)}), h, next);
  MutStep s = std::get<MutStep>(r);
  EXPECT_EQ(s.heap.at({1, "f"}), Value::integer(3));
  EXPECT_EQ(s.heap.at({1, "g"}), Value::integer(9));
  EXPECT_EQ(s.consumed, ResourceValue());
  auto bad = step_mut(single(ins::PutField{"h"}), frame({Value::integer(3), Value::addr(1)}), h, next);
  EXPECT_TRUE(std::holds_alternative<Stuck>(bad));
}

TEST(StepMut, NewAllocatesFreshDefaults) {
  Address next = 5;
  FieldDescriptor d{{{"next", ValueType::Ref}, {"data", ValueType::Int}}};
  MutStep s = std::get<MutStep>(step_mut(single(ins::New{d}), frame({}), {}, next));
  EXPECT_EQ(s.frame.stack, std::vector<Value>{Value::addr(5)});
  EXPECT_EQ(s.heap.at({5, "next"}), Value::null());
  EXPECT_EQ(s.heap.at({5, "data"}), Value::integer(0));
  EXPECT_EQ(next, 6u);
}

TEST(StepMut, FreeRemovesDescriptor) {
  Heap h = list(1);
  Address next = 2;
  FieldDescriptor d{{{"next", ValueType::Ref}, {"data", ValueType::Int}}};
  MutStep s = std::get<MutStep>(step_mut(single(ins::Free{d}), frame({Value::addr(1)}), h, next));
  EXPECT_TRUE(s.heap.empty());
  h.erase({1, "data"});
  EXPECT_TRUE(std::holds_alternative<Stuck>(step_mut(single(ins::Free{d}), frame({Value::addr(1)}), h, next)));
}

TEST(StepMut, ConsumeAndAcquire) {
  Address next = 1;
  MutStep c = std::get<MutStep>(step_mut(single(ins::Consume{2}), frame({}), {}, next));
  EXPECT_EQ(c.consumed, ResourceValue(2));
  EXPECT_EQ(c.acquired, ResourceValue());
  MutStep d = std::get<MutStep>(step_mut(single(ins::ConsumeDyn{}), frame({Value::integer(-3)}), {}, next));
  EXPECT_EQ(d.consumed, ResourceValue());

  MutStep a = std::get<MutStep>(step_mut(single(ins::Acquire{}), frame({Value::integer(4)}), {}, next));
  ASSERT_TRUE(a.acquire_request.has_value());
  MutStep denied = a;
  commit_acquire(denied, false);
  EXPECT_EQ(denied.frame.stack, std::vector<Value>{Value::integer(0)});
  EXPECT_EQ(denied.acquired, ResourceValue());
  commit_acquire(a, true);
  EXPECT_EQ(a.frame.stack, std::vector<Value>{Value::integer(1)});
  EXPECT_EQ(a.acquired, ResourceValue(4));
}

TEST(Step, ReturnFromLastFrameHalts) {
  Program prog = parse_program("proc main() {\n 0: consume 3\n 1: iconst 7\n 2: return\n}");
  RunOptions ro;
  ro.budget = ResourceValue(10);
  RunResult r = run(prog, {}, ro);
  Halt h = std::get<Halt>(r.outcome);
  EXPECT_EQ(h.value, Value::integer(7));
  EXPECT_EQ(h.consumed, ResourceValue(3));
  EXPECT_EQ(h.total, ResourceValue(10));
}

TEST(Step, BudgetViolationWhenConsumptionExceedsTotal) {
  Program prog = parse_program("proc main() {\n 0: consume 2\n 1: iconst 0\n 2: return\n}");
  MachineState st = initial_state(prog, {}, RunOptions{ResourceValue(10)});
  st.consumed = ResourceValue(9);
  auto r = step(st, prog, AcquisitionPolicy::always(true));
  ASSERT_TRUE(std::holds_alternative<BudgetViolation>(r));
  EXPECT_EQ(std::get<BudgetViolation>(r).consumed, ResourceValue(11));
}

TEST(Step, CallPassesFirstArgumentOnTop) {
  Program prog = parse_program(R"(
proc main() {
  0: iconst 10
  1: iconst 3
  2: call sub
  3: return
}
proc sub(a: int, b: int) {
  0: load b
  1: load a
  2: ibinop sub
  3: return
}
)");
  RunResult r = run(prog, {}, {});
  EXPECT_EQ(std::get<Halt>(r.outcome).value, Value::integer(-7));
}

TEST(Run, EmptyMainWithZeroBudget) {
  Program prog = parse_program("proc main() {\n 0: aconst_null\n 1: return\n}");
  RunResult r = run(prog, {}, {});
  EXPECT_EQ(std::get<Halt>(r.outcome).consumed, ResourceValue());
}

TEST(Run, IterateListConsumesLength) {
  Program prog = corpus("iterate_list.amr");
  RunOptions ro;
  ro.heap = list(5);
  ro.budget = ResourceValue(5);
  RunResult ok = run(prog, {Value::addr(1)}, ro);
  ASSERT_TRUE(std::holds_alternative<Halt>(ok.outcome));
  EXPECT_EQ(std::get<Halt>(ok.outcome).consumed, ResourceValue(5));
  ro.budget = ResourceValue(4);
  EXPECT_TRUE(std::holds_alternative<BudgetViolation>(run(prog, {Value::addr(1)}, ro).outcome));
}

TEST(Run, FuelExhaustion) {
  Program prog = parse_program("proc main() {\n 0: goto 0\n}");
  RunOptions ro;
  ro.fuel = 100;
  RunResult r = run(prog, {}, ro);
  ASSERT_TRUE(std::holds_alternative<FuelExhausted>(r.outcome));
  EXPECT_EQ(r.steps, 100u);
}

TEST(Run, DeterministicAndMonotone) {
  Program prog = corpus("block_booking.amr");
  for (auto policy : {AcquisitionPolicy::random(3), AcquisitionPolicy::parse("grant,deny")}) {
    RunOptions ro;
    ro.policy = policy;
    std::vector<std::pair<ResourceValue, ResourceValue>> trace1, trace2;
    ro.observer = [&](const MachineState& s) { trace1.emplace_back(s.consumed, s.total); };
    RunResult a = run(prog, {}, ro);
    ro.observer = [&](const MachineState& s) { trace2.emplace_back(s.consumed, s.total); };
    RunResult b = run(prog, {}, ro);
    EXPECT_EQ(trace1, trace2);
    EXPECT_EQ(a.steps, b.steps);
    for (std::size_t i = 1; i < trace1.size(); ++i) {
      EXPECT_TRUE(leq(trace1[i - 1].first, trace1[i].first));
      EXPECT_TRUE(leq(trace1[i - 1].second, trace1[i].second));
      EXPECT_TRUE(leq(trace1[i].first, trace1[i].second));
    }
  }
}

TEST(Run, MutatingStepsTouchOnlyTheirCells) {
  Program prog = corpus("reverse.amr");
  RunOptions ro;
  ro.heap = list(6);
  ro.budget = ResourceValue(6);
  std::optional<Heap> before;
  std::size_t changed_steps = 0;
  ro.observer = [&](const MachineState& s) {
    if (before) {
      std::size_t diffs = 0;
      for (const auto& [k, v] : s.heap) {
        auto it = before->find(k);
        if (it == before->end() || it->second != v) ++diffs;
      }
      EXPECT_LE(diffs, 1u);
      EXPECT_EQ(s.heap.size(), before->size());
      changed_steps += diffs;
    }
    before = s.heap;
  };
  RunResult r = run(prog, {Value::addr(1)}, ro);
  ASSERT_TRUE(std::holds_alternative<Halt>(r.outcome));
  EXPECT_EQ(changed_steps, 6u);
}

TEST(Policy, ParseScripts) {
  auto p = AcquisitionPolicy::parse("grant,deny");
  EXPECT_TRUE(p.decide(0, ResourceValue(1)));
  EXPECT_FALSE(p.decide(1, ResourceValue(1)));
  EXPECT_TRUE(p.decide(2, ResourceValue(1)));
  EXPECT_FALSE(AcquisitionPolicy::parse("deny").decide(5, ResourceValue(1)));
  EXPECT_THROW(AcquisitionPolicy::parse("maybe"), std::invalid_argument);
}

TEST(HeapBuilder, ListOfRequestedSize) {
  Program prog = corpus("iterate_list.amr");
  BuildOptions bo;
  bo.size = 4;
  auto in = build_input(prog.procedures.at("iterate"), {{"a", 1}, {"b", 2}, {"c", 0}, {"d", 0}}, bo);
  ASSERT_TRUE(in.has_value());
  EXPECT_EQ(in->heap.size(), 8u);
  EXPECT_EQ(in->budget, 6);
  RunOptions ro;
  ro.heap = in->heap;
  ro.budget = ResourceValue(in->budget);
  EXPECT_EQ(std::get<Halt>(run(prog, in->args, ro).outcome).consumed, ResourceValue(4));
}
