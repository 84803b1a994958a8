#include <algorithm>

#include <gtest/gtest.h>

#include "amort/bytecode.hpp"

using namespace amort;

namespace {

const char* kWalk = R"(
# walk a list
proc walk(x: ref) locals 2 [cur] {
  requires: ; lseg($a, x, null) ; $b
  ensures: ; lseg($c, x, null) ; $d
  0: load x
  1: store cur
  invariant 2: ; lseg($i1, x, cur), lseg($i2, cur, null) ; $i3
  2: load cur
  3: ifnull 9
  4: consume 1
  5: load cur
  6: getfield next
  7: store cur
  8: goto 2
  9: aconst_null
  10: return
}
)";

bool has_message(const std::vector<Diagnostic>& ds, const std::string& text) {
  for (const auto& d : ds) {
    if (d.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(ProgramParse, Structure) {
  Program p = parse_program(kWalk);
  ASSERT_EQ(p.order, std::vector<std::string>{"walk"});
  EXPECT_EQ(p.entry, "walk");
  const Procedure& w = p.procedures.at("walk");
  EXPECT_EQ(w.local_count, 2u);
  EXPECT_EQ(w.slot_name(1), "cur");
  EXPECT_EQ(w.slot_of("cur"), 1u);
  ASSERT_EQ(w.code.size(), 11u);
  EXPECT_EQ(w.code[1], Instruction(ins::Store{1}));
  EXPECT_EQ(w.code[3], Instruction(ins::IfNull{9}));
  EXPECT_EQ(w.code[4], Instruction(ins::Consume{1}));
  EXPECT_EQ(w.invariants.count(2), 1u);
  EXPECT_EQ(w.lines[0], 6);
  EXPECT_TRUE(validate(p).empty());
}

TEST(ProgramParse, PrettyPrintRoundTrip) {
  Program p = parse_program(kWalk);
  EXPECT_EQ(parse_program(pretty_print(p)), p);
}

TEST(ProgramParse, AllInstructions) {
  Program p = parse_program(R"(
proc f(n: int, r: ref) locals 3 {
  0: iconst -4
  1: load n
  2: ibinop rem
  3: pop
  4: new {next: ref, data: int}
  5: store 2
  6: load n
  7: load 2
  8: putfield data
  9: load 2
  10: getfield data
  11: unarycmp gt 13
  12: consume 3/2
  13: load n
  14: consume_dyn
  15: iconst 1
  16: acquire
  17: load n
  18: binarycmp ne 20
  19: aconst_null
  20: load 2
  21: free {next: ref, data: int}
  22: load r
  23: call g
  24: return
}
proc g(x: ref) {
  0: iconst 0
  1: return
}
entry f
)");
  EXPECT_EQ(p.entry, "f");
  const Procedure& f = p.procedures.at("f");
  EXPECT_EQ(f.code[0], Instruction(ins::IConst{-4}));
  EXPECT_EQ(f.code[2], Instruction(ins::IBinop{BinOp::Rem}));
  EXPECT_EQ(f.code[11], Instruction(ins::UnaryCmp{Cmp::Gt, 13}));
  EXPECT_EQ(f.code[12], Instruction(ins::Consume{Rational(3, 2)}));
  EXPECT_EQ(f.code[23], Instruction(ins::Call{"g"}));
  EXPECT_EQ(f.local_names.size(), 0u);
  EXPECT_EQ(f.slot_name(2), "local2");
  EXPECT_EQ(to_string(f.code[21]), "free {next:ref, data:int}");
  EXPECT_EQ(parse_program(pretty_print(p)), p);
}

TEST(ProgramParse, Errors) {
  EXPECT_THROW(parse_program("proc f() {\n  1: return\n}"), ParseError);          // offsets start at 0
  EXPECT_THROW(parse_program("proc f() {\n  0: jump 1\n}"), ParseError);          // unknown mnemonic
  EXPECT_THROW(parse_program("proc f(x: float) {\n  0: return\n}"), ParseError);  // unknown type
  EXPECT_THROW(parse_program("proc f(x: ref, x: ref) {\n 0: return\n}"), ParseError);
  EXPECT_THROW(parse_program("proc f() {\n 0: return\n}\nproc f() {\n 0: return\n}"), ParseError);
  EXPECT_THROW(parse_program("proc f() {\n 0: load y\n}"), ParseError);
  try {
    parse_program("proc f() {\n  0: iconst 1\n  1: bogus\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Validate, ReportsProblems) {
  Program p = parse_program(R"(
proc f(x: ref) {
  0: load x
  1: ifnull 7
  2: call h
  3: goto 0
}
entry nowhere
)");
  auto ds = validate(p);
  EXPECT_TRUE(has_message(ds, "entry procedure 'nowhere'"));
  EXPECT_TRUE(has_message(ds, "branch target 7 out of range"));
  EXPECT_TRUE(has_message(ds, "undefined procedure 'h'"));
}

TEST(Validate, FallingOffTheEnd) {
  auto ds = validate(parse_program("proc f() {\n 0: iconst 1\n}"));
  EXPECT_TRUE(has_message(ds, "falls off the end"));
}

TEST(Validate, MissingInvariantOnlyMattersToAnalysis) {
  auto ds = validate(parse_program("proc f() {\n 0: goto 0\n}"));
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_TRUE(ds[0].analysis_only);
}

TEST(Cfg, ReversePostorderAndLoopHeads) {
  Program p = parse_program(kWalk);
  WlpOrder o = order_for_wlp(p.procedures.at("walk"));
  EXPECT_EQ(o.back_edge_targets, std::set<std::size_t>{2});
  EXPECT_TRUE(o.unreachable.empty());
  ASSERT_EQ(o.order.size(), 11u);
  EXPECT_EQ(o.order.front(), 0u);
  auto pos = [&](std::size_t off) { return std::find(o.order.begin(), o.order.end(), off) - o.order.begin(); };
  EXPECT_LT(pos(2), pos(4));
  EXPECT_LT(pos(3), pos(9));
}

TEST(Cfg, UnreachableCode) {
  Program p = parse_program("proc f() {\n 0: aconst_null\n 1: return\n 2: goto 0\n}");
  WlpOrder o = order_for_wlp(p.procedures.at("f"));
  EXPECT_EQ(o.unreachable, std::set<std::size_t>{2});
}

TEST(Cfg, Successors) {
  EXPECT_EQ(successors(ins::Goto{4}, 1), std::vector<std::size_t>{4});
  EXPECT_EQ(successors(ins::Return{}, 1), std::vector<std::size_t>{});
  auto s = successors(ins::IfNull{7}, 2);
  std::sort(s.begin(), s.end());
  EXPECT_EQ(s, (std::vector<std::size_t>{3, 7}));
  EXPECT_EQ(jump_target(ins::BinaryCmp{Cmp::Le, 9}), 9u);
  EXPECT_FALSE(jump_target(ins::Pop{}).has_value());
}
