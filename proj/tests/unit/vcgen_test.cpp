#include <gtest/gtest.h>

#include "amort/vcgen.hpp"

using namespace amort;

namespace {

const char* kWalk = R"(
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

// The goal that wlp assigns to one instruction, with every successor
// replaced by a leaf naming its offset.
Goal wlp_of(const char* text, std::size_t pc, SymState st) {
  static Program p;
  p = parse_program(text);
  const Procedure& proc = p.procedures.begin()->second;
  FreshNames fresh;
  return wlp(proc, pc, st, [](std::size_t off, const SymState&) {
    Clause c;
    c.resource = LinearExpr(Rational(std::int64_t(off)));
    return GoalNode::leaf(Assertion::of(c));
  }, p, fresh);
}

Term var(const char* n) { return Term::var(n); }

}  // namespace

TEST(GenVcs, OnePerInvariantPlusEntry) {
  Program p = parse_program(kWalk);
  auto vcs = gen_vcs(p.procedures.at("walk"), p);
  ASSERT_EQ(vcs.size(), 2u);
  EXPECT_EQ(vcs[0].id(), "walk@2");
  EXPECT_EQ(vcs[1].id(), "walk@entry");
  for (const auto& vc : vcs) EXPECT_TRUE(is_well_formed(vc.consequent)) << vc.id();
  // entry: invariant with cur := x
  EXPECT_EQ(to_string(vcs[1].consequent), "(; lseg($i1, x, x), lseg($i2, x, null) ; $i3)");
}

TEST(GenVcs, MetavariablesAreNeverBound) {
  Program p = parse_program(kWalk);
  for (const auto& vc : gen_vcs(p.procedures.at("walk"), p)) {
    for (const auto& m : metavariables(vc.consequent)) EXPECT_FALSE(m.empty());
    EXPECT_TRUE(is_well_formed(vc.consequent));
  }
}

TEST(GenVcs, UnreachableCodeWarns) {
  Program p = parse_program("proc f() {\n 0: aconst_null\n 1: return\n 2: consume 1\n 3: goto 0\n}");
  std::vector<std::string> warnings;
  auto vcs = gen_vcs(p.procedures.at("f"), p, &warnings);
  EXPECT_EQ(vcs.size(), 1u);
  EXPECT_FALSE(warnings.empty());
}

TEST(GenVcs, ReturnChecksPostconditionOnRet) {
  Program p = parse_program(R"(
proc id(x: ref) {
  requires: ; lseg($a, x, null) ; $b
  ensures: ; lseg($a, ret, null) ; $b
  0: load x
  1: return
}
)");
  auto vcs = gen_vcs(p.procedures.at("id"), p);
  ASSERT_EQ(vcs.size(), 1u);
  EXPECT_EQ(to_string(vcs[0].consequent), "(; lseg($a, x, null) ; $b)");
}

TEST(Wlp, ConsumeRequiresResource) {
  Goal g = wlp_of(kWalk, 4, {});
  ASSERT_EQ(g->kind(), GoalNode::Kind::Star);
  EXPECT_EQ(g->assertion().clauses[0].resource, LinearExpr(1));
  EXPECT_EQ(g->body()->assertion().clauses[0].resource, LinearExpr(5));
}

TEST(Wlp, IfNullSplitsOnTheTop) {
  SymState st;
  st.stack = {var("v")};
  Goal g = wlp_of(kWalk, 3, st);
  ASSERT_EQ(g->kind(), GoalNode::Kind::And);
  EXPECT_EQ(to_string(g), "[v != null -> (; emp ; 4)] /\\ [v = null -> (; emp ; 9)]");
}

TEST(Wlp, GetFieldNeedsTheCell) {
  SymState st;
  st.stack = {var("a")};
  Goal g = wlp_of(kWalk, 6, st);
  ASSERT_EQ(g->kind(), GoalNode::Kind::Exists);
  EXPECT_EQ(g->body()->kind(), GoalNode::Kind::Star);
  EXPECT_EQ(g->body()->assertion().clauses[0].heap[0].kind, HeapAtom::Kind::PointsTo);
  EXPECT_EQ(g->body()->body()->kind(), GoalNode::Kind::Wand);
}

TEST(Wlp, NewAllocatesUniversally) {
  const char* text = "proc f() locals 1 {\n 0: new {next: ref, data: int}\n 1: store 0\n 2: aconst_null\n 3: return\n}";
  Goal g = wlp_of(text, 0, {std::vector<Term>{}, {Term::null()}, {}});
  ASSERT_EQ(g->kind(), GoalNode::Kind::Forall);
  ASSERT_EQ(g->body()->kind(), GoalNode::Kind::Wand);
  EXPECT_EQ(g->body()->assertion().clauses[0].heap.size(), 2u);
}

TEST(Wlp, AcquireIsUnsupported) {
  const char* text = "proc f() {\n 0: iconst 1\n 1: acquire\n 2: return\n}";
  Program p = parse_program(text);
  EXPECT_THROW(gen_vcs(p.procedures.at("f"), p), VcGenError);
}

TEST(Wlp, CallUsesCalleeSpec) {
  Program p = parse_program(R"(
proc main(x: ref) {
  requires: ; lseg($a, x, null) ; $b
  ensures: ; lseg($a, x, null) ; $b
  0: load x
  1: call walk
  2: pop
  3: aconst_null
  4: return
}
proc walk(x: ref) {
  requires: ; lseg($w, x, null) ; $v
  ensures: ; lseg($w, x, null) ; 0
  0: aconst_null
  1: return
}
)");
  auto vcs = gen_vcs(p.procedures.at("main"), p);
  ASSERT_EQ(vcs.size(), 1u);
  std::string text = to_string(vcs[0].consequent);
  EXPECT_NE(text.find("lseg($w, x, null) ; $v"), std::string::npos) << text;
  EXPECT_NE(text.find("-*"), std::string::npos) << text;
}
