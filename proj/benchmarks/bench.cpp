#include <fstream>
#include <random>
#include <sstream>

#include <benchmark/benchmark.h>

#include "amort/analysis.hpp"
#include "amort/heap_builder.hpp"

using namespace amort;

namespace {

Program corpus(const std::string& name) {
  std::ifstream in(std::string(AMORT_CORPUS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

void BM_Analyze(benchmark::State& state, const std::string& file) {
  Program p = corpus(file);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(p));
}

void BM_Run(benchmark::State& state, const std::string& file) {
  Program p = corpus(file);
  const Procedure& entry = p.procedures.at(p.entry);
  Valuation v;
  for (const auto& m : metavariables(entry)) v[m] = 3;
  BuildOptions bo;
  bo.size = std::size_t(state.range(0));
  auto input = build_input(entry, v, bo);
  RunOptions ro;
  ro.heap = input->heap;
  ro.budget = ResourceValue(input->budget);
  for (auto _ : state) benchmark::DoNotOptimize(run(p, input->args, ro));
  state.SetComplexityN(state.range(0));
}

void BM_Simplex(benchmark::State& state) {
  std::mt19937 rng(42);
  const auto n = std::size_t(state.range(0));
  LpProblem p;
  for (std::size_t i = 0; i < n; ++i) p.variables.push_back("v" + std::to_string(i));
  for (std::size_t j = 0; j < 2 * n; ++j) {
    LpConstraint c;
    for (const auto& v : p.variables) {
      if (rng() % 3 == 0) c.coeffs[v] = int(rng() % 5) - 1;
    }
    c.rhs = int(rng() % 4);
    p.constraints.push_back(c);
  }
  std::map<std::string, Rational> obj;
  for (const auto& v : p.variables) obj[v] = 1;
  p.objectives = {obj};
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}

void BM_ProveChain(benchmark::State& state) {
  ProofContext ctx;
  const auto n = std::size_t(state.range(0));
  auto x = [](std::size_t i) { return Term::var("x" + std::to_string(i)); };
  for (std::size_t i = 0; i < n; ++i) {
    ctx.heap.push_back(HeapAtom::lseg(LinearExpr::var("a"), x(i), x(i + 1)));
    ctx.pure.push_back(PureAtom::ne(x(i), x(i + 1)));
  }
  ctx.pure.push_back(PureAtom::eq(x(n), Term::null()));
  Clause goal;
  goal.heap.push_back(HeapAtom::lseg(LinearExpr::var("a"), x(0), Term::null()));
  Goal g = GoalNode::leaf(Assertion::of(goal));
  for (auto _ : state) benchmark::DoNotOptimize(prove(ctx, g));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Analyze, iterate_list, std::string("iterate_list.amr"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Analyze, queue, std::string("queue.amr"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Analyze, frying_pan, std::string("frying_pan.amr"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Analyze, merge_inner, std::string("merge_inner.amr"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Analyze, tree_copy, std::string("tree_copy.amr"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, copy_list, std::string("copy_list.amr"))->RangeMultiplier(4)->Range(4, 1024)->Complexity();
BENCHMARK_CAPTURE(BM_Run, tree_mirror, std::string("tree_mirror.amr"))->RangeMultiplier(4)->Range(4, 1024)->Complexity();
BENCHMARK(BM_Simplex)->DenseRange(4, 16, 4);
BENCHMARK(BM_ProveChain)->DenseRange(4, 32, 14);

BENCHMARK_MAIN();
