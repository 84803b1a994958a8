#include "amort/analysis.hpp"

#include <chrono>
#include <future>

#include "amort/heap_builder.hpp"

namespace amort {

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

LinearExpr fix(const LinearExpr& e, const Valuation& v) {
  Rational r = e.constant();
  for (const auto& [name, k] : e.terms()) {
    auto it = v.find(name);
    if (it != v.end()) r += k * it->second;
  }
  return LinearExpr(r);
}

struct ProcedureResult {
  std::vector<VcOutcome> vcs;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
};

ProcedureResult analyse_procedure(const Procedure& proc, const Program& program, const ProverOptions& opts) {
  ProcedureResult out;
  std::vector<VerificationCondition> vcs;
  try {
    vcs = gen_vcs(proc, program, &out.warnings);
  } catch (const VcGenError& e) {
    out.error = e.what();
    return out;
  }
  for (auto& vc : vcs) {
    auto t0 = Clock::now();
    ProofResult r = prove_vc(vc, opts);
    out.vcs.push_back({std::move(vc), std::move(r), millis_since(t0)});
  }
  return out;
}

}  // namespace

Assertion instantiate(const Assertion& a, const Valuation& v) {
  Assertion out = a;
  for (auto& c : out.clauses) {
    c.resource = fix(c.resource, v);
    for (auto& h : c.heap) h.annotation = fix(h.annotation, v);
  }
  return out;
}

std::set<std::string> metavariables(const Procedure& proc) {
  std::set<std::string> out = metavariables(proc.precondition);
  auto post = metavariables(proc.postcondition);
  out.insert(post.begin(), post.end());
  for (const auto& [_, inv] : proc.invariants) {
    auto m = metavariables(inv);
    out.insert(m.begin(), m.end());
  }
  return out;
}

bool AnalysisReport::proved() const {
  if (!diagnostics.empty() || !errors.empty()) return false;
  for (const auto& v : vcs) {
    if (!v.proof.proved) return false;
  }
  return true;
}

int AnalysisReport::exit_code() const {
  if (!diagnostics.empty()) return kExitValidate;
  if (!proved()) return kExitProof;
  if (!feasible()) return kExitInfeasible;
  return kExitOk;
}

std::optional<Rational> AnalysisReport::value(const std::string& metavariable) const {
  for (const auto& p : procedures) {
    auto it = p.valuation.find(metavariable);
    if (it != p.valuation.end()) return it->second;
  }
  return std::nullopt;
}

AnalysisReport analyze(const Program& program, const AnalyzeOptions& opts) {
  auto t0 = Clock::now();
  AnalysisReport report;
  report.diagnostics = validate(program);
  if (!report.diagnostics.empty()) {
    report.millis = millis_since(t0);
    return report;
  }

  std::vector<ProcedureResult> results(program.order.size());
  if (opts.parallel && program.order.size() > 1) {
    std::vector<std::future<ProcedureResult>> jobs;
    for (const auto& name : program.order) {
      jobs.push_back(std::async(std::launch::async, [&, name] {
        return analyse_procedure(program.procedures.at(name), program, opts.prover);
      }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < program.order.size(); ++i) {
      results[i] = analyse_procedure(program.procedures.at(program.order[i]), program, opts.prover);
    }
  }
  for (auto& r : results) {
    report.warnings.insert(report.warnings.end(), r.warnings.begin(), r.warnings.end());
    if (r.error) report.errors.push_back(*r.error);
    for (auto& v : r.vcs) {
      for (const auto& c : v.proof.constraints) report.constraints.push_back(c);
      report.vcs.push_back(std::move(v));
    }
  }
  if (!report.proved()) {
    report.millis = millis_since(t0);
    return report;
  }

  // LP: entry precondition first, then everything
  std::set<std::string> all;
  for (const auto& name : program.order) {
    auto m = metavariables(program.procedures.at(name));
    all.insert(m.begin(), m.end());
  }
  const Procedure& entry = program.procedures.at(program.entry);
  std::map<std::string, Rational> primary, secondary;
  for (const auto& m : metavariables(entry.precondition)) primary[m] = 1;
  for (const auto& m : all) secondary[m] = 1;
  report.problem.variables.assign(all.begin(), all.end());
  for (const auto& c : report.constraints) report.problem.constraints.push_back(normalise(c));
  report.problem.objectives = {primary, secondary};
  report.solution = solve(report.problem);

  if (report.feasible()) {
    Valuation full;
    for (const auto& m : all) full[m] = 0;
    for (const auto& [k, v] : report.solution->valuation) full[k] = v;
    for (const auto& c : report.problem.constraints) {
      if (!satisfies(c, full)) throw std::logic_error("LP solution violates constraint: " + c.label);
    }
    for (const auto& [k, v] : full) {
      if (!is_integral(v)) report.warnings.push_back("non-integral value $" + k + " = " + to_string(v));
    }
    for (const auto& name : program.order) {
      const Procedure& proc = program.procedures.at(name);
      ProcedureSummary s;
      s.name = name;
      for (const auto& m : metavariables(proc)) s.valuation[m] = full[m];
      s.precondition = instantiate(proc.precondition, full);
      s.postcondition = instantiate(proc.postcondition, full);
      for (const auto& [off, inv] : proc.invariants) s.invariants[off] = instantiate(inv, full);
      report.procedures.push_back(std::move(s));
    }
  }
  report.millis = millis_since(t0);
  return report;
}

std::optional<Rational> tightness(const CheckRow& row) {
  if (row.budget == 0) return std::nullopt;
  return Rational(row.consumed / row.budget);
}

CheckReport check(const Program& program, const Valuation& v, std::size_t max_size, std::size_t fuel) {
  CheckReport out;
  const Procedure* entry = program.find(program.entry);
  if (!entry) {
    out.failure = "no entry procedure";
    return out;
  }
  for (std::size_t n = 0; n <= max_size; ++n) {
    BuildOptions bo;
    bo.size = n;
    auto input = build_input(*entry, v, bo);
    if (!input) continue;  // e.g. a nonempty list at size 0
    RunOptions ro;
    ro.budget = ResourceValue(input->budget);
    ro.fuel = fuel;
    ro.heap = input->heap;
    ro.next_address = input->next_address;
    RunResult r = run(program, input->args, ro);
    CheckRow row;
    row.size = n;
    row.budget = input->budget;
    row.consumed = r.peak_consumed.amount();
    row.outcome = outcome_name(r.outcome);
    row.steps = r.steps;
    out.rows.push_back(row);
    if (!std::holds_alternative<Halt>(r.outcome)) {
      out.failure = "size " + std::to_string(n) + ": " + row.outcome + " after " + std::to_string(r.steps) +
                    " steps, consumed " + to_string(row.consumed) + " of budget " + to_string(row.budget);
      if (auto* s = std::get_if<Stuck>(&r.outcome)) {
        *out.failure += " (" + s->procedure + "@" + std::to_string(s->pc) + ": " + s->reason + ")";
      }
      return out;
    }
  }
  if (out.rows.empty()) out.failure = "precondition has no model at any size up to " + std::to_string(max_size);
  return out;
}

}  // namespace amort
