// amort: resource-bound analysis and interpreter for annotated bytecode.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "amort/analysis.hpp"
#include "amort/heap_builder.hpp"
#include "amort/parse.hpp"

using nlohmann::json;
using namespace amort;

namespace {

struct Loaded {
  Program program;
  std::string path;
};

std::optional<Loaded> load(const std::string& path, int& code) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << path << ": cannot open file\n";
    code = kExitParse;
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Loaded{parse_program(ss.str()), path};
  } catch (const ParseError& e) {
    std::cerr << path << ":" << e.line() << ":" << e.column() << ": error: " << e.detail() << "\n";
    code = kExitParse;
    return std::nullopt;
  }
}

json value_json(const Value& v) {
  if (v.is_int()) return v.z;
  if (v.is_null()) return nullptr;
  return "#" + std::to_string(v.a);
}

json heap_json(const Heap& h) {
  json out = json::object();
  for (const auto& [k, v] : h) out["#" + std::to_string(k.first) + "." + k.second] = value_json(v);
  return out;
}

json valuation_json(const Valuation& v) {
  json out = json::object();
  for (const auto& [k, r] : v) out[k] = to_string(r);
  return out;
}

json report_json(const AnalysisReport& r, const std::string& file) {
  json out;
  out["file"] = file;
  out["proved"] = r.proved();
  out["exit_code"] = r.exit_code();
  out["millis"] = r.millis;
  out["warnings"] = r.warnings;
  out["errors"] = r.errors;
  json vcs = json::array();
  for (const auto& v : r.vcs) {
    json j;
    j["id"] = v.vc.id();
    j["note"] = v.vc.note;
    j["proved"] = v.proof.proved;
    j["steps"] = v.proof.steps;
    j["millis"] = v.millis;
    if (!v.proof.proved) j["failure"] = v.proof.failure;
    json cs = json::array();
    for (const auto& c : v.proof.constraints) cs.push_back(to_string(c));
    j["constraints"] = cs;
    vcs.push_back(j);
  }
  out["vcs"] = vcs;
  if (r.solution) {
    out["lp"] = {{"status", to_string(r.solution->status)}, {"objective", to_string(r.solution->objective)}};
    if (!r.solution->infeasible_core.empty()) {
      json core = json::array();
      for (auto i : r.solution->infeasible_core) {
        core.push_back(lp_dump(LpProblem{{}, {r.problem.constraints[i]}, {}}));
      }
      out["lp"]["infeasible_core"] = core;
    }
  }
  json procs = json::object();
  for (const auto& p : r.procedures) {
    json j;
    j["valuation"] = valuation_json(p.valuation);
    j["requires"] = to_string(p.precondition);
    j["ensures"] = to_string(p.postcondition);
    json inv = json::object();
    for (const auto& [off, a] : p.invariants) inv[std::to_string(off)] = to_string(a);
    j["invariants"] = inv;
    procs[p.name] = j;
  }
  out["procedures"] = procs;
  return out;
}

void print_report(const AnalysisReport& r, bool emit_vcs, bool emit_constraints, bool dump_lp) {
  for (const auto& d : r.diagnostics) std::cout << "error: " << to_string(d) << "\n";
  for (const auto& e : r.errors) std::cout << "error: " << e << "\n";
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
  for (const auto& v : r.vcs) {
    std::cout << (v.proof.proved ? "proved " : "FAILED ") << v.vc.id() << " (" << v.vc.note << ")";
    if (!v.proof.proved) std::cout << ": " << v.proof.failure;
    std::cout << "\n";
    if (emit_vcs) {
      std::cout << "  " << to_string(v.vc.antecedent) << "\n  |- " << to_string(v.vc.consequent) << "\n";
    }
    if (emit_constraints) {
      for (const auto& c : v.proof.constraints) std::cout << "  " << to_string(c) << "\n";
    }
  }
  if (dump_lp && r.solution) std::cout << lp_dump(r.problem);
  if (r.solution) {
    std::cout << "lp: " << to_string(r.solution->status);
    if (r.feasible()) std::cout << ", objective " << to_string(r.solution->objective);
    std::cout << "\n";
    for (auto i : r.solution->infeasible_core) {
      const auto& c = r.problem.constraints[i];
      std::cout << "  conflicting: " << lp_dump(LpProblem{{}, {c}, {}}).substr(4);
    }
  }
  for (const auto& p : r.procedures) {
    std::cout << "\nproc " << p.name << "\n";
    for (const auto& [k, v] : p.valuation) std::cout << "  $" << k << " = " << to_string(v) << "\n";
    std::cout << "  requires: " << to_string(p.precondition) << "\n";
    std::cout << "  ensures: " << to_string(p.postcondition) << "\n";
    for (const auto& [off, a] : p.invariants) std::cout << "  invariant " << off << ": " << to_string(a) << "\n";
  }
}

int exit_for(const Outcome& o) {
  if (std::holds_alternative<Halt>(o)) return kExitOk;
  if (std::holds_alternative<BudgetViolation>(o)) return kExitBudgetViolation;
  if (std::holds_alternative<Stuck>(o)) return kExitStuck;
  return kExitFuelExhausted;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Amortised resource analysis for a small bytecode language"};
  app.require_subcommand(1);

  std::string file;
  bool emit_vcs = false, emit_constraints = false, lp_dump_flag = false;
  std::string json_out;
  std::size_t max_unfold = ProverOptions{}.max_unfold_depth;
  auto* analyze_cmd = app.add_subcommand("analyze", "verify annotations and infer resource bounds");
  analyze_cmd->add_option("file", file, "program file")->required();
  analyze_cmd->add_flag("--emit-vcs", emit_vcs, "print verification conditions");
  analyze_cmd->add_flag("--emit-constraints", emit_constraints, "print collected constraints");
  analyze_cmd->add_flag("--lp-dump", lp_dump_flag, "print the linear program");
  analyze_cmd->add_option("--json", json_out, "write a JSON report to this path ('-' for stdout)");
  analyze_cmd->add_option("--max-unfold", max_unfold, "unfolding bound for proof search");

  std::string budget = "0", policy = "grant";
  std::size_t fuel = RunOptions{}.fuel;
  std::uint64_t seed = 0;
  bool run_json = false;
  std::size_t size = 0;
  std::vector<std::string> arg_overrides;
  auto* run_cmd = app.add_subcommand("run", "execute the entry procedure");
  run_cmd->add_option("file", file, "program file")->required();
  run_cmd->add_option("--budget", budget, "resource budget, integer or p/q");
  run_cmd->add_option("--fuel", fuel, "maximum number of steps");
  run_cmd->add_option("--policy", policy, "acquire policy: grant, deny, random or a list like grant,deny");
  run_cmd->add_option("--seed", seed, "seed for the random policy");
  run_cmd->add_flag("--json", run_json, "print the outcome as JSON");
  run_cmd->add_option("--size,--list-len", size, "nodes per list or tree in the generated input");
  run_cmd->add_option("--arg", arg_overrides, "fix a parameter, e.g. --arg k=2 or --arg x=null");

  std::size_t max_size = 20;
  auto* check_cmd = app.add_subcommand("check", "run inputs of growing size under the inferred budget");
  check_cmd->add_option("file", file, "program file")->required();
  check_cmd->add_option("--max-size", max_size, "largest input size");
  check_cmd->add_option("--fuel", fuel, "maximum number of steps per run");

  CLI11_PARSE(app, argc, argv);

  int code = 0;
  auto loaded = load(file, code);
  if (!loaded) return code;
  const Program& program = loaded->program;

  if (*analyze_cmd || *check_cmd) {
    AnalyzeOptions ao;
    ao.prover.max_unfold_depth = max_unfold;
    AnalysisReport r = analyze(program, ao);
    if (*analyze_cmd) {
      print_report(r, emit_vcs, emit_constraints, lp_dump_flag);
      if (!json_out.empty()) {
        std::string text = report_json(r, file).dump(2);
        if (json_out == "-") {
          std::cout << text << "\n";
        } else {
          std::ofstream(json_out) << text << "\n";
        }
      }
      return r.exit_code();
    }
    if (r.exit_code() != kExitOk) {
      print_report(r, false, false, false);
      return r.exit_code();
    }
    Valuation v;
    for (const auto& p : r.procedures) v.insert(p.valuation.begin(), p.valuation.end());
    CheckReport c = check(program, v, max_size, fuel);
    std::cout << "size  budget  consumed  tightness  outcome\n";
    for (const auto& row : c.rows) {
      auto t = tightness(row);
      std::cout << row.size << "  " << to_string(row.budget) << "  " << to_string(row.consumed) << "  "
                << (t ? to_string(*t) : std::string("-")) << "  " << row.outcome << "\n";
    }
    if (c.failure) {
      std::cout << "check failed: " << *c.failure << "\n";
      return kExitBudgetViolation;
    }
    std::cout << "check passed\n";
    return kExitOk;
  }

  // run
  for (const auto& d : validate(program)) {
    if (d.analysis_only) continue;
    std::cerr << "error: " << to_string(d) << "\n";
    return kExitValidate;
  }
  RunOptions ro;
  try {
    ro.budget = ResourceValue(parse_rational(budget));
    ro.policy = AcquisitionPolicy::parse(policy, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  ro.fuel = fuel;
  const Procedure& entry = program.procedures.at(program.entry);
  BuildOptions bo;
  bo.size = size;
  for (const auto& a : arg_overrides) {
    auto eq = a.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --arg expects name=value\n";
      return 1;
    }
    std::string name = a.substr(0, eq), val = a.substr(eq + 1);
    bo.overrides[name] = val == "null" ? Value::null() : Value::integer(std::stoll(val));
  }
  Valuation zero;
  for (const auto& m : metavariables(entry)) zero[m] = 0;
  auto input = build_input(entry, zero, bo);
  if (!input) {
    std::cerr << "error: cannot build an input satisfying the precondition of " << entry.name << "\n";
    return 1;
  }
  ro.heap = input->heap;
  ro.next_address = input->next_address;
  RunResult r = run(program, input->args, ro);

  json j;
  j["outcome"] = outcome_name(r.outcome);
  j["steps"] = r.steps;
  j["peak_consumed"] = to_string(r.peak_consumed);
  if (auto* h = std::get_if<Halt>(&r.outcome)) {
    j["consumed"] = to_string(h->consumed);
    j["total"] = to_string(h->total);
    j["return"] = value_json(h->value);
    j["heap"] = heap_json(h->heap);
  } else if (auto* b = std::get_if<BudgetViolation>(&r.outcome)) {
    j["consumed"] = to_string(b->consumed);
    j["total"] = to_string(b->total);
    j["at"] = b->procedure + "@" + std::to_string(b->pc);
  } else if (auto* s = std::get_if<Stuck>(&r.outcome)) {
    j["reason"] = s->reason;
    j["at"] = s->procedure + "@" + std::to_string(s->pc);
  }
  if (run_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "outcome: " << j["outcome"].get<std::string>() << " after " << r.steps << " steps\n";
    if (j.contains("consumed")) {
      std::cout << "consumed: " << j["consumed"].get<std::string>() << " of " << j["total"].get<std::string>() << "\n";
    }
    if (j.contains("return")) std::cout << "return: " << j["return"].dump() << "\n";
    if (j.contains("reason")) std::cout << "stuck at " << j["at"].get<std::string>() << ": " << j["reason"].get<std::string>() << "\n";
  }
  return exit_for(r.outcome);
}
