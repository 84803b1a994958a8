#include "amort/heap_builder.hpp"

namespace amort {

std::optional<BuiltInput> build_input(const Procedure& proc, const Valuation& v, const BuildOptions& opts) {
  GenerateOptions gen;
  gen.fixed_size = opts.size;
  gen.max_cells = std::size_t(-1);
  for (const auto& p : proc.params) {
    Term t = Term::prog_var(p.name);
    gen.extra_terms.push_back(t);
    auto o = opts.overrides.find(p.name);
    if (o != opts.overrides.end()) {
      gen.preferred[t] = o->second;
    } else {
      gen.preferred[t] = p.type == ValueType::Int ? Value::integer(opts.default_int) : Value::null();
    }
  }
  for (const auto& c : proc.precondition.clauses) {
    std::optional<BuiltInput> out;
    generate_models(c, {}, v, gen, [&](const Model& m) {
      BuiltInput in;
      for (const auto& p : proc.params) {
        const Value& val = m.env.at(Term::prog_var(p.name));
        if ((p.type == ValueType::Int) != val.is_int()) return true;
        in.args.push_back(val);
      }
      auto o = opts.overrides.begin();
      for (; o != opts.overrides.end(); ++o) {
        auto it = m.env.find(Term::prog_var(o->first));
        if (it == m.env.end() || it->second != o->second) break;
      }
      if (o != opts.overrides.end()) return true;
      in.heap = m.heap;
      std::int64_t next_data = 0;
      for (auto& [cell, value] : in.heap) {
        if (cell.second == "data" && value.is_int()) value = Value::integer(next_data--);
      }
      in.next_address = m.next_address;
      in.budget = m.demand;
      out = std::move(in);
      return false;
    });
    if (out) return out;
  }
  return std::nullopt;
}

}  // namespace amort
