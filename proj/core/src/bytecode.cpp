#include "amort/bytecode.hpp"

#include <sstream>

namespace amort {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "add";
    case BinOp::Sub: return "sub";
    case BinOp::Mul: return "mul";
    case BinOp::Div: return "div";
    case BinOp::Rem: return "rem";
  }
  return "?";
}

std::string to_string(Cmp c) {
  switch (c) {
    case Cmp::Eq: return "eq";
    case Cmp::Ne: return "ne";
    case Cmp::Lt: return "lt";
    case Cmp::Le: return "le";
    case Cmp::Gt: return "gt";
    case Cmp::Ge: return "ge";
  }
  return "?";
}

std::string to_string(const FieldDescriptor& d) {
  std::string out = "{";
  for (std::size_t i = 0; i < d.entries.size(); ++i) {
    if (i) out += ", ";
    out += d.entries[i].first + ":" + (d.entries[i].second == ValueType::Int ? "int" : "ref");
  }
  return out + "}";
}

std::string to_string(const Instruction& i) {
  return std::visit(
      overloaded{
          [](const ins::IConst& x) { return "iconst " + std::to_string(x.value); },
          [](const ins::IBinop& x) { return "ibinop " + to_string(x.op); },
          [](const ins::Pop&) { return std::string("pop"); },
          [](const ins::Load& x) { return "load " + std::to_string(x.index); },
          [](const ins::Store& x) { return "store " + std::to_string(x.index); },
          [](const ins::AConstNull&) { return std::string("aconst_null"); },
          [](const ins::BinaryCmp& x) { return "binarycmp " + to_string(x.cmp) + " " + std::to_string(x.target); },
          [](const ins::UnaryCmp& x) { return "unarycmp " + to_string(x.cmp) + " " + std::to_string(x.target); },
          [](const ins::IfNull& x) { return "ifnull " + std::to_string(x.target); },
          [](const ins::Goto& x) { return "goto " + std::to_string(x.target); },
          [](const ins::New& x) { return "new " + to_string(x.desc); },
          [](const ins::GetField& x) { return "getfield " + x.field; },
          [](const ins::PutField& x) { return "putfield " + x.field; },
          [](const ins::Free& x) { return "free " + to_string(x.desc); },
          [](const ins::Consume& x) { return "consume " + to_string(x.amount); },
          [](const ins::ConsumeDyn&) { return std::string("consume_dyn"); },
          [](const ins::Acquire&) { return std::string("acquire"); },
          [](const ins::Return&) { return std::string("return"); },
          [](const ins::Call& x) { return "call " + x.callee; },
      },
      i);
}

std::optional<std::size_t> jump_target(const Instruction& i) {
  if (auto* b = std::get_if<ins::BinaryCmp>(&i)) return b->target;
  if (auto* u = std::get_if<ins::UnaryCmp>(&i)) return u->target;
  if (auto* n = std::get_if<ins::IfNull>(&i)) return n->target;
  if (auto* g = std::get_if<ins::Goto>(&i)) return g->target;
  return std::nullopt;
}

std::vector<std::size_t> successors(const Instruction& i, std::size_t pc) {
  if (std::holds_alternative<ins::Return>(i)) return {};
  if (auto* g = std::get_if<ins::Goto>(&i)) return {g->target};
  if (auto t = jump_target(i)) {
    if (*t == pc + 1) return {pc + 1};
    return {pc + 1, *t};
  }
  return {pc + 1};
}

std::string Procedure::slot_name(std::size_t i) const {
  if (i < params.size()) return params[i].name;
  std::size_t k = i - params.size();
  if (k < local_names.size() && !local_names[k].empty()) return local_names[k];
  return "local" + std::to_string(i);
}

std::optional<std::size_t> Procedure::slot_of(const std::string& name) const {
  for (std::size_t i = 0; i < local_count; ++i) {
    if (slot_name(i) == name) return i;
  }
  return std::nullopt;
}

std::set<std::string> Procedure::slot_names() const {
  std::set<std::string> out;
  for (std::size_t i = 0; i < local_count; ++i) out.insert(slot_name(i));
  return out;
}

bool operator==(const Procedure& a, const Procedure& b) {
  return a.name == b.name && a.params == b.params && a.local_count == b.local_count &&
         a.local_names == b.local_names && a.code == b.code && a.precondition == b.precondition &&
         a.postcondition == b.postcondition && a.invariants == b.invariants;
}

const Procedure* Program::find(const std::string& name) const {
  auto it = procedures.find(name);
  return it == procedures.end() ? nullptr : &it->second;
}

std::string to_string(const Diagnostic& d) {
  std::string out = d.procedure;
  if (d.offset) out += "@" + std::to_string(*d.offset);
  return out + ": " + d.message;
}

std::string pretty_print(const Program& p) {
  std::ostringstream out;
  for (const auto& name : p.order) {
    const Procedure& proc = p.procedures.at(name);
    out << "proc " << proc.name << "(";
    for (std::size_t i = 0; i < proc.params.size(); ++i) {
      out << (i ? ", " : "") << proc.params[i].name << ":"
          << (proc.params[i].type == ValueType::Int ? "int" : "ref");
    }
    out << ") locals " << proc.local_count;
    if (!proc.local_names.empty()) {
      out << " [";
      for (std::size_t i = 0; i < proc.local_names.size(); ++i) {
        out << (i ? ", " : "") << (proc.local_names[i].empty() ? "_" : proc.local_names[i]);
      }
      out << "]";
    }
    out << " {\n";
    out << "  requires: " << to_string(proc.precondition) << "\n";
    out << "  ensures: " << to_string(proc.postcondition) << "\n";
    for (std::size_t pc = 0; pc < proc.code.size(); ++pc) {
      auto inv = proc.invariants.find(pc);
      if (inv != proc.invariants.end()) out << "  invariant " << pc << ": " << to_string(inv->second) << "\n";
      out << "  " << pc << ": " << to_string(proc.code[pc]) << "\n";
    }
    for (auto it = proc.invariants.lower_bound(proc.code.size()); it != proc.invariants.end(); ++it) {
      out << "  invariant " << it->first << ": " << to_string(it->second) << "\n";
    }
    out << "}\n\n";
  }
  if (!p.entry.empty()) out << "entry " << p.entry << "\n";
  return out.str();
}

std::vector<Diagnostic> validate(const Program& p) {
  std::vector<Diagnostic> out;
  if (p.entry.empty() || !p.find(p.entry)) {
    out.push_back({p.entry, std::nullopt, "entry procedure '" + p.entry + "' is not defined"});
  }
  for (const auto& name : p.order) {
    const Procedure& proc = p.procedures.at(name);
    auto diag = [&](std::optional<std::size_t> at, std::string msg) { out.push_back({name, at, std::move(msg)}); };
    if (proc.local_count < proc.params.size()) diag(std::nullopt, "fewer locals than parameters");
    if (proc.code.empty()) {
      diag(std::nullopt, "procedure has no instructions");
      continue;
    }
    auto check_desc = [&](std::size_t pc, const FieldDescriptor& d) {
      std::set<std::string> seen;
      for (const auto& [f, _] : d.entries) {
        if (!seen.insert(f).second) diag(pc, "duplicate field '" + f + "' in descriptor");
      }
      if (d.entries.empty()) diag(pc, "empty descriptor");
    };
    for (std::size_t pc = 0; pc < proc.code.size(); ++pc) {
      const Instruction& i = proc.code[pc];
      if (auto t = jump_target(i); t && *t >= proc.code.size()) {
        diag(pc, "branch target " + std::to_string(*t) + " out of range");
      }
      if (auto* l = std::get_if<ins::Load>(&i); l && l->index >= proc.local_count) {
        diag(pc, "load index " + std::to_string(l->index) + " exceeds local count");
      }
      if (auto* s = std::get_if<ins::Store>(&i); s && s->index >= proc.local_count) {
        diag(pc, "store index " + std::to_string(s->index) + " exceeds local count");
      }
      if (auto* c = std::get_if<ins::Call>(&i); c && !p.find(c->callee)) {
        diag(pc, "call to undefined procedure '" + c->callee + "'");
      }
      if (auto* n = std::get_if<ins::New>(&i)) check_desc(pc, n->desc);
      if (auto* f = std::get_if<ins::Free>(&i)) check_desc(pc, f->desc);
    }
    const Instruction& last = proc.code.back();
    if (!std::holds_alternative<ins::Return>(last) && !std::holds_alternative<ins::Goto>(last)) {
      diag(proc.code.size() - 1, "control falls off the end of the procedure");
    }
    for (const auto& [off, _] : proc.invariants) {
      if (off >= proc.code.size()) diag(off, "invariant attached to nonexistent offset");
    }
    bool targets_ok = true;
    for (std::size_t pc = 0; pc < proc.code.size(); ++pc) {
      for (std::size_t s : successors(proc.code[pc], pc)) {
        if (s >= proc.code.size()) targets_ok = false;
      }
    }
    if (!targets_ok) continue;
    WlpOrder order = order_for_wlp(proc);
    for (std::size_t t : order.back_edge_targets) {
      if (!proc.invariants.count(t)) {
        out.push_back({name, t, "missing invariant at offset " + std::to_string(t), true});
      }
    }
  }
  return out;
}

}  // namespace amort
