#ifndef AMORT_BYTECODE_HPP
#define AMORT_BYTECODE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "amort/assertion.hpp"
#include "amort/parse.hpp"
#include "amort/resource.hpp"

namespace amort {

enum class ValueType : std::uint8_t { Int, Ref };
enum class BinOp : std::uint8_t { Add, Sub, Mul, Div, Rem };
enum class Cmp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

struct FieldDescriptor {
  std::vector<std::pair<std::string, ValueType>> entries;
  friend bool operator==(const FieldDescriptor&, const FieldDescriptor&) = default;
};

namespace ins {
#define AMORT_INSTR(Name, ...)                                       \
  struct Name {                                                      \
    __VA_ARGS__                                                      \
    friend bool operator==(const Name&, const Name&) = default;      \
  }
AMORT_INSTR(IConst, std::int64_t value;);
AMORT_INSTR(IBinop, BinOp op;);
AMORT_INSTR(Pop);
AMORT_INSTR(Load, std::size_t index;);
AMORT_INSTR(Store, std::size_t index;);
AMORT_INSTR(AConstNull);
AMORT_INSTR(BinaryCmp, Cmp cmp; std::size_t target;);
AMORT_INSTR(UnaryCmp, Cmp cmp; std::size_t target;);
AMORT_INSTR(IfNull, std::size_t target;);
AMORT_INSTR(Goto, std::size_t target;);
AMORT_INSTR(New, FieldDescriptor desc;);
AMORT_INSTR(GetField, std::string field;);
AMORT_INSTR(PutField, std::string field;);
AMORT_INSTR(Free, FieldDescriptor desc;);
AMORT_INSTR(Consume, Rational amount;);
AMORT_INSTR(ConsumeDyn);
AMORT_INSTR(Acquire);
AMORT_INSTR(Return);
AMORT_INSTR(Call, std::string callee;);
#undef AMORT_INSTR
}  // namespace ins

using Instruction =
    std::variant<ins::IConst, ins::IBinop, ins::Pop, ins::Load, ins::Store, ins::AConstNull, ins::BinaryCmp,
                 ins::UnaryCmp, ins::IfNull, ins::Goto, ins::New, ins::GetField, ins::PutField, ins::Free,
                 ins::Consume, ins::ConsumeDyn, ins::Acquire, ins::Return, ins::Call>;

std::string to_string(const Instruction& i);
std::string to_string(const FieldDescriptor& d);
std::string to_string(BinOp op);
std::string to_string(Cmp c);

/// Branch target of a jump instruction, if any.
std::optional<std::size_t> jump_target(const Instruction& i);
/// Control-flow successors of offset `pc`.
std::vector<std::size_t> successors(const Instruction& i, std::size_t pc);

struct Param {
  std::string name;
  ValueType type = ValueType::Ref;
  friend bool operator==(const Param&, const Param&) = default;
};

struct Procedure {
  std::string name;
  std::vector<Param> params;
  /// Total local slots; slots [0, params.size()) hold the arguments.
  std::size_t local_count = 0;
  /// Optional names for slots from params.size() on; empty string = unnamed.
  std::vector<std::string> local_names;
  std::vector<Instruction> code;
  std::vector<int> lines;  // source line of each instruction
  Assertion precondition = Assertion::emp();
  Assertion postcondition = Assertion::emp();
  std::map<std::size_t, Assertion> invariants;

  /// Name of slot `i` as used in annotations (`local<i>` when unnamed).
  std::string slot_name(std::size_t i) const;
  std::optional<std::size_t> slot_of(const std::string& name) const;
  std::set<std::string> slot_names() const;
};

/// Structural equality; source lines are ignored.
bool operator==(const Procedure& a, const Procedure& b);

struct Program {
  std::map<std::string, Procedure> procedures;
  std::vector<std::string> order;  // declaration order
  std::string entry;

  const Procedure* find(const std::string& name) const;
  friend bool operator==(const Program&, const Program&) = default;
};

/// Assembly text:
///   proc <name>(<p>:<int|ref>, ...) [locals <n> [<name>, ...]] {
///     requires: <assertion>
///     ensures: <assertion>
///     <idx>: <mnemonic> <operands>
///     invariant <idx>: <assertion>
///   }
///   entry <name>
/// Throws ParseError.
Program parse_program(std::string_view text);
std::string pretty_print(const Program& p);

struct Diagnostic {
  std::string procedure;
  std::optional<std::size_t> offset;
  std::string message;
  /// Only matters for static analysis; the interpreter can still run.
  bool analysis_only = false;
};

std::string to_string(const Diagnostic& d);

std::vector<Diagnostic> validate(const Program& p);

struct WlpOrder {
  std::vector<std::size_t> order;  // reverse post-order, unreachable offsets appended
  std::set<std::size_t> back_edge_targets;
  std::set<std::size_t> unreachable;
};

WlpOrder order_for_wlp(const Procedure& proc);

}  // namespace amort

#endif
