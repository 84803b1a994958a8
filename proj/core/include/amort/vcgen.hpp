#ifndef AMORT_VCGEN_HPP
#define AMORT_VCGEN_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amort/assertion.hpp"
#include "amort/bytecode.hpp"

namespace amort {

/// antecedent |- consequent for one program point.
struct VerificationCondition {
  std::string procedure;
  std::optional<std::size_t> offset;  // nullopt: procedure entry
  Assertion antecedent;
  Goal consequent;
  std::string note;

  /// `proc@entry` or `proc@<offset>`.
  std::string id() const;
};

class VcGenError : public std::runtime_error {
public:
  VcGenError(std::string procedure, std::optional<std::size_t> offset, const std::string& message);
  const std::string& procedure() const { return procedure_; }
  std::optional<std::size_t> offset() const { return offset_; }

private:
  std::string procedure_;
  std::optional<std::size_t> offset_;
};

/// Symbolic machine state: operand stack (top = back), locals, and the
/// values the procedure was called with.
struct SymState {
  std::vector<Term> stack;
  std::vector<Term> locals;
  std::vector<Term> args;
};

/// Generated logical variable names start with '_'.
class FreshNames {
public:
  std::string operator()(const std::string& hint) { return "_" + hint + std::to_string(next_++); }

private:
  std::size_t next_ = 0;
};

using SuccessorGoal = std::function<Goal(std::size_t offset, const SymState&)>;

/// Weakest liberal precondition of the instruction at `pc` in `proc`.
Goal wlp(const Procedure& proc, std::size_t pc, const SymState& state, const SuccessorGoal& succ,
         const Program& program, FreshNames& fresh);

/// One VC per annotated reachable offset (in reverse visit order), then the
/// entry VC. Unreachable code is skipped and reported through `warnings`.
std::vector<VerificationCondition> gen_vcs(const Procedure& proc, const Program& program,
                                           std::vector<std::string>* warnings = nullptr);

}  // namespace amort

#endif
