#ifndef AMORT_VM_HPP
#define AMORT_VM_HPP

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "amort/bytecode.hpp"
#include "amort/heap.hpp"
#include "amort/resource.hpp"

namespace amort {

/// Activation frame. The operand stack's top is `stack.back()`.
struct Frame {
  std::string procedure;
  std::vector<Value> stack;
  std::vector<std::optional<Value>> locals;
  std::size_t pc = 0;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct MachineState {
  ResourceValue consumed;
  ResourceValue total;
  Heap heap;
  std::vector<Frame> frames;  // back() is the running frame
  Address next_address = 1;   // allocation counter, never reused
  std::size_t acquire_requests = 0;
};

struct Halt {
  Heap heap;
  ResourceValue consumed;
  ResourceValue total;
  Value value;
};

struct Stuck {
  std::string reason;
  std::string procedure;
  std::size_t pc = 0;
};

struct BudgetViolation {
  std::string procedure;
  std::size_t pc = 0;
  ResourceValue consumed;  // what consumption would have reached
  ResourceValue total;
};

struct FuelExhausted {
  std::size_t steps = 0;
};

/// Decides `acquire` requests: a cycled script of grant/deny decisions or a
/// seeded pseudorandom stream. Deterministic in (index, requested).
class AcquisitionPolicy {
public:
  static AcquisitionPolicy always(bool grant);
  static AcquisitionPolicy script(std::vector<bool> decisions);
  static AcquisitionPolicy random(std::uint64_t seed);
  /// "grant", "deny", "random", or a comma list such as "grant,deny,grant".
  static AcquisitionPolicy parse(const std::string& spec, std::uint64_t seed = 0);

  bool decide(std::size_t index, const ResourceValue& requested) const;

private:
  std::vector<bool> script_{true};
  std::optional<std::uint64_t> seed_;
};

/// Intra-frame step: stack, locals and jumps only.
std::variant<Frame, Stuck> step_frame(const Procedure& proc, Frame f);

struct MutStep {
  Frame frame;
  Heap heap;
  ResourceValue consumed;
  ResourceValue acquired;
  /// Set by `acquire`; the driver calls commit_acquire with its decision.
  std::optional<ResourceValue> acquire_request;
};

/// Heap and resource mutating step (new, getfield, putfield, free, consume,
/// consume_dyn, acquire). `next_address` is the allocation counter.
std::variant<MutStep, Stuck> step_mut(const Procedure& proc, Frame f, Heap h, Address& next_address);

/// Grant pushes 1 and acquires the request; deny pushes 0.
void commit_acquire(MutStep& s, bool grant);

using StepResult = std::variant<MachineState, Halt, Stuck, BudgetViolation>;

StepResult step(MachineState state, const Program& program, const AcquisitionPolicy& policy);

using Outcome = std::variant<Halt, Stuck, BudgetViolation, FuelExhausted>;

struct RunResult {
  Outcome outcome;
  std::size_t steps = 0;
  ResourceValue peak_consumed;
  ResourceValue final_total;
};

struct RunOptions {
  ResourceValue budget;
  std::size_t fuel = 1'000'000;
  AcquisitionPolicy policy = AcquisitionPolicy::always(true);
  Heap heap;                  // initial heap
  Address next_address = 0;   // 0: one past the largest address in `heap`
  /// Called with every intermediate state.
  std::function<void(const MachineState&)> observer;
};

/// Initial state: one frame for `program.entry` with `args` as locals.
MachineState initial_state(const Program& program, const std::vector<Value>& args, const RunOptions& opts);

RunResult run(const Program& program, const std::vector<Value>& args, const RunOptions& opts);

std::string outcome_name(const Outcome& o);

}  // namespace amort

#endif
