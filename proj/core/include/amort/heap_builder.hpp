#ifndef AMORT_HEAP_BUILDER_HPP
#define AMORT_HEAP_BUILDER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amort/bytecode.hpp"
#include "amort/model_check.hpp"

namespace amort {

/// Concrete arguments and heap satisfying a procedure's precondition.
struct BuiltInput {
  std::vector<Value> args;
  Heap heap;
  Address next_address = 1;
  /// Precondition resource under the valuation: the budget the analysis grants.
  Rational budget;
};

struct BuildOptions {
  /// Nodes per lseg / tree atom.
  std::size_t size = 0;
  /// Integer parameters not fixed by the precondition.
  std::int64_t default_int = 1;
  std::map<std::string, Value> overrides;
};

/// Builds the canonical model of the first satisfiable precondition clause:
/// every list segment and tree gets `size` nodes, new nodes take fresh
/// addresses, `data` fields count down from 0 in address order. Returns nullopt if no clause has such a model.
std::optional<BuiltInput> build_input(const Procedure& proc, const Valuation& v, const BuildOptions& opts);

}  // namespace amort

#endif
