#ifndef AMORT_MODEL_CHECK_HPP
#define AMORT_MODEL_CHECK_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "amort/assertion.hpp"
#include "amort/heap.hpp"
#include "amort/resource.hpp"

namespace amort {

/// Interpretation of Var, ProgVar and Ret terms.
using Env = std::map<Term, Value>;

class OracleSizeExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct OracleLimits {
  std::size_t max_cells = 6;       // heaps handed to the oracle
  std::size_t max_wand_cells = 6;  // cells a magic-wand premise may add
  std::size_t max_steps = 20'000'000;
};

/// Does (env, heap, r) satisfy some clause of `s`? Lists and trees are read
/// precisely: lseg(x, y) holds on the empty heap iff x = y, otherwise x is a
/// node distinct from y whose tail is lseg(next, y).
bool model_check(const Assertion& s, const Env& env, const Heap& heap, const Rational& r,
                 const Valuation& v, const OracleLimits& limits = {});

/// Satisfaction of a goal formula.
bool model_check_goal(const Goal& g, const Env& env, const Heap& heap, const Rational& r,
                      const Valuation& v, const OracleLimits& limits = {});

/// A model produced by the generator. `demand` is the least resource that
/// satisfies the clause on `heap`.
struct Model {
  Env env;
  Heap heap;
  Rational demand;
  Address next_address = 1;
};

struct GenerateOptions {
  std::size_t max_cells = 6;
  /// When set, every lseg / tree atom gets exactly this many nodes.
  std::optional<std::size_t> fixed_size;
  /// Terms to bind (over the value domain) if the clause leaves them free.
  std::vector<Term> extra_terms;
  /// Integer literals added to the value domain (0 is always included).
  std::set<std::int64_t> literals;
  /// Values for unconstrained terms, tried before anything else.
  Env preferred;
  /// Cells the generated heap must be disjoint from; its addresses are
  /// candidates for aliasing.
  Heap frame;
  Address first_address = 1;
};

/// Enumerates models of one clause extending `base`. `visit` returns false
/// to stop. Existential witnesses are not part of the reported env.
void generate_models(const Clause& c, const Env& base, const Valuation& v, const GenerateOptions& opts,
                     const std::function<bool(const Model&)>& visit);

struct Counterexample {
  std::size_t clause = 0;
  Env env;
  Heap heap;
  Rational resource;
};

/// Searches for a small model of `s` (<= max_cells cells, resource <= max_resource)
/// that does not satisfy `g`.
std::optional<Counterexample> find_counterexample(const Assertion& s, const Goal& g, const Valuation& v,
                                                  const Rational& max_resource = 6,
                                                  const OracleLimits& limits = {});

}  // namespace amort

#endif
