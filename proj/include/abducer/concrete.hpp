#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "abducer/formula.hpp"

namespace abducer {

// Values are integers. NULL is 0; heap locations come from a dedicated id
// range so they never collide with the small naturals programs compute with.
using Value = int64_t;

inline constexpr Value kNullValue = 0;
inline constexpr Value kLocBase = 1'000'000;
inline constexpr int kLocPoolSize = 8;

inline bool is_location(Value v) { return v == kNullValue || v >= kLocBase; }

struct HeapCell {
  Value loc;
  FieldId field;
  friend bool operator<(const HeapCell& a, const HeapCell& b) {
    if (a.loc != b.loc) return a.loc < b.loc;
    return a.field < b.field;
  }
  friend bool operator==(const HeapCell&, const HeapCell&) = default;
};

// A program configuration: stack and finite heap, or the dedicated error
// configuration. Heap cells are never sourced at NULL.
struct Configuration {
  bool is_err = false;
  std::map<VarId, Value> stack;
  std::map<HeapCell, Value> heap;

  static Configuration err() {
    Configuration c;
    c.is_err = true;
    return c;
  }
  friend bool operator<(const Configuration& a, const Configuration& b) {
    if (a.is_err != b.is_err) return a.is_err < b.is_err;
    if (a.stack != b.stack) return a.stack < b.stack;
    return a.heap < b.heap;
  }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// conf |= phi with existential witnesses for variables the stack leaves
// unbound, searched over the configuration's value footprint plus NULL and
// small naturals.
bool models(const Configuration& conf, const SymbolicHeap& phi,
            const SymbolPool& pool, const BlockRegistry& blocks);

bool models_any(const Configuration& conf, const Disjunction& delta,
                const SymbolPool& pool, const BlockRegistry& blocks);

struct EnumBounds {
  int max_cells = 4;
  // Extra non-location values tried for unconstrained variables/targets.
  std::vector<Value> value_range = {kNullValue, 1, 2};
  // Safety cap on the raw enumeration frontier.
  size_t max_results = 20000;
};

// Exhaustive-up-to-bounds model enumeration over a canonical location naming
// (locations allocated lowest-first from the fixed pool, stacks over
// vars(phi)). Every returned configuration satisfies models(conf, phi).
std::vector<Configuration> enumerate_models(const SymbolicHeap& phi,
                                            const EnumBounds& bounds,
                                            const SymbolPool& pool,
                                            const BlockRegistry& blocks);

}  // namespace abducer
