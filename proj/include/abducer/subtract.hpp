#pragma once

#include <optional>
#include <set>
#include <string>

#include "abducer/formula.hpp"
#include "abducer/pure.hpp"

namespace abducer {

enum class EntailVerdict : uint8_t { Proved, Unknown };

// Result of subtracting rhs from lhs. With abduction enabled, `antiframe`
// collects the rhs atoms that could not be discharged, rewritten through the
// lhs equalities; `frame` is the lhs leftover either way.
struct SubtractOutcome {
  bool ok = false;
  SymbolicHeap frame;
  SymbolicHeap antiframe;
  std::map<VarId, Expr> binding;  // witnesses chosen for flexible variables
  std::string reason;             // set when !ok
};

// Subtraction-based matching in a fixed atom order: rhs pure equalities bind
// flexible variables, then points-to atoms match cells (unfolding lhs
// segments whose head is provably distinct from their tail), then segments
// are consumed by chain walking. Variables in `flexible` are existential on
// the rhs and may be bound; all other shared variables are rigid.
SubtractOutcome subtract(const SymbolicHeap& lhs, const SymbolicHeap& rhs,
                         const std::set<VarId>& flexible, bool allow_abduction,
                         SymbolPool& pool, const BlockRegistry& blocks);

// Entailment lhs |- rhs: Proved only if sound. rhs variables not occurring in
// lhs are treated as existential. On Proved, *frame (if given) receives the
// lhs leftover.
EntailVerdict entails(const SymbolicHeap& lhs, const SymbolicHeap& rhs,
                      SymbolPool& pool, const BlockRegistry& blocks,
                      SymbolicHeap* frame = nullptr);

struct BiabSolution {
  SymbolicHeap antiframe;  // M
  SymbolicHeap frame;      // F
  std::map<VarId, Expr> binding;  // instantiation of the flexible variables
};

// Biabduction: find M, F with Q * M |- L * F. `flexible` marks the
// contract-local variables of L that may be instantiated. Fails when an
// undischarged atom cannot be rewritten into logical variables or when
// pure_sat(Q * M) is not Sat.
std::optional<BiabSolution> solve(const SymbolicHeap& q, const SymbolicHeap& l,
                                  const std::set<VarId>& flexible,
                                  SymbolPool& pool, const BlockRegistry& blocks,
                                  std::string* why = nullptr);

}  // namespace abducer
