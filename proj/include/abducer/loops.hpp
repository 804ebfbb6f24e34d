#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abducer/cfg.hpp"
#include "abducer/contracts.hpp"
#include "abducer/worlds.hpp"

namespace abducer {

// One conjunct of a loop's exit condition: staying requires var != target.
struct ExitConjunct {
  VarId var;           // the tested program variable
  CondOperand target;  // the constant side
  RelOp stay_op;       // operator that keeps control in the loop
};

struct ExitInfo {
  std::vector<ExitConjunct> conjuncts;
  Loc body_start = 0;
  // Exit(x) for changed variables without a conjunct is a fresh logical.
  std::map<VarId, Expr> exit_map;
};

// Decomposes the entering condition of a single-loop function. Fails when a
// conjunct is not an inequality or its constant side is written by the body.
std::optional<ExitInfo> exit_condition(const LoweredFunction& f, SymbolPool& pool,
                                       std::string* why = nullptr);

// The loop body as its own acyclic CFG: back edges retargeted to a fresh
// terminal vertex (one past the exit).
LoweredFunction body_function(const LoweredFunction& f);
inline Loc body_exit(const LoweredFunction& f) { return f.cfg.exit + 1; }

struct Partition {
  std::set<VarId> changed;
  std::set<VarId> unchanged;
  SymbolicHeap const_curr;   // restrict(s1.curr, unchanged)
  SymbolicHeap const_pre;    // the const atoms occurring in s1.pre
  SymbolicHeap transf_pre;   // remainder of s1.pre
  SymbolicHeap transf_curr;  // remainder of s1.curr
};

Partition partition_state(const SymbolicHeap& pre, const SymbolicHeap& curr,
                          const LoweredFunction& f, SymbolPool& pool);

// Transformation map: for every changed variable the expression its value
// takes after one iteration; nullopt when some changed variable has none.
std::optional<std::map<VarId, Expr>> build_transf_map(const SymbolicHeap& curr,
                                                      const Partition& part,
                                                      SymbolPool& pool,
                                                      std::string* why = nullptr);

struct Shapes {
  BlockId block;
  VarId progress;    // the changed variable that walks the shape
  Expr link;         // Transf(progress): the one-iteration tail
  SymbolicHeap entry_pure;  // anchor-level pure facts of transf_pre, kept once
};

// Algorithm "ShapeExtrapolation": builds the two renamed copies of
// transf_pre, abstracts their conjunction into a single segment atom, and
// registers its block.
std::optional<Shapes> shape_extrapolate(const Partition& part,
                                        const std::map<VarId, Expr>& transf,
                                        SymbolPool& pool, BlockRegistry& blocks,
                                        std::string* why = nullptr);

// Full single-loop analysis: exit condition, first iteration, partitioning,
// extrapolation, condition checks, verification iteration, final contracts.
FunctionSummary analyze_loop(const LoweredFunction& f, const Program& program,
                             const Summaries& summaries, SymbolPool& pool,
                             BlockRegistry& blocks, const AnalysisOptions& opt);

}  // namespace abducer
