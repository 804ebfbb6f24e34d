#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "abducer/cfg.hpp"
#include "abducer/contracts.hpp"
#include "abducer/formula.hpp"

namespace abducer {

struct AnalysisOptions {
  int max_worlds = 64;
  uint64_t max_steps = 200000;
  int verbosity = 0;
  std::ostream* trace = nullptr;
  // Fault injection (deliberately unsound; for oracle sensitivity tests):
  bool simple_states = false;      // no shared learning: per-path worlds
  bool skip_verification = false;  // trust extrapolated shapes unchecked
  // Verification-iteration mode: learning disabled, branches never
  // strengthen the precondition.
  bool no_learn = false;
};

struct WorldPost {
  Loc loc;
  SymbolicHeap curr;
  bool processed = false;
  int id = 0;
};

struct World {
  SymbolicHeap pre;
  std::vector<WorldPost> posts;
  int id = 0;
  bool alive = true;
  std::string death_note;
};

// Instrumentation shared with the property suites.
struct WorldsTelemetry {
  uint64_t steps = 0;
  // Sibling preconditions recorded at every world split.
  std::vector<std::pair<SymbolicHeap, SymbolicHeap>> split_pre_pairs;
  std::vector<std::string> dropped_branches;
  std::vector<SymbolicHeap> antiframes;
};

struct WorldsResult {
  std::vector<World> worlds;  // surviving worlds
  std::vector<std::string> diagnostics;
  bool aborted = false;  // world explosion / failed callee / step bound
  WorldsTelemetry telemetry;
};

enum class AssumeMode : uint8_t { AsAssert, AsAssume };

// The initial world of a function: precondition true, one postcondition at
// the entry binding every parameter to its anchor.
World initial_world(const LoweredFunction& f, SymbolPool& pool);

// Normalizes a condition atom through the binders of `curr`; nullopt when an
// operand has no value there.
std::optional<PureAtom> normalize_cond(const CondAtom& cond, const SymbolicHeap& curr,
                                       const SymbolPool& pool);

// assume-as-assert iff the condition's variables are reachable from the
// anchor variables through pre * cond.
AssumeMode classify_assume(const SymbolicHeap& pre, const PureAtom& cond_norm,
                           const std::set<VarId>& anchors, const SymbolPool& pool);

// Drives all worlds of a CFG to quiescence. The CFG may have several
// terminal locations; posts accumulate wherever they stop.
WorldsResult run_worlds(const LoweredFunction& f, const Program& program,
                        const Summaries& summaries, World initial, SymbolPool& pool,
                        BlockRegistry& blocks, const AnalysisOptions& opt);

// Loop-free function analysis: worklist to quiescence, contracts from the
// exit posts of every surviving world.
FunctionSummary analyze_loop_free(const LoweredFunction& f, const Program& program,
                                  const Summaries& summaries, SymbolPool& pool,
                                  BlockRegistry& blocks, const AnalysisOptions& opt,
                                  WorldsTelemetry* telemetry = nullptr);

// Contract extraction from a finished world (exit posts projected onto
// parameters and outputs).
std::optional<Contract> world_contract(const World& w, const LoweredFunction& f,
                                       SymbolPool& pool);

}  // namespace abducer
