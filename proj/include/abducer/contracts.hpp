#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "abducer/cfg.hpp"
#include "abducer/formula.hpp"
#include "abducer/pure.hpp"

namespace abducer {

// A pre/postcondition pair. Statement contracts have one post disjunct;
// function contracts may have several. Logical variables shared between pre
// and post denote the same value.
struct Contract {
  SymbolicHeap pre;
  Disjunction post;
};

struct ExtrapolationCert {
  std::string failed_stage;  // empty on success
  SymbolicHeap transf_pre, transf_curr;
  SymbolicHeap p_instance;   // p(anchors, transformed values)
  SymbolicHeap s_inv_pre, s_inv_curr;
  std::vector<PureAtom> entering;  // entering condition over invariant values
  Loc body_start = 0;
  bool cond1_pre = false, cond1_curr = false, cond2 = false, cond3 = false,
       cond4 = false;
};

struct FunctionSummary {
  enum class Status : uint8_t { Analyzed, Failed };
  Status status = Status::Failed;
  std::vector<Contract> contracts;
  std::vector<std::string> diagnostics;
  int body_analyses = 0;  // loop functions: first + verification iterations
  std::vector<ExtrapolationCert> certs;
};

using Summaries = std::map<std::string, FunctionSummary>;

// An instantiated demand/effect pair ready for the biabduction solver.
struct StepContract {
  SymbolicHeap demand;             // L
  std::vector<SymbolicHeap> effects;  // R, one per callee post disjunct
  std::set<VarId> flexible;        // contract-local variables
  std::set<VarId> writes;          // program variables rebound by the step
};

// Appendix-style contract of an atomic statement, instantiated with fresh
// logical variables. `return_slot` names the enclosing function's return
// variable for Return statements.
StepContract atomic_contract(const Stmt& st, VarId return_slot, SymbolPool& pool);

// Instantiates one callee contract at a call site: callee anchors are bound
// to the caller's argument values (read from q), contract logicals are
// freshened, and output variables are rebound. Returns nullopt when an
// argument has no caller-side value expressible without program variables.
std::optional<StepContract> instantiate_call(
    const Stmt& call, const LoweredFunction& callee, const Contract& c,
    const SymbolicHeap& q, SymbolPool& pool);

// Single-state learning step: (P, Q) -> (P * M, R * F') where F' drops the
// binders of variables the statement writes. Fails when the solver fails,
// when the antiframe escapes the anchor-reachable fragment, or when P * M is
// not satisfiable.
struct LearnResult {
  SymbolicHeap pre;
  std::vector<SymbolicHeap> currs;  // one per effect disjunct, infeasible ones dropped
  SymbolicHeap antiframe;
};
std::optional<LearnResult> learn(const SymbolicHeap& pre, const SymbolicHeap& curr,
                                 const StepContract& sc,
                                 const std::set<VarId>& anchors, SymbolPool& pool,
                                 const BlockRegistry& blocks, std::string* why = nullptr);

// Drops pure binder atoms `x = e` for the given program variables.
SymbolicHeap drop_binders(const SymbolicHeap& h, const std::set<VarId>& vars);

// The binder expression of a program variable in a normalized heap.
std::optional<Expr> binder_of(const SymbolicHeap& h, VarId v);

// Projects a postcondition onto the given program variables: binder atoms of
// other program variables are dropped, pure atoms whose variables are not
// reachable from the kept skeleton are dropped, and constraints on logical
// variables occurring nowhere else (and not in the precondition) are
// eliminated. All three are sound weakenings of the postcondition.
SymbolicHeap project_post(const SymbolicHeap& h, const std::set<VarId>& keep,
                          const std::set<VarId>& anchors, const SymbolPool& pool,
                          const SymbolicHeap* pre = nullptr);

// Structural contract equivalence modulo renaming of logical variables.
bool contracts_equivalent(const Contract& a, const Contract& b, SymbolPool& pool);

std::string render(const Contract& c, const SymbolPool& pool);

}  // namespace abducer
