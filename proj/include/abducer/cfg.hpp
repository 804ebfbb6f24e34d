#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "abducer/formula.hpp"
#include "abducer/syntax.hpp"

namespace abducer {

using Loc = uint32_t;

// Flattened assignment right-hand sides: a constant, a variable, the
// nondeterministic marker, one unary op, or one binary op over variables.
struct FlatExpr {
  enum class Kind : uint8_t { Null, Nat, Var, Nondet, Un, Bin };
  Kind kind = Kind::Null;
  int64_t k = 0;
  VarId v;
  UnOp un = UnOp::Neg;
  BinOp bin = BinOp::Add;
  VarId a, b;
};

struct CondOperand {
  enum class Kind : uint8_t { Var, Null, Nat };
  Kind kind = Kind::Null;
  VarId v;
  int64_t k = 0;

  static CondOperand var(VarId v) { return {Kind::Var, v, 0}; }
  static CondOperand null() { return {Kind::Null, VarId{}, 0}; }
  static CondOperand nat(int64_t k) { return {Kind::Nat, VarId{}, k}; }
  Expr to_expr() const;
};

struct CondAtom {
  CondOperand lhs;
  RelOp op = RelOp::Eq;
  CondOperand rhs;

  CondAtom negated() const { return {lhs, negate(op), rhs}; }
};

struct Stmt {
  enum class Kind : uint8_t {
    Assign,    // dst = expr
    Load,      // dst = *src.field
    Store,     // *dst.field = src
    Return,    // return src   (writes return_<f>)
    Assume,    // assume(cond)
    Assert,    // assert(cond)
    Call,      // dst = callee(args)
    LoopCall,  // callee(args) rebinding outs
  };
  Kind kind = Kind::Assign;
  VarId dst;
  FieldId field;
  VarId src;
  FlatExpr expr;
  CondAtom cond;
  std::string callee;
  std::vector<VarId> args;
  std::vector<VarId> outs;

  // Variables written by this statement (the Return variant writes the
  // function's return slot, supplied by the caller).
  std::set<VarId> writes(VarId return_slot) const;
  std::set<VarId> reads() const;
};

struct Edge {
  Loc from;
  Stmt stmt;
  Loc to;
};

struct ControlFlowGraph {
  Loc entry = 0;
  Loc exit = 0;
  uint32_t vertex_count = 0;
  std::vector<Edge> edges;  // sorted by (from, insertion)

  std::vector<const Edge*> out_edges(Loc v) const;
};

struct LoweredFunction {
  std::string name;
  std::vector<VarId> params;
  std::vector<VarId> outputs;   // loop fn: rebound vars; surface fn: {return_f}
  VarId return_slot;            // surface fns: the return_<name> variable
  bool is_loop = false;
  ControlFlowGraph cfg;
};

struct Program {
  std::vector<LoweredFunction> functions;
  std::map<std::string, size_t> index_by_name;
  std::vector<size_t> call_order;  // callees before callers

  const LoweredFunction* find(const std::string& name) const;
};

struct LowerError {
  std::string message;
  int line = 0;
};

struct LowerResult {
  std::optional<Program> program;
  std::optional<LowerError> error;
  bool ok() const { return program.has_value(); }
};

LowerResult lower(const SourceProgram& src, SymbolPool& pool);

// Variables assigned to by the statements of a CFG fragment.
std::set<VarId> changed_vars(const std::vector<Edge>& edges, VarId return_slot);
std::set<VarId> changed_vars(const ControlFlowGraph& cfg, VarId return_slot);

// Canonical textual dump of a CFG, stable across runs; used for golden and
// isomorphism tests.
std::string dump_cfg(const LoweredFunction& f, const SymbolPool& pool);
std::string render(const Stmt& s, const SymbolPool& pool);

}  // namespace abducer
