#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abducer/formula.hpp"  // RelOp, UnOp, BinOp

namespace abducer {

// Surface abstract syntax. Expressions here are unrestricted trees; the
// lowering pass flattens them into the statement forms the analysis expects.

struct SrcExpr;
using SrcExprPtr = std::shared_ptr<SrcExpr>;

struct SrcExpr {
  enum class Kind : uint8_t { Null, Nat, Var, Nondet, Unary, Binary, Load };
  Kind kind = Kind::Null;
  int64_t k = 0;
  std::string name;        // Var: identifier; Load: base variable
  std::string field;       // Load
  UnOp un = UnOp::Neg;
  BinOp bin = BinOp::Add;
  SrcExprPtr a, b;
};

struct SrcCondAtom {
  SrcExprPtr lhs;  // restricted by the parser to var / NULL / nat
  RelOp op = RelOp::Eq;
  SrcExprPtr rhs;
};

// A surface condition: conjunction of relational atoms, or the bare
// nondeterministic marker `?`.
struct SrcCond {
  bool nondet = false;
  std::vector<SrcCondAtom> atoms;
};

struct SrcStmt;
using SrcStmtPtr = std::shared_ptr<SrcStmt>;

struct SrcStmt {
  enum class Kind : uint8_t {
    Assign,   // name = expr
    Store,    // name -> field = expr
    Return,   // return expr
    If,       // cond, then_body, else_body
    While,    // cond, body
    Assume,   // cond (single atom)
    Assert,   // cond (single atom)
    Call,     // name = callee(args)
  };
  Kind kind = Kind::Assign;
  std::string name;
  std::string field;
  SrcExprPtr expr;
  SrcCond cond;
  std::vector<SrcStmtPtr> then_body;
  std::vector<SrcStmtPtr> else_body;
  std::string callee;
  std::vector<std::string> args;
  int line = 0;
};

struct FunctionDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<SrcStmtPtr> body;
  int line = 0;
};

struct SourceProgram {
  std::vector<FunctionDecl> functions;
};

struct ParseError {
  std::string message;
  int line = 0;
  int column = 0;
};

struct ParseResult {
  std::optional<SourceProgram> program;
  std::optional<ParseError> error;
  bool ok() const { return program.has_value(); }
};

ParseResult parse(const std::string& text);

// Prints a source program back to surface syntax; parsing the output yields a
// structurally identical program.
std::string print_program(const SourceProgram& p);

}  // namespace abducer
