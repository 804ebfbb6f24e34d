#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "abducer/formula.hpp"

namespace abducer {

enum class PureVerdict : uint8_t { Sat, Unsat, Unknown };

// Congruence over the equalities of a pure part: union-find whose nodes are
// variables and constants, with constant folding of closed terms. Equalities
// between a variable and a non-closed compound term are kept aside as
// definitions (used for representative lookup, not merged).
class Congruence {
 public:
  Congruence(const SymbolicHeap& h, const SymbolPool& pool);

  bool consistent() const { return consistent_; }

  // Class queries. Terms that are not plain variables/constants fold to a
  // constant when closed, otherwise they are opaque.
  bool same(const Expr& a, const Expr& b) const;
  bool provably_ne(const Expr& a, const Expr& b) const;
  std::optional<int64_t> const_of(const Expr& e) const;

  // Does the pure part entail this atom?
  bool proves(const PureAtom& atom) const;

  // Preferred member of a variable's class for rewriting into antiframes:
  // lowest anchor, else lowest logical, else nothing (program-only class).
  std::optional<VarId> logical_repr(VarId v) const;
  // Representative expression: constant if the class has one, else
  // logical_repr, else the variable itself.
  Expr repr_expr(const Expr& e) const;

  // Rewrite an expression through the congruence: every variable replaced by
  // its representative expression.
  Expr rewrite(const Expr& e) const;

 private:
  struct Node {
    int parent;
    std::optional<int64_t> constant;
    std::optional<VarId> best_anchor;
    std::optional<VarId> best_logical;
  };
  int find(int i) const;
  int node_of_var(VarId v) const;                // -1 if absent
  int node_of_const(int64_t k) const;            // -1 if absent
  std::optional<int> node_of_expr(const Expr& e) const;
  void merge(int a, int b);

  const SymbolPool& pool_;
  std::map<VarId, int> var_node_;
  std::map<int64_t, int> const_node_;
  mutable std::vector<Node> nodes_;
  std::vector<std::pair<int, int>> diseqs_;       // a != b at class level
  std::vector<std::pair<int, int>> strict_lt_;    // a < b
  std::vector<std::pair<int, int>> le_;           // a <= b
  bool consistent_ = true;
};

// Satisfiability of the pure part of a heap. Unsat only with a certificate
// (merged distinct constants, or a disequality/strict inequality whose sides
// coincide); Sat when a finite witness assignment is found; else Unknown.
PureVerdict pure_sat(const SymbolicHeap& h, const SymbolPool& pool);

// Convenience: Π ⊢ atom under the heap's pure part.
bool pure_proves(const SymbolicHeap& h, const PureAtom& atom, const SymbolPool& pool);

}  // namespace abducer
