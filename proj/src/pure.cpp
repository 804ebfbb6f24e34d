#include "abducer/pure.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>

namespace abducer {

Congruence::Congruence(const SymbolicHeap& h, const SymbolPool& pool) : pool_(pool) {
  auto intern_var = [&](VarId v) {
    auto it = var_node_.find(v);
    if (it != var_node_.end()) return it->second;
    int idx = static_cast<int>(nodes_.size());
    Node n{idx, std::nullopt, std::nullopt, std::nullopt};
    if (pool_.kind(v) == VarKind::Anchor) n.best_anchor = v;
    if (pool_.kind(v) == VarKind::Logical) n.best_logical = v;
    nodes_.push_back(n);
    var_node_.emplace(v, idx);
    return idx;
  };
  auto intern_const = [&](int64_t k) {
    auto it = const_node_.find(k);
    if (it != const_node_.end()) return it->second;
    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back({idx, k, std::nullopt, std::nullopt});
    const_node_.emplace(k, idx);
    return idx;
  };
  auto intern = [&](const Expr& e) -> std::optional<int> {
    if (auto k = e.const_value()) return intern_const(*k);
    if (e.is_var()) return intern_var(e.var_id());
    return std::nullopt;  // compound over variables: opaque
  };

  // Make sure every variable of the heap has a node so queries resolve.
  for (VarId v : h.vars()) intern_var(v);

  for (const auto& a : h.pure) {
    if (a.op != RelOp::Eq) continue;
    auto l = intern(a.lhs), r = intern(a.rhs);
    if (l && r) merge(*l, *r);
  }
  for (const auto& a : h.pure) {
    auto l = intern(a.lhs), r = intern(a.rhs);
    if (!l || !r) continue;
    switch (a.op) {
      case RelOp::Ne: diseqs_.emplace_back(*l, *r); break;
      case RelOp::Lt: strict_lt_.emplace_back(*l, *r); break;
      case RelOp::Gt: strict_lt_.emplace_back(*r, *l); break;
      case RelOp::Le: le_.emplace_back(*l, *r); break;
      case RelOp::Ge: le_.emplace_back(*r, *l); break;
      default: break;
    }
  }
  for (auto& [a, b] : diseqs_)
    if (find(a) == find(b)) consistent_ = false;
  for (auto& [a, b] : strict_lt_) {
    if (find(a) == find(b)) consistent_ = false;
    auto ka = nodes_[find(a)].constant, kb = nodes_[find(b)].constant;
    if (ka && kb && !(*ka < *kb)) consistent_ = false;
  }
  for (auto& [a, b] : le_) {
    auto ka = nodes_[find(a)].constant, kb = nodes_[find(b)].constant;
    if (ka && kb && !(*ka <= *kb)) consistent_ = false;
  }
}

int Congruence::find(int i) const {
  while (nodes_[i].parent != i) {
    nodes_[i].parent = nodes_[nodes_[i].parent].parent;
    i = nodes_[i].parent;
  }
  return i;
}

int Congruence::node_of_var(VarId v) const {
  auto it = var_node_.find(v);
  return it == var_node_.end() ? -1 : find(it->second);
}

int Congruence::node_of_const(int64_t k) const {
  auto it = const_node_.find(k);
  return it == const_node_.end() ? -1 : find(it->second);
}

std::optional<int> Congruence::node_of_expr(const Expr& e) const {
  if (auto k = e.const_value()) {
    int n = node_of_const(*k);
    if (n >= 0) return n;
    return std::nullopt;
  }
  if (e.is_var()) {
    int n = node_of_var(e.var_id());
    if (n >= 0) return n;
  }
  return std::nullopt;
}

void Congruence::merge(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (b < a) std::swap(a, b);
  nodes_[b].parent = a;
  Node& ra = nodes_[a];
  Node& rb = nodes_[b];
  if (ra.constant && rb.constant && *ra.constant != *rb.constant)
    consistent_ = false;  // two distinct constants in one class
  if (!ra.constant) ra.constant = rb.constant;
  auto better = [](std::optional<VarId> x, std::optional<VarId> y) {
    if (!x) return y;
    if (!y) return x;
    return *x < *y ? x : y;
  };
  ra.best_anchor = better(ra.best_anchor, rb.best_anchor);
  ra.best_logical = better(ra.best_logical, rb.best_logical);
}

bool Congruence::same(const Expr& a, const Expr& b) const {
  auto ka = a.const_value(), kb = b.const_value();
  if (ka && kb) return *ka == *kb;
  auto na = node_of_expr(a), nb = node_of_expr(b);
  if (na && nb && *na == *nb) return true;
  // Fall back to structural equality for opaque compounds, rewritten.
  if (!na && !nb) return rewrite(a) == rewrite(b);
  if (na && kb) return nodes_[*na].constant && *nodes_[*na].constant == *kb;
  if (nb && ka) return nodes_[*nb].constant && *nodes_[*nb].constant == *ka;
  return false;
}

bool Congruence::provably_ne(const Expr& a, const Expr& b) const {
  auto na = node_of_expr(a), nb = node_of_expr(b);
  if (na && nb) {
    int x = *na, y = *nb;
    auto kx = nodes_[x].constant, ky = nodes_[y].constant;
    if (kx && ky) return *kx != *ky;
    for (auto& [p, q] : diseqs_) {
      int fp = find(p), fq = find(q);
      if ((fp == x && fq == y) || (fp == y && fq == x)) return true;
    }
    for (auto& [p, q] : strict_lt_) {
      int fp = find(p), fq = find(q);
      if ((fp == x && fq == y) || (fp == y && fq == x)) return true;
    }
    return false;
  }
  auto ka = a.const_value(), kb = b.const_value();
  if (ka && kb) return *ka != *kb;
  return false;
}

std::optional<int64_t> Congruence::const_of(const Expr& e) const {
  if (auto k = e.const_value()) return k;
  if (auto n = node_of_expr(e)) return nodes_[*n].constant;
  return std::nullopt;
}

bool Congruence::proves(const PureAtom& atom) const {
  if (!consistent_) return true;  // ex falso
  const Expr& l = atom.lhs;
  const Expr& r = atom.rhs;
  auto kl = const_of(l), kr = const_of(r);
  switch (atom.op) {
    case RelOp::Eq: return same(l, r);
    case RelOp::Ne: return provably_ne(l, r);
    case RelOp::Le:
      if (same(l, r)) return true;
      return kl && kr && *kl <= *kr;
    case RelOp::Ge:
      if (same(l, r)) return true;
      return kl && kr && *kl >= *kr;
    case RelOp::Lt: return kl && kr && *kl < *kr;
    case RelOp::Gt: return kl && kr && *kl > *kr;
  }
  return false;
}

std::optional<VarId> Congruence::logical_repr(VarId v) const {
  int n = node_of_var(v);
  if (n < 0) return std::nullopt;
  if (nodes_[n].best_anchor) return nodes_[n].best_anchor;
  return nodes_[n].best_logical;
}

Expr Congruence::repr_expr(const Expr& e) const {
  if (auto k = const_of(e)) return *k == 0 ? Expr::null() : Expr::nat(*k);
  if (e.is_var()) {
    if (auto v = logical_repr(e.var_id())) return Expr::var(*v);
    return e;
  }
  return rewrite(e);
}

Expr Congruence::rewrite(const Expr& e) const {
  switch (e.kind()) {
    case Expr::Kind::Var: {
      VarId v = e.var_id();
      int n = node_of_var(v);
      if (n >= 0 && nodes_[n].constant)
        return *nodes_[n].constant == 0 ? Expr::null() : Expr::nat(*nodes_[n].constant);
      if (auto r = logical_repr(v)) return Expr::var(*r);
      return e;
    }
    case Expr::Kind::Unary: return Expr::un(e.un_op(), rewrite(e.lhs()));
    case Expr::Kind::Binary:
      return Expr::bin(e.bin_op(), rewrite(e.lhs()), rewrite(e.rhs()));
    default: return e;
  }
}

// ---------------------------------------------------------------------------
// pure_sat: certificate-based Unsat, witness-based Sat, Unknown otherwise
// ---------------------------------------------------------------------------

namespace {

int64_t eval_with(const Expr& e, const std::map<VarId, int64_t>& env, bool& ok) {
  switch (e.kind()) {
    case Expr::Kind::Null: return 0;
    case Expr::Kind::Nat: return e.nat_value();
    case Expr::Kind::Var: {
      auto it = env.find(e.var_id());
      if (it == env.end()) {
        ok = false;
        return 0;
      }
      return it->second;
    }
    case Expr::Kind::Unary: return -eval_with(e.lhs(), env, ok);
    case Expr::Kind::Binary: {
      int64_t a = eval_with(e.lhs(), env, ok);
      int64_t b = eval_with(e.rhs(), env, ok);
      switch (e.bin_op()) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
      }
      return 0;
    }
  }
  return 0;
}

bool atom_holds(const PureAtom& a, const std::map<VarId, int64_t>& env, bool& ok) {
  int64_t l = eval_with(a.lhs, env, ok);
  int64_t r = eval_with(a.rhs, env, ok);
  if (!ok) return false;
  switch (a.op) {
    case RelOp::Eq: return l == r;
    case RelOp::Ne: return l != r;
    case RelOp::Le: return l <= r;
    case RelOp::Ge: return l >= r;
    case RelOp::Lt: return l < r;
    case RelOp::Gt: return l > r;
  }
  return false;
}

}  // namespace

PureVerdict pure_sat(const SymbolicHeap& h, const SymbolPool& pool) {
  Congruence cg(h, pool);
  if (!cg.consistent()) return PureVerdict::Unsat;

  // Witness search. Start from class constants, then propagate through
  // equality definitions x = f(...); remaining variables get distinct large
  // values so disequalities hold for free.
  std::set<VarId> vars = h.vars();
  std::map<VarId, int64_t> env;
  for (VarId v : vars)
    if (auto k = cg.const_of(Expr::var(v))) env[v] = *k;

  // Propagate definitional equalities until a fixed point.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& a : h.pure) {
      if (a.op != RelOp::Eq) continue;
      auto try_define = [&](const Expr& lhs, const Expr& rhs) {
        if (!lhs.is_var() || env.count(lhs.var_id())) return;
        bool ok = true;
        int64_t val = eval_with(rhs, env, ok);
        if (ok) {
          env[lhs.var_id()] = val;
          changed = true;
        }
      };
      try_define(a.lhs, a.rhs);
      try_define(a.rhs, a.lhs);
    }
  }
  // Same class, same value; unseen classes get fresh distinct values.
  int64_t fresh = 7'000'000;
  for (VarId v : vars) {
    if (env.count(v)) continue;
    // If an already-assigned variable shares the class, copy it.
    bool copied = false;
    for (const auto& [w, val] : env) {
      if (cg.same(Expr::var(v), Expr::var(w))) {
        env[v] = val;
        copied = true;
        break;
      }
    }
    if (!copied) env[v] = fresh++;
  }
  bool ok = true;
  bool all = true;
  for (const auto& a : h.pure) {
    if (!atom_holds(a, env, ok) || !ok) {
      all = false;
      break;
    }
  }
  if (all) return PureVerdict::Sat;

  // Bounded grid search over a small value set, feasible for few variables.
  if (vars.size() <= 6) {
    std::vector<VarId> vs(vars.begin(), vars.end());
    static const int64_t pool_vals[] = {0, 1, 2, 3, 7'000'001, 7'000'002};
    std::map<VarId, int64_t> genv;
    std::function<bool(size_t)> go = [&](size_t i) -> bool {
      if (i == vs.size()) {
        bool k = true;
        for (const auto& a : h.pure)
          if (!atom_holds(a, genv, k) || !k) return false;
        return true;
      }
      for (int64_t val : pool_vals) {
        genv[vs[i]] = val;
        if (go(i + 1)) return true;
      }
      genv.erase(vs[i]);
      return false;
    };
    if (go(0)) return PureVerdict::Sat;
  }
  return PureVerdict::Unknown;
}

bool pure_proves(const SymbolicHeap& h, const PureAtom& atom, const SymbolPool& pool) {
  Congruence cg(h, pool);
  return cg.proves(atom);
}

}  // namespace abducer
