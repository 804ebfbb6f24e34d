#include "abducer/subtract.hpp"

#include <algorithm>
#include <cassert>
#include <memory>

namespace abducer {

namespace {

struct Engine {
  const SymbolPool& pool_view;
  SymbolPool& pool;
  const BlockRegistry& blocks;
  bool abduce;
  std::set<VarId> flexible;

  SymbolicHeap lhs;                 // working copy; cells/segs consumed from it
  std::vector<bool> pts_taken;
  std::vector<bool> segs_taken;
  std::unique_ptr<Congruence> cg;
  std::map<VarId, Expr> theta;      // bindings of flexible variables
  SymbolicHeap anti;
  std::set<std::pair<std::string, uint32_t>> claimed;  // (src class key, field)
  std::string reason;
  int materializations = 0;

  Engine(const SymbolicHeap& l, SymbolPool& p, const BlockRegistry& b, bool abd,
         std::set<VarId> flex)
      : pool_view(p), pool(p), blocks(b), abduce(abd), flexible(std::move(flex)) {
    lhs = normalize(l);
    pts_taken.assign(lhs.pts.size(), false);
    segs_taken.assign(lhs.segs.size(), false);
    rebuild();
  }

  void rebuild() { cg = std::make_unique<Congruence>(lhs, pool_view); }

  bool fail(const std::string& why) {
    if (reason.empty()) reason = why;
    return false;
  }

  Expr resolve(const Expr& e) const { return e.subst(theta); }

  bool is_unbound_flex(const Expr& e) const {
    return e.is_var() && flexible.count(e.var_id()) && !theta.count(e.var_id());
  }

  // Key identifying a congruence class for collision tracking.
  std::string class_key(const Expr& e) const {
    Expr r = cg->repr_expr(e);
    if (auto k = r.const_value()) return "#" + std::to_string(*k);
    if (r.is_var()) return "v" + std::to_string(r.var_id().raw);
    return "?";
  }

  // A fully resolved expression: no unbound flexible variables.
  bool grounded(const Expr& e) const {
    std::set<VarId> vs;
    resolve(e).collect_vars(vs);
    for (VarId v : vs)
      if (flexible.count(v) && !theta.count(v)) return false;
    return true;
  }

  // Rewrites an expression through the lhs equalities choosing logical
  // representatives; returns nullopt if a program variable survives.
  std::optional<Expr> logical_form(const Expr& e) {
    Expr r = cg->rewrite(resolve(e));
    std::set<VarId> vs;
    r.collect_vars(vs);
    for (VarId v : vs)
      if (pool_view.kind(v) == VarKind::Program) return std::nullopt;
    return r;
  }

  bool bind(VarId v, const Expr& value) {
    assert(flexible.count(v) && !theta.count(v));
    theta.emplace(v, value);
    return true;
  }

  // --- pure atoms ------------------------------------------------------------

  bool proves_atom(const PureAtom& a) {
    return cg->proves({resolve(a.lhs), a.op, resolve(a.rhs)});
  }

  // First wave: equalities that can bind an unbound flexible variable.
  bool binder_wave(std::vector<PureAtom>& pending) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (auto it = pending.begin(); it != pending.end();) {
        const PureAtom& a = *it;
        if (a.op != RelOp::Eq) {
          ++it;
          continue;
        }
        Expr l = resolve(a.lhs), r = resolve(a.rhs);
        bool lf = is_unbound_flex(l), rf = is_unbound_flex(r);
        if (lf && !rf && grounded(r)) {
          bind(l.var_id(), cg->repr_expr(r));
          it = pending.erase(it);
          progress = true;
        } else if (rf && !lf && grounded(l)) {
          bind(r.var_id(), cg->repr_expr(l));
          it = pending.erase(it);
          progress = true;
        } else if (!lf && !rf && grounded(l) && grounded(r) && proves_atom(a)) {
          it = pending.erase(it);
          progress = true;
        } else {
          ++it;
        }
      }
    }
    return true;
  }

  // --- spatial matching ------------------------------------------------------

  // Finds an unconsumed lhs cell at (class of src, field).
  int find_cell(const Expr& src, FieldId f) {
    for (size_t i = 0; i < lhs.pts.size(); ++i) {
      if (pts_taken[i] || lhs.pts[i].field != f) continue;
      if (cg->same(lhs.pts[i].src, src)) return static_cast<int>(i);
    }
    return -1;
  }

  int find_seg_at(const Expr& head, BlockId b) {
    for (size_t i = 0; i < lhs.segs.size(); ++i) {
      if (segs_taken[i] || lhs.segs[i].block != b) continue;
      if (cg->same(lhs.segs[i].head, head)) return static_cast<int>(i);
    }
    return -1;
  }

  // Materialize one copy of a segment whose head is provably distinct from
  // its tail; enables cell matching against the segment's first block.
  bool try_unfold_at(const Expr& src, FieldId want_field) {
    if (materializations > 16) return false;
    for (size_t i = 0; i < lhs.segs.size(); ++i) {
      if (segs_taken[i]) continue;
      const SegAtom s = lhs.segs[i];
      if (!cg->same(s.head, src)) continue;
      const BlockDef& d = blocks.def(s.block);
      bool head_has_field = false;
      for (const auto& c : d.cells)
        if (c.src == 0 && c.field == want_field) head_has_field = true;
      if (!head_has_field) continue;
      if (!cg->provably_ne(s.head, s.tail)) continue;
      segs_taken[i] = true;
      Expr mid = Expr::var(pool.fresh_logical());
      SymbolicHeap copy = blocks.instantiate(s.block, s.head, mid, pool);
      for (auto& c : copy.pts) lhs.pts.push_back(c);
      for (auto& n : copy.segs) lhs.segs.push_back(n);
      for (auto& q : copy.pure) lhs.pure.push_back(q);
      lhs.segs.push_back({s.block, mid, s.tail});
      pts_taken.resize(lhs.pts.size(), false);
      segs_taken.resize(lhs.segs.size(), false);
      ++materializations;
      rebuild();
      return true;
    }
    return false;
  }

  bool unify_value(const Expr& want, const Expr& have) {
    Expr w = resolve(want);
    if (is_unbound_flex(w)) return bind(w.var_id(), cg->repr_expr(have));
    if (!grounded(w)) return fail("target not resolvable");
    if (cg->proves({w, RelOp::Eq, have})) return true;
    if (!abduce) return fail("cell value mismatch");
    auto a = logical_form(have);
    auto b = logical_form(w);
    if (!a || !b) return fail("value equality not expressible over logical variables");
    anti.add_pure(*a, RelOp::Eq, *b);
    return true;
  }

  bool match_pts(const PointsTo& want) {
    Expr src = resolve(want.src);
    if (is_unbound_flex(src)) {
      // Demand on an unnamed cell: name it and abduce below.
      if (!abduce) return fail("points-to source unresolved");
      bind(src.var_id(), Expr::var(src.var_id()));
      src = resolve(want.src);
    }
    if (!grounded(src)) return fail("points-to source not resolvable");
    int idx = find_cell(src, want.field);
    if (idx < 0 && try_unfold_at(src, want.field)) idx = find_cell(src, want.field);
    if (idx >= 0) {
      if (!unify_value(want.val, lhs.pts[idx].val)) return false;
      pts_taken[idx] = true;
      return true;
    }
    if (!abduce) return fail("no matching cell");
    // Abduce the missing cell.
    auto src_l = logical_form(src);
    if (!src_l || !src_l->is_var())
      return fail("missing cell source is not a logical variable");
    auto key = std::make_pair(class_key(src), want.field.raw);
    if (claimed.count(key)) return fail("conflicting demands on one cell");
    claimed.insert(key);
    Expr val = resolve(want.val);
    if (is_unbound_flex(val)) {
      bind(val.var_id(), Expr::var(val.var_id()));  // fresh local names itself
      val = resolve(want.val);
    }
    auto val_l = logical_form(val);
    if (!val_l) return fail("missing cell value not expressible");
    anti.pts.push_back({*src_l, want.field, *val_l});
    return true;
  }

  // Consume one whole block instance at `cur`; returns the next head.
  std::optional<Expr> consume_block_instance(BlockId b, const Expr& cur) {
    const BlockDef& d = blocks.def(b);
    std::vector<std::optional<Expr>> binding(d.formal_count);
    binding[0] = cur;
    std::vector<int> cells_used;
    std::vector<int> segs_used;
    // Cells are stored with sources definable left-to-right.
    for (const auto& c : d.cells) {
      if (!binding[c.src]) return std::nullopt;
      int idx = find_cell(*binding[c.src], c.field);
      if (idx < 0) return std::nullopt;
      Expr got = lhs.pts[idx].val;
      switch (c.val.kind) {
        case BlockDef::BExpr::Kind::Formal: {
          if (binding[c.val.formal]) {
            if (!cg->same(*binding[c.val.formal], got)) return std::nullopt;
          } else {
            binding[c.val.formal] = got;
          }
          break;
        }
        case BlockDef::BExpr::Kind::Null:
          if (!cg->same(got, Expr::null())) return std::nullopt;
          break;
        case BlockDef::BExpr::Kind::Nat:
          if (!cg->same(got, Expr::nat(c.val.k))) return std::nullopt;
          break;
      }
      cells_used.push_back(idx);
      pts_taken[idx] = true;  // tentative; rolled back on failure
    }
    auto rollback = [&]() {
      for (int i : cells_used) pts_taken[i] = false;
      for (int i : segs_used) segs_taken[i] = false;
    };
    auto bexpr = [&](const BlockDef::BExpr& e) -> std::optional<Expr> {
      switch (e.kind) {
        case BlockDef::BExpr::Kind::Formal:
          if (!binding[e.formal]) return std::nullopt;
          return *binding[e.formal];
        case BlockDef::BExpr::Kind::Null: return Expr::null();
        case BlockDef::BExpr::Kind::Nat: return Expr::nat(e.k);
      }
      return std::nullopt;
    };
    for (const auto& n : d.segs) {
      if (!binding[n.head]) {
        rollback();
        return std::nullopt;
      }
      auto tail = bexpr(n.tail);
      if (!tail) {
        rollback();
        return std::nullopt;
      }
      int idx = -1;
      for (size_t i = 0; i < lhs.segs.size(); ++i) {
        if (segs_taken[i] || lhs.segs[i].block != n.block) continue;
        if (cg->same(lhs.segs[i].head, *binding[n.head]) &&
            cg->same(lhs.segs[i].tail, *tail)) {
          idx = static_cast<int>(i);
          break;
        }
      }
      if (idx < 0) {
        rollback();
        return std::nullopt;
      }
      segs_taken[idx] = true;
      segs_used.push_back(idx);
    }
    for (const auto& q : d.pures) {
      auto l = bexpr(q.lhs), r = bexpr(q.rhs);
      if (!l || !r || !cg->proves({*l, q.op, *r})) {
        rollback();
        return std::nullopt;
      }
    }
    if (!binding[1]) {
      rollback();
      return std::nullopt;
    }
    return binding[1];
  }

  bool match_seg(const SegAtom& want) {
    Expr head = resolve(want.head);
    if (is_unbound_flex(head)) {
      if (!abduce) return fail("segment head unresolved");
      bind(head.var_id(), Expr::var(head.var_id()));
      head = resolve(want.head);
    }
    if (!grounded(head)) return fail("segment head not resolvable");
    Expr cur = head;
    std::set<std::string> visited;
    for (;;) {
      Expr tail = resolve(want.tail);
      if (is_unbound_flex(tail)) {
        // Unconstrained tail: stop here and name the position.
        bind(tail.var_id(), cg->repr_expr(cur));
        return true;
      }
      if (grounded(tail) && cg->same(cur, tail)) return true;  // chain complete
      std::string key = class_key(cur);
      if (visited.count(key)) return fail("cyclic chain while matching segment");
      visited.insert(key);
      int idx = find_seg_at(cur, want.block);
      if (idx >= 0) {
        segs_taken[idx] = true;
        cur = lhs.segs[idx].tail;
        continue;
      }
      if (auto next = consume_block_instance(want.block, cur)) {
        cur = *next;
        continue;
      }
      if (!abduce) return fail("segment tail unreachable");
      // Abduce the missing remainder.
      auto cur_l = logical_form(cur);
      Expr t = resolve(want.tail);
      auto tail_l = logical_form(t);
      if (!cur_l || !cur_l->is_var())
        return fail("missing segment head is not a logical variable");
      if (!tail_l) return fail("missing segment tail not expressible");
      anti.segs.push_back({want.block, *cur_l, *tail_l});
      return true;
    }
  }

  // --- driver ----------------------------------------------------------------

  SubtractOutcome run(const SymbolicHeap& rhs_in) {
    SymbolicHeap rhs = normalize(rhs_in);
    std::vector<PureAtom> pending = rhs.pure;
    binder_wave(pending);

    // Points-to atoms: those with already-resolvable sources first, so that
    // binder-introduced names flow into later atoms deterministically.
    std::vector<PointsTo> pts_q = rhs.pts;
    bool progress = true;
    while (progress && !pts_q.empty()) {
      progress = false;
      for (auto it = pts_q.begin(); it != pts_q.end();) {
        if (grounded(it->src)) {
          if (!match_pts(*it)) return finish(false);
          it = pts_q.erase(it);
          progress = true;
          binder_wave(pending);
        } else {
          ++it;
        }
      }
    }
    for (const auto& p : pts_q)
      if (!match_pts(p)) return finish(false);
    binder_wave(pending);

    for (const auto& s : rhs.segs) {
      if (!match_seg(s)) return finish(false);
      binder_wave(pending);
    }

    // Remaining pure obligations.
    for (const auto& a : pending) {
      PureAtom r{resolve(a.lhs), a.op, resolve(a.rhs)};
      if (grounded(r.lhs) && grounded(r.rhs) && cg->proves(r)) continue;
      if (!abduce) return finish(false, "pure atom not provable");
      // Name any still-unbound flexible variables after themselves.
      std::set<VarId> vs;
      r.lhs.collect_vars(vs);
      r.rhs.collect_vars(vs);
      for (VarId v : vs)
        if (flexible.count(v) && !theta.count(v)) bind(v, Expr::var(v));
      auto l = logical_form(a.lhs);
      auto rr = logical_form(a.rhs);
      if (!l || !rr)
        return finish(false, "pure requirement not expressible over logical variables");
      anti.add_pure(*l, a.op, *rr);
    }
    return finish(true);
  }

  SubtractOutcome finish(bool ok, const std::string& why = "") {
    SubtractOutcome out;
    out.ok = ok;
    if (!ok) {
      out.reason = reason.empty() ? why : reason;
      return out;
    }
    out.binding = theta;
    SymbolicHeap frame;
    frame.pure = lhs.pure;  // pure facts are not resources
    for (size_t i = 0; i < lhs.pts.size(); ++i)
      if (!pts_taken[i]) frame.pts.push_back(lhs.pts[i]);
    for (size_t i = 0; i < lhs.segs.size(); ++i)
      if (!segs_taken[i]) frame.segs.push_back(lhs.segs[i]);
    out.frame = normalize(frame);
    out.antiframe = normalize(anti);
    return out;
  }
};

}  // namespace

SubtractOutcome subtract(const SymbolicHeap& lhs, const SymbolicHeap& rhs,
                         const std::set<VarId>& flexible, bool allow_abduction,
                         SymbolPool& pool, const BlockRegistry& blocks) {
  Engine e(lhs, pool, blocks, allow_abduction, flexible);
  return e.run(rhs);
}

EntailVerdict entails(const SymbolicHeap& lhs, const SymbolicHeap& rhs,
                      SymbolPool& pool, const BlockRegistry& blocks,
                      SymbolicHeap* frame) {
  // An inconsistent antecedent entails anything.
  if (pure_sat(lhs, pool) == PureVerdict::Unsat) {
    if (frame) *frame = SymbolicHeap{};
    return EntailVerdict::Proved;
  }
  std::set<VarId> flex;
  std::set<VarId> lv = lhs.vars();
  for (VarId v : rhs.vars())
    if (!lv.count(v)) flex.insert(v);
  SubtractOutcome out = subtract(lhs, rhs, flex, /*allow_abduction=*/false, pool, blocks);
  if (!out.ok || !out.antiframe.pure.empty() || !out.antiframe.spatially_empty())
    return EntailVerdict::Unknown;
  if (frame) *frame = out.frame;
  return EntailVerdict::Proved;
}

std::optional<BiabSolution> solve(const SymbolicHeap& q, const SymbolicHeap& l,
                                  const std::set<VarId>& flexible, SymbolPool& pool,
                                  const BlockRegistry& blocks, std::string* why) {
  SubtractOutcome out = subtract(q, l, flexible, /*allow_abduction=*/true, pool, blocks);
  if (!out.ok) {
    if (why) *why = out.reason;
    return std::nullopt;
  }
  if (pure_sat(star(q, out.antiframe), pool) != PureVerdict::Sat) {
    if (why) *why = "antiframe contradicts or cannot be shown consistent";
    return std::nullopt;
  }
  return BiabSolution{out.antiframe, out.frame, out.binding};
}

}  // namespace abducer
