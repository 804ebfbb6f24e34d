#include "abducer/concrete.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace abducer {

namespace {

// Matching IR: formula variables and per-unfolding existentials become holes;
// a hole is bound to a value during the search.
struct Holes {
  std::vector<std::optional<Value>> slot;
  std::map<VarId, int> of_var;

  int var_hole(VarId v) {
    auto it = of_var.find(v);
    if (it != of_var.end()) return it->second;
    int h = static_cast<int>(slot.size());
    slot.emplace_back(std::nullopt);
    of_var.emplace(v, h);
    return h;
  }
  int fresh() {
    slot.emplace_back(std::nullopt);
    return static_cast<int>(slot.size() - 1);
  }
};

// Expression over holes.
struct MExpr {
  enum class Kind : uint8_t { Const, Hole, Un, Bin } kind = Kind::Const;
  Value k = 0;
  int hole = -1;
  UnOp un = UnOp::Neg;
  BinOp bin = BinOp::Add;
  std::shared_ptr<MExpr> a, b;

  static MExpr constant(Value v) {
    MExpr e;
    e.k = v;
    return e;
  }
  static MExpr of_hole(int h) {
    MExpr e;
    e.kind = Kind::Hole;
    e.hole = h;
    return e;
  }
};

MExpr translate(const Expr& e, Holes& holes, const std::map<VarId, Value>& stack) {
  switch (e.kind()) {
    case Expr::Kind::Null: return MExpr::constant(kNullValue);
    case Expr::Kind::Nat: return MExpr::constant(e.nat_value());
    case Expr::Kind::Var: {
      auto it = stack.find(e.var_id());
      if (it != stack.end()) return MExpr::constant(it->second);
      return MExpr::of_hole(holes.var_hole(e.var_id()));
    }
    case Expr::Kind::Unary: {
      MExpr r;
      r.kind = MExpr::Kind::Un;
      r.un = e.un_op();
      r.a = std::make_shared<MExpr>(translate(e.lhs(), holes, stack));
      return r;
    }
    case Expr::Kind::Binary: {
      MExpr r;
      r.kind = MExpr::Kind::Bin;
      r.bin = e.bin_op();
      r.a = std::make_shared<MExpr>(translate(e.lhs(), holes, stack));
      r.b = std::make_shared<MExpr>(translate(e.rhs(), holes, stack));
      return r;
    }
  }
  return MExpr::constant(0);
}

std::optional<Value> eval(const MExpr& e, const Holes& holes) {
  switch (e.kind) {
    case MExpr::Kind::Const: return e.k;
    case MExpr::Kind::Hole: return holes.slot[e.hole];
    case MExpr::Kind::Un: {
      auto a = eval(*e.a, holes);
      if (!a) return std::nullopt;
      return -*a;
    }
    case MExpr::Kind::Bin: {
      auto a = eval(*e.a, holes);
      auto b = eval(*e.b, holes);
      if (!a || !b) return std::nullopt;
      switch (e.bin) {
        case BinOp::Add: return *a + *b;
        case BinOp::Sub: return *a - *b;
        case BinOp::Mul: return *a * *b;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool rel_holds(RelOp op, Value l, Value r) {
  switch (op) {
    case RelOp::Eq: return l == r;
    case RelOp::Ne: return l != r;
    case RelOp::Le: return l <= r;
    case RelOp::Ge: return l >= r;
    case RelOp::Lt: return l < r;
    case RelOp::Gt: return l > r;
  }
  return false;
}

struct MPure {
  MExpr lhs;
  RelOp op;
  MExpr rhs;
};

struct MPts {
  MExpr src;
  FieldId field;
  MExpr val;
};

struct MSeg {
  BlockId block;
  MExpr head;
  MExpr tail;
};

struct Matcher {
  const SymbolPool& pool;
  const BlockRegistry& blocks;
  Holes holes;
  std::vector<MPure> pure;
  std::vector<Value> candidates;  // for free holes
  int branch_budget = 2'000'000;

  bool pure_ok_so_far() {
    for (const auto& p : pure) {
      auto l = eval(p.lhs, holes);
      auto r = eval(p.rhs, holes);
      if (l && r && !rel_holds(p.op, *l, *r)) return false;
    }
    return true;
  }

  // Cheap propagation: equality with one side evaluable, other a bare hole.
  bool propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : pure) {
        if (p.op != RelOp::Eq) continue;
        auto l = eval(p.lhs, holes);
        auto r = eval(p.rhs, holes);
        if (l && r) {
          if (*l != *r) return false;
          continue;
        }
        if (l && p.rhs.kind == MExpr::Kind::Hole) {
          holes.slot[p.rhs.hole] = *l;
          changed = true;
        } else if (r && p.lhs.kind == MExpr::Kind::Hole) {
          holes.slot[p.lhs.hole] = *r;
          changed = true;
        }
      }
    }
    return true;
  }

  MExpr instantiate(const BlockDef::BExpr& e, const std::vector<int>& formal_holes) {
    switch (e.kind) {
      case BlockDef::BExpr::Kind::Formal: return MExpr::of_hole(formal_holes[e.formal]);
      case BlockDef::BExpr::Kind::Null: return MExpr::constant(kNullValue);
      case BlockDef::BExpr::Kind::Nat: return MExpr::constant(e.k);
    }
    return MExpr::constant(0);
  }

  // Exact cover: consume all atoms and the whole remaining heap.
  bool match(std::vector<MPts> pts, std::vector<MSeg> segs,
             std::map<HeapCell, Value> heap) {
    if (--branch_budget < 0) return false;
    if (!pure_ok_so_far()) return false;
    if (pts.empty() && segs.empty()) {
      if (!heap.empty()) return false;
      return finish_pure();
    }
    if (!pts.empty()) {
      MPts a = pts.back();
      pts.pop_back();
      auto src = eval(a.src, holes);
      if (src) {
        HeapCell cell{*src, a.field};
        auto it = heap.find(cell);
        if (it == heap.end()) return false;
        Value got = it->second;
        auto want = eval(a.val, holes);
        if (want) {
          if (*want != got) return false;
          heap.erase(it);
          return match(std::move(pts), std::move(segs), std::move(heap));
        }
        if (a.val.kind == MExpr::Kind::Hole) {
          auto saved = holes.slot;
          holes.slot[a.val.hole] = got;
          auto h2 = heap;
          h2.erase(cell);
          if (match(pts, segs, std::move(h2))) return true;
          holes.slot = saved;
          return false;
        }
        return false;  // compound target not yet evaluable: unsupported shape
      }
      if (a.src.kind != MExpr::Kind::Hole) return false;
      // Branch over heap locations carrying this field.
      std::set<Value> locs;
      for (const auto& [cell, v] : heap)
        if (cell.field == a.field) locs.insert(cell.loc);
      for (Value loc : locs) {
        auto saved = holes.slot;
        holes.slot[a.src.hole] = loc;
        auto p2 = pts;
        p2.push_back(a);
        if (match(std::move(p2), segs, heap)) return true;
        holes.slot = saved;
      }
      return false;
    }
    // Segments: take the last one, try empty, then one unfolding.
    MSeg s = segs.back();
    segs.pop_back();
    auto head = eval(s.head, holes);
    auto tail = eval(s.tail, holes);
    // Empty case: head = tail, no cells.
    {
      auto saved = holes.slot;
      bool feasible = true;
      if (head && tail) {
        feasible = *head == *tail;
      } else if (head && s.tail.kind == MExpr::Kind::Hole) {
        holes.slot[s.tail.hole] = *head;
      } else if (tail && s.head.kind == MExpr::Kind::Hole) {
        holes.slot[s.head.hole] = *tail;
      } else if (!head && !tail && s.head.kind == MExpr::Kind::Hole &&
                 s.tail.kind == MExpr::Kind::Hole) {
        for (Value c : candidates) {
          holes.slot[s.head.hole] = c;
          holes.slot[s.tail.hole] = c;
          if (match(pts, segs, heap)) return true;
          holes.slot = saved;
        }
        feasible = false;
      }
      if (feasible && match(pts, segs, heap)) return true;
      holes.slot = saved;
    }
    // Nonempty: lay down one block copy at the head, recurse on the rest.
    if (heap.empty()) return false;
    const BlockDef& d = blocks.def(s.block);
    auto saved = holes.slot;
    std::vector<int> formal_holes(d.formal_count);
    // Head formal: if the head is evaluable, pin it; else reuse its hole.
    if (head) {
      formal_holes[0] = holes.fresh();
      holes.slot[formal_holes[0]] = *head;
    } else if (s.head.kind == MExpr::Kind::Hole) {
      formal_holes[0] = s.head.hole;
    } else {
      holes.slot = saved;
      return false;
    }
    for (uint32_t i = 1; i < d.formal_count; ++i) formal_holes[i] = holes.fresh();
    std::vector<MPts> p2 = pts;
    std::vector<MSeg> s2 = segs;
    for (const auto& c : d.cells)
      p2.push_back({MExpr::of_hole(formal_holes[c.src]), c.field,
                    instantiate(c.val, formal_holes)});
    for (const auto& n : d.segs)
      s2.push_back({n.block, MExpr::of_hole(formal_holes[n.head]),
                    instantiate(n.tail, formal_holes)});
    size_t pure_mark = pure.size();
    for (const auto& q : d.pures)
      pure.push_back({instantiate(q.lhs, formal_holes), q.op,
                      instantiate(q.rhs, formal_holes)});
    // Remaining segment from the copy's tail.
    s2.push_back({s.block, MExpr::of_hole(formal_holes[1]), s.tail});
    bool ok = match(std::move(p2), std::move(s2), heap);
    pure.resize(pure_mark);
    if (ok) return true;
    holes.slot = saved;
    return false;
  }

  // All spatial atoms placed; assign remaining holes and check pure atoms.
  bool finish_pure() {
    std::vector<int> free;
    for (size_t i = 0; i < holes.slot.size(); ++i)
      if (!holes.slot[i]) free.push_back(static_cast<int>(i));
    if (!propagate()) return false;
    free.erase(std::remove_if(free.begin(), free.end(),
                              [&](int h) { return holes.slot[h].has_value(); }),
               free.end());
    std::function<bool(size_t)> go = [&](size_t i) -> bool {
      if (i == free.size()) {
        for (const auto& p : pure) {
          auto l = eval(p.lhs, holes);
          auto r = eval(p.rhs, holes);
          if (!l || !r || !rel_holds(p.op, *l, *r)) return false;
        }
        return true;
      }
      for (Value c : candidates) {
        holes.slot[free[i]] = c;
        if (go(i + 1)) return true;
      }
      holes.slot[free[i]] = std::nullopt;
      return false;
    };
    return go(0);
  }
};

std::vector<Value> candidate_values(const Configuration& conf) {
  std::set<Value> s = {kNullValue, 1, 2, 3};
  for (const auto& [v, val] : conf.stack) s.insert(val);
  for (const auto& [cell, val] : conf.heap) {
    s.insert(cell.loc);
    s.insert(val);
  }
  return {s.begin(), s.end()};
}

}  // namespace

bool models(const Configuration& conf, const SymbolicHeap& phi,
            const SymbolPool& pool, const BlockRegistry& blocks) {
  if (conf.is_err) return false;
  Matcher m{pool, blocks, {}, {}, candidate_values(conf)};
  std::vector<MPts> pts;
  std::vector<MSeg> segs;
  for (const auto& p : phi.pts)
    pts.push_back({translate(p.src, m.holes, conf.stack), p.field,
                   translate(p.val, m.holes, conf.stack)});
  for (const auto& s : phi.segs)
    segs.push_back({s.block, translate(s.head, m.holes, conf.stack),
                    translate(s.tail, m.holes, conf.stack)});
  for (const auto& a : phi.pure)
    m.pure.push_back({translate(a.lhs, m.holes, conf.stack), a.op,
                      translate(a.rhs, m.holes, conf.stack)});
  if (!m.propagate()) return false;
  return m.match(std::move(pts), std::move(segs), conf.heap);
}

bool models_any(const Configuration& conf, const Disjunction& delta,
                const SymbolPool& pool, const BlockRegistry& blocks) {
  for (const auto& h : delta)
    if (models(conf, h, pool, blocks)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// enumerate_models
// ---------------------------------------------------------------------------

namespace {

struct GenAtomPts {
  VarId src_var;  // invalid when src is a fixed expr
  Expr src;
  FieldId field;
  Expr val;
};

struct Generator {
  const SymbolPool& pool;
  const BlockRegistry& blocks;
  const EnumBounds& bounds;
  const SymbolicHeap& phi;
  std::set<VarId> phi_vars;
  std::set<Configuration> out;

  struct State {
    std::map<VarId, Value> env;  // phi vars and synthetic internals
    std::map<HeapCell, Value> heap;
    int locs_used = 0;
    std::vector<PointsTo> pts;  // pending cells (sources may be unbound)
    std::vector<SegAtom> segs;  // pending segments
  };

  // Synthetic variables for per-copy existentials live in a private range.
  uint32_t synth_next = 0x40000000;
  std::map<uint32_t, Value> dummy;

  std::optional<Value> eval_expr(const Expr& e, const std::map<VarId, Value>& env) {
    switch (e.kind()) {
      case Expr::Kind::Null: return kNullValue;
      case Expr::Kind::Nat: return e.nat_value();
      case Expr::Kind::Var: {
        auto it = env.find(e.var_id());
        if (it == env.end()) return std::nullopt;
        return it->second;
      }
      case Expr::Kind::Unary: {
        auto a = eval_expr(e.lhs(), env);
        if (!a) return std::nullopt;
        return -*a;
      }
      case Expr::Kind::Binary: {
        auto a = eval_expr(e.lhs(), env);
        auto b = eval_expr(e.rhs(), env);
        if (!a || !b) return std::nullopt;
        switch (e.bin_op()) {
          case BinOp::Add: return *a + *b;
          case BinOp::Sub: return *a - *b;
          case BinOp::Mul: return *a * *b;
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  std::vector<Value> loc_candidates(const State& st, bool allow_fresh) {
    std::vector<Value> r;
    for (int i = 0; i < st.locs_used; ++i) r.push_back(kLocBase + i);
    if (allow_fresh && st.locs_used < kLocPoolSize)
      r.push_back(kLocBase + st.locs_used);
    return r;
  }

  std::vector<Value> value_candidates(const State& st) {
    std::vector<Value> r = loc_candidates(st, true);
    for (Value v : bounds.value_range) r.push_back(v);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
  }

  void bind(State st, VarId v, Value val,
            const std::function<void(State)>& k) {
    auto it = st.env.find(v);
    if (it != st.env.end()) {
      if (it->second == val) k(std::move(st));
      return;
    }
    if (val >= kLocBase && val >= kLocBase + st.locs_used) {
      if (val != kLocBase + st.locs_used) return;  // canonical: lowest first
      st.locs_used++;
    }
    st.env.emplace(v, val);
    k(std::move(st));
  }

  void bind_expr_to(State st, const Expr& e, Value val,
                    const std::function<void(State)>& k) {
    if (auto got = eval_expr(e, st.env)) {
      if (*got == val) k(std::move(st));
      return;
    }
    if (e.is_var()) {
      bind(std::move(st), e.var_id(), val, k);
      return;
    }
    // Compound with unbound vars: not directed; drop this branch (the final
    // models() filter keeps the enumeration sound, not complete, here).
  }

  void step(State st) {
    if (out.size() >= bounds.max_results) return;
    // Place pending cells first.
    if (!st.pts.empty()) {
      PointsTo a = st.pts.back();
      st.pts.pop_back();
      auto src = eval_expr(a.src, st.env);
      auto place = [&](State s2, Value loc) {
        if (loc == kNullValue || !is_location(loc)) return;
        HeapCell cell{loc, a.field};
        if (s2.heap.count(cell)) return;  // separation: cell already taken
        auto val = eval_expr(a.val, s2.env);
        if (val) {
          s2.heap.emplace(cell, *val);
          step(std::move(s2));
          return;
        }
        for (Value cand : value_candidates(s2)) {
          State s3 = s2;
          s3.heap.emplace(cell, cand);
          bind_expr_to(std::move(s3), a.val, cand, [&](State s4) { step(std::move(s4)); });
        }
      };
      if (src) {
        place(std::move(st), *src);
        return;
      }
      if (!a.src.is_var()) return;
      for (Value loc : loc_candidates(st, true)) {
        State s2 = st;
        s2.pts.push_back(a);
        bind(std::move(s2), a.src.var_id(), loc, [&](State s3) { step(std::move(s3)); });
      }
      return;
    }
    if (!st.segs.empty()) {
      SegAtom s = st.segs.back();
      st.segs.pop_back();
      // Empty segment: head = tail.
      {
        State s2 = st;
        auto head = eval_expr(s.head, s2.env);
        auto tail = eval_expr(s.tail, s2.env);
        if (head && tail) {
          if (*head == *tail) step(std::move(s2));
        } else if (head) {
          bind_expr_to(std::move(s2), s.tail, *head, [&](State s3) { step(std::move(s3)); });
        } else if (tail) {
          bind_expr_to(std::move(s2), s.head, *tail, [&](State s3) { step(std::move(s3)); });
        } else if (s.head.is_var() && s.tail.is_var()) {
          for (Value c : value_candidates(s2)) {
            State s3 = s2;
            bind(std::move(s3), s.head.var_id(), c, [&](State s4) {
              bind_expr_to(std::move(s4), s.tail, c, [&](State s5) { step(std::move(s5)); });
            });
          }
        }
      }
      // One more copy if the cell budget allows it.
      const BlockDef& d = blocks.def(s.block);
      if (static_cast<int>(st.heap.size()) + static_cast<int>(d.cells.size()) >
          bounds.max_cells)
        return;
      State s2 = st;
      // Bind formals: head from the segment head, internals/tail synthetic.
      std::map<uint32_t, Expr> formal;
      formal.emplace(0u, s.head);
      for (uint32_t i = 1; i < d.formal_count; ++i)
        formal.emplace(i, Expr::var(VarId{synth_next++}));
      auto bex = [&](const BlockDef::BExpr& e) -> Expr {
        switch (e.kind) {
          case BlockDef::BExpr::Kind::Formal: return formal.at(e.formal);
          case BlockDef::BExpr::Kind::Null: return Expr::null();
          case BlockDef::BExpr::Kind::Nat: return Expr::nat(e.k);
        }
        return Expr::null();
      };
      for (const auto& c : d.cells) s2.pts.push_back({bex(BlockDef::BExpr::formal_ref(c.src)), c.field, bex(c.val)});
      for (const auto& n : d.segs)
        s2.segs.push_back({n.block, bex(BlockDef::BExpr::formal_ref(n.head)), bex(n.tail)});
      // The copy's pure constraints are enforced by the final models() check.
      s2.segs.push_back({s.block, formal.at(1), s.tail});
      step(std::move(s2));
      return;
    }
    // Spatial layout complete; bind any remaining formula variables.
    std::optional<VarId> unbound;
    for (VarId v : phi_vars)
      if (!st.env.count(v)) {
        unbound = v;
        break;
      }
    if (unbound) {
      for (Value c : value_candidates(st)) {
        State s2 = st;
        bind(std::move(s2), *unbound, c, [&](State s3) { step(std::move(s3)); });
      }
      return;
    }
    // Build the configuration over the formula's variables only.
    Configuration conf;
    conf.heap = st.heap;
    for (VarId v : phi_vars) conf.stack.emplace(v, st.env.at(v));
    out.insert(std::move(conf));
  }

  std::vector<Configuration> run() {
    phi_vars = phi.vars();
    State init;
    for (const auto& p : phi.pts) init.pts.push_back(p);
    for (const auto& s : phi.segs) init.segs.push_back(s);
    if (static_cast<int>(init.pts.size()) <= bounds.max_cells) step(std::move(init));
    std::vector<Configuration> result;
    for (auto& c : out) {
      if (models(c, phi, pool, blocks)) result.push_back(c);
    }
    return result;
  }
};

}  // namespace

std::vector<Configuration> enumerate_models(const SymbolicHeap& phi,
                                            const EnumBounds& bounds,
                                            const SymbolPool& pool,
                                            const BlockRegistry& blocks) {
  Generator g{pool, blocks, bounds, phi};
  return g.run();
}

}  // namespace abducer
