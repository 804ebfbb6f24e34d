#include "abducer/abstraction.hpp"

#include <algorithm>
#include <cassert>

#include "abducer/subtract.hpp"

namespace abducer {

namespace {

int count_occurrences(const SymbolicHeap& h, VarId v) {
  int n = 0;
  auto count_expr = [&](const Expr& e) {
    std::set<VarId> vs;
    e.collect_vars(vs);
    if (vs.count(v)) ++n;
  };
  for (const auto& a : h.pure) {
    count_expr(a.lhs);
    count_expr(a.rhs);
  }
  for (const auto& p : h.pts) {
    count_expr(p.src);
    count_expr(p.val);
  }
  for (const auto& s : h.segs) {
    count_expr(s.head);
    count_expr(s.tail);
  }
  return n;
}

// One ls-fusion step: a.next |-> b * chain(b, c) with b occurring nowhere
// else becomes ls(a, c). Chains may start or continue with ls atoms.
bool fuse_ls_step(SymbolicHeap& h, const SymbolPool& pool) {
  const FieldId next{0};
  struct Piece {
    bool is_pts;
    size_t idx;
    Expr head, tail;
  };
  std::vector<Piece> pieces;
  for (size_t i = 0; i < h.pts.size(); ++i)
    if (h.pts[i].field == next) pieces.push_back({true, i, h.pts[i].src, h.pts[i].val});
  for (size_t i = 0; i < h.segs.size(); ++i)
    if (h.segs[i].block == kLsBlock)
      pieces.push_back({false, i, h.segs[i].head, h.segs[i].tail});
  for (const auto& a : pieces) {
    if (!a.tail.is_var()) continue;
    VarId mid = a.tail.var_id();
    if (pool.kind(mid) != VarKind::Logical) continue;
    for (const auto& b : pieces) {
      if (a.is_pts == b.is_pts && a.idx == b.idx) continue;
      if (!b.head.is_var() || b.head.var_id() != mid) continue;
      if (count_occurrences(h, mid) != 2) continue;
      SymbolicHeap r = h;
      // Erase the higher index first to keep the other index valid.
      auto erase_piece = [&r](const Piece& p) {
        if (p.is_pts)
          r.pts.erase(r.pts.begin() + static_cast<long>(p.idx));
        else
          r.segs.erase(r.segs.begin() + static_cast<long>(p.idx));
      };
      if (a.is_pts == b.is_pts && a.idx < b.idx) {
        erase_piece(b);
        erase_piece(a);
      } else {
        erase_piece(a);
        erase_piece(b);
      }
      r.segs.push_back({kLsBlock, a.head, b.tail});
      h = normalize(r);
      return true;
    }
  }
  // Adjacent same-block segments: iter(x, m) * iter(m, t) -> iter(x, t).
  for (size_t i = 0; i < h.segs.size(); ++i) {
    if (!h.segs[i].tail.is_var()) continue;
    VarId mid = h.segs[i].tail.var_id();
    if (pool.kind(mid) != VarKind::Logical) continue;
    for (size_t j = 0; j < h.segs.size(); ++j) {
      if (i == j || h.segs[i].block != h.segs[j].block) continue;
      if (!h.segs[j].head.is_var() || h.segs[j].head.var_id() != mid) continue;
      if (count_occurrences(h, mid) != 2) continue;
      SymbolicHeap r = h;
      SegAtom merged{h.segs[i].block, h.segs[i].head, h.segs[j].tail};
      if (i < j) {
        r.segs.erase(r.segs.begin() + static_cast<long>(j));
        r.segs.erase(r.segs.begin() + static_cast<long>(i));
      } else {
        r.segs.erase(r.segs.begin() + static_cast<long>(i));
        r.segs.erase(r.segs.begin() + static_cast<long>(j));
      }
      r.segs.push_back(merged);
      h = normalize(r);
      return true;
    }
  }
  return false;
}

// Group of spatial atoms reachable from a root variable, stopping at `stop`.
struct Group {
  std::vector<size_t> pts;   // indices into h.pts
  std::vector<size_t> segs;  // indices into h.segs
  std::vector<VarId> locals;
  std::optional<Expr> link;  // target leading to `stop` (copy 1) / outwards (copy 2)
};

std::optional<Group> collect_group(const SymbolicHeap& h, VarId root,
                                   const std::optional<VarId>& stop) {
  Group g;
  std::set<VarId> frontier = {root};
  std::set<VarId> seen = {root};
  std::set<size_t> pts_used, segs_used;
  while (!frontier.empty()) {
    std::set<VarId> next;
    for (VarId v : frontier) {
      for (size_t i = 0; i < h.pts.size(); ++i) {
        if (pts_used.count(i)) continue;
        if (!h.pts[i].src.is_var() || h.pts[i].src.var_id() != v) continue;
        pts_used.insert(i);
        g.pts.push_back(i);
        const Expr& t = h.pts[i].val;
        if (t.is_var()) {
          VarId tv = t.var_id();
          if (stop && tv == *stop) {
            if (g.link) return std::nullopt;  // two links to the seam
            g.link = t;
          } else if (!seen.count(tv)) {
            seen.insert(tv);
            next.insert(tv);
            g.locals.push_back(tv);
          }
        }
      }
      for (size_t i = 0; i < h.segs.size(); ++i) {
        if (segs_used.count(i)) continue;
        if (!h.segs[i].head.is_var() || h.segs[i].head.var_id() != v) continue;
        segs_used.insert(i);
        g.segs.push_back(i);
        const Expr& t = h.segs[i].tail;
        if (t.is_var()) {
          VarId tv = t.var_id();
          if (stop && tv == *stop) {
            if (g.link) return std::nullopt;
            g.link = t;
          } else if (!seen.count(tv)) {
            seen.insert(tv);
            next.insert(tv);
            g.locals.push_back(tv);
          }
        }
      }
    }
    frontier = std::move(next);
  }
  return g;
}

}  // namespace

std::optional<SymbolicHeap> fuse_two_copies(const SymbolicHeap& h_in, VarId seam,
                                            SymbolPool& pool, BlockRegistry& blocks) {
  SymbolicHeap h = normalize(h_in);
  // Copy 1: rooted at a source that is not a target anywhere; reaches `seam`.
  std::set<VarId> targets;
  for (const auto& p : h.pts)
    if (p.val.is_var()) targets.insert(p.val.var_id());
  for (const auto& s : h.segs)
    if (s.tail.is_var()) targets.insert(s.tail.var_id());
  std::optional<VarId> root;
  for (const auto& p : h.pts) {
    if (!p.src.is_var()) continue;
    VarId v = p.src.var_id();
    if (v != seam && !targets.count(v)) {
      if (root && *root != v) return std::nullopt;  // more than one chain root
      root = v;
    }
  }
  for (const auto& s : h.segs) {
    if (!s.head.is_var()) continue;
    VarId v = s.head.var_id();
    if (v != seam && !targets.count(v)) {
      if (root && *root != v) return std::nullopt;
      root = v;
    }
  }
  if (!root) return std::nullopt;
  auto g1 = collect_group(h, *root, seam);
  if (!g1 || !g1->link) return std::nullopt;
  auto g2 = collect_group(h, seam, std::nullopt);
  if (!g2) return std::nullopt;

  // The two copies must be isomorphic under root -> seam. Build the block
  // from copy 1 while matching copy 2 cell by cell.
  const BlockDef::BExpr head_ref = BlockDef::BExpr::formal_ref(0);
  const BlockDef::BExpr tail_ref = BlockDef::BExpr::formal_ref(1);
  BlockDef def;
  std::map<VarId, uint32_t> formal_of;  // copy-1 variable -> formal index
  formal_of.emplace(*root, 0u);
  std::map<VarId, VarId> iso;  // copy-1 variable -> copy-2 variable
  iso.emplace(*root, seam);
  VarId link1 = g1->link->var_id();
  if (link1 != seam) return std::nullopt;

  // Copy 2's link: its outward target becomes the overall tail. Find it as
  // the unique escaping variable target of g2 (a non-local, non-seam var) or
  // a constant target matching copy 1's seam position.
  std::set<VarId> g2_locals(g2->locals.begin(), g2->locals.end());

  auto bexpr_of_target =
      [&](const Expr& t1, const Expr& t2,
          std::optional<Expr>& overall_tail) -> std::optional<BlockDef::BExpr> {
    // t1: target inside copy 1; t2: the matching target inside copy 2.
    if (t1.is_var() && t1.var_id() == seam) {
      // Copy 1 links to the seam; copy 2's counterpart is the overall tail.
      if (overall_tail && !(*overall_tail == t2)) return std::nullopt;
      overall_tail = t2;
      return tail_ref;
    }
    if (t1.is_var() && formal_of.count(t1.var_id())) {
      // Internal: copy 2 must use its iso image.
      VarId v1 = t1.var_id();
      if (!t2.is_var() || iso.at(v1) != t2.var_id()) return std::nullopt;
      return BlockDef::BExpr::formal_ref(formal_of.at(v1));
    }
    if (t1.is_var() && !formal_of.count(t1.var_id())) {
      // First sighting of an internal variable.
      VarId v1 = t1.var_id();
      if (!t2.is_var()) return std::nullopt;
      VarId v2 = t2.var_id();
      if (v1 == v2) return std::nullopt;  // shared across copies: not per-copy
      uint32_t f = def.formal_count++;
      formal_of.emplace(v1, f);
      iso.emplace(v1, v2);
      return BlockDef::BExpr::formal_ref(f);
    }
    auto k1 = t1.const_value();
    auto k2 = t2.const_value();
    if (k1 && k2 && *k1 == *k2)
      return *k1 == 0 ? BlockDef::BExpr::null() : BlockDef::BExpr::nat(*k1);
    return std::nullopt;
  };

  std::optional<Expr> overall_tail;
  std::set<size_t> g2_pts_left(g2->pts.begin(), g2->pts.end());
  std::set<size_t> g2_segs_left(g2->segs.begin(), g2->segs.end());

  // Match copy-1 cells in a deterministic order: breadth order as collected.
  for (size_t i1 : g1->pts) {
    const PointsTo& c1 = h.pts[i1];
    VarId src1 = c1.src.var_id();
    if (!formal_of.count(src1)) return std::nullopt;
    VarId src2 = iso.at(src1);
    // Find the copy-2 cell with the iso source and same field.
    std::optional<size_t> found;
    for (size_t i2 : g2_pts_left) {
      const PointsTo& c2 = h.pts[i2];
      if (c2.field == c1.field && c2.src.is_var() && c2.src.var_id() == src2) {
        found = i2;
        break;
      }
    }
    if (!found) return std::nullopt;
    g2_pts_left.erase(*found);
    auto be = bexpr_of_target(c1.val, h.pts[*found].val, overall_tail);
    if (!be) return std::nullopt;
    def.cells.push_back({formal_of.at(src1), c1.field, *be});
  }
  for (size_t i1 : g1->segs) {
    const SegAtom& s1 = h.segs[i1];
    VarId src1 = s1.head.var_id();
    if (!formal_of.count(src1)) return std::nullopt;
    VarId src2 = iso.at(src1);
    std::optional<size_t> found;
    for (size_t i2 : g2_segs_left) {
      const SegAtom& s2 = h.segs[i2];
      if (s2.block == s1.block && s2.head.is_var() && s2.head.var_id() == src2) {
        found = i2;
        break;
      }
    }
    if (!found) return std::nullopt;
    g2_segs_left.erase(*found);
    auto be = bexpr_of_target(s1.tail, h.segs[*found].tail, overall_tail);
    if (!be) return std::nullopt;
    def.segs.push_back({s1.block, formal_of.at(src1), *be});
  }
  if (!g2_pts_left.empty() || !g2_segs_left.empty()) return std::nullopt;
  if (!overall_tail) return std::nullopt;
  (void)head_ref;

  // Nested blocks only one level deep.
  for (const auto& n : def.segs)
    if (n.block != kLsBlock && !blocks.def(n.block).segs.empty()) return std::nullopt;

  // Pure atoms over copy locals become per-repetition constraints; their iso
  // images must be present for copy 2. Remaining pure atoms are residue.
  auto to_bexpr = [&](const Expr& e) -> std::optional<BlockDef::BExpr> {
    if (e.is_var() && formal_of.count(e.var_id()))
      return BlockDef::BExpr::formal_ref(formal_of.at(e.var_id()));
    if (auto k = e.const_value())
      return *k == 0 ? BlockDef::BExpr::null() : BlockDef::BExpr::nat(*k);
    return std::nullopt;
  };
  auto mentions_locals = [&](const PureAtom& a, const std::map<VarId, VarId>& m) {
    std::set<VarId> vs;
    a.lhs.collect_vars(vs);
    a.rhs.collect_vars(vs);
    for (VarId v : vs)
      if (m.count(v) && v != *root) return true;
    return false;
  };
  std::map<VarId, VarId> iso_rev;
  for (auto& [a, b] : iso) iso_rev.emplace(b, a);
  std::vector<PureAtom> residue_pure;
  std::vector<PureAtom> copy2_pure;
  for (const auto& a : h.pure) {
    if (mentions_locals(a, iso)) {
      auto l = to_bexpr(a.lhs);
      auto r = to_bexpr(a.rhs);
      if (!l || !r) return std::nullopt;
      def.pures.push_back({*l, a.op, *r});
    } else {
      std::set<VarId> vs;
      a.lhs.collect_vars(vs);
      a.rhs.collect_vars(vs);
      bool copy2_local = false;
      for (VarId v : vs)
        if (iso_rev.count(v) && v != seam) copy2_local = true;
      if (copy2_local)
        copy2_pure.push_back(a);  // checked as the image of a block pure
      else
        residue_pure.push_back(a);
    }
  }
  // Every block pure must have its copy-2 image among copy2_pure.
  for (const auto& q : def.pures) {
    auto img = [&](const BlockDef::BExpr& e) -> Expr {
      switch (e.kind) {
        case BlockDef::BExpr::Kind::Null: return Expr::null();
        case BlockDef::BExpr::Kind::Nat: return Expr::nat(e.k);
        case BlockDef::BExpr::Kind::Formal: {
          for (auto& [v, f] : formal_of)
            if (f == e.formal) return Expr::var(iso.at(v));
          return Expr::null();
        }
      }
      return Expr::null();
    };
    PureAtom want{img(q.lhs), q.op, img(q.rhs)};
    PureAtom want_sym{want.rhs, q.op, want.lhs};
    bool found = false;
    for (const auto& a : copy2_pure)
      if ((a.lhs == want.lhs && a.rhs == want.rhs && a.op == q.op) ||
          ((q.op == RelOp::Eq || q.op == RelOp::Ne) && a.lhs == want_sym.lhs &&
           a.rhs == want_sym.rhs && a.op == q.op))
        found = true;
    if (!found) return std::nullopt;
  }

  BlockId id = blocks.register_block(def);
  SymbolicHeap out;
  out.pure = residue_pure;
  for (size_t i = 0; i < h.pts.size(); ++i) {
    bool used = std::count(g1->pts.begin(), g1->pts.end(), i) ||
                std::count(g2->pts.begin(), g2->pts.end(), i);
    if (!used) out.pts.push_back(h.pts[i]);
  }
  for (size_t i = 0; i < h.segs.size(); ++i) {
    bool used = std::count(g1->segs.begin(), g1->segs.end(), i) ||
                std::count(g2->segs.begin(), g2->segs.end(), i);
    if (!used) out.segs.push_back(h.segs[i]);
  }
  out.segs.push_back({id, Expr::var(*root), *overall_tail});
  return normalize(out);
}

SymbolicHeap abstract_alpha(const SymbolicHeap& h_in, SymbolPool& pool,
                            BlockRegistry& blocks) {
  SymbolicHeap h = normalize(h_in);
  SymbolicHeap out = h;
  while (fuse_ls_step(out, pool)) {
  }
  // Two-copy generalization, tried at every candidate seam.
  std::set<VarId> sources, targets;
  for (const auto& p : out.pts)
    if (p.src.is_var()) sources.insert(p.src.var_id());
  for (const auto& s : out.segs)
    if (s.head.is_var()) sources.insert(s.head.var_id());
  for (const auto& p : out.pts)
    if (p.val.is_var()) targets.insert(p.val.var_id());
  for (const auto& s : out.segs)
    if (s.tail.is_var()) targets.insert(s.tail.var_id());
  for (VarId seam : sources) {
    if (!targets.count(seam)) continue;
    if (auto fused = fuse_two_copies(out, seam, pool, blocks)) {
      out = *fused;
      break;
    }
  }
  if (out == h) return h;
  // The certifying entailment; fall back to the input when not provable.
  if (entails(h, out, pool, blocks) != EntailVerdict::Proved) return h;
  return out;
}

}  // namespace abducer
