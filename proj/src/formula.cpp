#include "abducer/formula.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <sstream>

namespace abducer {

// ---------------------------------------------------------------------------
// SymbolPool
// ---------------------------------------------------------------------------

VarId SymbolPool::program_var(const std::string& name) {
  return program_var(name, name);
}

VarId SymbolPool::program_var(const std::string& key, const std::string& display) {
  auto it = program_by_name_.find(key);
  if (it != program_by_name_.end()) return it->second;
  VarId id{static_cast<uint32_t>(vars_.size())};
  vars_.push_back({VarKind::Program, display, VarId{}});
  program_by_name_.emplace(key, id);
  return id;
}

VarId SymbolPool::anchor_of(VarId pv) {
  assert(kind(pv) == VarKind::Program);
  auto it = anchor_by_base_.find(pv.raw);
  if (it != anchor_by_base_.end()) return it->second;
  std::string n = name(pv);
  for (auto& c : n) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  VarId id{static_cast<uint32_t>(vars_.size())};
  vars_.push_back({VarKind::Anchor, n, pv});
  anchor_by_base_.emplace(pv.raw, id);
  return id;
}

VarId SymbolPool::fresh_logical() {
  std::string n = "l" + std::to_string(++fresh_counter_);
  VarId id{static_cast<uint32_t>(vars_.size())};
  vars_.push_back({VarKind::Logical, n, VarId{}});
  return id;
}

VarId SymbolPool::named_logical(const std::string& n) {
  auto it = logical_by_name_.find(n);
  if (it != logical_by_name_.end()) return it->second;
  VarId id{static_cast<uint32_t>(vars_.size())};
  vars_.push_back({VarKind::Logical, n, VarId{}});
  logical_by_name_.emplace(n, id);
  return id;
}

FieldId SymbolPool::field(const std::string& name) {
  auto it = field_by_name_.find(name);
  if (it != field_by_name_.end()) return it->second;
  FieldId id{static_cast<uint32_t>(fields_.size())};
  fields_.push_back(name);
  field_by_name_.emplace(name, id);
  return id;
}

// ---------------------------------------------------------------------------
// Expr
// ---------------------------------------------------------------------------

RelOp negate(RelOp op) {
  switch (op) {
    case RelOp::Eq: return RelOp::Ne;
    case RelOp::Ne: return RelOp::Eq;
    case RelOp::Le: return RelOp::Gt;
    case RelOp::Ge: return RelOp::Lt;
    case RelOp::Lt: return RelOp::Ge;
    case RelOp::Gt: return RelOp::Le;
  }
  return RelOp::Eq;
}

const char* rel_op_text(RelOp op) {
  switch (op) {
    case RelOp::Eq: return "=";
    case RelOp::Ne: return "!=";
    case RelOp::Le: return "<=";
    case RelOp::Ge: return ">=";
    case RelOp::Lt: return "<";
    case RelOp::Gt: return ">";
  }
  return "?";
}

Expr Expr::null() { return Expr{}; }

Expr Expr::nat(int64_t k) {
  Expr e;
  e.kind_ = Kind::Nat;
  e.k_ = k;
  return e;
}

Expr Expr::var(VarId v) {
  Expr e;
  e.kind_ = Kind::Var;
  e.v_ = v;
  return e;
}

Expr Expr::un(UnOp op, Expr sub) {
  Expr e;
  e.kind_ = Kind::Unary;
  e.un_ = op;
  e.a_ = std::make_shared<Expr>(std::move(sub));
  return e;
}

Expr Expr::bin(BinOp op, Expr a, Expr b) {
  Expr e;
  e.kind_ = Kind::Binary;
  e.bin_ = op;
  e.a_ = std::make_shared<Expr>(std::move(a));
  e.b_ = std::make_shared<Expr>(std::move(b));
  return e;
}

std::optional<int64_t> Expr::const_value() const {
  switch (kind_) {
    case Kind::Null: return 0;
    case Kind::Nat: return k_;
    case Kind::Unary: {
      auto s = a_->const_value();
      if (!s) return std::nullopt;
      return -*s;
    }
    case Kind::Binary: {
      auto l = a_->const_value(), r = b_->const_value();
      if (!l || !r) return std::nullopt;
      switch (bin_) {
        case BinOp::Add: return *l + *r;
        case BinOp::Sub: return *l - *r;
        case BinOp::Mul: return *l * *r;
      }
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

void Expr::collect_vars(std::set<VarId>& out) const {
  switch (kind_) {
    case Kind::Var: out.insert(v_); break;
    case Kind::Unary: a_->collect_vars(out); break;
    case Kind::Binary:
      a_->collect_vars(out);
      b_->collect_vars(out);
      break;
    default: break;
  }
}

Expr Expr::subst(const std::map<VarId, Expr>& m) const {
  switch (kind_) {
    case Kind::Var: {
      auto it = m.find(v_);
      return it == m.end() ? *this : it->second;
    }
    case Kind::Unary: return un(un_, a_->subst(m));
    case Kind::Binary: return bin(bin_, a_->subst(m), b_->subst(m));
    default: return *this;
  }
}

static int expr_cmp(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind())
    return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case Expr::Kind::Null: return 0;
    case Expr::Kind::Nat:
      if (a.nat_value() != b.nat_value()) return a.nat_value() < b.nat_value() ? -1 : 1;
      return 0;
    case Expr::Kind::Var:
      if (a.var_id() != b.var_id()) return a.var_id() < b.var_id() ? -1 : 1;
      return 0;
    case Expr::Kind::Unary: {
      if (a.un_op() != b.un_op())
        return static_cast<int>(a.un_op()) < static_cast<int>(b.un_op()) ? -1 : 1;
      return expr_cmp(a.lhs(), b.lhs());
    }
    case Expr::Kind::Binary: {
      if (a.bin_op() != b.bin_op())
        return static_cast<int>(a.bin_op()) < static_cast<int>(b.bin_op()) ? -1 : 1;
      int c = expr_cmp(a.lhs(), b.lhs());
      if (c != 0) return c;
      return expr_cmp(a.rhs(), b.rhs());
    }
  }
  return 0;
}

bool operator==(const Expr& a, const Expr& b) { return expr_cmp(a, b) == 0; }
bool operator<(const Expr& a, const Expr& b) { return expr_cmp(a, b) < 0; }

// ---------------------------------------------------------------------------
// Atoms / heaps
// ---------------------------------------------------------------------------

bool operator==(const PureAtom& a, const PureAtom& b) {
  return a.op == b.op && a.lhs == b.lhs && a.rhs == b.rhs;
}

bool operator<(const PureAtom& a, const PureAtom& b) {
  if (a.op != b.op) return static_cast<int>(a.op) < static_cast<int>(b.op);
  if (a.lhs != b.lhs) return a.lhs < b.lhs;
  return a.rhs < b.rhs;
}

bool operator==(const PointsTo& a, const PointsTo& b) {
  return a.field == b.field && a.src == b.src && a.val == b.val;
}

bool operator<(const PointsTo& a, const PointsTo& b) {
  if (a.src != b.src) return a.src < b.src;
  if (a.field != b.field) return a.field < b.field;
  return a.val < b.val;
}

bool operator==(const SegAtom& a, const SegAtom& b) {
  return a.block == b.block && a.head == b.head && a.tail == b.tail;
}

bool operator<(const SegAtom& a, const SegAtom& b) {
  if (a.block != b.block) return a.block < b.block;
  if (a.head != b.head) return a.head < b.head;
  return a.tail < b.tail;
}

void SymbolicHeap::collect_vars(std::set<VarId>& out) const {
  for (const auto& a : pure) {
    a.lhs.collect_vars(out);
    a.rhs.collect_vars(out);
  }
  for (const auto& p : pts) {
    p.src.collect_vars(out);
    p.val.collect_vars(out);
  }
  for (const auto& s : segs) {
    s.head.collect_vars(out);
    s.tail.collect_vars(out);
  }
}

std::set<VarId> SymbolicHeap::vars() const {
  std::set<VarId> out;
  collect_vars(out);
  return out;
}

void SymbolicHeap::add_pure(PureAtom a) { pure.push_back(std::move(a)); }

bool operator==(const SymbolicHeap& a, const SymbolicHeap& b) {
  return a.pure == b.pure && a.pts == b.pts && a.segs == b.segs;
}

SymbolicHeap star(const SymbolicHeap& a, const SymbolicHeap& b) {
  SymbolicHeap r = a;
  r.pure.insert(r.pure.end(), b.pure.begin(), b.pure.end());
  r.pts.insert(r.pts.end(), b.pts.begin(), b.pts.end());
  r.segs.insert(r.segs.end(), b.segs.begin(), b.segs.end());
  return normalize(r);
}

SymbolicHeap subst_map(const SymbolicHeap& h, const std::map<VarId, Expr>& m) {
  SymbolicHeap r;
  for (const auto& a : h.pure) r.pure.push_back({a.lhs.subst(m), a.op, a.rhs.subst(m)});
  for (const auto& p : h.pts) r.pts.push_back({p.src.subst(m), p.field, p.val.subst(m)});
  for (const auto& s : h.segs) r.segs.push_back({s.block, s.head.subst(m), s.tail.subst(m)});
  return r;
}

SymbolicHeap subst(const SymbolicHeap& h, VarId x, VarId y, const SymbolPool& pool) {
  if (pool.kind(y) == VarKind::Program) {
    SymbolicHeap r = h;
    r.add_pure(Expr::var(y), RelOp::Eq, Expr::var(x));
    return normalize(r);
  }
  std::map<VarId, Expr> m;
  m.emplace(y, Expr::var(x));
  return normalize(subst_map(h, m));
}

SymbolicHeap normalize(const SymbolicHeap& h) {
  SymbolicHeap r;
  for (const auto& a : h.pure) {
    Expr l = a.lhs, rr = a.rhs;
    auto lc = l.const_value(), rc = rr.const_value();
    if (lc && l.kind() != Expr::Kind::Null && l.kind() != Expr::Kind::Nat)
      l = *lc == 0 ? Expr::null() : Expr::nat(*lc);
    if (rc && rr.kind() != Expr::Kind::Null && rr.kind() != Expr::Kind::Nat)
      rr = *rc == 0 ? Expr::null() : Expr::nat(*rc);
    if (lc && rc) {
      bool holds = false;
      switch (a.op) {
        case RelOp::Eq: holds = *lc == *rc; break;
        case RelOp::Ne: holds = *lc != *rc; break;
        case RelOp::Le: holds = *lc <= *rc; break;
        case RelOp::Ge: holds = *lc >= *rc; break;
        case RelOp::Lt: holds = *lc < *rc; break;
        case RelOp::Gt: holds = *lc > *rc; break;
      }
      if (holds) continue;  // trivially true atom carries no information
    }
    if ((a.op == RelOp::Eq || a.op == RelOp::Le || a.op == RelOp::Ge) && l == rr)
      continue;
    // Orient symmetric operators so duplicates collapse.
    if ((a.op == RelOp::Eq || a.op == RelOp::Ne) && rr < l) std::swap(l, rr);
    r.pure.push_back({l, a.op, rr});
  }
  r.pts = h.pts;
  r.segs = h.segs;
  std::sort(r.pure.begin(), r.pure.end());
  r.pure.erase(std::unique(r.pure.begin(), r.pure.end()), r.pure.end());
  std::sort(r.pts.begin(), r.pts.end());
  std::sort(r.segs.begin(), r.segs.end());
  return r;
}

std::set<VarId> reach_set(const SymbolicHeap& h, const std::set<VarId>& seeds) {
  std::set<VarId> reach = seeds;
  bool changed = true;
  auto all_in = [&reach](const Expr& e) {
    std::set<VarId> vs;
    e.collect_vars(vs);
    for (VarId v : vs)
      if (!reach.count(v)) return false;
    return true;
  };
  auto add_expr = [&](const Expr& e) {
    std::set<VarId> vs;
    e.collect_vars(vs);
    size_t before = reach.size();
    reach.insert(vs.begin(), vs.end());
    return reach.size() != before;
  };
  while (changed) {
    changed = false;
    for (const auto& p : h.pts)
      if (p.src.is_var() && reach.count(p.src.var_id()) && add_expr(p.val))
        changed = true;
    for (const auto& s : h.segs)
      if (s.head.is_var() && reach.count(s.head.var_id()) && add_expr(s.tail))
        changed = true;
    for (const auto& a : h.pure) {
      if (a.op != RelOp::Eq) continue;
      if (a.lhs.is_var() && !reach.count(a.lhs.var_id()) && all_in(a.rhs)) {
        reach.insert(a.lhs.var_id());
        changed = true;
      }
      if (a.rhs.is_var() && !reach.count(a.rhs.var_id()) && all_in(a.lhs)) {
        reach.insert(a.rhs.var_id());
        changed = true;
      }
    }
  }
  return reach;
}

SymbolicHeap restrict_to(const SymbolicHeap& h, const std::set<VarId>& seeds) {
  std::set<VarId> reach = reach_set(h, seeds);
  auto ok = [&reach](std::initializer_list<const Expr*> es) {
    for (const Expr* e : es) {
      std::set<VarId> vs;
      e->collect_vars(vs);
      for (VarId v : vs)
        if (!reach.count(v)) return false;
    }
    return true;
  };
  SymbolicHeap r;
  for (const auto& a : h.pure)
    if (ok({&a.lhs, &a.rhs})) r.pure.push_back(a);
  for (const auto& p : h.pts)
    if (ok({&p.src, &p.val})) r.pts.push_back(p);
  for (const auto& s : h.segs)
    if (ok({&s.head, &s.tail})) r.segs.push_back(s);
  return normalize(r);
}

// ---------------------------------------------------------------------------
// BlockRegistry
// ---------------------------------------------------------------------------

BlockRegistry::BlockRegistry() {
  // ls(x, e): one next-cell from head to tail.
  BlockDef ls;
  ls.formal_count = 2;
  // Field ids are interned per pool; the ls block stores a sentinel field
  // resolved lazily. To keep the registry pool-independent we instead fix
  // the convention that field interning starts with "next" == FieldId{0};
  // instantiate() and matchers resolve through the pool they are given.
  ls.cells.push_back({0, FieldId{0}, BlockDef::BExpr::formal_ref(1)});
  blocks_.push_back(std::move(ls));
}

BlockId BlockRegistry::register_block(BlockDef def) {
  for (size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i] == def) return BlockId{static_cast<uint32_t>(i)};
  blocks_.push_back(std::move(def));
  return BlockId{static_cast<uint32_t>(blocks_.size() - 1)};
}

SymbolicHeap BlockRegistry::instantiate(BlockId id, const Expr& head,
                                        const Expr& tail, SymbolPool& pool) const {
  const BlockDef& d = def(id);
  std::vector<Expr> binding(d.formal_count);
  binding[0] = head;
  binding[1] = tail;
  for (uint32_t i = 2; i < d.formal_count; ++i)
    binding[i] = Expr::var(pool.fresh_logical());
  auto bex = [&](const BlockDef::BExpr& e) {
    switch (e.kind) {
      case BlockDef::BExpr::Kind::Formal: return binding[e.formal];
      case BlockDef::BExpr::Kind::Null: return Expr::null();
      case BlockDef::BExpr::Kind::Nat: return Expr::nat(e.k);
    }
    return Expr::null();
  };
  SymbolicHeap r;
  for (const auto& c : d.cells) r.pts.push_back({binding[c.src], c.field, bex(c.val)});
  for (const auto& s : d.segs) r.segs.push_back({s.block, binding[s.head], bex(s.tail)});
  for (const auto& p : d.pures) r.pure.push_back({bex(p.lhs), p.op, bex(p.rhs)});
  return r;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render(const Expr& e, const SymbolPool& pool) {
  switch (e.kind()) {
    case Expr::Kind::Null: return "NULL";
    case Expr::Kind::Nat: return std::to_string(e.nat_value());
    case Expr::Kind::Var: return pool.name(e.var_id());
    case Expr::Kind::Unary: return "-" + render(e.lhs(), pool);
    case Expr::Kind::Binary: {
      const char* op = e.bin_op() == BinOp::Add ? " + "
                       : e.bin_op() == BinOp::Sub ? " - " : " * ";
      auto sub = [&](const Expr& s) {
        std::string t = render(s, pool);
        if (s.kind() == Expr::Kind::Binary) return "(" + t + ")";
        return t;
      };
      return sub(e.lhs()) + op + sub(e.rhs());
    }
  }
  return "?";
}

std::string render(const PureAtom& a, const SymbolPool& pool) {
  return render(a.lhs, pool) + " " + rel_op_text(a.op) + " " + render(a.rhs, pool);
}

std::string render(const SymbolicHeap& h, const SymbolPool& pool) {
  std::ostringstream os;
  if (h.pure.empty()) {
    os << "true";
  } else {
    for (size_t i = 0; i < h.pure.size(); ++i) {
      if (i) os << " /\\ ";
      os << render(h.pure[i], pool);
    }
  }
  os << " ; ";
  if (h.spatially_empty()) {
    os << "emp";
  } else {
    bool first = true;
    for (const auto& p : h.pts) {
      if (!first) os << " * ";
      first = false;
      os << render(p.src, pool) << "." << pool.field_name(p.field) << " |-> "
         << render(p.val, pool);
    }
    for (const auto& s : h.segs) {
      if (!first) os << " * ";
      first = false;
      if (s.block == kLsBlock)
        os << "ls(" << render(s.head, pool) << ", " << render(s.tail, pool) << ")";
      else
        os << "iter[" << s.block.raw << "](" << render(s.head, pool) << ", "
           << render(s.tail, pool) << ")";
    }
  }
  return os.str();
}

SymbolicHeap AlphaRenamer::apply(const SymbolicHeap& h) {
  auto visit_expr = [&](const Expr& e, auto&& self) -> void {
    switch (e.kind()) {
      case Expr::Kind::Var: {
        VarId v = e.var_id();
        if (pool_.kind(v) == VarKind::Logical && !map_.count(v))
          map_.emplace(v, Expr::var(pool_.named_logical("#a" + std::to_string(next_++))));
        break;
      }
      case Expr::Kind::Unary: self(e.lhs(), self); break;
      case Expr::Kind::Binary:
        self(e.lhs(), self);
        self(e.rhs(), self);
        break;
      default: break;
    }
  };
  // Visit in canonical order: spatial atoms first (their sources pin the
  // naming), then pure atoms.
  for (const auto& p : h.pts) {
    visit_expr(p.src, visit_expr);
    visit_expr(p.val, visit_expr);
  }
  for (const auto& s : h.segs) {
    visit_expr(s.head, visit_expr);
    visit_expr(s.tail, visit_expr);
  }
  for (const auto& a : h.pure) {
    visit_expr(a.lhs, visit_expr);
    visit_expr(a.rhs, visit_expr);
  }
  return normalize(subst_map(h, map_));
}

SymbolicHeap canonical_alpha(const SymbolicHeap& h, SymbolPool& pool) {
  AlphaRenamer r(pool);
  return r.apply(h);
}

}  // namespace abducer
