#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace abducer {

// ---------------------------------------------------------------------------
// Variables and fields
// ---------------------------------------------------------------------------

enum class VarKind : uint8_t {
  Program,  // program variable of some function
  Logical,  // existential/universal logical variable
  Anchor,   // logical variable denoting a program variable's entry value
};

struct VarId {
  uint32_t raw = UINT32_MAX;

  bool valid() const { return raw != UINT32_MAX; }
  friend bool operator==(VarId a, VarId b) { return a.raw == b.raw; }
  friend bool operator!=(VarId a, VarId b) { return a.raw != b.raw; }
  friend bool operator<(VarId a, VarId b) { return a.raw < b.raw; }
};

struct FieldId {
  uint32_t raw = UINT32_MAX;

  friend bool operator==(FieldId a, FieldId b) { return a.raw == b.raw; }
  friend bool operator!=(FieldId a, FieldId b) { return a.raw != b.raw; }
  friend bool operator<(FieldId a, FieldId b) { return a.raw < b.raw; }
};

// Interning table for variables and field names. One pool is shared by a whole
// analysis session; it only ever grows.
class SymbolPool {
 public:
  SymbolPool() { field("next"); }  // "next" is FieldId{0}, the ls link field

  VarId program_var(const std::string& name);
  // Interned under `key` (e.g. function-qualified) but displayed as `display`;
  // program variables are unique per function.
  VarId program_var(const std::string& key, const std::string& display);
  VarId anchor_of(VarId program_var);
  VarId fresh_logical();                       // l1, l2, ...
  VarId named_logical(const std::string& n);   // for tests
  FieldId field(const std::string& name);

  VarKind kind(VarId v) const { return vars_[v.raw].kind; }
  const std::string& name(VarId v) const { return vars_[v.raw].name; }
  // For an anchor, the program variable it anchors.
  VarId anchored_var(VarId anchor) const { return vars_[anchor.raw].base; }
  const std::string& field_name(FieldId f) const { return fields_[f.raw]; }
  size_t var_count() const { return vars_.size(); }

 private:
  struct VarInfo {
    VarKind kind;
    std::string name;
    VarId base;  // for anchors: the anchored program var
  };
  std::vector<VarInfo> vars_;
  std::vector<std::string> fields_;
  std::map<std::string, VarId> program_by_name_;
  std::map<std::string, VarId> logical_by_name_;
  std::map<uint32_t, VarId> anchor_by_base_;
  std::map<std::string, FieldId> field_by_name_;
  uint64_t fresh_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Expressions of the logic (Fig. "epsilon" production)
// ---------------------------------------------------------------------------

enum class RelOp : uint8_t { Eq, Ne, Le, Ge, Lt, Gt };
enum class UnOp : uint8_t { Neg };
enum class BinOp : uint8_t { Add, Sub, Mul };

RelOp negate(RelOp op);
const char* rel_op_text(RelOp op);

class Expr {
 public:
  enum class Kind : uint8_t { Null, Nat, Var, Unary, Binary };

  static Expr null();
  static Expr nat(int64_t k);
  static Expr var(VarId v);
  static Expr un(UnOp op, Expr e);
  static Expr bin(BinOp op, Expr a, Expr b);

  Kind kind() const { return kind_; }
  int64_t nat_value() const { return k_; }
  VarId var_id() const { return v_; }
  UnOp un_op() const { return un_; }
  BinOp bin_op() const { return bin_; }
  const Expr& lhs() const { return *a_; }
  const Expr& rhs() const { return *b_; }

  bool is_var() const { return kind_ == Kind::Var; }
  bool is_const() const { return kind_ == Kind::Null || kind_ == Kind::Nat; }
  // NULL evaluates to 0; a Nat carries its value.
  std::optional<int64_t> const_value() const;

  void collect_vars(std::set<VarId>& out) const;
  Expr subst(const std::map<VarId, Expr>& m) const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
  friend bool operator<(const Expr& a, const Expr& b);

 private:
  Kind kind_ = Kind::Null;
  int64_t k_ = 0;
  VarId v_;
  UnOp un_ = UnOp::Neg;
  BinOp bin_ = BinOp::Add;
  std::shared_ptr<const Expr> a_, b_;
};

// ---------------------------------------------------------------------------
// Atoms and symbolic heaps (Fig. "phi ::= Pi ; Sigma")
// ---------------------------------------------------------------------------

struct PureAtom {
  Expr lhs;
  RelOp op = RelOp::Eq;
  Expr rhs;

  friend bool operator==(const PureAtom& a, const PureAtom& b);
  friend bool operator<(const PureAtom& a, const PureAtom& b);
};

struct PointsTo {
  Expr src;  // a variable in well-formed heaps
  FieldId field;
  Expr val;

  friend bool operator==(const PointsTo& a, const PointsTo& b);
  friend bool operator<(const PointsTo& a, const PointsTo& b);
};

struct BlockId {
  uint32_t raw = UINT32_MAX;

  friend bool operator==(BlockId a, BlockId b) { return a.raw == b.raw; }
  friend bool operator!=(BlockId a, BlockId b) { return a.raw != b.raw; }
  friend bool operator<(BlockId a, BlockId b) { return a.raw < b.raw; }
};

// The canonical single-next-pointer block; ls(x, e) == Seg{kLsBlock, x, e}.
inline constexpr BlockId kLsBlock{0};

// Iterated-block segment: >= 0 chained copies of a registered block formula,
// starting at `head`, with the last copy linking to `tail`.
struct SegAtom {
  BlockId block = kLsBlock;
  Expr head;
  Expr tail;

  friend bool operator==(const SegAtom& a, const SegAtom& b);
  friend bool operator<(const SegAtom& a, const SegAtom& b);
};

struct SymbolicHeap {
  std::vector<PureAtom> pure;
  std::vector<PointsTo> pts;
  std::vector<SegAtom> segs;

  bool spatially_empty() const { return pts.empty() && segs.empty(); }
  void collect_vars(std::set<VarId>& out) const;
  std::set<VarId> vars() const;

  void add_pure(PureAtom a);
  void add_pure(Expr l, RelOp op, Expr r) { add_pure(PureAtom{l, op, r}); }

  friend bool operator==(const SymbolicHeap& a, const SymbolicHeap& b);
};

// Disjunction of symbolic heaps; nonempty by construction where used.
using Disjunction = std::vector<SymbolicHeap>;

// phi1 * phi2 : conjoin pure parts, union spatial parts.
SymbolicHeap star(const SymbolicHeap& a, const SymbolicHeap& b);

// Substitution over whole heaps.
SymbolicHeap subst_map(const SymbolicHeap& h, const std::map<VarId, Expr>& m);

// The paper's P[x/y]: occurrences of logical y replaced by x; for a program
// variable y the equality y = x is conjoined instead.
SymbolicHeap subst(const SymbolicHeap& h, VarId x, VarId y,
                   const SymbolPool& pool);

// Deduplicate, drop trivial atoms, constant-fold, sort into canonical order.
SymbolicHeap normalize(const SymbolicHeap& h);

// Variables reachable from seeds through equalities and spatial atoms
// (the four closure rules of the reachability relation).
std::set<VarId> reach_set(const SymbolicHeap& h, const std::set<VarId>& seeds);

// Subformula related to a variable set: atoms whose variables all lie in
// reach_set(h, seeds). Constants never block membership.
SymbolicHeap restrict_to(const SymbolicHeap& h, const std::set<VarId>& seeds);

// ---------------------------------------------------------------------------
// Block registry
// ---------------------------------------------------------------------------

// A block formula over a small formal namespace: formal 0 is the head, formal
// 1 the tail link, formals >= 2 are per-repetition existentials.
struct BlockDef {
  struct BExpr {
    enum class Kind : uint8_t { Formal, Null, Nat } kind = Kind::Null;
    uint32_t formal = 0;
    int64_t k = 0;

    static BExpr formal_ref(uint32_t i) { return {Kind::Formal, i, 0}; }
    static BExpr null() { return {Kind::Null, 0, 0}; }
    static BExpr nat(int64_t k) { return {Kind::Nat, 0, k}; }
    friend bool operator==(const BExpr&, const BExpr&) = default;
  };
  struct BCell {
    uint32_t src;  // formal index
    FieldId field;
    BExpr val;
    friend bool operator==(const BCell&, const BCell&) = default;
  };
  struct BSeg {
    BlockId block;
    uint32_t head;  // formal index
    BExpr tail;
    friend bool operator==(const BSeg&, const BSeg&) = default;
  };
  struct BPure {
    BExpr lhs;
    RelOp op;
    BExpr rhs;
    friend bool operator==(const BPure&, const BPure&) = default;
  };

  uint32_t formal_count = 2;
  std::vector<BCell> cells;
  std::vector<BSeg> segs;
  std::vector<BPure> pures;

  friend bool operator==(const BlockDef&, const BlockDef&) = default;
};

class BlockRegistry {
 public:
  BlockRegistry();  // pre-registers the ls block as id 0

  BlockId register_block(BlockDef def);  // structural dedup
  const BlockDef& def(BlockId id) const { return blocks_[id.raw]; }
  size_t size() const { return blocks_.size(); }

  // Instantiate one block copy: head bound to `head`, tail to `tail`,
  // internals to fresh logical variables. Returns the copy as a heap.
  SymbolicHeap instantiate(BlockId id, const Expr& head, const Expr& tail,
                           SymbolPool& pool) const;

 private:
  std::vector<BlockDef> blocks_;
};

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render(const Expr& e, const SymbolPool& pool);
std::string render(const PureAtom& a, const SymbolPool& pool);
std::string render(const SymbolicHeap& h, const SymbolPool& pool);

// Renumber the logical (non-anchor) variables of a heap in first-occurrence
// order; used for stable golden comparisons and output.
SymbolicHeap canonical_alpha(const SymbolicHeap& h, SymbolPool& pool);

// Same renumbering shared across several heaps (a contract's pre and posts
// share their logical variables).
class AlphaRenamer {
 public:
  explicit AlphaRenamer(SymbolPool& pool) : pool_(pool) {}
  SymbolicHeap apply(const SymbolicHeap& h);

 private:
  SymbolPool& pool_;
  std::map<VarId, Expr> map_;
  uint64_t next_ = 0;
};

}  // namespace abducer
