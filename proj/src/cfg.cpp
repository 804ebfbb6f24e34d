#include "abducer/cfg.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

namespace abducer {

Expr CondOperand::to_expr() const {
  switch (kind) {
    case Kind::Var: return Expr::var(v);
    case Kind::Null: return Expr::null();
    case Kind::Nat: return Expr::nat(k);
  }
  return Expr::null();
}

std::set<VarId> Stmt::writes(VarId return_slot) const {
  switch (kind) {
    case Kind::Assign:
    case Kind::Load:
    case Kind::Call: return {dst};
    case Kind::Return: return return_slot.valid() ? std::set<VarId>{return_slot}
                                                  : std::set<VarId>{};
    case Kind::LoopCall: return {outs.begin(), outs.end()};
    default: return {};
  }
}

std::set<VarId> Stmt::reads() const {
  std::set<VarId> r;
  auto op_var = [&r](const CondOperand& o) {
    if (o.kind == CondOperand::Kind::Var) r.insert(o.v);
  };
  switch (kind) {
    case Kind::Assign:
      if (expr.kind == FlatExpr::Kind::Var) r.insert(expr.v);
      if (expr.kind == FlatExpr::Kind::Un) r.insert(expr.a);
      if (expr.kind == FlatExpr::Kind::Bin) {
        r.insert(expr.a);
        r.insert(expr.b);
      }
      break;
    case Kind::Load: r.insert(src); break;
    case Kind::Store:
      r.insert(dst);
      r.insert(src);
      break;
    case Kind::Return: r.insert(src); break;
    case Kind::Assume:
    case Kind::Assert:
      op_var(cond.lhs);
      op_var(cond.rhs);
      break;
    case Kind::Call:
    case Kind::LoopCall: r.insert(args.begin(), args.end()); break;
  }
  return r;
}

std::vector<const Edge*> ControlFlowGraph::out_edges(Loc v) const {
  std::vector<const Edge*> r;
  for (const auto& e : edges)
    if (e.from == v) r.push_back(&e);
  return r;
}

const LoweredFunction* Program::find(const std::string& name) const {
  auto it = index_by_name.find(name);
  return it == index_by_name.end() ? nullptr : &functions[it->second];
}

std::set<VarId> changed_vars(const std::vector<Edge>& edges, VarId return_slot) {
  std::set<VarId> r;
  for (const auto& e : edges) {
    auto w = e.stmt.writes(return_slot);
    r.insert(w.begin(), w.end());
  }
  return r;
}

std::set<VarId> changed_vars(const ControlFlowGraph& cfg, VarId return_slot) {
  return changed_vars(cfg.edges, return_slot);
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

namespace {

struct LowerFail {
  LowerError err;
};

// Statement list in flattened form, with structural If/While regions intact.
struct RStmt;
using RStmtPtr = std::shared_ptr<RStmt>;

struct RStmt {
  enum class Kind : uint8_t { Plain, If, While };
  Kind kind = Kind::Plain;
  Stmt stmt;                       // Plain
  std::vector<CondAtom> cond;      // If/While (conjunction)
  bool cond_nondet = false;        // If only
  std::vector<RStmtPtr> then_body;
  std::vector<RStmtPtr> else_body;
  int line = 0;
};

class Lowering {
 public:
  Lowering(const SourceProgram& src, SymbolPool& pool) : src_(src), pool_(pool) {}

  Program run() {
    Program p;
    for (const auto& f : src_.functions) {
      fn_name_ = f.name;
      temp_counter_ = 0;
      loop_counter_ = 0;
      std::vector<RStmtPtr> flat;
      for (const auto& s : f.body) flatten_stmt(*s, flat);
      std::vector<VarId> params;
      for (const auto& pn : f.params) params.push_back(pvar(pn));
      build_function(f.name, params, flat, /*is_loop=*/false, p);
    }
    finalize(p);
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, int line) {
    throw LowerFail{{msg, line}};
  }

  VarId pvar(const std::string& n) { return pool_.program_var(fn_name_ + "::" + n, n); }

  VarId fresh_temp() {
    return pvar("$t" + std::to_string(temp_counter_++));
  }

  // --- Expression flattening -------------------------------------------------

  // Emits statements computing `e` and returns the variable holding the value.
  VarId flatten_to_var(const SrcExpr& e, std::vector<RStmtPtr>& out, int line) {
    if (e.kind == SrcExpr::Kind::Var) return pvar(e.name);
    VarId t = fresh_temp();
    emit_assign(t, e, out, line);
    return t;
  }

  void push_plain(Stmt s, std::vector<RStmtPtr>& out, int line) {
    auto r = std::make_shared<RStmt>();
    r->kind = RStmt::Kind::Plain;
    r->stmt = std::move(s);
    r->line = line;
    out.push_back(std::move(r));
  }

  void emit_assign(VarId dst, const SrcExpr& e, std::vector<RStmtPtr>& out, int line) {
    Stmt s;
    s.dst = dst;
    switch (e.kind) {
      case SrcExpr::Kind::Null:
        s.kind = Stmt::Kind::Assign;
        s.expr = {FlatExpr::Kind::Null, 0, {}, UnOp::Neg, BinOp::Add, {}, {}};
        break;
      case SrcExpr::Kind::Nat:
        s.kind = Stmt::Kind::Assign;
        s.expr.kind = FlatExpr::Kind::Nat;
        s.expr.k = e.k;
        break;
      case SrcExpr::Kind::Var:
        s.kind = Stmt::Kind::Assign;
        s.expr.kind = FlatExpr::Kind::Var;
        s.expr.v = pvar(e.name);
        break;
      case SrcExpr::Kind::Nondet:
        s.kind = Stmt::Kind::Assign;
        s.expr.kind = FlatExpr::Kind::Nondet;
        break;
      case SrcExpr::Kind::Load:
        s.kind = Stmt::Kind::Load;
        s.src = pvar(e.name);
        s.field = pool_.field(e.field);
        break;
      case SrcExpr::Kind::Unary: {
        VarId a = flatten_to_var(*e.a, out, line);
        s.kind = Stmt::Kind::Assign;
        s.expr.kind = FlatExpr::Kind::Un;
        s.expr.un = e.un;
        s.expr.a = a;
        break;
      }
      case SrcExpr::Kind::Binary: {
        VarId a = flatten_to_var(*e.a, out, line);
        VarId b = flatten_to_var(*e.b, out, line);
        s.kind = Stmt::Kind::Assign;
        s.expr.kind = FlatExpr::Kind::Bin;
        s.expr.bin = e.bin;
        s.expr.a = a;
        s.expr.b = b;
        break;
      }
    }
    push_plain(std::move(s), out, line);
  }

  CondOperand lower_operand(const SrcExpr& e) {
    switch (e.kind) {
      case SrcExpr::Kind::Null: return CondOperand::null();
      case SrcExpr::Kind::Nat: return CondOperand::nat(e.k);
      case SrcExpr::Kind::Var: return CondOperand::var(pvar(e.name));
      default: break;
    }
    // The parser restricts condition operands already.
    return CondOperand::null();
  }

  std::vector<CondAtom> lower_cond(const SrcCond& c) {
    std::vector<CondAtom> atoms;
    for (const auto& a : c.atoms)
      atoms.push_back({lower_operand(*a.lhs), a.op, lower_operand(*a.rhs)});
    return atoms;
  }

  void flatten_stmt(const SrcStmt& s, std::vector<RStmtPtr>& out) {
    switch (s.kind) {
      case SrcStmt::Kind::Assign:
        emit_assign(pvar(s.name), *s.expr, out, s.line);
        break;
      case SrcStmt::Kind::Store: {
        VarId v = flatten_to_var(*s.expr, out, s.line);
        Stmt st;
        st.kind = Stmt::Kind::Store;
        st.dst = pvar(s.name);
        st.field = pool_.field(s.field);
        st.src = v;
        push_plain(std::move(st), out, s.line);
        break;
      }
      case SrcStmt::Kind::Return: {
        VarId v = flatten_to_var(*s.expr, out, s.line);
        Stmt st;
        st.kind = Stmt::Kind::Return;
        st.src = v;
        push_plain(std::move(st), out, s.line);
        break;
      }
      case SrcStmt::Kind::Assume:
      case SrcStmt::Kind::Assert: {
        Stmt st;
        st.kind = s.kind == SrcStmt::Kind::Assume ? Stmt::Kind::Assume : Stmt::Kind::Assert;
        st.cond = lower_cond(s.cond)[0];
        push_plain(std::move(st), out, s.line);
        break;
      }
      case SrcStmt::Kind::Call: {
        Stmt st;
        st.kind = Stmt::Kind::Call;
        st.dst = pvar(s.name);
        st.callee = s.callee;
        for (const auto& a : s.args) st.args.push_back(pvar(a));
        push_plain(std::move(st), out, s.line);
        break;
      }
      case SrcStmt::Kind::If: {
        auto r = std::make_shared<RStmt>();
        r->kind = RStmt::Kind::If;
        r->line = s.line;
        if (s.cond.nondet) {
          // if (?) desugars to a fresh nondeterministic value tested != 0.
          VarId t = fresh_temp();
          Stmt a;
          a.kind = Stmt::Kind::Assign;
          a.dst = t;
          a.expr.kind = FlatExpr::Kind::Nondet;
          push_plain(std::move(a), out, s.line);
          r->cond.push_back({CondOperand::var(t), RelOp::Ne, CondOperand::nat(0)});
        } else {
          r->cond = lower_cond(s.cond);
        }
        for (const auto& t : s.then_body) flatten_stmt(*t, r->then_body);
        for (const auto& t : s.else_body) flatten_stmt(*t, r->else_body);
        out.push_back(std::move(r));
        break;
      }
      case SrcStmt::Kind::While: {
        auto r = std::make_shared<RStmt>();
        r->kind = RStmt::Kind::While;
        r->line = s.line;
        r->cond = lower_cond(s.cond);
        for (const auto& t : s.then_body) flatten_stmt(*t, r->then_body);
        out.push_back(std::move(r));
        break;
      }
    }
  }

  // --- CFG construction ------------------------------------------------------

  struct Builder {
    std::vector<Edge> edges;
    Loc next = 0;
    Loc fresh() { return next++; }
  };

  // Emits `stmts` starting at `cur`; returns the location control reaches
  // afterwards, or nullopt if the list ended with a return.
  std::optional<Loc> emit_list(const std::vector<RStmtPtr>& stmts, Loc cur,
                               Builder& b, Loc exit, Program& prog) {
    for (const auto& rs : stmts) {
      switch (rs->kind) {
        case RStmt::Kind::Plain: {
          Loc nxt = rs->stmt.kind == Stmt::Kind::Return ? exit : b.fresh();
          b.edges.push_back({cur, rs->stmt, nxt});
          if (rs->stmt.kind == Stmt::Kind::Return) return std::nullopt;
          cur = nxt;
          break;
        }
        case RStmt::Kind::If: {
          Loc join = b.fresh();
          // Conjunction cascade: each atom tests at its own vertex.
          Loc t_entry = cur;
          Loc else_entry = b.fresh();
          for (size_t i = 0; i < rs->cond.size(); ++i) {
            Loc nxt = b.fresh();
            Stmt yes;
            yes.kind = Stmt::Kind::Assume;
            yes.cond = rs->cond[i];
            Stmt no;
            no.kind = Stmt::Kind::Assume;
            no.cond = rs->cond[i].negated();
            b.edges.push_back({t_entry, yes, nxt});
            b.edges.push_back({t_entry, no, else_entry});
            t_entry = nxt;
          }
          auto t_end = emit_list(rs->then_body, t_entry, b, exit, prog);
          if (t_end) {
            Stmt skip;  // structural no-op realized as assume(0 == 0)
            skip.kind = Stmt::Kind::Assume;
            skip.cond = {CondOperand::nat(0), RelOp::Eq, CondOperand::nat(0)};
            b.edges.push_back({*t_end, skip, join});
          }
          auto e_end = emit_list(rs->else_body, else_entry, b, exit, prog);
          if (e_end) {
            Stmt skip;
            skip.kind = Stmt::Kind::Assume;
            skip.cond = {CondOperand::nat(0), RelOp::Eq, CondOperand::nat(0)};
            b.edges.push_back({*e_end, skip, join});
          }
          if (!t_end && !e_end) return std::nullopt;
          cur = join;
          break;
        }
        case RStmt::Kind::While: {
          // Extract the loop into its own function; the call site rebinds the
          // loop's outputs (trimmed to live variables in finalize()).
          std::string loop_name = fn_name_ + "$loop" + std::to_string(loop_counter_++);
          LoweredFunction lf = build_loop_function(loop_name, *rs, prog);
          Stmt call;
          call.kind = Stmt::Kind::LoopCall;
          call.callee = loop_name;
          call.args = lf.params;
          call.outs = lf.outputs;  // provisional: all written vars
          prog.index_by_name.emplace(loop_name, prog.functions.size());
          prog.functions.push_back(std::move(lf));
          Loc nxt = b.fresh();
          b.edges.push_back({cur, call, nxt});
          cur = nxt;
          break;
        }
      }
    }
    return cur;
  }

  LoweredFunction build_loop_function(const std::string& name, const RStmt& loop,
                                      Program& prog) {
    // The loop function's CFG: header = entry; a cascade of assume edges for
    // the condition conjuncts entering the body, each with a sibling assume
    // of the negation leaving to exit; the body returns to the header.
    Builder b;
    Loc header = b.fresh();
    Loc exit_placeholder = UINT32_MAX;  // patched once all ids are allocated
    Loc cur = header;
    for (size_t i = 0; i < loop.cond.size(); ++i) {
      Loc nxt = b.fresh();
      Stmt yes;
      yes.kind = Stmt::Kind::Assume;
      yes.cond = loop.cond[i];
      Stmt no;
      no.kind = Stmt::Kind::Assume;
      no.cond = loop.cond[i].negated();
      b.edges.push_back({cur, yes, nxt});
      b.edges.push_back({cur, no, exit_placeholder});
      cur = nxt;
    }
    auto end = emit_list(loop.then_body, cur, b, exit_placeholder, prog);
    if (end) {
      Stmt skip;
      skip.kind = Stmt::Kind::Assume;
      skip.cond = {CondOperand::nat(0), RelOp::Eq, CondOperand::nat(0)};
      b.edges.push_back({*end, skip, header});  // back edge to the header
    }

    LoweredFunction lf;
    lf.name = name;
    lf.is_loop = true;
    lf.cfg.entry = 0;
    lf.cfg.exit = b.next;  // exit gets the highest id
    lf.cfg.vertex_count = b.next + 1;
    for (auto& e : b.edges) {
      if (e.to == exit_placeholder) e.to = lf.cfg.exit;
      lf.cfg.edges.push_back(std::move(e));
    }
    std::stable_sort(lf.cfg.edges.begin(), lf.cfg.edges.end(),
                     [](const Edge& x, const Edge& y) { return x.from < y.from; });

    // Parameters: variables live at the loop header (read before written on
    // some path through condition and body, iterating the back edge).
    lf.params = live_at_header(lf.cfg);
    lf.outputs = to_sorted(changed_vars(lf.cfg, VarId{}));  // trimmed later
    return lf;
  }

  static std::vector<VarId> to_sorted(const std::set<VarId>& s) {
    return {s.begin(), s.end()};
  }

  // Backward liveness over a CFG; returns live-in at entry.
  std::vector<VarId> live_at_header(const ControlFlowGraph& cfg) {
    auto live_in = liveness(cfg, VarId{});
    return to_sorted(live_in[cfg.entry]);
  }

  // live_in per location. LoopCall def = outs as currently recorded; pass
  // empty `outs` statements conservatively define nothing extra.
  static std::map<Loc, std::set<VarId>> liveness(const ControlFlowGraph& cfg,
                                                 VarId return_slot) {
    std::map<Loc, std::set<VarId>> live;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = cfg.edges.rbegin(); it != cfg.edges.rend(); ++it) {
        const Edge& e = *it;
        std::set<VarId> out = live[e.to];
        for (VarId w : e.stmt.writes(return_slot)) out.erase(w);
        for (VarId r : e.stmt.reads()) out.insert(r);
        std::set<VarId>& in = live[e.from];
        size_t before = in.size();
        in.insert(out.begin(), out.end());
        if (in.size() != before) changed = true;
      }
    }
    return live;
  }

  void build_function(const std::string& name, const std::vector<VarId>& params,
                      const std::vector<RStmtPtr>& body, bool is_loop, Program& prog) {
    Builder b;
    Loc entry = b.fresh();
    Loc exit_placeholder = UINT32_MAX;
    auto end = emit_list(body, entry, b, exit_placeholder, prog);
    VarId ret = pool_.program_var(name + "::return_" + name, "return_" + name);
    if (end) {
      // Implicit `return 0` for paths that fall off the end.
      VarId t = fresh_temp();
      Stmt a;
      a.kind = Stmt::Kind::Assign;
      a.dst = t;
      a.expr.kind = FlatExpr::Kind::Nat;
      a.expr.k = 0;
      Loc mid = b.fresh();
      b.edges.push_back({*end, a, mid});
      Stmt r;
      r.kind = Stmt::Kind::Return;
      r.src = t;
      b.edges.push_back({mid, r, exit_placeholder});
    }
    LoweredFunction lf;
    lf.name = name;
    lf.params = params;
    lf.is_loop = is_loop;
    lf.return_slot = ret;
    lf.outputs = {ret};
    lf.cfg.entry = entry;
    lf.cfg.exit = b.next;
    lf.cfg.vertex_count = b.next + 1;
    for (auto& e : b.edges) {
      if (e.to == exit_placeholder) e.to = lf.cfg.exit;
      lf.cfg.edges.push_back(std::move(e));
    }
    std::stable_sort(lf.cfg.edges.begin(), lf.cfg.edges.end(),
                     [](const Edge& x, const Edge& y) { return x.from < y.from; });
    prog.index_by_name.emplace(name, prog.functions.size());
    prog.functions.push_back(std::move(lf));
  }

  // Post passes: trim loop outputs to live variables, validate, order calls.
  void finalize(Program& p) {
    // Trim loop-call outputs: a rebound variable matters only if live after
    // the call; liveness is computed with loop calls defining nothing, which
    // over-approximates the live sets and keeps the trim sound.
    for (auto& f : p.functions) {
      ControlFlowGraph relaxed = f.cfg;
      for (auto& e : relaxed.edges)
        if (e.stmt.kind == Stmt::Kind::LoopCall) e.stmt.outs.clear();
      auto live = liveness(relaxed, f.return_slot);
      for (auto& e : f.cfg.edges) {
        if (e.stmt.kind != Stmt::Kind::LoopCall) continue;
        std::set<VarId> after = live[e.to];
        std::vector<VarId> kept;
        for (VarId v : e.stmt.outs)
          if (after.count(v)) kept.push_back(v);
        e.stmt.outs = kept;
        auto it = p.index_by_name.find(e.stmt.callee);
        assert(it != p.index_by_name.end());
        p.functions[it->second].outputs = kept;
      }
    }

    validate_defined_before_use(p);
    order_calls(p);
  }

  void validate_defined_before_use(const Program& p) {
    for (const auto& f : p.functions) {
      // Forward may-be-undefined analysis; params start defined.
      std::map<Loc, std::set<VarId>> defined;
      std::set<VarId> all = changed_vars(f.cfg, f.return_slot);
      for (VarId v : f.params) all.insert(v);
      defined[f.cfg.entry] = {f.params.begin(), f.params.end()};
      std::map<Loc, bool> seen;
      seen[f.cfg.entry] = true;
      bool changed = true;
      while (changed) {
        changed = false;
        for (const auto& e : f.cfg.edges) {
          if (!seen.count(e.from)) continue;
          std::set<VarId> d = defined[e.from];
          for (VarId r : e.stmt.reads())
            if (!d.count(r))
              fail("variable '" + pool_.name(r) + "' may be used before assignment in " +
                       f.name,
                   0);
          auto w = e.stmt.writes(f.return_slot);
          d.insert(w.begin(), w.end());
          if (!seen.count(e.to)) {
            seen[e.to] = true;
            defined[e.to] = d;
            changed = true;
          } else {
            // Intersection: defined only if defined along every path.
            std::set<VarId> inter;
            for (VarId v : defined[e.to])
              if (d.count(v)) inter.insert(v);
            if (inter != defined[e.to]) {
              defined[e.to] = inter;
              changed = true;
            }
          }
        }
      }
    }
  }

  void order_calls(Program& p) {
    // Topological order of the call tree; leaves first. Rejects recursion.
    size_t n = p.functions.size();
    std::vector<std::set<size_t>> callees(n);
    for (size_t i = 0; i < n; ++i) {
      for (const auto& e : p.functions[i].cfg.edges) {
        if (e.stmt.kind != Stmt::Kind::Call && e.stmt.kind != Stmt::Kind::LoopCall)
          continue;
        auto it = p.index_by_name.find(e.stmt.callee);
        if (it == p.index_by_name.end())
          fail("call to unknown function '" + e.stmt.callee + "'", 0);
        callees[i].insert(it->second);
      }
    }
    std::vector<int> state(n, 0);  // 0 unvisited, 1 in progress, 2 done
    std::vector<size_t> order;
    std::function<void(size_t)> visit = [&](size_t i) {
      if (state[i] == 2) return;
      if (state[i] == 1) fail("recursion detected involving '" + p.functions[i].name + "'", 0);
      state[i] = 1;
      for (size_t c : callees[i]) visit(c);
      state[i] = 2;
      order.push_back(i);
    };
    for (size_t i = 0; i < n; ++i) visit(i);
    p.call_order = order;
  }

  const SourceProgram& src_;
  SymbolPool& pool_;
  std::string fn_name_;
  int temp_counter_ = 0;
  int loop_counter_ = 0;
};

}  // namespace

LowerResult lower(const SourceProgram& src, SymbolPool& pool) {
  LowerResult r;
  try {
    Lowering l(src, pool);
    r.program = l.run();
  } catch (const LowerFail& f) {
    r.error = f.err;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

static std::string op_text(const CondOperand& o, const SymbolPool& pool) {
  switch (o.kind) {
    case CondOperand::Kind::Var: return pool.name(o.v);
    case CondOperand::Kind::Null: return "NULL";
    case CondOperand::Kind::Nat: return std::to_string(o.k);
  }
  return "?";
}

std::string render(const Stmt& s, const SymbolPool& pool) {
  std::ostringstream os;
  switch (s.kind) {
    case Stmt::Kind::Assign:
      os << pool.name(s.dst) << " = ";
      switch (s.expr.kind) {
        case FlatExpr::Kind::Null: os << "NULL"; break;
        case FlatExpr::Kind::Nat: os << s.expr.k; break;
        case FlatExpr::Kind::Var: os << pool.name(s.expr.v); break;
        case FlatExpr::Kind::Nondet: os << "?"; break;
        case FlatExpr::Kind::Un: os << "-" << pool.name(s.expr.a); break;
        case FlatExpr::Kind::Bin:
          os << pool.name(s.expr.a)
             << (s.expr.bin == BinOp::Add ? " + " : s.expr.bin == BinOp::Sub ? " - " : " * ")
             << pool.name(s.expr.b);
          break;
      }
      break;
    case Stmt::Kind::Load:
      os << pool.name(s.dst) << " = *" << pool.name(s.src) << "."
         << pool.field_name(s.field);
      break;
    case Stmt::Kind::Store:
      os << "*" << pool.name(s.dst) << "." << pool.field_name(s.field) << " = "
         << pool.name(s.src);
      break;
    case Stmt::Kind::Return: os << "return " << pool.name(s.src); break;
    case Stmt::Kind::Assume:
    case Stmt::Kind::Assert:
      os << (s.kind == Stmt::Kind::Assume ? "assume(" : "assert(")
         << op_text(s.cond.lhs, pool) << " " << rel_op_text(s.cond.op) << " "
         << op_text(s.cond.rhs, pool) << ")";
      break;
    case Stmt::Kind::Call:
    case Stmt::Kind::LoopCall: {
      if (s.kind == Stmt::Kind::Call) os << pool.name(s.dst) << " = ";
      os << s.callee << "(";
      for (size_t i = 0; i < s.args.size(); ++i) {
        if (i) os << ", ";
        os << pool.name(s.args[i]);
      }
      os << ")";
      if (s.kind == Stmt::Kind::LoopCall) {
        os << " outs {";
        for (size_t i = 0; i < s.outs.size(); ++i) {
          if (i) os << ", ";
          os << pool.name(s.outs[i]);
        }
        os << "}";
      }
      break;
    }
  }
  return os.str();
}

std::string dump_cfg(const LoweredFunction& f, const SymbolPool& pool) {
  std::ostringstream os;
  os << (f.is_loop ? "loop " : "fn ") << f.name << "(";
  for (size_t i = 0; i < f.params.size(); ++i) {
    if (i) os << ", ";
    os << pool.name(f.params[i]);
  }
  os << ")";
  if (f.is_loop) {
    os << " outs {";
    for (size_t i = 0; i < f.outputs.size(); ++i) {
      if (i) os << ", ";
      os << pool.name(f.outputs[i]);
    }
    os << "}";
  }
  os << " entry=" << f.cfg.entry << " exit=" << f.cfg.exit << "\n";
  for (const auto& e : f.cfg.edges)
    os << "  " << e.from << " -> " << e.to << " : " << render(e.stmt, pool) << "\n";
  return os.str();
}

}  // namespace abducer
