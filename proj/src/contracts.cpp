#include "abducer/contracts.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "abducer/subtract.hpp"

namespace abducer {

namespace {

Expr operand_expr(const CondOperand& o) { return o.to_expr(); }

}  // namespace

StepContract atomic_contract(const Stmt& st, VarId return_slot, SymbolPool& pool) {
  StepContract sc;
  auto fresh = [&]() {
    VarId v = pool.fresh_logical();
    sc.flexible.insert(v);
    return v;
  };
  switch (st.kind) {
    case Stmt::Kind::Assign: {
      sc.writes = {st.dst};
      SymbolicHeap post;
      switch (st.expr.kind) {
        case FlatExpr::Kind::Null:
          post.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::null());
          break;
        case FlatExpr::Kind::Nat:
          post.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::nat(st.expr.k));
          break;
        case FlatExpr::Kind::Var: {
          VarId v = fresh();
          sc.demand.add_pure(Expr::var(st.expr.v), RelOp::Eq, Expr::var(v));
          if (st.expr.v != st.dst)
            post.add_pure(Expr::var(st.expr.v), RelOp::Eq, Expr::var(v));
          post.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::var(v));
          break;
        }
        case FlatExpr::Kind::Nondet: {
          VarId v = fresh();
          post.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::var(v));
          break;
        }
        case FlatExpr::Kind::Un: {
          VarId v = fresh();
          sc.demand.add_pure(Expr::var(st.expr.a), RelOp::Eq, Expr::var(v));
          if (st.expr.a != st.dst)
            post.add_pure(Expr::var(st.expr.a), RelOp::Eq, Expr::var(v));
          post.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::un(st.expr.un, Expr::var(v)));
          break;
        }
        case FlatExpr::Kind::Bin: {
          VarId a = fresh();
          VarId b = fresh();
          sc.demand.add_pure(Expr::var(st.expr.a), RelOp::Eq, Expr::var(a));
          sc.demand.add_pure(Expr::var(st.expr.b), RelOp::Eq, Expr::var(b));
          if (st.expr.a != st.dst)
            post.add_pure(Expr::var(st.expr.a), RelOp::Eq, Expr::var(a));
          if (st.expr.b != st.dst)
            post.add_pure(Expr::var(st.expr.b), RelOp::Eq, Expr::var(b));
          post.add_pure(Expr::var(st.dst), RelOp::Eq,
                        Expr::bin(st.expr.bin, Expr::var(a), Expr::var(b)));
          break;
        }
      }
      sc.effects.push_back(normalize(post));
      break;
    }
    case Stmt::Kind::Load: {
      sc.writes = {st.dst};
      VarId base = fresh();
      VarId val = fresh();
      sc.demand.add_pure(Expr::var(st.src), RelOp::Eq, Expr::var(base));
      sc.demand.pts.push_back({Expr::var(base), st.field, Expr::var(val)});
      SymbolicHeap post;
      if (st.src != st.dst)
        post.add_pure(Expr::var(st.src), RelOp::Eq, Expr::var(base));
      post.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::var(val));
      post.pts.push_back({Expr::var(base), st.field, Expr::var(val)});
      sc.effects.push_back(normalize(post));
      break;
    }
    case Stmt::Kind::Store: {
      VarId base = fresh();
      VarId val = fresh();
      VarId old = fresh();
      sc.demand.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::var(base));
      sc.demand.add_pure(Expr::var(st.src), RelOp::Eq, Expr::var(val));
      sc.demand.pts.push_back({Expr::var(base), st.field, Expr::var(old)});
      SymbolicHeap post;
      post.add_pure(Expr::var(st.dst), RelOp::Eq, Expr::var(base));
      post.add_pure(Expr::var(st.src), RelOp::Eq, Expr::var(val));
      post.pts.push_back({Expr::var(base), st.field, Expr::var(val)});
      sc.effects.push_back(normalize(post));
      break;
    }
    case Stmt::Kind::Return: {
      sc.writes = {return_slot};
      VarId v = fresh();
      sc.demand.add_pure(Expr::var(st.src), RelOp::Eq, Expr::var(v));
      SymbolicHeap post;
      post.add_pure(Expr::var(st.src), RelOp::Eq, Expr::var(v));
      post.add_pure(Expr::var(return_slot), RelOp::Eq, Expr::var(v));
      sc.effects.push_back(normalize(post));
      break;
    }
    case Stmt::Kind::Assume:
    case Stmt::Kind::Assert: {
      auto bind_operand = [&](const CondOperand& o, SymbolicHeap& demand,
                              SymbolicHeap& post) -> Expr {
        if (o.kind != CondOperand::Kind::Var) return operand_expr(o);
        VarId v = fresh();
        demand.add_pure(Expr::var(o.v), RelOp::Eq, Expr::var(v));
        post.add_pure(Expr::var(o.v), RelOp::Eq, Expr::var(v));
        return Expr::var(v);
      };
      SymbolicHeap post;
      Expr l = bind_operand(st.cond.lhs, sc.demand, post);
      Expr r = bind_operand(st.cond.rhs, sc.demand, post);
      if (st.kind == Stmt::Kind::Assert) sc.demand.add_pure(l, st.cond.op, r);
      post.add_pure(l, st.cond.op, r);
      sc.effects.push_back(normalize(post));
      break;
    }
    case Stmt::Kind::Call:
    case Stmt::Kind::LoopCall:
      assert(false && "calls take function contracts, not atomic ones");
      break;
  }
  sc.demand = normalize(sc.demand);
  return sc;
}

std::optional<Expr> binder_of(const SymbolicHeap& h, VarId v) {
  for (const auto& a : h.pure) {
    if (a.op != RelOp::Eq) continue;
    if (a.lhs.is_var() && a.lhs.var_id() == v) return a.rhs;
    if (a.rhs.is_var() && a.rhs.var_id() == v) return a.lhs;
  }
  return std::nullopt;
}

SymbolicHeap drop_binders(const SymbolicHeap& h, const std::set<VarId>& vars) {
  SymbolicHeap r = h;
  r.pure.erase(std::remove_if(r.pure.begin(), r.pure.end(),
                              [&](const PureAtom& a) {
                                if (a.op != RelOp::Eq) return false;
                                if (a.lhs.is_var() && vars.count(a.lhs.var_id()))
                                  return true;
                                return a.rhs.is_var() && vars.count(a.rhs.var_id());
                              }),
               r.pure.end());
  return r;
}

std::optional<StepContract> instantiate_call(const Stmt& call,
                                             const LoweredFunction& callee,
                                             const Contract& c, const SymbolicHeap& q,
                                             SymbolPool& pool) {
  assert(call.args.size() == callee.params.size());
  Congruence cg(q, pool);
  std::map<VarId, Expr> sigma;
  // Callee anchors become the caller-side argument values.
  for (size_t i = 0; i < callee.params.size(); ++i) {
    VarId anchor = pool.anchor_of(callee.params[i]);
    Expr val = cg.repr_expr(Expr::var(call.args[i]));
    std::set<VarId> vs;
    val.collect_vars(vs);
    for (VarId v : vs)
      if (pool.kind(v) == VarKind::Program) return std::nullopt;
    sigma.emplace(anchor, val);
  }
  StepContract sc;
  // Outputs rebound at the call site.
  std::vector<std::pair<VarId, VarId>> outs;  // (caller var, callee var)
  if (call.kind == Stmt::Kind::Call) {
    outs.emplace_back(call.dst, callee.return_slot);
    sc.writes = {call.dst};
  } else {
    for (VarId o : call.outs) {
      outs.emplace_back(o, o);
      sc.writes.insert(o);
    }
  }
  // Freshen every remaining contract variable.
  std::set<VarId> cvars = c.pre.vars();
  for (const auto& d : c.post) {
    auto vs = d.vars();
    cvars.insert(vs.begin(), vs.end());
  }
  for (VarId v : cvars) {
    if (sigma.count(v)) continue;
    if (pool.kind(v) == VarKind::Program) continue;  // handled per-disjunct below
    VarId f = pool.fresh_logical();
    sigma.emplace(v, Expr::var(f));
    sc.flexible.insert(f);
  }
  sc.demand = normalize(subst_map(c.pre, sigma));
  for (const auto& d : c.post) {
    // Read output values from the disjunct's binders, then drop every callee
    // program-variable binder; other facts carry over instantiated.
    SymbolicHeap eff;
    bool feasible = true;
    std::set<VarId> callee_programs;
    for (VarId v : d.vars())
      if (pool.kind(v) == VarKind::Program) callee_programs.insert(v);
    SymbolicHeap body = drop_binders(d, callee_programs);
    eff = subst_map(body, sigma);
    for (auto& [caller_var, callee_var] : outs) {
      auto val = binder_of(d, callee_var);
      Expr bound;
      if (val) {
        bound = val->subst(sigma);
      } else {
        VarId f = pool.fresh_logical();
        sc.flexible.insert(f);
        bound = Expr::var(f);
      }
      eff.add_pure(Expr::var(caller_var), RelOp::Eq, bound);
    }
    if (feasible) sc.effects.push_back(normalize(eff));
  }
  return sc;
}

std::optional<LearnResult> learn(const SymbolicHeap& pre, const SymbolicHeap& curr,
                                 const StepContract& sc, const std::set<VarId>& anchors,
                                 SymbolPool& pool, const BlockRegistry& blocks,
                                 std::string* why) {
  auto sol = solve(curr, sc.demand, sc.flexible, pool, blocks, why);
  if (!sol) return std::nullopt;
  const SymbolicHeap& m = sol->antiframe;
  // Requirement (1): the antiframe speaks only about logical variables, and
  // every variable in it is reachable from the anchors through pre * M.
  for (VarId v : m.vars()) {
    if (pool.kind(v) == VarKind::Program) {
      if (why) *why = "antiframe mentions a program variable";
      return std::nullopt;
    }
  }
  SymbolicHeap pm = star(pre, m);
  if (!m.vars().empty()) {
    std::set<VarId> reach = reach_set(pm, anchors);
    for (VarId v : m.vars())
      if (!reach.count(v)) {
        if (why) *why = "requirement not reachable from the anchor variables";
        return std::nullopt;
      }
  }
  // Requirement (2): P * M satisfiable; Unknown rejects the step.
  if (pure_sat(pm, pool) != PureVerdict::Sat) {
    if (why) *why = "pre * antiframe not satisfiable";
    return std::nullopt;
  }
  LearnResult r;
  r.pre = pm;
  r.antiframe = m;
  SymbolicHeap frame = drop_binders(sol->frame, sc.writes);
  for (const auto& eff : sc.effects) {
    // The solver's witnesses for the contract locals flow into the effect.
    SymbolicHeap nxt = star(frame, subst_map(eff, sol->binding));
    if (pure_sat(nxt, pool) == PureVerdict::Unsat) continue;  // infeasible branch
    r.currs.push_back(nxt);
  }
  return r;
}

SymbolicHeap project_post(const SymbolicHeap& h, const std::set<VarId>& keep,
                          const std::set<VarId>& anchors, const SymbolPool& pool,
                          const SymbolicHeap* pre) {
  std::set<VarId> drop;
  for (VarId v : h.vars())
    if (pool.kind(v) == VarKind::Program && !keep.count(v)) drop.insert(v);
  SymbolicHeap r = drop_binders(h, drop);
  // Drop stray pure atoms about values no longer connected to anything the
  // contract mentions; a weakening of the postcondition, hence sound.
  std::set<VarId> seeds = anchors;
  for (VarId v : keep) seeds.insert(v);
  std::set<VarId> reach = reach_set(r, seeds);
  r.pure.erase(std::remove_if(r.pure.begin(), r.pure.end(),
                              [&](const PureAtom& a) {
                                std::set<VarId> vs;
                                a.lhs.collect_vars(vs);
                                a.rhs.collect_vars(vs);
                                for (VarId v : vs) {
                                  if (!reach.count(v)) return true;
                                  if (pool.kind(v) == VarKind::Program && !keep.count(v))
                                    return true;
                                }
                                return false;
                              }),
               r.pure.end());
  // Eliminate constraints on logical variables nobody else sees: with an
  // infinite value domain there is always a witness, so the existential atom
  // adds nothing to the disjunct.
  std::set<VarId> pinned;
  if (pre) pinned = pre->vars();
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<VarId, int> occurrences;
    auto count = [&occurrences](const Expr& e) {
      std::set<VarId> vs;
      e.collect_vars(vs);
      for (VarId v : vs) occurrences[v]++;
    };
    for (const auto& a : r.pure) {
      count(a.lhs);
      count(a.rhs);
    }
    for (const auto& p : r.pts) {
      count(p.src);
      count(p.val);
    }
    for (const auto& s : r.segs) {
      count(s.head);
      count(s.tail);
    }
    for (auto it = r.pure.begin(); it != r.pure.end(); ++it) {
      auto lone_side = [&](const Expr& side, const Expr& other) {
        if (!side.is_var()) return false;
        VarId v = side.var_id();
        if (pool.kind(v) != VarKind::Logical) return false;
        if (pinned.count(v) || occurrences[v] != 1) return false;
        std::set<VarId> ov;
        other.collect_vars(ov);
        return !ov.count(v);
      };
      if (lone_side(it->lhs, it->rhs) || lone_side(it->rhs, it->lhs)) {
        r.pure.erase(it);
        changed = true;
        break;
      }
    }
  }
  return normalize(r);
}

bool contracts_equivalent(const Contract& a, const Contract& b, SymbolPool& pool) {
  auto canon = [&pool](const Contract& c) {
    // Shared renaming: pre and posts use the same logical variables. Posts
    // are pre-sorted by their own canonical text so disjunct order does not
    // matter, then renamed jointly with the pre.
    std::vector<std::string> keys;
    for (const auto& d : c.post) keys.push_back(render(canonical_alpha(d, pool), pool));
    std::vector<size_t> order(keys.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t x, size_t y) { return keys[x] < keys[y]; });
    AlphaRenamer ren(pool);
    std::ostringstream os;
    os << render(ren.apply(c.pre), pool) << " =>";
    for (size_t i : order) os << " | " << render(ren.apply(c.post[i]), pool);
    return os.str();
  };
  return canon(a) == canon(b);
}

std::string render(const Contract& c, const SymbolPool& pool) {
  std::ostringstream os;
  os << "( " << render(c.pre, pool) << " ,\n";
  for (size_t i = 0; i < c.post.size(); ++i)
    os << (i ? "  \\/ " : "  ") << render(c.post[i], pool) << "\n";
  os << ")";
  return os.str();
}

}  // namespace abducer
