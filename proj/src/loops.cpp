#include "abducer/loops.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "abducer/abstraction.hpp"
#include "abducer/pure.hpp"
#include "abducer/subtract.hpp"

namespace abducer {

std::optional<ExitInfo> exit_condition(const LoweredFunction& f, SymbolPool& pool,
                                       std::string* why) {
  ExitInfo info;
  std::set<VarId> body_writes = changed_vars(f.cfg, f.return_slot);
  Loc cur = f.cfg.entry;
  for (;;) {
    auto edges = f.cfg.out_edges(cur);
    if (edges.size() != 2 || edges[0]->stmt.kind != Stmt::Kind::Assume ||
        edges[1]->stmt.kind != Stmt::Kind::Assume)
      break;  // past the condition cascade
    const Edge* stay = nullptr;
    for (const Edge* e : edges)
      if (e->to != f.cfg.exit) stay = e;
    const Edge* leave = edges[0] == stay ? edges[1] : edges[0];
    if (!stay || leave->to != f.cfg.exit) break;
    const CondAtom& c = stay->stmt.cond;
    if (c.op != RelOp::Ne) {
      if (why) *why = "loop condition is not a conjunction of inequalities";
      return std::nullopt;
    }
    auto pick = [&](const CondOperand& a,
                    const CondOperand& b) -> std::optional<ExitConjunct> {
      if (a.kind != CondOperand::Kind::Var) return std::nullopt;
      if (!body_writes.count(a.v)) return std::nullopt;
      if (b.kind == CondOperand::Kind::Var && body_writes.count(b.v))
        return std::nullopt;  // both sides written
      return ExitConjunct{a.v, b, RelOp::Ne};
    };
    auto conj = pick(c.lhs, c.rhs);
    if (!conj) conj = pick(c.rhs, c.lhs);
    if (!conj) {
      if (why) *why = "no loop-constant side in the exit condition";
      return std::nullopt;
    }
    info.conjuncts.push_back(*conj);
    cur = stay->to;
  }
  if (info.conjuncts.empty()) {
    if (why) *why = "entry is not a condition vertex";
    return std::nullopt;
  }
  info.body_start = cur;
  for (const auto& c : info.conjuncts) {
    Expr target;
    switch (c.target.kind) {
      case CondOperand::Kind::Null: target = Expr::null(); break;
      case CondOperand::Kind::Nat: target = Expr::nat(c.target.k); break;
      case CondOperand::Kind::Var: target = Expr::var(pool.anchor_of(c.target.v)); break;
    }
    info.exit_map.emplace(c.var, target);
  }
  return info;
}

LoweredFunction body_function(const LoweredFunction& f) {
  LoweredFunction b = f;
  Loc exit2 = body_exit(f);
  b.cfg.vertex_count = exit2 + 1;
  for (auto& e : b.cfg.edges)
    if (e.to == f.cfg.entry) e.to = exit2;
  return b;
}

Partition partition_state(const SymbolicHeap& pre, const SymbolicHeap& curr,
                          const LoweredFunction& f, SymbolPool& pool) {
  Partition part;
  Congruence cg(curr, pool);
  for (VarId p : f.params) {
    if (cg.same(Expr::var(p), Expr::var(pool.anchor_of(p))))
      part.unchanged.insert(p);
    else
      part.changed.insert(p);
  }
  part.const_curr = restrict_to(curr, part.unchanged);
  auto atom_in = [](const auto& atom, const auto& list) {
    return std::find(list.begin(), list.end(), atom) != list.end();
  };
  auto remainder = [&](const SymbolicHeap& h) {
    SymbolicHeap r;
    for (const auto& a : h.pure)
      if (!atom_in(a, part.const_curr.pure)) r.pure.push_back(a);
    for (const auto& p : h.pts)
      if (!atom_in(p, part.const_curr.pts)) r.pts.push_back(p);
    for (const auto& s : h.segs)
      if (!atom_in(s, part.const_curr.segs)) r.segs.push_back(s);
    return normalize(r);
  };
  part.transf_curr = remainder(curr);
  part.transf_pre = remainder(pre);
  SymbolicHeap cp;
  for (const auto& a : pre.pure)
    if (atom_in(a, part.const_curr.pure)) cp.pure.push_back(a);
  for (const auto& p : pre.pts)
    if (atom_in(p, part.const_curr.pts)) cp.pts.push_back(p);
  for (const auto& s : pre.segs)
    if (atom_in(s, part.const_curr.segs)) cp.segs.push_back(s);
  part.const_pre = normalize(cp);
  return part;
}

std::optional<std::map<VarId, Expr>> build_transf_map(const SymbolicHeap& curr,
                                                      const Partition& part,
                                                      SymbolPool& pool,
                                                      std::string* why) {
  std::map<VarId, Expr> transf;
  Congruence cg(curr, pool);
  for (VarId x : part.changed) {
    auto b = binder_of(curr, x);
    if (!b) {
      if (why) *why = "no value expression for changed variable " + pool.name(x);
      return std::nullopt;
    }
    // Prefer a plain logical representative when the class has one.
    if (b->is_var()) {
      if (auto r = cg.logical_repr(b->var_id())) {
        transf.emplace(x, Expr::var(*r));
        continue;
      }
    }
    transf.emplace(x, *b);
  }
  return transf;
}

namespace {

// Variables of an expression set; helper for classifying pure atoms.
bool vars_within(const PureAtom& a, const std::set<VarId>& allowed) {
  std::set<VarId> vs;
  a.lhs.collect_vars(vs);
  a.rhs.collect_vars(vs);
  for (VarId v : vs)
    if (!allowed.count(v)) return false;
  return true;
}

}  // namespace

std::optional<Shapes> shape_extrapolate(const Partition& part,
                                        const std::map<VarId, Expr>& transf,
                                        SymbolPool& pool, BlockRegistry& blocks,
                                        std::string* why) {
  // Heuristic gate: the body makes no spatial changes.
  if (!(part.transf_pre.pts == part.transf_curr.pts &&
        part.transf_pre.segs == part.transf_curr.segs)) {
    if (why) *why = "loop body changes the traversed shape";
    return std::nullopt;
  }
  if (part.transf_pre.spatially_empty()) {
    if (why) *why = "no spatial footprint to extrapolate";
    return std::nullopt;
  }
  // The progress variable: its transformed value is a variable that the
  // footprint links to (occurs as a target), its anchor sources the shape.
  std::set<VarId> target_vars;
  for (const auto& p : part.transf_pre.pts)
    if (p.val.is_var()) target_vars.insert(p.val.var_id());
  for (const auto& s : part.transf_pre.segs)
    if (s.tail.is_var()) target_vars.insert(s.tail.var_id());
  std::optional<VarId> progress;
  std::optional<Expr> link;
  for (VarId x : part.changed) {
    auto it = transf.find(x);
    if (it == transf.end() || !it->second.is_var()) continue;
    if (!target_vars.count(it->second.var_id())) continue;
    if (link && !(*link == it->second)) {
      if (why) *why = "multiple progress chains";
      return std::nullopt;
    }
    if (!progress) {
      progress = x;
      link = it->second;
    }
  }
  if (!progress) {
    if (why) *why = "no progress variable walks the footprint";
    return std::nullopt;
  }
  VarId head_anchor = pool.anchor_of(*progress);

  // Classify transf_pre variables: the head anchor, the link, per-repetition
  // existentials, and anchor-level context (kept once).
  std::set<VarId> tvars = part.transf_pre.vars();
  std::set<VarId> context;  // anchors and const-side variables
  for (VarId v : tvars) {
    if (pool.kind(v) == VarKind::Anchor) context.insert(v);
  }
  for (VarId v : part.const_curr.vars()) context.insert(v);
  std::set<VarId> existentials;
  for (VarId v : tvars) {
    if (v == link->var_id() || context.count(v)) continue;
    existentials.insert(v);
  }

  // Entry-level pure facts (over anchors/context only) survive outside the
  // block; existential-level facts become per-repetition constraints.
  SymbolicHeap spatial_only;
  spatial_only.pts = part.transf_pre.pts;
  spatial_only.segs = part.transf_pre.segs;
  SymbolicHeap entry_pure;
  SymbolicHeap rep_pure;
  std::set<VarId> ctx_and_link = context;
  ctx_and_link.insert(link->var_id());
  for (const auto& a : part.transf_pre.pure) {
    if (vars_within(a, ctx_and_link))
      entry_pure.pure.push_back(a);
    else
      rep_pure.pure.push_back(a);
  }

  // Two connected copies per the extrapolation algorithm: the first copy
  // renames the link to the seam and its existentials fresh; the latest
  // renames the head anchor to the seam and its existentials fresh.
  VarId seam = pool.fresh_logical();
  std::map<VarId, Expr> first_map, latest_map;
  first_map.emplace(link->var_id(), Expr::var(seam));
  latest_map.emplace(head_anchor, Expr::var(seam));
  for (VarId v : existentials) {
    first_map.emplace(v, Expr::var(pool.fresh_logical()));
    latest_map.emplace(v, Expr::var(pool.fresh_logical()));
  }
  SymbolicHeap first = subst_map(star(spatial_only, rep_pure), first_map);
  SymbolicHeap latest = subst_map(star(spatial_only, rep_pure), latest_map);
  SymbolicHeap conj = star(first, latest);

  auto fused = fuse_two_copies(conj, seam, pool, blocks);
  if (!fused) {
    if (why) *why = "abstraction found no repeating shape";
    return std::nullopt;
  }
  // The abstraction must collapse everything into a single segment atom.
  if (!fused->pts.empty() || fused->segs.size() != 1) {
    if (why) *why = "abstraction left more than one segment";
    return std::nullopt;
  }
  const SegAtom& theta = fused->segs[0];
  if (!(theta.head == Expr::var(head_anchor)) || !(theta.tail == *link)) {
    if (why) *why = "abstracted segment does not span the iteration";
    return std::nullopt;
  }
  Shapes s;
  s.block = theta.block;
  s.progress = *progress;
  s.link = *link;
  s.entry_pure = normalize(entry_pure);
  return s;
}

namespace {

struct LoopPipeline {
  const LoweredFunction& f;
  const Program& program;
  const Summaries& summaries;
  SymbolPool& pool;
  BlockRegistry& blocks;
  const AnalysisOptions& opt;

  FunctionSummary out;
  LoweredFunction body;
  ExitInfo exits;

  bool fail(const std::string& stage, const std::string& detail) {
    out.status = FunctionSummary::Status::Failed;
    out.diagnostics.push_back("extrapolation failed [" + stage + "]: " + detail);
    ExtrapolationCert cert;
    cert.failed_stage = stage;
    out.certs.push_back(cert);
    return false;
  }

  // Processes one entered world; appends contracts and a certificate.
  bool extrapolate_world(const World& w) {
    // Exactly one body state per world is supported.
    std::vector<const WorldPost*> ends;
    for (const auto& p : w.posts)
      if (p.loc == body_exit(f)) ends.push_back(&p);
    if (ends.empty()) return fail("first-iteration", "no state reached the back edge");
    if (ends.size() > 1)
      return fail("abstraction", "loop body yields more than one state");
    const SymbolicHeap s1_pre = w.pre;
    const SymbolicHeap s1_curr = ends[0]->curr;

    Partition part = partition_state(s1_pre, s1_curr, f, pool);
    std::string why;
    auto transf = build_transf_map(s1_curr, part, pool, &why);
    if (!transf) return fail("transf-map", why);
    auto shapes = shape_extrapolate(part, *transf, pool, blocks, &why);
    if (!shapes) {
      bool spatial = why == "loop body changes the traversed shape";
      return fail(spatial ? "spatial-change" : "abstraction", why);
    }

    ExtrapolationCert cert;
    cert.transf_pre = part.transf_pre;
    cert.transf_curr = part.transf_curr;
    cert.body_start = exits.body_start;

    // Condition (1): the footprint entails one block instance, exactly.
    SymbolicHeap p_inst;
    p_inst.segs.push_back({shapes->block, Expr::var(pool.anchor_of(shapes->progress)),
                           shapes->link});
    cert.p_instance = p_inst;
    SymbolicHeap frame;
    if (entails(part.transf_pre, p_inst, pool, blocks, &frame) != EntailVerdict::Proved ||
        !frame.spatially_empty())
      return fail("condition-check", "condition (1) for the precondition footprint");
    cert.cond1_pre = true;
    if (entails(part.transf_curr, p_inst, pool, blocks, &frame) != EntailVerdict::Proved ||
        !frame.spatially_empty())
      return fail("condition-check", "condition (1) for the current footprint");
    cert.cond1_curr = true;

    // Condition (2): head = tail forces emptiness only for targets that can
    // never be allocated; conjuncts must exit the walked shape at such a
    // target, and only the progress variable may carry a conjunct.
    for (const auto& c : exits.conjuncts) {
      if (c.var != shapes->progress)
        return fail("condition-check", "exit conjunct on a non-progress variable");
      if (c.target.kind == CondOperand::Kind::Var)
        return fail("condition-check", "exit target is not NULL or a constant");
    }
    cert.cond2 = true;
    // Condition (3): segments admit the empty instance by construction.
    cert.cond3 = true;

    // The invariant state.
    Expr exit_val = exits.exit_map.at(shapes->progress);
    VarId pos = pool.fresh_logical();
    SymbolicHeap inv_shape;
    inv_shape.segs.push_back({shapes->block, Expr::var(pool.anchor_of(shapes->progress)),
                              Expr::var(pos)});
    inv_shape.segs.push_back({shapes->block, Expr::var(pos), exit_val});

    SymbolicHeap inv_pre = star(star(part.const_pre, shapes->entry_pure), inv_shape);
    SymbolicHeap inv_curr = star(star(part.const_curr, shapes->entry_pure), inv_shape);
    // Current values: the progress variable sits at the position; changed
    // variables sharing its transformed value do too; the rest are havocked.
    std::map<VarId, Expr> havoc;
    for (VarId x : part.changed) {
      if (binder_of(part.const_curr, x)) continue;  // value pinned by context
      Expr val;
      if ((*transf)[x] == shapes->link)
        val = Expr::var(pos);
      else
        val = Expr::var(pool.fresh_logical());
      havoc.emplace(x, val);
      inv_curr.add_pure(Expr::var(x), RelOp::Eq, val);
    }
    inv_pre = normalize(inv_pre);
    inv_curr = normalize(inv_curr);
    cert.s_inv_pre = inv_pre;
    cert.s_inv_curr = inv_curr;

    // Entering condition over the invariant's values.
    std::vector<PureAtom> entering;
    for (const auto& c : exits.conjuncts) {
      Expr lhs = havoc.count(c.var) ? havoc.at(c.var) : Expr::var(pos);
      entering.push_back({lhs, RelOp::Ne, exits.exit_map.at(c.var)});
    }
    cert.entering = entering;

    // Verification iteration: no learning, body re-entered from the
    // invariant; afterwards every end state must entail the invariant again.
    if (!opt.skip_verification) {
      AnalysisOptions vopt = opt;
      vopt.no_learn = true;
      World vw;
      vw.pre = inv_pre;
      SymbolicHeap vcurr = inv_curr;
      for (const auto& a : entering) vcurr.pure.push_back(a);
      vcurr = normalize(vcurr);
      if (pure_sat(vcurr, pool) == PureVerdict::Unsat)
        return fail("verification", "invariant excludes the entering condition");
      vw.posts.push_back({exits.body_start, vcurr, false, 0});
      WorldsResult vr =
          run_worlds(body, program, summaries, std::move(vw), pool, blocks, vopt);
      if (vr.aborted) return fail("verification", "body analysis aborted");
      if (vr.worlds.empty())
        return fail("verification", "every state failed in the verification run");
      for (const auto& dw : vr.diagnostics) out.diagnostics.push_back(dw);
      bool any_end = false;
      for (const auto& wv : vr.worlds) {
        if (!wv.death_note.empty()) continue;
        for (const auto& p : wv.posts) {
          if (p.loc != body_exit(f)) continue;
          any_end = true;
          // Re-instantiated invariant: fresh position and havoc values.
          std::map<VarId, Expr> refresh;
          refresh.emplace(pos, Expr::var(pool.fresh_logical()));
          for (auto& [x, val] : havoc)
            if (val.is_var() && val.var_id() != pos)
              refresh.emplace(val.var_id(), Expr::var(pool.fresh_logical()));
          SymbolicHeap goal = subst_map(inv_curr, refresh);
          SymbolicHeap vframe;
          if (entails(p.curr, goal, pool, blocks, &vframe) != EntailVerdict::Proved ||
              !vframe.spatially_empty())
            return fail("verification", "end state does not entail the invariant");
        }
      }
      if (!any_end) return fail("verification", "no state reached the back edge");
      cert.cond4 = true;
    }

    // Final analysis state.
    SymbolicHeap final_shape;
    final_shape.segs.push_back(
        {shapes->block, Expr::var(pool.anchor_of(shapes->progress)), exit_val});
    SymbolicHeap final_pre = normalize(star(star(part.const_pre, shapes->entry_pure),
                                            final_shape));
    SymbolicHeap final_curr = star(star(part.const_curr, shapes->entry_pure),
                                   final_shape);
    for (VarId x : part.changed) {
      if (binder_of(part.const_curr, x)) continue;
      if ((*transf)[x] == shapes->link)
        final_curr.add_pure(Expr::var(x), RelOp::Eq, exit_val);
      else
        final_curr.add_pure(Expr::var(x), RelOp::Eq, Expr::var(pool.fresh_logical()));
    }
    final_curr = normalize(final_curr);

    std::set<VarId> keep(f.params.begin(), f.params.end());
    for (VarId o : f.outputs) keep.insert(o);
    std::set<VarId> anchors;
    for (VarId p : f.params) anchors.insert(pool.anchor_of(p));
    Contract c;
    c.pre = final_pre;
    c.post.push_back(project_post(final_curr, keep, anchors, pool));
    out.contracts.push_back(std::move(c));
    out.certs.push_back(cert);
    return true;
  }

  FunctionSummary run() {
    std::string why;
    auto ex = exit_condition(f, pool, &why);
    if (!ex) {
      fail("exit-form", why);
      return out;
    }
    exits = *ex;
    body = body_function(f);

    WorldsResult first = run_worlds(body, program, summaries,
                                    initial_world(body, pool), pool, blocks, opt);
    out.body_analyses = 1;
    for (const auto& d : first.diagnostics) out.diagnostics.push_back(d);
    if (first.aborted) {
      fail("first-iteration", "body analysis aborted");
      return out;
    }

    std::vector<const World*> entered;
    for (const auto& w : first.worlds) {
      bool has_end = false, has_exit = false;
      for (const auto& p : w.posts) {
        if (p.loc == body_exit(f)) has_end = true;
        if (p.loc == f.cfg.exit) has_exit = true;
      }
      if (has_exit) {
        // Never-entered contract straight from the exit world.
        auto c = world_contract(w, f, pool);
        if (c) out.contracts.push_back(std::move(*c));
      }
      if (has_end) entered.push_back(&w);
    }
    if (entered.empty()) {
      fail("first-iteration", "no world entered the loop");
      return out;
    }
    for (const World* w : entered) {
      if (!extrapolate_world(*w)) return out;
    }
    // Per contract: the shared first pass plus its verification pass.
    out.body_analyses = opt.skip_verification ? 1 : 2;
    out.status = FunctionSummary::Status::Analyzed;
    return out;
  }
};

}  // namespace

FunctionSummary analyze_loop(const LoweredFunction& f, const Program& program,
                             const Summaries& summaries, SymbolPool& pool,
                             BlockRegistry& blocks, const AnalysisOptions& opt) {
  LoopPipeline p{f, program, summaries, pool, blocks, opt};
  return p.run();
}

}  // namespace abducer
