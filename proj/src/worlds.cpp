#include "abducer/worlds.hpp"

#include <algorithm>
#include <cassert>
#include <ostream>
#include <sstream>

#include "abducer/subtract.hpp"

namespace abducer {

World initial_world(const LoweredFunction& f, SymbolPool& pool) {
  World w;
  SymbolicHeap curr;
  for (VarId p : f.params)
    curr.add_pure(Expr::var(p), RelOp::Eq, Expr::var(pool.anchor_of(p)));
  w.pre = SymbolicHeap{};
  w.posts.push_back({f.cfg.entry, normalize(curr), false, 0});
  return w;
}

std::optional<PureAtom> normalize_cond(const CondAtom& cond, const SymbolicHeap& curr,
                                       const SymbolPool& pool) {
  auto value_of = [&](const CondOperand& o) -> std::optional<Expr> {
    switch (o.kind) {
      case CondOperand::Kind::Null: return Expr::null();
      case CondOperand::Kind::Nat: return Expr::nat(o.k);
      case CondOperand::Kind::Var: return binder_of(curr, o.v);
    }
    return std::nullopt;
  };
  auto l = value_of(cond.lhs);
  auto r = value_of(cond.rhs);
  if (!l || !r) return std::nullopt;
  return PureAtom{*l, cond.op, *r};
}

AssumeMode classify_assume(const SymbolicHeap& pre, const PureAtom& cond_norm,
                           const std::set<VarId>& anchors, const SymbolPool& pool) {
  SymbolicHeap combined = pre;
  combined.pure.push_back(cond_norm);
  combined = normalize(combined);
  std::set<VarId> reach = reach_set(combined, anchors);
  std::set<VarId> cvars;
  cond_norm.lhs.collect_vars(cvars);
  cond_norm.rhs.collect_vars(cvars);
  for (VarId v : cvars)
    if (!reach.count(v)) return AssumeMode::AsAssume;
  return AssumeMode::AsAssert;
}

namespace {

struct EngineState {
  const LoweredFunction& fn;
  const Program& program;
  const Summaries& summaries;
  SymbolPool& pool;
  BlockRegistry& blocks;
  const AnalysisOptions& opt;

  std::vector<World> worlds;
  std::vector<std::string> diagnostics;
  WorldsTelemetry telemetry;
  std::set<VarId> anchors;
  int next_world_id = 1;
  int next_post_id = 1;
  bool aborted = false;

  void trace_line(const std::string& s) {
    if (opt.verbosity >= 2 && opt.trace) *opt.trace << s << "\n";
  }

  void kill_world(World& w, const std::string& why) {
    w.alive = false;
    w.death_note = why;
    diagnostics.push_back("world#" + std::to_string(w.id) + " failed: " + why);
  }

  // Appends a post unless it is infeasible or entails an existing post at
  // the same location ("adds no new information").
  void add_post(World& w, Loc loc, SymbolicHeap curr) {
    curr = normalize(curr);
    if (pure_sat(curr, pool) == PureVerdict::Unsat) {
      telemetry.dropped_branches.push_back("world#" + std::to_string(w.id) +
                                           " infeasible state at loc " +
                                           std::to_string(loc));
      return;
    }
    for (const auto& p : w.posts) {
      if (p.loc != loc) continue;
      if (entails(curr, p.curr, pool, blocks) == EntailVerdict::Proved) return;
    }
    w.posts.push_back({loc, std::move(curr), false, next_post_id++});
  }

  bool learn_into_world(World& w, size_t post_idx, const StepContract& sc, Loc target,
                        const std::string& stmt_text) {
    std::string why;
    auto res = learn(w.pre, w.posts[post_idx].curr, sc, anchors, pool, blocks, &why);
    if (!res) {
      kill_world(w, "learning failed at '" + stmt_text + "': " + why);
      return false;
    }
    if (opt.no_learn && !(res->antiframe.pure.empty() && res->antiframe.spatially_empty())) {
      kill_world(w, "learning required at '" + stmt_text + "' in verification mode");
      return false;
    }
    telemetry.antiframes.push_back(res->antiframe);
    trace_line("world#" + std::to_string(w.id) + " post#" +
               std::to_string(w.posts[post_idx].id) + " loc=" +
               std::to_string(w.posts[post_idx].loc) + " stmt=" + stmt_text +
               " M=" + render(res->antiframe, pool));
    // Shared learning: the antiframe strengthens the precondition and every
    // current postcondition. With simple_states the siblings are skipped
    // (the seminal per-path behaviour; deliberately unsound).
    w.pre = res->pre;
    if (!opt.simple_states) {
      bool m_empty = res->antiframe.pure.empty() && res->antiframe.spatially_empty();
      if (!m_empty) {
        for (auto& p : w.posts) p.curr = star(p.curr, res->antiframe);
      }
    }
    for (auto& nxt : res->currs) add_post(w, target, nxt);
    return true;
  }

  // Splits the world over an anchored branch condition.
  void split_as_assert(size_t widx, size_t post_idx, const PureAtom& cond,
                       Loc loc_then, Loc loc_else) {
    World base = worlds[widx];
    base.posts[post_idx].processed = true;
    PureAtom neg{cond.lhs, negate(cond.op), cond.rhs};

    auto strengthened = [&](const PureAtom& c, Loc branch_target) {
      World w = base;
      w.id = next_world_id++;
      w.pre.pure.push_back(c);
      w.pre = normalize(w.pre);
      SymbolicHeap source = w.posts[post_idx].curr;
      for (auto& p : w.posts) {
        p.curr.pure.push_back(c);
        p.curr = normalize(p.curr);
      }
      // Drop posts that became infeasible under the strengthened pre.
      std::vector<WorldPost> kept;
      for (auto& p : w.posts) {
        if (pure_sat(p.curr, pool) == PureVerdict::Unsat) {
          telemetry.dropped_branches.push_back("world#" + std::to_string(w.id) +
                                               " post dropped by split");
          continue;
        }
        kept.push_back(p);
      }
      w.posts = std::move(kept);
      SymbolicHeap branch_curr = source;
      branch_curr.pure.push_back(c);
      add_post(w, branch_target, branch_curr);
      return w;
    };
    World w_then = strengthened(cond, loc_then);
    World w_else = strengthened(neg, loc_else);
    bool then_ok = pure_sat(w_then.pre, pool) != PureVerdict::Unsat;
    bool else_ok = pure_sat(w_else.pre, pool) != PureVerdict::Unsat;
    if (then_ok && else_ok)
      telemetry.split_pre_pairs.emplace_back(w_then.pre, w_else.pre);
    worlds[widx].alive = false;
    worlds[widx].death_note = "split";
    if (then_ok) worlds.push_back(std::move(w_then));
    if (else_ok) worlds.push_back(std::move(w_else));
  }

  void split_as_assume(World& w, size_t post_idx, const PureAtom& cond, Loc loc_then,
                       Loc loc_else) {
    PureAtom neg{cond.lhs, negate(cond.op), cond.rhs};
    SymbolicHeap source = w.posts[post_idx].curr;
    SymbolicHeap then_curr = source;
    then_curr.pure.push_back(cond);
    SymbolicHeap else_curr = source;
    else_curr.pure.push_back(neg);
    w.posts[post_idx].processed = true;
    add_post(w, loc_then, then_curr);
    add_post(w, loc_else, else_curr);
  }

  // Applies the callee's contracts at a call edge. Multiple applicable
  // contracts split the world, one clone per contract.
  void apply_call(size_t widx, size_t post_idx, const Edge& e) {
    World& w = worlds[widx];
    const LoweredFunction* callee = program.find(e.stmt.callee);
    assert(callee);
    auto sit = summaries.find(e.stmt.callee);
    if (sit == summaries.end() || sit->second.status != FunctionSummary::Status::Analyzed) {
      diagnostics.push_back("callee '" + e.stmt.callee + "' has no usable summary");
      aborted = true;
      return;
    }
    const SymbolicHeap q = w.posts[post_idx].curr;
    struct Applicable {
      StepContract sc;
      size_t contract_idx;
    };
    std::vector<Applicable> apps;
    for (size_t ci = 0; ci < sit->second.contracts.size(); ++ci) {
      auto sc = instantiate_call(e.stmt, *callee, sit->second.contracts[ci], q, pool);
      if (!sc) continue;
      // Applicability probe: the solver must accept the instantiated demand.
      std::string why;
      auto sol = solve(q, sc->demand, sc->flexible, pool, blocks, &why);
      if (!sol) continue;
      if (pure_sat(star(w.pre, sol->antiframe), pool) != PureVerdict::Sat) continue;
      if (opt.no_learn &&
          !(sol->antiframe.pure.empty() && sol->antiframe.spatially_empty()))
        continue;
      apps.push_back({std::move(*sc), ci});
    }
    if (apps.empty()) {
      kill_world(w, "no contract of '" + e.stmt.callee + "' applies");
      return;
    }
    if (apps.size() == 1) {
      w.posts[post_idx].processed = true;
      learn_into_world(w, post_idx, apps[0].sc, e.to, render(e.stmt, pool));
      return;
    }
    // Callee contract preconditions are pairwise incompatible; the split
    // mirrors assume-as-assert with the learned guard flowing through M.
    World base = w;
    base.posts[post_idx].processed = true;
    worlds[widx].alive = false;
    worlds[widx].death_note = "split at call";
    std::vector<size_t> clone_indices;
    for (auto& app : apps) {
      World clone = base;
      clone.id = next_world_id++;
      worlds.push_back(std::move(clone));
      clone_indices.push_back(worlds.size() - 1);
      learn_into_world(worlds.back(), post_idx, app.sc, e.to, render(e.stmt, pool));
    }
    for (size_t i = 0; i < clone_indices.size(); ++i)
      for (size_t j = i + 1; j < clone_indices.size(); ++j) {
        const World& a = worlds[clone_indices[i]];
        const World& b = worlds[clone_indices[j]];
        if (a.alive && b.alive)
          telemetry.split_pre_pairs.emplace_back(a.pre, b.pre);
      }
  }

  void process(size_t widx, size_t post_idx) {
    // Splits push new worlds and posts; take copies, never hold references
    // across mutation.
    Loc at = worlds[widx].posts[post_idx].loc;
    SymbolicHeap curr = worlds[widx].posts[post_idx].curr;
    auto edges = fn.cfg.out_edges(at);
    if (edges.empty()) {
      worlds[widx].posts[post_idx].processed = true;
      return;
    }
    if (edges.size() == 2 && edges[0]->stmt.kind == Stmt::Kind::Assume &&
        edges[1]->stmt.kind == Stmt::Kind::Assume) {
      auto cond = normalize_cond(edges[0]->stmt.cond, curr, pool);
      if (!cond) {
        kill_world(worlds[widx], "branch condition over an unbound variable");
        return;
      }
      AssumeMode mode = opt.no_learn
                            ? AssumeMode::AsAssume
                            : classify_assume(worlds[widx].pre, *cond, anchors, pool);
      if (mode == AssumeMode::AsAssert) {
        split_as_assert(widx, post_idx, *cond, edges[0]->to, edges[1]->to);
      } else {
        worlds[widx].posts[post_idx].processed = true;
        split_as_assume(worlds[widx], post_idx, *cond, edges[0]->to, edges[1]->to);
      }
      return;
    }
    worlds[widx].posts[post_idx].processed = true;
    for (const Edge* e : edges) {
      if (!worlds[widx].alive) break;
      switch (e->stmt.kind) {
        case Stmt::Kind::Assume: {
          auto cond = normalize_cond(e->stmt.cond, curr, pool);
          if (!cond) {
            kill_world(worlds[widx], "assume over an unbound variable");
            break;
          }
          SymbolicHeap next = curr;
          next.pure.push_back(*cond);
          add_post(worlds[widx], e->to, next);
          break;
        }
        case Stmt::Kind::Call:
        case Stmt::Kind::LoopCall:
          apply_call(widx, post_idx, *e);
          break;
        default: {
          StepContract sc = atomic_contract(e->stmt, fn.return_slot, pool);
          learn_into_world(worlds[widx], post_idx, sc, e->to, render(e->stmt, pool));
          break;
        }
      }
    }
  }

  WorldsResult run(World initial) {
    for (VarId p : fn.params) anchors.insert(pool.anchor_of(p));
    initial.id = 0;
    worlds.push_back(std::move(initial));
    uint64_t steps = 0;
    for (;;) {
      if (aborted) break;
      // Lowest world id first, then lowest post id.
      std::optional<std::pair<size_t, size_t>> pick;
      for (size_t wi = 0; wi < worlds.size(); ++wi) {
        if (!worlds[wi].alive) continue;
        for (size_t pi = 0; pi < worlds[wi].posts.size(); ++pi) {
          if (worlds[wi].posts[pi].processed) continue;
          pick = {wi, pi};
          break;
        }
        if (pick) break;
      }
      if (!pick) break;
      if (++steps > opt.max_steps) {
        diagnostics.push_back("termination bound exceeded");
        aborted = true;
        break;
      }
      int alive = 0;
      for (const auto& w : worlds)
        if (w.alive) ++alive;
      if (alive > opt.max_worlds) {
        diagnostics.push_back("world explosion");
        aborted = true;
        break;
      }
      process(pick->first, pick->second);
    }
    WorldsResult r;
    r.telemetry = std::move(telemetry);
    r.telemetry.steps = steps;
    r.diagnostics = std::move(diagnostics);
    r.aborted = aborted;
    for (auto& w : worlds)
      if (w.alive) r.worlds.push_back(std::move(w));
    return r;
  }
};

}  // namespace

WorldsResult run_worlds(const LoweredFunction& f, const Program& program,
                        const Summaries& summaries, World initial, SymbolPool& pool,
                        BlockRegistry& blocks, const AnalysisOptions& opt) {
  EngineState es{f, program, summaries, pool, blocks, opt};
  return es.run(std::move(initial));
}

std::optional<Contract> world_contract(const World& w, const LoweredFunction& f,
                                       SymbolPool& pool) {
  std::set<VarId> keep(f.params.begin(), f.params.end());
  for (VarId o : f.outputs) keep.insert(o);
  std::set<VarId> anchors;
  for (VarId p : f.params) anchors.insert(pool.anchor_of(p));
  Contract c;
  c.pre = w.pre;
  for (const auto& p : w.posts) {
    if (p.loc != f.cfg.exit) continue;
    c.post.push_back(project_post(p.curr, keep, anchors, pool, &c.pre));
  }
  if (c.post.empty()) return std::nullopt;
  return c;
}

FunctionSummary analyze_loop_free(const LoweredFunction& f, const Program& program,
                                  const Summaries& summaries, SymbolPool& pool,
                                  BlockRegistry& blocks, const AnalysisOptions& opt,
                                  WorldsTelemetry* telemetry) {
  FunctionSummary s;
  WorldsResult r =
      run_worlds(f, program, summaries, initial_world(f, pool), pool, blocks, opt);
  s.diagnostics = r.diagnostics;
  if (telemetry) *telemetry = r.telemetry;
  if (r.aborted) {
    s.status = FunctionSummary::Status::Failed;
    return s;
  }
  for (const auto& w : r.worlds) {
    auto c = world_contract(w, f, pool);
    if (c) s.contracts.push_back(std::move(*c));
  }
  s.status = s.contracts.empty() ? FunctionSummary::Status::Failed
                                 : FunctionSummary::Status::Analyzed;
  if (s.contracts.empty()) s.diagnostics.push_back("no world reached the exit");
  return s;
}

}  // namespace abducer
