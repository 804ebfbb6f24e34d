#include "abducer/interp.hpp"

#include <cassert>
#include <functional>

namespace abducer {

namespace {

std::optional<Value> stack_get(const Configuration& c, VarId v) {
  auto it = c.stack.find(v);
  if (it == c.stack.end()) return std::nullopt;
  return it->second;
}

Value operand_value(const Configuration& c, const CondOperand& o) {
  switch (o.kind) {
    case CondOperand::Kind::Var: {
      auto v = stack_get(c, o.v);
      assert(v && "use before assignment escaped the frontend check");
      return *v;
    }
    case CondOperand::Kind::Null: return kNullValue;
    case CondOperand::Kind::Nat: return o.k;
  }
  return 0;
}

bool cond_holds(const Configuration& c, const CondAtom& a) {
  Value l = operand_value(c, a.lhs);
  Value r = operand_value(c, a.rhs);
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

Value next_fresh_loc(const Configuration& c) {
  Value max_used = kLocBase - 1;
  for (const auto& [cell, v] : c.heap) max_used = std::max(max_used, cell.loc);
  for (const auto& [var, v] : c.stack)
    if (v >= kLocBase) max_used = std::max(max_used, v);
  return max_used + 1;
}

}  // namespace

Outcome Interpreter::exec_stmt(const Configuration& conf, const Stmt& st,
                               VarId return_slot) const {
  Outcome out;
  if (conf.is_err) {
    out.confs.insert(Configuration::err());
    return out;
  }
  switch (st.kind) {
    case Stmt::Kind::Assign: {
      std::vector<Value> vals;
      switch (st.expr.kind) {
        case FlatExpr::Kind::Null: vals.push_back(kNullValue); break;
        case FlatExpr::Kind::Nat: vals.push_back(st.expr.k); break;
        case FlatExpr::Kind::Var: vals.push_back(*stack_get(conf, st.expr.v)); break;
        case FlatExpr::Kind::Nondet: {
          vals = opt_.nondet_pool;
          vals.push_back(next_fresh_loc(conf));
          break;
        }
        case FlatExpr::Kind::Un: vals.push_back(-*stack_get(conf, st.expr.a)); break;
        case FlatExpr::Kind::Bin: {
          Value a = *stack_get(conf, st.expr.a);
          Value b = *stack_get(conf, st.expr.b);
          switch (st.expr.bin) {
            case BinOp::Add: vals.push_back(a + b); break;
            case BinOp::Sub: vals.push_back(a - b); break;
            case BinOp::Mul: vals.push_back(a * b); break;
          }
          break;
        }
      }
      for (Value v : vals) {
        Configuration c = conf;
        c.stack[st.dst] = v;
        out.confs.insert(std::move(c));
      }
      return out;
    }
    case Stmt::Kind::Load: {
      Value base = *stack_get(conf, st.src);
      HeapCell cell{base, st.field};
      auto it = conf.heap.find(cell);
      if (it == conf.heap.end()) {
        out.confs.insert(Configuration::err());
        return out;
      }
      Configuration c = conf;
      c.stack[st.dst] = it->second;
      out.confs.insert(std::move(c));
      return out;
    }
    case Stmt::Kind::Store: {
      Value base = *stack_get(conf, st.dst);
      HeapCell cell{base, st.field};
      if (!conf.heap.count(cell)) {
        out.confs.insert(Configuration::err());
        return out;
      }
      Configuration c = conf;
      c.heap[cell] = *stack_get(conf, st.src);
      out.confs.insert(std::move(c));
      return out;
    }
    case Stmt::Kind::Return: {
      Configuration c = conf;
      if (return_slot.valid()) c.stack[return_slot] = *stack_get(conf, st.src);
      out.confs.insert(std::move(c));
      return out;
    }
    case Stmt::Kind::Assume: {
      if (cond_holds(conf, st.cond)) out.confs.insert(conf);
      return out;  // rule inapplicable when false: the path dies
    }
    case Stmt::Kind::Assert: {
      if (cond_holds(conf, st.cond))
        out.confs.insert(conf);
      else
        out.confs.insert(Configuration::err());
      return out;
    }
    case Stmt::Kind::Call: {
      const LoweredFunction* callee = program_.find(st.callee);
      assert(callee);
      Configuration inner;
      inner.heap = conf.heap;
      for (size_t i = 0; i < callee->params.size(); ++i)
        inner.stack[callee->params[i]] = *stack_get(conf, st.args[i]);
      Outcome sub = run_function(inner, *callee);
      out.bound_hit = sub.bound_hit;
      for (const auto& c : sub.confs) {
        if (c.is_err) {
          out.confs.insert(Configuration::err());
          continue;
        }
        Configuration r = conf;
        r.heap = c.heap;
        r.stack[st.dst] = c.stack.at(callee->return_slot);
        out.confs.insert(std::move(r));
      }
      return out;
    }
    case Stmt::Kind::LoopCall: {
      const LoweredFunction* callee = program_.find(st.callee);
      assert(callee);
      Configuration inner;
      inner.heap = conf.heap;
      for (size_t i = 0; i < callee->params.size(); ++i)
        inner.stack[callee->params[i]] = *stack_get(conf, st.args[i]);
      Outcome sub = run_function(inner, *callee);
      out.bound_hit = sub.bound_hit;
      for (const auto& c : sub.confs) {
        if (c.is_err) {
          out.confs.insert(Configuration::err());
          continue;
        }
        Configuration r = conf;
        r.heap = c.heap;
        for (VarId ov : st.outs) r.stack[ov] = c.stack.at(ov);
        out.confs.insert(std::move(r));
      }
      return out;
    }
  }
  return out;
}

Outcome Interpreter::exec_trace(const Configuration& conf,
                                const std::vector<const Edge*>& trace,
                                VarId return_slot) const {
  Outcome cur;
  cur.confs.insert(conf);
  for (const Edge* e : trace) {
    Outcome next;
    for (const auto& c : cur.confs) {
      Outcome o = exec_stmt(c, e->stmt, return_slot);
      next.merge(o);
    }
    next.bound_hit = next.bound_hit || cur.bound_hit;
    cur = std::move(next);
  }
  return cur;
}

Outcome Interpreter::run_cfg(const Configuration& conf, const LoweredFunction& f,
                             Loc from, Loc to, int back_budget) const {
  Outcome out;
  std::function<void(const Configuration&, Loc, int)> go =
      [&](const Configuration& c, Loc at, int budget) {
        if (c.is_err) {
          out.confs.insert(Configuration::err());
          return;
        }
        if (at == to) {
          out.confs.insert(c);
          return;
        }
        auto edges = f.cfg.out_edges(at);
        if (edges.empty()) return;  // dead end that is not the target
        for (const Edge* e : edges) {
          int b = budget;
          bool is_back = e->to == f.cfg.entry && to != f.cfg.entry;
          if (is_back) {
            // Back edge: charge the loop bound.
            if (b == 0) {
              out.bound_hit = true;
              continue;
            }
            --b;
          }
          Outcome step = exec_stmt(c, e->stmt, f.return_slot);
          out.bound_hit = out.bound_hit || step.bound_hit;
          for (const auto& c2 : step.confs) go(c2, e->to, b);
        }
      };
  go(conf, from, back_budget);
  return out;
}

Outcome Interpreter::run_function(const Configuration& conf,
                                  const LoweredFunction& f) const {
  return run_cfg(conf, f, f.cfg.entry, f.cfg.exit, opt_.loop_bound);
}

Outcome Interpreter::run_between(const Configuration& conf, const LoweredFunction& f,
                                 Loc from, Loc to) const {
  return run_cfg(conf, f, from, to, 0);
}

}  // namespace abducer
