#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "abducer/cfg.hpp"
#include "abducer/concrete.hpp"

namespace abducer {

// Outcome of executing a statement/trace/function: a set of configurations
// (nondeterminism from `?` and callee traces). err absorbs.
struct Outcome {
  std::set<Configuration> confs;
  bool bound_hit = false;  // some exploration stopped at the loop bound

  void merge(const Outcome& o) {
    confs.insert(o.confs.begin(), o.confs.end());
    bound_hit = bound_hit || o.bound_hit;
  }
};

struct InterpOptions {
  int loop_bound = 8;
  // Value pool that `?` draws from; the fresh location is added dynamically.
  std::vector<Value> nondet_pool = {kNullValue, 1, 2};
};

class Interpreter {
 public:
  Interpreter(const Program& program, const SymbolPool& pool, InterpOptions opt = {})
      : program_(program), pool_(pool), opt_(opt) {}

  Outcome exec_stmt(const Configuration& conf, const Stmt& st, VarId return_slot) const;
  Outcome exec_trace(const Configuration& conf, const std::vector<const Edge*>& trace,
                     VarId return_slot) const;
  // All traces entry -> exit with at most loop_bound back-edge uses.
  Outcome run_function(const Configuration& conf, const LoweredFunction& f) const;
  // One pass through a loop body: from `from` to `to` in the given CFG,
  // without taking entry branches (used by the inductiveness checks).
  Outcome run_between(const Configuration& conf, const LoweredFunction& f, Loc from,
                      Loc to) const;

 private:
  Outcome run_cfg(const Configuration& conf, const LoweredFunction& f, Loc from,
                  Loc to, int back_budget) const;

  const Program& program_;
  const SymbolPool& pool_;
  InterpOptions opt_;
};

}  // namespace abducer
