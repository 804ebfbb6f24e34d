#include "abducer/driver.hpp"

namespace abducer {

Summaries analyze_program(const Program& program, Session& session,
                          const AnalysisOptions& opt) {
  Summaries summaries;
  for (size_t idx : program.call_order) {
    const LoweredFunction& f = program.functions[idx];
    // A failed callee poisons its callers.
    bool callee_failed = false;
    std::string failed_name;
    for (const auto& e : f.cfg.edges) {
      if (e.stmt.kind != Stmt::Kind::Call && e.stmt.kind != Stmt::Kind::LoopCall)
        continue;
      auto it = summaries.find(e.stmt.callee);
      if (it == summaries.end() ||
          it->second.status != FunctionSummary::Status::Analyzed) {
        callee_failed = true;
        failed_name = e.stmt.callee;
      }
    }
    if (callee_failed) {
      FunctionSummary s;
      s.status = FunctionSummary::Status::Failed;
      s.diagnostics.push_back("callee '" + failed_name + "' was not analyzed");
      summaries.emplace(f.name, std::move(s));
      continue;
    }
    FunctionSummary s =
        f.is_loop ? analyze_loop(f, program, summaries, session.pool, session.blocks, opt)
                  : analyze_loop_free(f, program, summaries, session.pool,
                                      session.blocks, opt);
    summaries.emplace(f.name, std::move(s));
  }
  return summaries;
}

}  // namespace abducer
