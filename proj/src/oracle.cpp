#include "abducer/oracle.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "abducer/concrete.hpp"

namespace abducer {

OracleReport check_contract_soundness(const Contract& c, const LoweredFunction& f,
                                      const Program& program, Session& session,
                                      const OracleParams& params) {
  OracleReport report;
  if (params.samples <= 0) {
    report.no_models = true;
    return report;
  }
  EnumBounds bounds;
  bounds.max_cells = params.max_cells;
  std::vector<Configuration> models_of_pre =
      enumerate_models(c.pre, bounds, session.pool, session.blocks);
  if (models_of_pre.empty()) {
    report.no_models = true;
    return report;
  }
  if (static_cast<int>(models_of_pre.size()) > params.samples) {
    std::mt19937_64 rng(params.seed);
    std::shuffle(models_of_pre.begin(), models_of_pre.end(), rng);
    models_of_pre.resize(static_cast<size_t>(params.samples));
  }
  InterpOptions iopt;
  iopt.loop_bound = params.loop_bound;
  Interpreter interp(program, session.pool, iopt);
  for (const auto& m : models_of_pre) {
    ++report.samples_run;
    // The sampled stack binds the pre's variables (anchors and logicals);
    // parameters start at their anchor values.
    Configuration conf = m;
    for (VarId p : f.params) {
      VarId a = session.pool.anchor_of(p);
      auto it = conf.stack.find(a);
      if (it != conf.stack.end()) conf.stack[p] = it->second;
    }
    Outcome o = interp.run_function(conf, f);
    if (o.bound_hit) ++report.inconclusive;
    for (const auto& final : o.confs) {
      if (final.is_err) {
        std::ostringstream os;
        os << "err from a model of the precondition";
        report.violations.push_back({Violation::Kind::Err, os.str()});
        continue;
      }
      if (!models_any(final, c.post, session.pool, session.blocks)) {
        report.violations.push_back(
            {Violation::Kind::PostMismatch,
             "completed execution models no post disjunct"});
      }
    }
    if (report.violations.size() > 8) break;  // enough evidence
  }
  return report;
}

}  // namespace abducer
