#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abducer/contracts.hpp"
#include "abducer/driver.hpp"
#include "abducer/interp.hpp"

namespace abducer {

struct OracleParams {
  int samples = 200;
  int max_cells = 5;
  int loop_bound = 8;
  uint64_t seed = 0;
};

struct Violation {
  enum class Kind : uint8_t { Err, PostMismatch };
  Kind kind;
  std::string detail;
};

struct OracleReport {
  int samples_run = 0;
  int inconclusive = 0;  // executions that hit the loop bound
  bool no_models = false;
  std::vector<Violation> violations;

  bool clean() const { return violations.empty(); }
};

// Soundness check of one contract against the concrete semantics: sample
// models of the precondition, run the function on each, and require every
// completed execution to avoid err and land in some post disjunct (with the
// shared logical variables pinned to their sampled values).
OracleReport check_contract_soundness(const Contract& c, const LoweredFunction& f,
                                      const Program& program, Session& session,
                                      const OracleParams& params);

}  // namespace abducer
