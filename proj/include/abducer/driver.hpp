#pragma once

#include <string>

#include "abducer/cfg.hpp"
#include "abducer/loops.hpp"
#include "abducer/worlds.hpp"

namespace abducer {

// One analysis session: the symbol pool and block registry shared by every
// formula of one program analysis.
struct Session {
  SymbolPool pool;
  BlockRegistry blocks;
};

// Bottom-up whole-program analysis: callees before callers, loop functions
// through shape extrapolation, everything else through the worlds engine.
Summaries analyze_program(const Program& program, Session& session,
                          const AnalysisOptions& opt);

}  // namespace abducer
