#pragma once

#include <string>

#include "abducer/driver.hpp"
#include "abducer/oracle.hpp"

namespace abducer {

// Canonical text block for one function's analysis result.
std::string render_summary(const std::string& fn_name, const FunctionSummary& s,
                           SymbolPool& pool);

// JSON forms; canonical heap rendering inside strings.
std::string summaries_to_json(const Program& program, const Summaries& summaries,
                              SymbolPool& pool);
std::string oracle_report_to_json(const std::string& fn_name, const Contract& c,
                                  const OracleReport& r, SymbolPool& pool);

}  // namespace abducer
