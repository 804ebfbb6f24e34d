#include "abducer/report.hpp"

#include <sstream>

#include <json.hpp>

namespace abducer {

namespace {

using nlohmann::json;

json contract_json(const Contract& c, SymbolPool& pool) {
  AlphaRenamer ren(pool);
  SymbolicHeap pre = ren.apply(c.pre);
  json j;
  j["pre"] = render(pre, pool);
  j["post"] = json::array();
  std::set<VarId> vars = c.pre.vars();
  for (const auto& d : c.post) {
    j["post"].push_back(render(ren.apply(d), pool));
    auto vs = d.vars();
    vars.insert(vs.begin(), vs.end());
  }
  json anchors = json::array();
  json logicals = json::array();
  for (VarId v : vars) {
    if (pool.kind(v) == VarKind::Anchor) anchors.push_back(pool.name(v));
    if (pool.kind(v) == VarKind::Logical) logicals.push_back(pool.name(v));
  }
  j["vars"] = {{"anchors", anchors}, {"logicals", logicals}};
  return j;
}

}  // namespace

std::string render_summary(const std::string& fn_name, const FunctionSummary& s,
                           SymbolPool& pool) {
  std::ostringstream os;
  os << "function " << fn_name << ": "
     << (s.status == FunctionSummary::Status::Analyzed ? "analyzed" : "FAILED");
  if (s.body_analyses > 0) os << " (body analyses: " << s.body_analyses << ")";
  os << "\n";
  int i = 0;
  for (const auto& c : s.contracts) {
    AlphaRenamer ren(pool);
    os << "  contract " << ++i << ":\n";
    os << "    pre:  " << render(ren.apply(c.pre), pool) << "\n";
    for (const auto& d : c.post) os << "    post: " << render(ren.apply(d), pool) << "\n";
  }
  for (const auto& d : s.diagnostics) os << "  note: " << d << "\n";
  return os.str();
}

std::string summaries_to_json(const Program& program, const Summaries& summaries,
                              SymbolPool& pool) {
  json out = json::array();
  for (size_t idx : program.call_order) {
    const auto& f = program.functions[idx];
    const auto& s = summaries.at(f.name);
    json j;
    j["function"] = f.name;
    j["status"] =
        s.status == FunctionSummary::Status::Analyzed ? "analyzed" : "failed";
    j["contracts"] = json::array();
    for (const auto& c : s.contracts) j["contracts"].push_back(contract_json(c, pool));
    j["diagnostics"] = s.diagnostics;
    if (f.is_loop) j["body_analyses"] = s.body_analyses;
    out.push_back(std::move(j));
  }
  return out.dump(2);
}

std::string oracle_report_to_json(const std::string& fn_name, const Contract& c,
                                  const OracleReport& r, SymbolPool& pool) {
  json j;
  j["function"] = fn_name;
  j["contract"] = contract_json(c, pool);
  j["samples"] = r.samples_run;
  j["inconclusive"] = r.inconclusive;
  j["no_models"] = r.no_models;
  j["violations"] = json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back(
        {{"kind", v.kind == Violation::Kind::Err ? "err" : "post-mismatch"},
         {"detail", v.detail}});
  return j.dump(2);
}

}  // namespace abducer
