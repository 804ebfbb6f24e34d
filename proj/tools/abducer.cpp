// abducer: biabduction shape analysis for a small pointer language.
//
// Subcommands:
//   analyze <file.tl>   compute and print function contracts
//   check   <file.tl>   analyze, then validate every contract against the
//                       concrete semantics on sampled precondition models
//   corpus  <dir>       run every .tl file in a directory against the
//                       expectations in <dir>/expected.json

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "abducer/driver.hpp"
#include "abducer/oracle.hpp"
#include "abducer/report.hpp"

namespace fs = std::filesystem;
using namespace abducer;

namespace {

struct CommonFlags {
  std::string format = "text";
  int verbosity = 0;
  uint64_t seed = 0;
  int samples = 200;
  int max_cells = 5;
  int loop_bound = 8;
  int max_worlds = 64;
  bool unsound_no_shared_learning = false;
  bool unsound_skip_verification = false;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Analyzed {
  Program program;
  Session session;
  Summaries summaries;
};

// Returns exit code 2 on parse/lower errors.
int analyze_file(const std::string& path, const CommonFlags& flags, Analyzed& out) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "error: cannot read '" << path << "'\n";
    return 2;
  }
  auto parsed = parse(*text);
  if (!parsed.ok()) {
    std::cerr << path << ":" << parsed.error->line << ":" << parsed.error->column
              << ": error: " << parsed.error->message << "\n";
    return 2;
  }
  auto lowered = lower(*parsed.program, out.session.pool);
  if (!lowered.ok()) {
    std::cerr << path << ": error: " << lowered.error->message << "\n";
    return 2;
  }
  out.program = std::move(*lowered.program);
  AnalysisOptions opt;
  opt.verbosity = flags.verbosity;
  opt.trace = flags.verbosity >= 2 ? &std::cerr : nullptr;
  opt.max_worlds = flags.max_worlds;
  opt.simple_states = flags.unsound_no_shared_learning;
  opt.skip_verification = flags.unsound_skip_verification;
  out.summaries = analyze_program(out.program, out.session, opt);
  return 0;
}

int cmd_analyze(const std::string& path, const CommonFlags& flags) {
  Analyzed a;
  int rc = analyze_file(path, flags, a);
  if (rc != 0) return rc;
  bool any_failed = false;
  if (flags.format == "json") {
    std::cout << summaries_to_json(a.program, a.summaries, a.session.pool) << "\n";
    for (const auto& [name, s] : a.summaries)
      any_failed |= s.status != FunctionSummary::Status::Analyzed;
  } else {
    for (size_t idx : a.program.call_order) {
      const auto& f = a.program.functions[idx];
      const auto& s = a.summaries.at(f.name);
      std::cout << render_summary(f.name, s, a.session.pool);
      any_failed |= s.status != FunctionSummary::Status::Analyzed;
    }
  }
  return any_failed ? 1 : 0;
}

int cmd_check(const std::string& path, const CommonFlags& flags) {
  Analyzed a;
  int rc = analyze_file(path, flags, a);
  if (rc != 0) return rc;
  if (flags.samples == 0) {
    std::cout << "no samples requested; nothing checked\n";
    return 0;
  }
  OracleParams params;
  params.samples = flags.samples;
  params.max_cells = flags.max_cells;
  params.loop_bound = flags.loop_bound;
  params.seed = flags.seed;
  bool violated = false;
  for (size_t idx : a.program.call_order) {
    const auto& f = a.program.functions[idx];
    const auto& s = a.summaries.at(f.name);
    if (s.status != FunctionSummary::Status::Analyzed) continue;
    for (const auto& c : s.contracts) {
      OracleReport r = check_contract_soundness(c, f, a.program, a.session, params);
      if (flags.format == "json" || !r.clean())
        std::cout << oracle_report_to_json(f.name, c, r, a.session.pool) << "\n";
      else
        std::cout << f.name << ": " << r.samples_run << " samples, "
                  << r.violations.size() << " violations, " << r.inconclusive
                  << " inconclusive" << (r.no_models ? " (no models)" : "") << "\n";
      violated |= !r.clean();
    }
  }
  return violated ? 3 : 0;
}

int cmd_corpus(const std::string& dir, const CommonFlags& flags) {
  auto expected_text = read_file((fs::path(dir) / "expected.json").string());
  if (!expected_text) {
    std::cerr << "error: missing " << dir << "/expected.json\n";
    return 2;
  }
  nlohmann::json expected = nlohmann::json::parse(*expected_text);
  bool all_ok = true;
  std::cout << "file                      function                  expected   got\n";
  for (const auto& [file, entry] : expected.items()) {
    CommonFlags f2 = flags;
    Analyzed a;
    int rc = analyze_file((fs::path(dir) / file).string(), f2, a);
    if (rc != 0) {
      std::cout << file << ": frontend error\n";
      all_ok = false;
      continue;
    }
    for (const auto& [fn, want] : entry.items()) {
      const auto it = a.summaries.find(fn);
      std::string got = "missing";
      int iters = 0;
      if (it != a.summaries.end()) {
        if (it->second.status == FunctionSummary::Status::Analyzed) {
          got = "ok";
        } else {
          got = "fail";
          for (const auto& d : it->second.diagnostics) {
            auto open = d.find('[');
            auto close = d.find(']');
            if (open != std::string::npos && close != std::string::npos && close > open) {
              got = "fail:" + d.substr(open + 1, close - open - 1);
              break;
            }
          }
        }
        iters = it->second.body_analyses;
      }
      std::string want_s = want.get<std::string>();
      bool match = want_s == got || (want_s == "ok" && got == "ok") ||
                   (want_s.rfind("fail", 0) == 0 && got.rfind(want_s, 0) == 0);
      std::ostringstream line;
      line.width(26);
      line << std::left << file;
      line.width(26);
      line << std::left << fn;
      line.width(11);
      line << std::left << want_s;
      line << (match ? (got == "ok" ? "✓" : "× (" + got + ")")
                     : "MISMATCH: " + got);
      if (iters > 0 && got == "ok") line << "  iterations=" << iters;
      std::cout << line.str() << "\n";
      all_ok &= match;
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biabduction shape analyzer"};
  app.require_subcommand(1);
  CommonFlags flags;
  if (const char* env_seed = std::getenv("ABDUCER_SEED"))
    flags.seed = std::strtoull(env_seed, nullptr, 10);

  std::string path;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--format", flags.format)->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--verbose", flags.verbosity);
    cmd->add_option("--seed", flags.seed);
    cmd->add_option("--samples", flags.samples);
    cmd->add_option("--max-cells", flags.max_cells);
    cmd->add_option("--loop-bound", flags.loop_bound);
    cmd->add_option("--max-worlds", flags.max_worlds);
    cmd->add_flag("--unsound-no-shared-learning", flags.unsound_no_shared_learning,
                  "fault injection: keep antiframes out of sibling states");
    cmd->add_flag("--unsound-skip-verification", flags.unsound_skip_verification,
                  "fault injection: accept extrapolated shapes unverified");
  };
  auto* analyze = app.add_subcommand("analyze", "compute function contracts");
  analyze->add_option("file", path)->required();
  add_common(analyze);
  auto* check = app.add_subcommand("check", "validate contracts against the semantics");
  check->add_option("file", path)->required();
  add_common(check);
  auto* corpus = app.add_subcommand("corpus", "run a corpus directory");
  corpus->add_option("dir", path)->required();
  add_common(corpus);

  CLI11_PARSE(app, argc, argv);
  if (app.got_subcommand(analyze)) return cmd_analyze(path, flags);
  if (app.got_subcommand(check)) return cmd_check(path, flags);
  if (app.got_subcommand(corpus)) return cmd_corpus(path, flags);
  return 2;
}
