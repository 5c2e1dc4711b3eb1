#pragma once

#include "blinktrack/config_io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace blinktrack {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitInternal = 4 };

struct GenerateResult {
  std::string trace_path;
  std::string truth_path;
};

// Writes <out>/<name>.trace.jsonl and <out>/<name>.truth.jsonl.
GenerateResult cmd_generate(const ScenarioConfig& config, const std::string& out_dir);

struct RunResult {
  std::string report_path;
  std::string events_path;
  std::string qtable_path;  // empty unless the sampler is sarsa
  RunReport report;
};

// Writes report.jsonl and events.jsonl (plus qtable.txt for sarsa) to
// config.out_dir.
RunResult cmd_run(const RunConfig& config);

struct CompareResult {
  std::string report_path;
  std::string summary_path;
  ComparisonTable table;
};

// Writes comparison.jsonl and summary.txt to config.out_dir.
CompareResult cmd_compare(const SuiteConfig& config);

// Entry point: `blinktrack <generate|run|compare> [flags]`. Returns an
// ExitCode; diagnostics go to `err`, written paths to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blinktrack
