#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "figsim/stats.hpp"

namespace figsim {

// One simulation invocation: a config assembled from file + flag overrides
// and a trace source (file or synthetic spec).
struct RunOptions {
  std::string config_path;
  std::string trace_path;
  std::string synthetic;
  std::string out_path;
  std::string format = "csv";
  // key=value flag overrides, applied after the config file.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<uint32_t> cache_rows;  // resizes fast subarrays to match
};

enum class SweepAxis { SegmentBlocks, CacheRows, Replacement, Threshold, Mode };

SweepAxis parse_axis(const std::string& s);

struct SweepOptions {
  RunOptions base;
  SweepAxis axis = SweepAxis::Threshold;
  std::vector<std::string> values;
  uint32_t repetitions = 1;
  uint32_t jobs = 1;
};

DramConfig assemble_config(const RunOptions& opts);
RunReport execute_run(const RunOptions& opts);

// Runs values x repetitions points; a failing point records its error and the
// sweep continues. Row order: value-major, repetition-minor.
std::vector<RunReport> execute_sweep(const SweepOptions& opts);

// Full command-line entry: `run` and `sweep` subcommands. Exit codes:
// 0 success, 2 config error, 3 trace error, 4 internal legality violation.
int cli_main(int argc, const char* const* argv);

}  // namespace figsim
