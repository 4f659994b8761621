#include "figsim/cli.hpp"

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "figsim/errors.hpp"
#include "figsim/sim.hpp"

namespace figsim {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SweepAxis parse_axis(const std::string& s) {
  if (s == "segment-blocks") return SweepAxis::SegmentBlocks;
  if (s == "cache-rows") return SweepAxis::CacheRows;
  if (s == "replacement") return SweepAxis::Replacement;
  if (s == "threshold") return SweepAxis::Threshold;
  if (s == "mode") return SweepAxis::Mode;
  throw ParseError("unknown sweep axis '" + s + "'");
}

DramConfig assemble_config(const RunOptions& opts) {
  // Flag > file > default: overrides append after the file text, and the
  // mode-dependent defaults resolve on the combined assignment list.
  std::string text;
  if (!opts.config_path.empty()) text = read_file(opts.config_path);
  std::ostringstream combined;
  combined << text << "\n";
  for (const auto& [key, value] : opts.overrides) {
    combined << key << " = " << value << "\n";
  }
  DramConfig config = load_config_text(combined.str());
  if (opts.cache_rows) {
    combined << "cache_rows_per_bank = " << *opts.cache_rows << "\n";
    // Fast-subarray caches resize by whole subarrays.
    if (config.policy.mode == Mode::FigFast || config.policy.mode == Mode::FigIdeal ||
        config.policy.mode == Mode::LisaVilla) {
      uint32_t per = config.policy.fast_subarray_rows;
      if (per == 0 || *opts.cache_rows % per != 0) {
        throw ValidationError("cache_rows_per_bank",
                              "not a multiple of fast_subarray_rows (" + std::to_string(per) + ")");
      }
      combined << "fast_subarrays = " << (*opts.cache_rows / per) << "\n";
    }
    config = load_config_text(combined.str());
  }
  return config;
}

namespace {

std::vector<TraceRecord> load_trace(const RunOptions& opts, const DramConfig& config) {
  if (!opts.trace_path.empty() && !opts.synthetic.empty()) {
    throw ParseError("give either --trace or --synthetic, not both");
  }
  if (!opts.trace_path.empty()) {
    return parse_trace_file(opts.trace_path, config.geometry.block_bytes);
  }
  SyntheticSpec spec = parse_synthetic_spec(opts.synthetic);
  if (opts.synthetic.find("seed=") == std::string::npos) {
    spec.seed = config.policy.random_seed;
  }
  return generate_synthetic(spec, config.geometry);
}

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::CSV;
  if (s == "json") return ReportFormat::JSON;
  throw ParseError("unknown format '" + s + "' (want csv|json)");
}

void deliver(const std::vector<RunReport>& reports, const RunOptions& opts) {
  ReportFormat format = parse_format(opts.format);
  if (opts.out_path.empty()) {
    std::cout << emit_string(reports, format);
  } else {
    emit(reports, format, opts.out_path);
  }
}

}  // namespace

RunReport execute_run(const RunOptions& opts) {
  DramConfig config = assemble_config(opts);
  std::vector<TraceRecord> trace = load_trace(opts, config);
  return run_simulation(config, trace).report;
}

std::vector<RunReport> execute_sweep(const SweepOptions& opts) {
  if (opts.values.empty()) throw ParseError("sweep requires at least one --values entry");
  DramConfig base = assemble_config(opts.base);  // fail fast on bad base config

  struct Point {
    RunOptions run;
    uint64_t seed;
  };
  std::vector<Point> points;
  for (const auto& value : opts.values) {
    for (uint32_t rep = 0; rep < opts.repetitions; ++rep) {
      Point p;
      p.run = opts.base;
      switch (opts.axis) {
        case SweepAxis::SegmentBlocks:
          p.run.overrides.emplace_back("blocks_per_segment", value);
          break;
        case SweepAxis::CacheRows: {
          // Values are fast-subarray counts; rows follow from the subarray size.
          uint32_t n = static_cast<uint32_t>(std::stoul(value));
          p.run.cache_rows = n * base.policy.fast_subarray_rows;
          break;
        }
        case SweepAxis::Replacement:
          p.run.overrides.emplace_back("replacement", value);
          break;
        case SweepAxis::Threshold:
          p.run.overrides.emplace_back("insertion_threshold", value);
          break;
        case SweepAxis::Mode:
          p.run.overrides.emplace_back("mode", value);
          break;
      }
      p.seed = base.policy.random_seed + rep;
      p.run.overrides.emplace_back("random_seed", std::to_string(p.seed));
      points.push_back(std::move(p));
    }
  }

  std::vector<RunReport> reports(points.size());
  auto run_point = [&](size_t i) {
    try {
      reports[i] = execute_run(points[i].run);
    } catch (const std::exception& e) {
      RunReport failed;
      failed.config = base;
      failed.seed = points[i].seed;
      failed.error = e.what();
      // CSV cells must stay comma-free.
      for (auto& ch : failed.error) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      reports[i] = std::move(failed);
    }
  };

  const uint32_t jobs = std::max(1u, opts.jobs);
  for (size_t start = 0; start < points.size(); start += jobs) {
    std::vector<std::future<void>> batch;
    size_t end = std::min(points.size(), start + jobs);
    for (size_t i = start + 1; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, run_point, i));
    }
    run_point(start);
    for (auto& f : batch) f.get();
  }
  return reports;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Trace-driven DRAM simulator with fine-grained in-DRAM relocation and caching"};
  app.require_subcommand(1);

  RunOptions run_opts;
  SweepOptions sweep_opts;
  std::string axis_name;
  std::vector<std::string> mode_flag, policy_flag, threshold_flag, segment_flag, seed_flag;

  auto add_common = [&](CLI::App* cmd, RunOptions& opts) {
    cmd->add_option("--config", opts.config_path, "config file (key = value lines)");
    cmd->add_option("--trace", opts.trace_path, "trace file");
    cmd->add_option("--synthetic", opts.synthetic,
                    "synthetic spec, e.g. hot=64,frac=0.9,n=100000,ia=4");
    cmd->add_option("--out", opts.out_path, "output file (default: stdout)");
    cmd->add_option("--format", opts.format, "csv|json")->default_val("csv");
    cmd->add_option_function<std::string>(
        "--mode", [&opts](const std::string& v) { opts.overrides.emplace_back("mode", v); },
        "base|figcache-fast|figcache-slow|figcache-ideal|lisa-villa|ll-dram");
    cmd->add_option_function<std::string>(
        "--policy",
        [&opts](const std::string& v) { opts.overrides.emplace_back("replacement", v); },
        "row-benefit|segment-benefit|lru|random");
    cmd->add_option_function<std::string>(
        "--threshold",
        [&opts](const std::string& v) { opts.overrides.emplace_back("insertion_threshold", v); },
        "insertion threshold");
    cmd->add_option_function<std::string>(
        "--segment-blocks",
        [&opts](const std::string& v) { opts.overrides.emplace_back("blocks_per_segment", v); },
        "blocks per row segment");
    cmd->add_option_function<std::string>(
        "--seed", [&opts](const std::string& v) { opts.overrides.emplace_back("random_seed", v); },
        "random seed");
    cmd->add_option_function<uint32_t>(
        "--cache-rows", [&opts](uint32_t v) { opts.cache_rows = v; }, "cache rows per bank");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one simulation");
  add_common(run_cmd, run_opts);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep_cmd, sweep_opts.base);
  sweep_cmd->add_option("--axis", axis_name, "segment-blocks|cache-rows|replacement|threshold|mode")
      ->required();
  sweep_cmd->add_option("--values", sweep_opts.values, "axis values")->required()->delimiter(',');
  sweep_cmd->add_option("--reps", sweep_opts.repetitions, "repetitions per value")
      ->default_val(1);
  sweep_cmd->add_option("--jobs", sweep_opts.jobs, "concurrent sweep points")->default_val(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  enum class Phase { Config, Trace, Run, Output };
  Phase phase = Phase::Config;
  try {
    if (run_cmd->parsed()) {
      DramConfig config = assemble_config(run_opts);
      phase = Phase::Trace;
      std::vector<TraceRecord> trace = load_trace(run_opts, config);
      phase = Phase::Run;
      RunReport report = run_simulation(config, trace).report;
      phase = Phase::Output;
      deliver({report}, run_opts);
    } else {
      sweep_opts.axis = parse_axis(axis_name);
      phase = Phase::Run;
      std::vector<RunReport> reports = execute_sweep(sweep_opts);
      phase = Phase::Output;
      deliver(reports, sweep_opts.base);
    }
  } catch (const IllegalCommand& e) {
    std::cerr << "internal: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    switch (phase) {
      case Phase::Config: return 2;
      case Phase::Trace: return 3;
      default: return 1;
    }
  }
  return 0;
}

}  // namespace figsim
