#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "figsim/config.hpp"
#include "figsim/figcache.hpp"

namespace figsim {

struct Counters {
  uint64_t requests = 0;
  uint64_t reads = 0;
  uint64_t writes = 0;
  uint64_t row_buffer_hits = 0;
  uint64_t row_buffer_misses = 0;
  uint64_t row_buffer_conflicts = 0;
  uint64_t cache_hits = 0;
  uint64_t cache_misses = 0;
  uint64_t insertions = 0;
  uint64_t evictions = 0;
  uint64_t dirty_writebacks = 0;
  uint64_t acts = 0;
  uint64_t pres = 0;
  uint64_t relocs = 0;
  uint64_t column_reads = 0;
  uint64_t column_writes = 0;
  // Demand accesses served from cache rows, and how many of those found the
  // cache row already open.
  uint64_t cache_row_accesses = 0;
  uint64_t cache_row_hits = 0;

  Counters& operator+=(const Counters& o);
};

// Per-request latencies, exact up to `kExactLimit` then reservoir-sampled
// with a fixed seed so percentiles stay deterministic.
class LatencyRecorder {
 public:
  static constexpr uint64_t kExactLimit = 10'000'000;
  static constexpr uint64_t kReservoirSize = 1'000'000;

  void record(double ns);
  void merge(const LatencyRecorder& other);
  uint64_t count() const { return count_; }
  double mean() const;
  double median() const;
  double p99() const;

 private:
  double percentile(double q) const;
  std::vector<double> samples_;
  uint64_t count_ = 0;
  double sum_ = 0;
  uint64_t rng_state_ = 0x1ece5ca1ab1e5eedULL;
};

struct EnergyBreakdown {
  int64_t act_pj = 0;
  int64_t pre_pj = 0;
  int64_t rd_pj = 0;
  int64_t wr_pj = 0;
  int64_t reloc_pj = 0;
  double static_pj = 0;
  double total_pj() const {
    return static_cast<double>(act_pj + pre_pj + rd_pj + wr_pj + reloc_pj) + static_pj;
  }
  double total_uj() const { return total_pj() / 1e6; }
};

struct RunReport {
  DramConfig config;
  uint64_t seed = 0;
  Counters totals;
  std::vector<Counters> per_bank;
  uint64_t simulated_cycles = 0;
  double simulated_ns = 0;
  EnergyBreakdown energy;
  FtsAccounting fts;
  size_t miss_tracker_peak = 0;
  uint64_t flush_relocs = 0;  // end-of-run dirty-flush share of totals.relocs

  // Rates are absent when their denominator is zero.
  std::optional<double> cache_hit_rate;
  std::optional<double> row_buffer_hit_rate;
  std::optional<double> mean_latency_ns;
  std::optional<double> median_latency_ns;
  std::optional<double> p99_latency_ns;

  // Sweep bookkeeping: failed points carry a diagnostic here.
  std::string error;
};

// Computes rates and energy from raw counters. Dynamic energy is exact
// integer picojoules: counts x per-event costs.
RunReport finalize(const DramConfig& config, uint64_t seed, const Counters& totals,
                   const std::vector<Counters>& per_bank, const LatencyRecorder& latencies,
                   uint64_t simulated_cycles, size_t miss_tracker_peak);

enum class ReportFormat { CSV, JSON };

std::string csv_header();
std::string csv_row(const RunReport& report);
std::string to_json(const RunReport& report);

void emit(const std::vector<RunReport>& reports, ReportFormat format, const std::string& path);
std::string emit_string(const std::vector<RunReport>& reports, ReportFormat format);

}  // namespace figsim
