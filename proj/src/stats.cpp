#include "figsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "figsim/errors.hpp"
#include "figsim/rng.hpp"

namespace figsim {

Counters& Counters::operator+=(const Counters& o) {
  requests += o.requests;
  reads += o.reads;
  writes += o.writes;
  row_buffer_hits += o.row_buffer_hits;
  row_buffer_misses += o.row_buffer_misses;
  row_buffer_conflicts += o.row_buffer_conflicts;
  cache_hits += o.cache_hits;
  cache_misses += o.cache_misses;
  insertions += o.insertions;
  evictions += o.evictions;
  dirty_writebacks += o.dirty_writebacks;
  acts += o.acts;
  pres += o.pres;
  relocs += o.relocs;
  column_reads += o.column_reads;
  column_writes += o.column_writes;
  cache_row_accesses += o.cache_row_accesses;
  cache_row_hits += o.cache_row_hits;
  return *this;
}

void LatencyRecorder::record(double ns) {
  ++count_;
  sum_ += ns;
  if (count_ <= kExactLimit) {
    samples_.push_back(ns);
    return;
  }
  if (samples_.size() > kReservoirSize) {
    // Crossing the exact limit: thin the stored samples down to the reservoir.
    std::vector<double> kept;
    kept.reserve(kReservoirSize);
    size_t stride = samples_.size() / kReservoirSize;
    for (size_t i = 0; i < samples_.size() && kept.size() < kReservoirSize; i += stride) {
      kept.push_back(samples_[i]);
    }
    samples_ = std::move(kept);
  }
  rng_state_ = splitmix64(rng_state_ ^ count_);
  uint64_t pick = rng_state_ % count_;
  if (pick < samples_.size()) samples_[pick] = ns;
}

void LatencyRecorder::merge(const LatencyRecorder& other) {
  // Channels are merged post-run; totals stay exact, samples concatenate.
  count_ += other.count_;
  sum_ += other.sum_;
  samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
}

double LatencyRecorder::mean() const { return count_ == 0 ? 0.0 : sum_ / count_; }

double LatencyRecorder::percentile(double q) const {
  if (samples_.empty()) return 0.0;
  std::vector<double> sorted = samples_;
  std::sort(sorted.begin(), sorted.end());
  size_t idx = static_cast<size_t>(std::ceil(q * sorted.size()));
  if (idx > 0) --idx;
  return sorted[std::min(idx, sorted.size() - 1)];
}

double LatencyRecorder::median() const { return percentile(0.5); }
double LatencyRecorder::p99() const { return percentile(0.99); }

RunReport finalize(const DramConfig& config, uint64_t seed, const Counters& totals,
                   const std::vector<Counters>& per_bank, const LatencyRecorder& latencies,
                   uint64_t simulated_cycles, size_t miss_tracker_peak) {
  RunReport r;
  r.config = config;
  r.seed = seed;
  r.totals = totals;
  r.per_bank = per_bank;
  r.simulated_cycles = simulated_cycles;
  r.simulated_ns = static_cast<double>(simulated_cycles) * config.timing.clock_period;
  r.miss_tracker_peak = miss_tracker_peak;

  const auto& e = config.energy;
  r.energy.act_pj = static_cast<int64_t>(totals.acts) * e.act_pj();
  r.energy.pre_pj = static_cast<int64_t>(totals.pres) * e.pre_pj();
  r.energy.rd_pj = static_cast<int64_t>(totals.column_reads) * e.rd_pj();
  r.energy.wr_pj = static_cast<int64_t>(totals.column_writes) * e.wr_pj();
  r.energy.reloc_pj = static_cast<int64_t>(totals.relocs) * e.reloc_pj();
  r.energy.static_pj = e.static_pj_per_ns() * r.simulated_ns;

  r.fts = fts_accounting(config);

  if (config.policy.caching_enabled() && totals.requests > 0) {
    r.cache_hit_rate = static_cast<double>(totals.cache_hits) / totals.requests;
  }
  uint64_t demand_cols = totals.row_buffer_hits + totals.row_buffer_misses +
                         totals.row_buffer_conflicts;
  if (demand_cols > 0) {
    r.row_buffer_hit_rate = static_cast<double>(totals.row_buffer_hits) / demand_cols;
  }
  if (latencies.count() > 0) {
    r.mean_latency_ns = latencies.mean();
    r.median_latency_ns = latencies.median();
    r.p99_latency_ns = latencies.p99();
  }
  return r;
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string opt_fmt(const std::optional<double>& v, const char* spec = "%.6f") {
  return v ? fmt(*v, spec) : std::string();
}

}  // namespace

std::string csv_header() {
  return "mode,seed,requests,cache_hit_rate,row_buffer_hit_rate,mean_latency_ns,"
         "p99_latency_ns,energy_uj,relocs,evictions,dirty_writebacks,simulated_ns,errors\n";
}

std::string csv_row(const RunReport& r) {
  std::ostringstream out;
  out << mode_name(r.config.policy.mode) << ',' << r.seed << ',' << r.totals.requests << ','
      << opt_fmt(r.cache_hit_rate) << ',' << opt_fmt(r.row_buffer_hit_rate) << ','
      << opt_fmt(r.mean_latency_ns, "%.3f") << ',' << opt_fmt(r.p99_latency_ns, "%.3f") << ','
      << fmt(r.energy.total_uj()) << ',' << r.totals.relocs << ',' << r.totals.evictions << ','
      << r.totals.dirty_writebacks << ',' << fmt(r.simulated_ns, "%.3f") << ',' << r.error
      << '\n';
  return out.str();
}

namespace {

nlohmann::ordered_json counters_json(const Counters& c) {
  return nlohmann::ordered_json{{"requests", c.requests},
                                {"reads", c.reads},
                                {"writes", c.writes},
                                {"row_buffer_hits", c.row_buffer_hits},
                                {"row_buffer_misses", c.row_buffer_misses},
                                {"row_buffer_conflicts", c.row_buffer_conflicts},
                                {"cache_hits", c.cache_hits},
                                {"cache_misses", c.cache_misses},
                                {"insertions", c.insertions},
                                {"evictions", c.evictions},
                                {"dirty_writebacks", c.dirty_writebacks},
                                {"acts", c.acts},
                                {"pres", c.pres},
                                {"relocs", c.relocs},
                                {"column_reads", c.column_reads},
                                {"column_writes", c.column_writes},
                                {"cache_row_accesses", c.cache_row_accesses},
                                {"cache_row_hits", c.cache_row_hits}};
}

}  // namespace

std::string to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  {
    nlohmann::ordered_json cfg;
    std::istringstream in(save_config_text(r.config));
    std::string line;
    while (std::getline(in, line)) {
      auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 3);
      // Numbers stay numbers; enums stay strings.
      try {
        size_t pos = 0;
        double d = std::stod(value, &pos);
        if (pos == value.size()) {
          if (d == std::floor(d) && std::abs(d) < 9e15 && value.find('.') == std::string::npos) {
            cfg[key] = static_cast<int64_t>(d);
          } else {
            cfg[key] = d;
          }
          continue;
        }
      } catch (const std::exception&) {
      }
      cfg[key] = value;
    }
    j["config"] = cfg;
  }
  j["seed"] = r.seed;
  j["counters"] = counters_json(r.totals);
  nlohmann::ordered_json banks = nlohmann::ordered_json::array();
  for (const auto& b : r.per_bank) banks.push_back(counters_json(b));
  j["per_bank"] = banks;
  j["latency_ns"] = nlohmann::ordered_json::object();
  if (r.mean_latency_ns) {
    j["latency_ns"]["mean"] = *r.mean_latency_ns;
    j["latency_ns"]["median"] = *r.median_latency_ns;
    j["latency_ns"]["p99"] = *r.p99_latency_ns;
  }
  if (r.cache_hit_rate) j["cache_hit_rate"] = *r.cache_hit_rate;
  if (r.row_buffer_hit_rate) j["row_buffer_hit_rate"] = *r.row_buffer_hit_rate;
  j["simulated_cycles"] = r.simulated_cycles;
  j["simulated_ns"] = r.simulated_ns;
  j["energy"] = nlohmann::ordered_json{{"total_uj", r.energy.total_uj()},
                                       {"act_pj", r.energy.act_pj},
                                       {"pre_pj", r.energy.pre_pj},
                                       {"rd_pj", r.energy.rd_pj},
                                       {"wr_pj", r.energy.wr_pj},
                                       {"reloc_pj", r.energy.reloc_pj},
                                       {"static_pj", r.energy.static_pj}};
  j["fts"] = nlohmann::ordered_json{
      {"entries_per_bank", r.fts.entries_per_bank},
      {"segments_per_bank", r.fts.segments_per_bank},
      {"tag_bits_computed", r.fts.tag_bits_computed},
      {"entry_bits_computed", r.fts.entry_bits_computed},
      {"bytes_per_channel_computed", r.fts.bytes_per_channel_computed},
      {"tag_bits_nominal", r.fts.tag_bits_nominal},
      {"entry_bits_nominal", r.fts.entry_bits_nominal},
      {"bytes_per_channel_nominal", r.fts.bytes_per_channel_nominal},
      {"kb_per_channel_nominal", r.fts.kb_per_channel_nominal}};
  j["miss_tracker_peak"] = r.miss_tracker_peak;
  j["flush_relocs"] = r.flush_relocs;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump(2);
}

std::string emit_string(const std::vector<RunReport>& reports, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::CSV) {
    out << csv_header();
    for (const auto& r : reports) out << csv_row(r);
  } else {
    if (reports.size() == 1) {
      out << to_json(reports[0]) << "\n";
    } else {
      out << "[\n";
      for (size_t i = 0; i < reports.size(); ++i) {
        out << to_json(reports[i]);
        if (i + 1 < reports.size()) out << ",";
        out << "\n";
      }
      out << "]\n";
    }
  }
  return out.str();
}

void emit(const std::vector<RunReport>& reports, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report file '" + path + "'");
  out << emit_string(reports, format);
  if (!out) throw IoError("error writing report file '" + path + "'");
}

}  // namespace figsim
