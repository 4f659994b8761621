#include <doctest.h>

#include <nlohmann/json.hpp>

#include "figsim/stats.hpp"

using namespace figsim;

namespace {
RunReport tiny_report(Counters totals, uint64_t cycles = 0) {
  DramConfig cfg;
  cfg.policy.mode = Mode::FigFast;
  LatencyRecorder lat;
  return finalize(cfg, 1, totals, {totals}, lat, cycles, 0);
}
}  // namespace

TEST_CASE("one closed-row single-block relocation accounts exactly 0.03 uJ") {
  Counters c;
  c.acts = 2;
  c.pres = 1;
  c.relocs = 1;
  RunReport r = tiny_report(c);
  CHECK(r.energy.total_uj() == 0.03);
  CHECK(r.energy.act_pj == 24000);
  CHECK(r.energy.pre_pj == 5000);
  CHECK(r.energy.reloc_pj == 1000);
}

TEST_CASE("zero-request runs report rates as absent, not zero") {
  Counters c;
  RunReport r = tiny_report(c);
  CHECK_FALSE(r.cache_hit_rate.has_value());
  CHECK_FALSE(r.row_buffer_hit_rate.has_value());
  CHECK_FALSE(r.mean_latency_ns.has_value());
  std::string row = csv_row(r);
  CHECK(row.find("figcache-fast,1,0,,,,,") == 0);
}

TEST_CASE("base mode never reports a cache hit rate") {
  Counters c;
  c.requests = 10;
  DramConfig cfg;
  cfg.policy.mode = Mode::Base;
  LatencyRecorder lat;
  RunReport r = finalize(cfg, 1, c, {c}, lat, 100, 0);
  CHECK_FALSE(r.cache_hit_rate.has_value());
}

TEST_CASE("doubling every event count doubles dynamic energy exactly") {
  Counters c;
  c.acts = 123;
  c.pres = 77;
  c.relocs = 991;
  c.column_reads = 421;
  c.column_writes = 88;
  Counters doubled = c;
  doubled += c;
  RunReport r1 = tiny_report(c);
  RunReport r2 = tiny_report(doubled);
  double dyn1 = static_cast<double>(r1.energy.act_pj + r1.energy.pre_pj + r1.energy.rd_pj +
                                    r1.energy.wr_pj + r1.energy.reloc_pj);
  double dyn2 = static_cast<double>(r2.energy.act_pj + r2.energy.pre_pj + r2.energy.rd_pj +
                                    r2.energy.wr_pj + r2.energy.reloc_pj);
  CHECK(dyn2 == 2.0 * dyn1);
}

TEST_CASE("rates come from the counter identities") {
  Counters c;
  c.requests = 100;
  c.cache_hits = 60;
  c.cache_misses = 40;
  c.row_buffer_hits = 50;
  c.row_buffer_misses = 30;
  c.row_buffer_conflicts = 20;
  RunReport r = tiny_report(c, 1000);
  CHECK(*r.cache_hit_rate == doctest::Approx(0.6));
  CHECK(*r.row_buffer_hit_rate == doctest::Approx(0.5));
  CHECK(r.simulated_ns == 1250.0);
}

TEST_CASE("csv emission is stable and shaped as header plus one row per run") {
  Counters c;
  c.requests = 5;
  c.cache_hits = 2;
  c.cache_misses = 3;
  RunReport r = tiny_report(c, 10);
  std::string once = emit_string({r, r}, ReportFormat::CSV);
  std::string twice = emit_string({r, r}, ReportFormat::CSV);
  CHECK(once == twice);
  size_t lines = 0;
  for (char ch : once) lines += ch == '\n';
  CHECK(lines == 3);  // header + 2 rows
  CHECK(once.rfind("mode,seed,requests,cache_hit_rate,row_buffer_hit_rate,mean_latency_ns,"
                   "p99_latency_ns,energy_uj,relocs,evictions,dirty_writebacks,simulated_ns,"
                   "errors\n",
                   0) == 0);
}

TEST_CASE("json reports round-trip through a generic parser") {
  Counters c;
  c.requests = 42;
  c.cache_hits = 21;
  c.cache_misses = 21;
  c.relocs = 7;
  RunReport r = tiny_report(c, 5000);
  std::string text = to_json(r);
  auto j = nlohmann::json::parse(text);
  CHECK(j["counters"]["requests"] == 42);
  CHECK(j["counters"]["relocs"] == 7);
  CHECK(j["cache_hit_rate"].get<double>() == *r.cache_hit_rate);
  CHECK(j["simulated_ns"].get<double>() == r.simulated_ns);
  CHECK(j["energy"]["total_uj"].get<double>() == r.energy.total_uj());
  CHECK(j["fts"]["entries_per_bank"] == 512);
  CHECK(j["config"]["t_ras"].get<double>() == 35.0);
}

TEST_CASE("latency recorder percentiles") {
  LatencyRecorder lat;
  for (int i = 1; i <= 100; ++i) lat.record(static_cast<double>(i));
  CHECK(lat.mean() == doctest::Approx(50.5));
  CHECK(lat.median() == 50.0);
  CHECK(lat.p99() == 99.0);
}
