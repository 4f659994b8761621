#include <doctest.h>

#include "figsim/config.hpp"
#include "figsim/errors.hpp"

using namespace figsim;

TEST_CASE("empty config yields the default system") {
  DramConfig c = load_config_text("");
  CHECK(c.geometry.channels == 1);
  CHECK(c.geometry.ranks_per_channel == 1);
  CHECK(c.geometry.bank_groups == 4);
  CHECK(c.geometry.banks_per_group == 4);
  CHECK(c.geometry.subarrays_per_bank == 64);
  CHECK(c.geometry.rows_per_subarray == 512);
  CHECK(c.geometry.row_bytes == 8192);
  CHECK(c.geometry.block_bytes == 64);
  CHECK(c.geometry.blocks_per_segment == 16);
  CHECK(c.geometry.blocks_per_row() == 128);
  CHECK(c.geometry.segments_per_row() == 8);
  CHECK(c.geometry.rows_per_bank() == 32768);
  CHECK(c.geometry.banks_per_channel() == 16);
  CHECK(c.geometry.capacity_bytes() == 4ull * 1024 * 1024 * 1024);
  CHECK(c.timing.t_ras == 35.0);
  CHECK(c.timing.t_reloc == 1.0);
  CHECK(c.policy.cache_rows_per_bank == 64);
  CHECK(c.policy.insertion_threshold == 1);
  CHECK(c.policy.benefit_bits == 5);
  CHECK(c.policy.max_benefit() == 31);
}

TEST_CASE("config parse and validation errors") {
  CHECK_THROWS_AS(load_config_text("blocks_per_segment = 0"), ValidationError);
  CHECK_THROWS_AS(load_config_text("no_such_key = 1"), ParseError);
  CHECK_THROWS_AS(load_config_text("t_rcd"), ParseError);
  CHECK_THROWS_AS(load_config_text("t_rcd = banana"), ParseError);
  CHECK_THROWS_AS(load_config_text("t_ras = 5\nt_rcd = 10"), ValidationError);
  CHECK_THROWS_AS(load_config_text("row_bytes = 100"), ValidationError);

  DramConfig c = load_config_text("blocks_per_segment = 16\nrow_bytes = 8192");
  CHECK(c.geometry.segments_per_row() == 8);
}

TEST_CASE("validation names the failing field") {
  try {
    load_config_text("blocks_per_segment = 0");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field == "blocks_per_segment");
  }
}

TEST_CASE("config round-trips through serialization") {
  DramConfig c = load_config_text(
      "mode = figcache-slow\nt_rcd = 12.5\ncache_rows_per_bank = 32\ne_act = 0.0115\n"
      "random_seed = 42\nreplacement = lru");
  std::string text = save_config_text(c);
  DramConfig reloaded = load_config_text(text);
  CHECK(save_config_text(reloaded) == text);
  CHECK(reloaded.policy.mode == Mode::FigSlow);
  CHECK(reloaded.timing.t_rcd == 12.5);
  CHECK(reloaded.energy.e_act == 0.0115);
}

TEST_CASE("mode-dependent cache defaults") {
  CHECK(load_config_text("mode = figcache-fast").policy.cache_rows_per_bank == 64);
  CHECK(load_config_text("mode = figcache-fast").policy.fast_subarrays == 2);
  CHECK(load_config_text("mode = lisa-villa").policy.cache_rows_per_bank == 512);
  CHECK(load_config_text("mode = lisa-villa").policy.fast_subarrays == 16);
  CHECK(load_config_text("mode = figcache-slow").policy.fast_subarrays == 0);
  CHECK(load_config_text("mode = figcache-slow").policy.cache_subarray == 63);
}

TEST_CASE("fast timing derivation snaps up to the clock grid") {
  TimingParams base;  // defaults: 13.75 / 13.75 / 35, clock 1.25
  TimingParams fast = derive_fast_timings(base);
  CHECK(fast.t_ras == doctest::Approx(13.75).epsilon(1e-12));  // 35 * 0.371 = 12.985 -> grid
  CHECK(fast.t_rcd == doctest::Approx(7.5).epsilon(1e-12));    // 13.75 * 0.545 = 7.494
  CHECK(fast.t_rp == doctest::Approx(8.75).epsilon(1e-12));    // 13.75 * 0.618 = 8.498
  CHECK(fast.t_reloc == base.t_reloc);
  CHECK(fast.t_ccd == base.t_ccd);

  TimingParams same = derive_fast_timings(base, FastReductions{0.0, 0.0, 0.0});
  CHECK(same.t_rcd == base.t_rcd);
  CHECK(same.t_rp == base.t_rp);
  CHECK(same.t_ras == base.t_ras);
}

TEST_CASE("fast timings are monotone in the reduction factors") {
  TimingParams base;
  double prev_rcd = 1e30, prev_rp = 1e30, prev_ras = 1e30;
  for (double r = 0.0; r <= 0.95; r += 0.05) {
    TimingParams fast = derive_fast_timings(base, FastReductions{r, r, r});
    CHECK(fast.t_rcd <= prev_rcd);
    CHECK(fast.t_rp <= prev_rp);
    CHECK(fast.t_ras <= prev_ras);
    prev_rcd = fast.t_rcd;
    prev_rp = fast.t_rp;
    prev_ras = fast.t_ras;
  }
}

TEST_CASE("timing cycles round up") {
  CHECK(ns_to_cycles(35.0, 1.25) == 28);
  CHECK(ns_to_cycles(13.75, 1.25) == 11);
  CHECK(ns_to_cycles(1.0, 1.25) == 1);
  CHECK(ns_to_cycles(12.985, 1.25) == 11);
  TimingCycles c = to_cycles(TimingParams{});
  CHECK(c.rcd == 11);
  CHECK(c.rp == 11);
  CHECK(c.ras == 28);
  CHECK(c.reloc == 1);
  CHECK(c.ccd == 4);
  CHECK(c.burst == 4);
}

TEST_CASE("default timings decompose the closed relocation to 63.5 ns") {
  TimingParams t;
  CHECK(t.t_ras + t.t_reloc + t.t_rcd + t.t_rp == 63.5);
}

TEST_CASE("energy calibration identity holds exactly in picojoules") {
  EnergyParams e;
  CHECK(2 * e.act_pj() + e.pre_pj() + e.reloc_pj() == 30000);
  CHECK(static_cast<double>(2 * e.act_pj() + e.pre_pj() + e.reloc_pj()) / 1e6 == 0.03);
}

TEST_CASE("validate_mode checks cache layout") {
  // FigFast: 2 fast subarrays x 32 rows = 64 cache rows is consistent.
  CHECK_NOTHROW(load_config_text("mode = figcache-fast"));
  CHECK_THROWS_AS(load_config_text("mode = figcache-fast\ncache_rows_per_bank = 96"),
                  ValidationError);
  // FigSlow capacity bound: 600 > 512 rows per subarray.
  CHECK_THROWS_AS(load_config_text("mode = figcache-slow\ncache_rows_per_bank = 600"),
                  ValidationError);
  // Base ignores cache parameters entirely.
  CHECK_NOTHROW(load_config_text("mode = base\ncache_rows_per_bank = 99999"));
  CHECK_THROWS_AS(load_config_text("mode = figcache-slow\ncache_subarray = 64"), ValidationError);
}

TEST_CASE("cli-style overrides win over file text") {
  DramConfig c = load_config_text("t_rcd = 10\nt_rcd = 12.5");
  CHECK(c.timing.t_rcd == 12.5);
}
