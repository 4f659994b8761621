#include <doctest.h>

#include "figsim/address.hpp"
#include "figsim/dram.hpp"
#include "figsim/errors.hpp"
#include "figsim/rng.hpp"
#include "oracles/fuzz.hpp"
#include "oracles/memory_oracle.hpp"

using namespace figsim;

namespace {

// A small geometry keeps the flat-array oracle cheap.
DramConfig small_config(Mode mode = Mode::FigFast) {
  DramConfig c;
  c.geometry.bank_groups = 1;
  c.geometry.banks_per_group = 1;
  c.geometry.subarrays_per_bank = 4;
  c.geometry.rows_per_subarray = 8;
  c.geometry.row_bytes = 1024;
  c.geometry.blocks_per_segment = 4;
  c.policy.mode = mode;
  c.policy.cache_rows_per_bank = 4;
  c.policy.fast_subarrays = 2;
  c.policy.fast_subarray_rows = 2;
  c.policy.cache_subarray = 3;
  if (mode == Mode::FigSlow) c.policy.fast_subarrays = 0;
  if (mode == Mode::Base || mode == Mode::LLDram) {
    c.policy.cache_rows_per_bank = 64;  // ignored
  }
  validate(c);
  return c;
}

struct Rig {
  DramConfig cfg;
  BankLayout layout;
  BankModel bank;
  BlockStore store;
  explicit Rig(DramConfig c)
      : cfg(c),
        layout(BankLayout::from_config(c)),
        bank(layout, to_cycles(c.timing), to_cycles(c.fast_timing()), 0),
        store(c.geometry) {}
  void issue(CmdKind kind, Cycle now, uint32_t row_or_col = 0, uint32_t dst_sub = 0,
             uint32_t dst_col = 0, uint64_t wr_seq = 0) {
    Command cmd;
    cmd.kind = kind;
    if (kind == CmdKind::Act) {
      cmd.row = row_or_col;
    } else {
      cmd.column = row_or_col;
    }
    cmd.dst_subarray = dst_sub;
    cmd.dst_column = dst_col;
    cmd.wr_seq = wr_seq;
    bank.issue(cmd, now, store);
  }
  bool can(CmdKind kind, Cycle now, uint32_t row_or_col = 0, uint32_t dst_sub = 0,
           uint32_t dst_col = 0) {
    Command cmd;
    cmd.kind = kind;
    if (kind == CmdKind::Act) {
      cmd.row = row_or_col;
    } else {
      cmd.column = row_or_col;
    }
    cmd.dst_subarray = dst_sub;
    cmd.dst_column = dst_col;
    return bank.can_issue(cmd, now);
  }
};

}  // namespace

TEST_CASE("column commands wait exactly tRCD after activation") {
  Rig rig(small_config(Mode::Base));
  const Cycle rcd = 11, ras = 28;
  rig.issue(CmdKind::Act, 0, /*row=*/5);
  CHECK_FALSE(rig.can(CmdKind::Rd, rcd - 1, 3));
  CHECK(rig.can(CmdKind::Rd, rcd, 3));
  CHECK_FALSE(rig.can(CmdKind::Pre, ras - 1));
  CHECK(rig.can(CmdKind::Pre, ras));
}

TEST_CASE("consecutive column commands respect tCCD") {
  Rig rig(small_config(Mode::Base));
  rig.issue(CmdKind::Act, 0, 5);
  rig.issue(CmdKind::Rd, 11, 3);
  CHECK_FALSE(rig.can(CmdKind::Rd, 14, 4));  // tCCD = 4 cycles
  CHECK(rig.can(CmdKind::Rd, 15, 4));
}

TEST_CASE("activation needs tRP after precharge and a closed target") {
  Rig rig(small_config(Mode::Base));
  rig.issue(CmdKind::Act, 0, 5);
  CHECK_FALSE(rig.can(CmdKind::Act, 10, 9));  // another row while one is open
  rig.issue(CmdKind::Pre, 28);
  CHECK_FALSE(rig.can(CmdKind::Act, 28 + 10, 9));
  CHECK(rig.can(CmdKind::Act, 28 + 11, 9));
}

TEST_CASE("the full relocation sequence is legal step by step") {
  Rig rig(small_config(Mode::FigFast));
  const uint32_t cache_row = rig.layout.cache_row_ext(0);
  const uint32_t dst_sub = rig.layout.subarray_of_row(cache_row);

  rig.issue(CmdKind::Act, 0, /*src row=*/5);
  // RELOC only after the source row is fully restored (tRAS = 28 cycles).
  CHECK_FALSE(rig.can(CmdKind::Reloc, 27, 2, dst_sub, 1));
  CHECK(rig.can(CmdKind::Reloc, 28, 2, dst_sub, 1));
  rig.issue(CmdKind::Reloc, 28, 2, dst_sub, 1);
  // Back-to-back RELOCs at the t_reloc gap.
  CHECK_FALSE(rig.can(CmdKind::Reloc, 28, 3, dst_sub, 2));
  CHECK(rig.can(CmdKind::Reloc, 29, 3, dst_sub, 2));
  // Destination activation is allowed mid-sequence (two open rows).
  CHECK(rig.can(CmdKind::Act, 29, cache_row));
  rig.issue(CmdKind::Act, 29, cache_row);
  // Now both source and destination are open; PRE closes the bank after the
  // destination's (fast) tRAS window.
  CHECK_FALSE(rig.can(CmdKind::Act, 40, 9));
  Cycle fast_ras = static_cast<Cycle>(to_cycles(rig.cfg.fast_timing()).ras);
  CHECK_FALSE(rig.can(CmdKind::Pre, 29 + fast_ras - 1));
  CHECK(rig.can(CmdKind::Pre, 29 + fast_ras));
}

TEST_CASE("RELOC rejects same-subarray and open destinations") {
  Rig rig(small_config(Mode::FigFast));
  rig.issue(CmdKind::Act, 0, 5);  // subarray 0
  CHECK_FALSE(rig.can(CmdKind::Reloc, 28, 2, /*dst_sub=*/0, 1));
  CHECK(rig.can(CmdKind::Reloc, 28, 2, /*dst_sub=*/1, 1));
}

TEST_CASE("issue refuses illegal commands") {
  Rig rig(small_config(Mode::Base));
  rig.issue(CmdKind::Act, 0, 5);
  CHECK_THROWS_AS(rig.issue(CmdKind::Rd, 5, 0), IllegalCommand);  // before tRCD
  CHECK_THROWS_AS(rig.issue(CmdKind::Act, 50, 9), IllegalCommand);
}

TEST_CASE("RELOC copies one column, commit overwrites only staged columns") {
  Rig rig(small_config(Mode::FigFast));
  const uint32_t src_row = 5;
  const uint32_t dst_row = rig.layout.cache_row_ext(1);
  const uint32_t dst_sub = rig.layout.subarray_of_row(dst_row);
  TokenValue src_tok = rig.store.read(rig.store.key(0, src_row, 3));
  std::vector<TokenValue> before;
  for (uint32_t c = 0; c < rig.layout.blocks_per_row; ++c) {
    before.push_back(rig.store.read(rig.store.key(0, dst_row, c)));
  }

  rig.issue(CmdKind::Act, 0, src_row);
  rig.issue(CmdKind::Reloc, 28, /*src col=*/3, dst_sub, /*dst col=*/1);
  rig.issue(CmdKind::Act, 29, dst_row);

  CHECK(rig.store.read(rig.store.key(0, dst_row, 1)) == src_tok);
  for (uint32_t c = 0; c < rig.layout.blocks_per_row; ++c) {
    if (c == 1) continue;
    CHECK(rig.store.read(rig.store.key(0, dst_row, c)) == before[c]);
  }
}

TEST_CASE("aligned RELOC (same column) behaves identically") {
  Rig rig(small_config(Mode::FigFast));
  TokenValue src_tok = rig.store.read(rig.store.key(0, 5, 6));
  rig.issue(CmdKind::Act, 0, 5);
  rig.issue(CmdKind::Reloc, 28, 6, 1, 6);
  rig.issue(CmdKind::Act, 29, /*row in subarray 1*/ 8 + 2);
  CHECK(rig.store.read(rig.store.key(0, 10, 6)) == src_tok);
}

TEST_CASE("a staged segment commits wholly, the rest of the row survives") {
  Rig rig(small_config(Mode::FigFast));
  oracle::FlatBank flat(rig.layout, rig.store, 0);
  const uint32_t dst_row = rig.layout.cache_row_ext(2);
  const uint32_t dst_sub = rig.layout.subarray_of_row(dst_row);

  auto both = [&](CmdKind kind, Cycle now, uint32_t a = 0, uint32_t ds = 0, uint32_t dc = 0,
                  uint64_t seq = 0) {
    Command cmd;
    cmd.kind = kind;
    if (kind == CmdKind::Act) {
      cmd.row = a;
    } else {
      cmd.column = a;
    }
    cmd.dst_subarray = ds;
    cmd.dst_column = dc;
    cmd.wr_seq = seq;
    rig.bank.issue(cmd, now, rig.store);
    flat.apply(cmd, static_cast<uint64_t>(now));
  };

  both(CmdKind::Act, 0, 5);
  Cycle t = 28;
  for (uint32_t i = 0; i < 4; ++i) {  // one 4-block segment
    both(CmdKind::Reloc, t++, /*src col=*/4 + i, dst_sub, /*dst col=*/8 + i);
  }
  both(CmdKind::Act, t, dst_row);
  both(CmdKind::Pre, t + 11);
  CHECK(flat.matches(rig.store));
}

TEST_CASE("precharge discards uncommitted staging") {
  Rig rig(small_config(Mode::FigFast));
  const uint32_t dst_row = rig.layout.cache_row_ext(0);
  const uint32_t dst_sub = rig.layout.subarray_of_row(dst_row);
  TokenValue before = rig.store.read(rig.store.key(0, dst_row, 1));
  rig.issue(CmdKind::Act, 0, 5);
  rig.issue(CmdKind::Reloc, 28, 3, dst_sub, 1);
  rig.issue(CmdKind::Pre, 29);
  rig.issue(CmdKind::Act, 45, dst_row);
  CHECK(rig.store.read(rig.store.key(0, dst_row, 1)) == before);
}

TEST_CASE("writes move tokens forward by trace sequence") {
  Rig rig(small_config(Mode::Base));
  rig.issue(CmdKind::Act, 0, 5);
  rig.issue(CmdKind::Wr, 11, 2, 0, 0, /*seq=*/10);
  TokenValue newer = rig.store.read(rig.store.key(0, 5, 2));
  CHECK(newer.seq == 10);
  rig.issue(CmdKind::Wr, 15, 2, 0, 0, /*seq=*/4);  // stale write loses
  CHECK(rig.store.read(rig.store.key(0, 5, 2)) == newer);
}

TEST_CASE("random legal schedules replay exactly on the flat-array oracle") {
  for (Mode mode : {Mode::Base, Mode::FigFast, Mode::FigSlow}) {
    Rig rig(small_config(mode));
    oracle::FlatBank flat(rig.layout, rig.store, 0);
    oracle::LegalityOracle validator(rig.layout, rig.cfg.timing, rig.cfg.fast_timing());
    Rng rng(99 + static_cast<uint64_t>(mode));
    Cycle now = 0;
    int issued = 0;
    const uint32_t total_rows = rig.layout.home_rows() + rig.layout.cache_rows;
    while (issued < 4000) {
      Command cmd;
      switch (rng.bounded(7)) {
        case 0:
        case 1:
          cmd.kind = CmdKind::Act;
          cmd.row = static_cast<uint32_t>(rng.bounded(total_rows));
          break;
        case 2:
          cmd.kind = CmdKind::Rd;
          cmd.column = static_cast<uint32_t>(rng.bounded(rig.layout.blocks_per_row));
          break;
        case 3:
          cmd.kind = CmdKind::Wr;
          cmd.column = static_cast<uint32_t>(rng.bounded(rig.layout.blocks_per_row));
          cmd.wr_seq = static_cast<uint64_t>(issued) + 1;
          break;
        case 4:
          cmd.kind = CmdKind::Pre;
          break;
        default:
          cmd.kind = CmdKind::Reloc;
          cmd.column = static_cast<uint32_t>(rng.bounded(rig.layout.blocks_per_row));
          cmd.dst_subarray = static_cast<uint32_t>(rng.bounded(rig.layout.total_subarrays()));
          cmd.dst_column = static_cast<uint32_t>(rng.bounded(rig.layout.blocks_per_row));
          break;
      }
      if (rig.bank.can_issue(cmd, now)) {
        REQUIRE(validator.legal(cmd, now));
        rig.bank.issue(cmd, now, rig.store);
        flat.apply(cmd, static_cast<uint64_t>(now));
        validator.apply(cmd, now);
        ++issued;
      }
      now += 1 + static_cast<Cycle>(rng.bounded(6));
    }
    CHECK(flat.matches(rig.store));
  }
}

TEST_CASE("legality fuzz agrees with the independent validator") {
  for (Mode mode : {Mode::Base, Mode::FigFast, Mode::FigSlow, Mode::LLDram}) {
    auto result = oracle::run_legality_fuzz(small_config(mode), 20000, 7 + uint64_t(mode));
    CHECK(result.violations == 0);
    CHECK(result.disagreements == 0);
    CHECK(result.issued == 20000);
  }
}

TEST_CASE("relocation latency formula") {
  TimingParams t;
  CHECK(relocation_latency(1, false, t) == 63.5);
  CHECK(relocation_latency(16, true, t) == 43.5);  // 16*1 + 13.75 + 13.75
  CHECK(relocation_latency(Mode::FigIdeal, 16, false, t, t) == 0.0);
  CHECK(relocation_latency(Mode::FigFast, 1, false, t, t) == 63.5);

  // Destination timings come from the destination's speed class.
  TimingParams fast = derive_fast_timings(t);
  CHECK(relocation_latency(16, true, t, fast) == 16.0 + 7.5 + 8.75);
  CHECK(relocation_latency(1, false, t, fast) == 35.0 + 1.0 + 7.5 + 8.75);
}

TEST_CASE("RELOC dual-column addressing fits 21 bits at default geometry") {
  DramConfig c;  // defaults: 128 blocks/row, 64+2 subarrays
  c.policy.mode = Mode::FigFast;
  BankLayout layout = BankLayout::from_config(c);
  uint32_t src_col_bits = bit_width_of(layout.blocks_per_row);
  uint32_t dst_sub_bits = bit_width_of(layout.total_subarrays());
  uint32_t dst_col_bits = bit_width_of(layout.blocks_per_row);
  CHECK(src_col_bits == 7);
  CHECK(dst_sub_bits == 7);
  CHECK(dst_col_bits == 7);
  CHECK(src_col_bits + dst_sub_bits + dst_col_bits == 21);
}

TEST_CASE("block store separates home and cache keyspaces") {
  DramConfig c = small_config(Mode::FigFast);
  BlockStore store(c.geometry);
  BankLayout layout = BankLayout::from_config(c);
  uint64_t home_key = store.key(0, 5, 3);
  uint64_t cache_key = store.key(0, layout.cache_row_ext(0), 3);
  CHECK(home_key != cache_key);
  CHECK(store.key_is_home(home_key));
  CHECK_FALSE(store.key_is_home(cache_key));
}
