#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "figsim/config.hpp"
#include "figsim/rng.hpp"

namespace figsim {

using Cycle = int64_t;

enum class CmdKind { Act, Rd, Wr, Pre, Reloc };

const char* cmd_name(CmdKind k);

// One timed DRAM command against a single bank. ACT uses `row` (extended row
// id, see BankLayout); RD/WR use `column`; RELOC carries the dual column
// addresses (source column, destination subarray, destination column).
struct Command {
  CmdKind kind = CmdKind::Act;
  uint32_t bank = 0;  // global bank index, informational
  uint32_t row = 0;
  uint32_t column = 0;
  uint32_t dst_subarray = 0;
  uint32_t dst_column = 0;
  uint64_t wr_seq = 0;  // WR data identity (trace sequence number)
  Cycle issue_cycle = 0;
};

// Block content identity: a 64-bit token plus the demand-write sequence that
// produced it. RELOC copies both verbatim; demand writes only move forward in
// sequence so same-address write order is preserved across modes.
struct TokenValue {
  uint64_t token = 0;
  uint64_t seq = 0;
  bool operator==(const TokenValue& o) const { return token == o.token && seq == o.seq; }
};

// Sparse map from physical block location to its current token. Unwritten
// blocks read as a deterministic function of their key, so the map only holds
// blocks that a command has touched. Cache rows use extended row ids disjoint
// from home rows, which keeps the two keyspaces separate by construction. The
// key layout is fixed (bank | row | column bit fields) so stores from runs in
// different modes stay directly comparable.
class BlockStore {
 public:
  explicit BlockStore(const DramGeometry& g) : home_rows_(g.rows_per_bank()) {}

  static uint64_t key(uint32_t bank, uint32_t ext_row, uint32_t col) {
    return (static_cast<uint64_t>(bank) << 40) | (static_cast<uint64_t>(ext_row) << 16) | col;
  }
  bool key_is_home(uint64_t key) const { return ((key >> 16) & 0xffffff) < home_rows_; }

  TokenValue read(uint64_t key) const {
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    return TokenValue{splitmix64(key ^ 0xf19a20c5u), 0};
  }

  // Demand write: newest trace sequence wins regardless of issue order. The
  // token identifies the write itself, not the location, so a write absorbed
  // by a cache copy and later relocated home matches the direct-write token.
  static TokenValue write_token(uint64_t seq) {
    return TokenValue{splitmix64(0x57a7eull ^ splitmix64(seq)), seq};
  }
  void write_demand(uint64_t key, uint64_t seq) {
    auto cur = read(key);
    if (seq >= cur.seq) map_[key] = write_token(seq);
  }

  // Verbatim copy (RELOC commit, idealized relocation paths).
  void copy_in(uint64_t key, TokenValue v) { map_[key] = v; }

  // Home-space contents are value-equal: every home block reads the same in
  // both stores. Cache-space leftovers are ignored.
  static bool home_state_equal(const BlockStore& a, const BlockStore& b);

  size_t touched_blocks() const { return map_.size(); }

 private:
  uint64_t home_rows_;
  std::unordered_map<uint64_t, TokenValue> map_;
};

// Maps extended row ids onto subarrays. Home rows occupy [0, rows_per_bank);
// cache rows follow at rows_per_bank + id. Fast-subarray caches append their
// subarrays after the regular ones; FigSlow parks cache rows in shadow row
// indices of the designated regular subarray.
struct BankLayout {
  uint32_t slow_subarrays = 0;
  uint32_t rows_per_subarray = 0;
  uint32_t blocks_per_row = 0;
  uint32_t cache_rows = 0;
  uint32_t fast_subarrays = 0;       // appended after the slow ones
  uint32_t fast_subarray_rows = 0;
  uint32_t slow_cache_subarray = 0;  // FigSlow only
  bool cache_in_slow_subarray = false;
  bool all_fast = false;  // LLDram

  static BankLayout from_config(const DramConfig& config);

  uint32_t total_subarrays() const { return slow_subarrays + fast_subarrays; }
  uint32_t home_rows() const { return slow_subarrays * rows_per_subarray; }
  bool row_is_cache(uint32_t ext_row) const { return ext_row >= home_rows(); }
  uint32_t cache_row_id(uint32_t ext_row) const { return ext_row - home_rows(); }
  uint32_t cache_row_ext(uint32_t cache_row) const { return home_rows() + cache_row; }

  uint32_t subarray_of_row(uint32_t ext_row) const {
    if (!row_is_cache(ext_row)) return ext_row / rows_per_subarray;
    uint32_t id = cache_row_id(ext_row);
    if (cache_in_slow_subarray) return slow_cache_subarray;
    return slow_subarrays + id / fast_subarray_rows;
  }
  bool subarray_is_fast(uint32_t subarray) const {
    return all_fast || subarray >= slow_subarrays;
  }
};

// Per-bank command state machine: per-subarray local row buffers, the RELOC
// source latch, column staging, and every timing window can_issue enforces.
class BankModel {
 public:
  enum class Phase { Precharged, Activating, Active };

  BankModel(const BankLayout& layout, const TimingCycles& slow, const TimingCycles& fast,
            uint32_t global_bank);

  bool can_issue(const Command& cmd, Cycle now) const;

  // Applies the command. Throws IllegalCommand when can_issue is false.
  void issue(const Command& cmd, Cycle now, BlockStore& store);

  // Observability ---------------------------------------------------------
  Phase subarray_phase(uint32_t subarray, Cycle now) const;
  std::optional<uint32_t> open_row() const;  // row of the column-command target
  std::optional<uint32_t> open_subarray() const { return open_subarray_; }
  bool any_active() const { return active_count_ > 0; }
  Cycle open_row_act_cycle() const;
  const BankLayout& layout() const { return layout_; }
  uint32_t global_bank() const { return global_bank_; }

  // Earliest cycle >= now at which *some* state-dependent window opens; used
  // by the simulation loop to skip idle time. Conservative, never late.
  Cycle next_ready_hint(Cycle now) const;

  // Earliest legal cycles for specific follow-on commands.
  Cycle earliest_act(uint32_t ext_row) const;
  Cycle earliest_col(uint32_t open_subarray) const;
  Cycle earliest_pre() const;
  Cycle earliest_reloc() const;

  const TimingCycles& cycles_for(uint32_t subarray) const {
    return layout_.subarray_is_fast(subarray) ? fast_ : slow_;
  }

 private:
  struct Subarray {
    bool active = false;
    uint32_t row = 0;  // extended row id
    Cycle act_cycle = 0;
  };

  struct Staging {
    uint32_t dst_subarray = 0;
    std::vector<std::pair<uint32_t, TokenValue>> columns;  // (dst column, value)
  };

  BankLayout layout_;
  TimingCycles slow_, fast_;
  uint32_t global_bank_;
  std::vector<Subarray> subarrays_;
  std::optional<uint32_t> open_subarray_;
  std::optional<uint32_t> latched_src_;
  std::optional<Staging> staging_;
  uint32_t active_count_ = 0;
  Cycle last_pre_ = kNever;
  Cycle last_col_ = kNever;
  Cycle last_reloc_ = kNever;

  static constexpr Cycle kNever = -(1ll << 60);
};

// Closed-form relocation cost in ns for an n-block transfer. Closed source:
// tRAS + n*tRELOC + tRCD + tRP; open source drops the leading tRAS. tRAS is
// the source-side restore window; tRCD/tRP are charged at the destination
// subarray's speed class.
double relocation_latency(uint32_t n_blocks, bool source_open, const TimingParams& src_timings,
                          const TimingParams& dst_timings);
double relocation_latency(uint32_t n_blocks, bool source_open, const TimingParams& timings);
// Mode-aware: FigIdeal relocates for free.
double relocation_latency(Mode mode, uint32_t n_blocks, bool source_open,
                          const TimingParams& src_timings, const TimingParams& dst_timings);

}  // namespace figsim
