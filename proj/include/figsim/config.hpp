#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace figsim {

enum class Mode { Base, FigFast, FigSlow, LisaVilla, FigIdeal, LLDram };
enum class Replacement { RowBenefit, SegmentBenefit, LRU, Random };

const char* mode_name(Mode m);
const char* replacement_name(Replacement r);
Mode parse_mode(const std::string& s);
Replacement parse_replacement(const std::string& s);

struct DramGeometry {
  uint32_t channels = 1;
  uint32_t ranks_per_channel = 1;
  uint32_t bank_groups = 4;
  uint32_t banks_per_group = 4;
  uint32_t subarrays_per_bank = 64;
  uint32_t rows_per_subarray = 512;
  uint64_t row_bytes = 8192;
  uint64_t block_bytes = 64;
  uint32_t blocks_per_segment = 16;

  uint32_t blocks_per_row() const { return static_cast<uint32_t>(row_bytes / block_bytes); }
  uint32_t segments_per_row() const { return blocks_per_row() / blocks_per_segment; }
  uint32_t rows_per_bank() const { return subarrays_per_bank * rows_per_subarray; }
  uint32_t banks_per_rank() const { return bank_groups * banks_per_group; }
  uint32_t banks_per_channel() const { return ranks_per_channel * banks_per_rank(); }
  uint32_t banks_total() const { return channels * banks_per_channel(); }
  uint64_t capacity_bytes() const {
    return static_cast<uint64_t>(banks_total()) * rows_per_bank() * row_bytes;
  }
  uint64_t segments_per_bank() const {
    return static_cast<uint64_t>(rows_per_bank()) * segments_per_row();
  }
};

// All values in nanoseconds. The command engine works on integer clock
// cycles derived from these (rounded up); the raw ns values stay authoritative
// for the closed-form latency accounting.
struct TimingParams {
  double t_rcd = 13.75;
  double t_rp = 13.75;
  double t_ras = 35.0;
  double t_reloc = 1.0;
  double t_ccd = 5.0;
  double t_burst = 5.0;
  double clock_period = 1.25;
};

// Fast-subarray reductions for tRCD / tRP / tRAS.
struct FastReductions {
  double rcd = 0.455;
  double rp = 0.382;
  double ras = 0.629;
};

// ns -> whole clock cycles, rounded up. A small guard absorbs FP noise when
// the quotient is already integral.
uint64_t ns_to_cycles(double ns, double clock_period);

// Integer-cycle view of a timing set, used by the bank state machine.
struct TimingCycles {
  uint64_t rcd = 0;
  uint64_t rp = 0;
  uint64_t ras = 0;
  uint64_t reloc = 0;
  uint64_t ccd = 0;
  uint64_t burst = 0;
};

TimingCycles to_cycles(const TimingParams& t);

// Scales tRCD/tRP/tRAS down by the given reductions, snapping each result up
// to the clock grid. Other fields pass through unchanged.
TimingParams derive_fast_timings(const TimingParams& base,
                                 const FastReductions& red = FastReductions{});

// Values in microjoules. Accounting happens in integer picojoules so the
// calibration identity (2*e_act + e_pre + e_reloc = 0.03 uJ) stays exact.
struct EnergyParams {
  double e_act = 0.012;
  double e_pre = 0.005;
  double e_rd = 0.004;
  double e_wr = 0.004;
  double e_reloc = 0.001;
  double e_static = 0.0;  // uJ per simulated ns

  int64_t act_pj() const;
  int64_t pre_pj() const;
  int64_t rd_pj() const;
  int64_t wr_pj() const;
  int64_t reloc_pj() const;
  double static_pj_per_ns() const;
};

struct PolicyConfig {
  Mode mode = Mode::FigFast;
  uint32_t cache_rows_per_bank = 64;
  Replacement replacement = Replacement::RowBenefit;
  uint32_t insertion_threshold = 1;
  uint32_t benefit_bits = 5;
  double lisa_hop_ns = 8.0;
  uint64_t random_seed = 1;

  // Cache-row placement knobs. FigFast/FigIdeal/LisaVilla build the cache from
  // dedicated fast subarrays appended after the regular ones; FigSlow reserves
  // rows inside one regular subarray.
  uint32_t fast_subarrays = 2;
  uint32_t fast_subarray_rows = 32;
  uint32_t cache_subarray = 63;
  double lisa_base_ns = 62.5;  // per-copy cost before the distance term
  uint32_t max_outstanding = 8;

  uint32_t max_benefit() const { return (1u << benefit_bits) - 1; }
  bool caching_enabled() const {
    return mode == Mode::FigFast || mode == Mode::FigSlow || mode == Mode::FigIdeal ||
           mode == Mode::LisaVilla;
  }
};

struct DramConfig {
  DramGeometry geometry;
  TimingParams timing;
  EnergyParams energy;
  PolicyConfig policy;

  TimingParams fast_timing() const { return derive_fast_timings(timing); }

  // Caching unit in blocks: a row segment, except LISA-VILLA which relocates
  // whole rows.
  uint32_t effective_segment_blocks() const {
    return policy.mode == Mode::LisaVilla ? geometry.blocks_per_row()
                                          : geometry.blocks_per_segment;
  }
  uint32_t effective_segments_per_row() const {
    return geometry.blocks_per_row() / effective_segment_blocks();
  }
};

// key = value text, '#' comments, unknown key -> ParseError, invariant
// violation -> ValidationError naming the field. Omitted keys take defaults;
// cache sizing defaults depend on the mode.
DramConfig load_config_text(const std::string& text);
DramConfig load_config(const std::string& path);

// Writes every field explicitly; reloading yields a field-identical config.
std::string save_config_text(const DramConfig& config);
void save_config(const DramConfig& config, const std::string& path);

// Applies one `key = value` assignment (CLI overrides reuse the file parser).
void apply_config_key(DramConfig& config, const std::string& key, const std::string& value);

void validate(const DramConfig& config);       // all invariants incl. mode
void validate_mode(const DramConfig& config);  // mode/cache-layout consistency

}  // namespace figsim
