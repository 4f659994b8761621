#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "figsim/address.hpp"
#include "figsim/config.hpp"
#include "figsim/dram.hpp"
#include "figsim/figcache.hpp"
#include "figsim/stats.hpp"
#include "figsim/workload.hpp"

namespace figsim {

struct MemoryRequest {
  uint64_t id = 0;  // trace sequence number; doubles as write data identity
  ReqKind kind = ReqKind::Read;
  uint64_t address = 0;
  Cycle arrival = 0;
  std::optional<Cycle> completion;

  DecodedAddress home;
  uint32_t bank = 0;  // bank index within the channel
  // Row-buffer classification is fixed by the first command issued on the
  // request's behalf: column -> hit, ACT -> miss, PRE -> conflict.
  enum class RbClass : uint8_t { None, Hit, Miss, Conflict };
  RbClass rb = RbClass::None;
};

// Demand target after consulting the tag store: an extended row id and block
// column within it. Misses and non-caching modes point at the home location.
struct PhysicalTarget {
  uint32_t ext_row = 0;
  uint32_t column = 0;
  bool is_cache_row = false;
};

// One memory channel: request queues, FR-FCFS scheduling with open rows
// preferred, cache redirect, and the miss-path relocation engines. Channels
// share nothing but the block store, which they touch sequentially.
class ChannelController {
 public:
  ChannelController(const DramConfig& config, uint32_t channel, BlockStore& store);

  // Records must belong to this channel and be arrival-ordered.
  void set_trace(std::vector<MemoryRequest> requests);

  // Runs to completion: consumes the trace, drains both queues, then flushes
  // dirty cache segments back to their home rows.
  void run();

  Cycle now() const { return now_; }
  const std::vector<Counters>& bank_counters() const { return bank_counters_; }
  const LatencyRecorder& latencies() const { return latencies_; }
  size_t miss_tracker_peak() const;
  uint64_t flush_relocs() const { return flush_relocs_; }
  const std::vector<FtsPortion>& fts_portions() const { return fts_; }
  const std::vector<BankModel>& banks() const { return banks_; }

  // Exposed for targeted tests.
  PhysicalTarget redirect(const MemoryRequest& req) const;
  static PhysicalTarget redirect(const DramConfig& config, const BankLayout& layout,
                                 const FtsPortion* portion, const DecodedAddress& home);

 private:
  struct EngineOp {
    enum class Type { Cmd, Wait, RowCopy, Insert };
    Type type = Type::Cmd;
    Command cmd;
    double wait_ns = 0;              // Wait: duration, converted when reached
    Cycle wait_until = -1;           // Wait: absolute, once scheduled
    uint32_t copy_src_row = 0;       // RowCopy: extended row ids
    uint32_t copy_dst_row = 0;
    bool copy_counts_commands = false;
    SegmentTag insert_tag;           // Insert
    uint32_t insert_row = 0;
    uint32_t insert_slot = 0;
  };

  // Per-bank relocation engine: a short command script that owns the bank
  // until it finishes.
  struct Engine {
    std::vector<EngineOp> ops;
    size_t next = 0;
    bool active() const { return next < ops.size(); }
  };

  void admit();
  void process_completions();
  void update_drain_mode();
  void advance_engines_instant();
  bool try_issue_engine_cmd(Cycle& hint);
  bool try_issue_demand(Cycle& hint);
  bool issue_demand_column(std::deque<MemoryRequest>& queue, size_t index,
                           const PhysicalTarget& target);
  void classify(MemoryRequest& req, MemoryRequest::RbClass cls);
  void issue_counted(uint32_t bank, const Command& cmd);
  void schedule_fill(const MemoryRequest& req, const SegmentTag& tag);
  void fill_instant(uint32_t bank, const SegmentTag& tag);
  void flush_dirty();
  void run_engines_to_completion();
  Cycle engine_next_time(uint32_t bank) const;
  Cycle next_arrival_unblock() const;
  double lisa_copy_ns(uint32_t home_subarray) const;
  SegmentTag tag_of(const DecodedAddress& home) const;
  bool segment_cacheable(const DecodedAddress& home) const;

  const DramConfig& cfg_;
  BankLayout layout_;
  uint32_t channel_;
  BlockStore& store_;
  TimingCycles slow_cycles_, fast_cycles_;
  uint64_t burst_cycles_;
  uint32_t n_banks_;

  std::vector<MemoryRequest> trace_;
  size_t cursor_ = 0;
  Cycle now_ = 0;

  std::vector<BankModel> banks_;
  std::vector<FtsPortion> fts_;
  std::vector<MissTracker> trackers_;
  std::vector<Engine> engines_;
  std::deque<MemoryRequest> read_q_, write_q_;
  std::deque<Cycle> read_completions_;
  uint32_t outstanding_reads_ = 0;
  bool drain_mode_ = false;

  std::vector<Counters> bank_counters_;
  LatencyRecorder latencies_;
  uint64_t flush_relocs_ = 0;

  static constexpr size_t kQueueCapacity = 64;
  static constexpr size_t kDrainHigh = 48;
  static constexpr size_t kDrainLow = 16;
};

}  // namespace figsim
