#include "figsim/controller.hpp"

#include <algorithm>
#include <cassert>

#include "figsim/errors.hpp"

namespace figsim {

namespace {
constexpr Cycle kFar = (1ll << 62);
}

ChannelController::ChannelController(const DramConfig& config, uint32_t channel, BlockStore& store)
    : cfg_(config),
      layout_(BankLayout::from_config(config)),
      channel_(channel),
      store_(store),
      slow_cycles_(to_cycles(config.timing)),
      fast_cycles_(to_cycles(config.fast_timing())),
      burst_cycles_(slow_cycles_.burst),
      n_banks_(config.geometry.banks_per_channel()) {
  banks_.reserve(n_banks_);
  for (uint32_t b = 0; b < n_banks_; ++b) {
    banks_.emplace_back(layout_, slow_cycles_, fast_cycles_, channel_ * n_banks_ + b);
  }
  if (cfg_.policy.caching_enabled()) {
    uint32_t spr = cfg_.effective_segments_per_row();
    for (uint32_t b = 0; b < n_banks_; ++b) {
      uint64_t seed = splitmix64(cfg_.policy.random_seed ^
                                 (0xba5eull + channel_ * n_banks_ + b));
      fts_.emplace_back(cfg_.policy.cache_rows_per_bank, spr, cfg_.policy.max_benefit(),
                        cfg_.policy.replacement, seed);
    }
    trackers_.resize(n_banks_);
  }
  engines_.resize(n_banks_);
  bank_counters_.resize(n_banks_);
}

void ChannelController::set_trace(std::vector<MemoryRequest> requests) {
  trace_ = std::move(requests);
}

SegmentTag ChannelController::tag_of(const DecodedAddress& home) const {
  return SegmentTag{home.row_in_bank, home.block_column / cfg_.effective_segment_blocks()};
}

bool ChannelController::segment_cacheable(const DecodedAddress& home) const {
  if (cfg_.policy.mode == Mode::FigSlow && home.subarray == cfg_.policy.cache_subarray) {
    return false;  // reserved-row cache never caches its own subarray
  }
  return true;
}

PhysicalTarget ChannelController::redirect(const DramConfig& config, const BankLayout& layout,
                                           const FtsPortion* portion,
                                           const DecodedAddress& home) {
  PhysicalTarget t;
  t.ext_row = home.row_in_bank;
  t.column = home.block_column;
  if (!portion) return t;
  uint32_t blocks = config.effective_segment_blocks();
  SegmentTag tag{home.row_in_bank, home.block_column / blocks};
  if (auto hit = portion->peek(tag)) {
    t.ext_row = layout.cache_row_ext(hit->cache_row);
    t.column = hit->slot * blocks + home.block_column % blocks;
    t.is_cache_row = true;
  }
  return t;
}

PhysicalTarget ChannelController::redirect(const MemoryRequest& req) const {
  const FtsPortion* portion = fts_.empty() ? nullptr : &fts_[req.bank];
  return redirect(cfg_, layout_, portion, req.home);
}

void ChannelController::process_completions() {
  while (!read_completions_.empty() && read_completions_.front() <= now_) {
    read_completions_.pop_front();
    --outstanding_reads_;
  }
}

void ChannelController::admit() {
  while (cursor_ < trace_.size()) {
    const MemoryRequest& r = trace_[cursor_];
    if (r.arrival > now_) break;
    if (r.kind == ReqKind::Read) {
      if (read_q_.size() >= kQueueCapacity ||
          outstanding_reads_ >= cfg_.policy.max_outstanding) {
        break;
      }
      read_q_.push_back(r);
      ++outstanding_reads_;
    } else {
      if (write_q_.size() >= kQueueCapacity) break;
      write_q_.push_back(r);
    }
    ++cursor_;
  }
}

void ChannelController::update_drain_mode() {
  if (write_q_.size() >= kDrainHigh) {
    drain_mode_ = true;
  } else if (drain_mode_ && write_q_.size() <= kDrainLow) {
    drain_mode_ = false;
  }
}

void ChannelController::issue_counted(uint32_t bank, const Command& cmd) {
  Command stamped = cmd;
  stamped.bank = banks_[bank].global_bank();
  stamped.issue_cycle = now_;
  banks_[bank].issue(stamped, now_, store_);
  Counters& c = bank_counters_[bank];
  switch (cmd.kind) {
    case CmdKind::Act: ++c.acts; break;
    case CmdKind::Pre: ++c.pres; break;
    case CmdKind::Reloc: ++c.relocs; break;
    case CmdKind::Rd: ++c.column_reads; break;
    case CmdKind::Wr: ++c.column_writes; break;
  }
}

void ChannelController::classify(MemoryRequest& req, MemoryRequest::RbClass cls) {
  if (req.rb != MemoryRequest::RbClass::None) return;
  req.rb = cls;
  Counters& c = bank_counters_[req.bank];
  switch (cls) {
    case MemoryRequest::RbClass::Hit: ++c.row_buffer_hits; break;
    case MemoryRequest::RbClass::Miss: ++c.row_buffer_misses; break;
    case MemoryRequest::RbClass::Conflict: ++c.row_buffer_conflicts; break;
    case MemoryRequest::RbClass::None: break;
  }
}

double ChannelController::lisa_copy_ns(uint32_t home_subarray) const {
  // Fast subarrays sit evenly interleaved among the regular ones; the copy
  // pays per hop to the nearest one.
  uint32_t n_fast = std::max(1u, cfg_.policy.fast_subarrays);
  uint32_t spacing = std::max(1u, cfg_.geometry.subarrays_per_bank / n_fast);
  uint32_t best = ~0u;
  for (uint32_t f = 0; f < n_fast; ++f) {
    uint32_t pos = f * spacing + spacing / 2;
    uint32_t d = pos > home_subarray ? pos - home_subarray : home_subarray - pos;
    best = std::min(best, d);
  }
  return cfg_.policy.lisa_base_ns + static_cast<double>(best) * cfg_.policy.lisa_hop_ns;
}

void ChannelController::fill_instant(uint32_t bank, const SegmentTag& tag) {
  // FigIdeal: relocation is free; tokens and metadata move at the decision
  // point, and only the RELOC events themselves are accounted.
  FtsPortion& portion = fts_[bank];
  Counters& c = bank_counters_[bank];
  const uint32_t spb = cfg_.effective_segment_blocks();
  const uint32_t spr = cfg_.effective_segments_per_row();
  std::optional<EvictedSegment> evicted;
  uint32_t index = portion.acquire_slot(evicted);
  if (evicted) {
    ++c.evictions;
    if (evicted->entry.dirty) {
      ++c.dirty_writebacks;
      uint32_t src_ext = layout_.cache_row_ext(evicted->cache_row);
      uint32_t dst_row = evicted->entry.tag.row_in_bank;
      for (uint32_t i = 0; i < spb; ++i) {
        uint32_t gb = banks_[bank].global_bank();
        store_.copy_in(store_.key(gb, dst_row, evicted->entry.tag.segment_index * spb + i),
                       store_.read(store_.key(gb, src_ext, evicted->slot * spb + i)));
      }
      c.relocs += spb;
    }
  }
  uint32_t dst_row = index / spr;
  uint32_t dst_slot = index % spr;
  uint32_t dst_ext = layout_.cache_row_ext(dst_row);
  uint32_t gb = banks_[bank].global_bank();
  for (uint32_t i = 0; i < spb; ++i) {
    store_.copy_in(store_.key(gb, dst_ext, dst_slot * spb + i),
                   store_.read(store_.key(gb, tag.row_in_bank, tag.segment_index * spb + i)));
  }
  c.relocs += spb;
  portion.insert(tag, dst_row, dst_slot);
  ++c.insertions;
}

void ChannelController::schedule_fill(const MemoryRequest& req, const SegmentTag& tag) {
  const uint32_t bank = req.bank;
  if (cfg_.policy.mode == Mode::FigIdeal) {
    fill_instant(bank, tag);
    return;
  }

  FtsPortion& portion = fts_[bank];
  Counters& c = bank_counters_[bank];
  const uint32_t spb = cfg_.effective_segment_blocks();
  const uint32_t spr = cfg_.effective_segments_per_row();
  std::optional<EvictedSegment> evicted;
  uint32_t index = portion.acquire_slot(evicted);
  uint32_t dst_row = index / spr;
  uint32_t dst_slot = index % spr;
  uint32_t dst_ext = layout_.cache_row_ext(dst_row);
  bool dirty_wb = false;
  if (evicted) {
    ++c.evictions;
    dirty_wb = evicted->entry.dirty;
    if (dirty_wb) ++c.dirty_writebacks;
  }

  Engine e;
  auto cmd_op = [](Command cmd) {
    EngineOp op;
    op.type = EngineOp::Type::Cmd;
    op.cmd = cmd;
    return op;
  };

  if (cfg_.policy.mode == Mode::LisaVilla) {
    if (dirty_wb) {
      uint32_t victim_home = evicted->entry.tag.row_in_bank;
      EngineOp wait;
      wait.type = EngineOp::Type::Wait;
      wait.wait_ns = lisa_copy_ns(victim_home / cfg_.geometry.rows_per_subarray);
      e.ops.push_back(wait);
      EngineOp copy;
      copy.type = EngineOp::Type::RowCopy;
      copy.copy_src_row = layout_.cache_row_ext(evicted->cache_row);
      copy.copy_dst_row = victim_home;
      copy.copy_counts_commands = true;
      e.ops.push_back(copy);
    }
    EngineOp wait;
    wait.type = EngineOp::Type::Wait;
    wait.wait_ns = lisa_copy_ns(req.home.subarray);
    e.ops.push_back(wait);
    EngineOp copy;
    copy.type = EngineOp::Type::RowCopy;
    copy.copy_src_row = tag.row_in_bank;
    copy.copy_dst_row = dst_ext;
    copy.copy_counts_commands = true;
    e.ops.push_back(copy);
    EngineOp ins;
    ins.type = EngineOp::Type::Insert;
    ins.insert_tag = tag;
    ins.insert_row = dst_row;
    ins.insert_slot = dst_slot;
    e.ops.push_back(ins);
    engines_[bank] = std::move(e);
    return;
  }

  uint32_t dst_sub = layout_.subarray_of_row(dst_ext);
  if (dirty_wb) {
    // Reverse relocation first: cache row -> victim's home row, then reopen
    // the demand's home row so the fill can proceed.
    uint32_t v_ext = layout_.cache_row_ext(evicted->cache_row);
    uint32_t v_home_row = evicted->entry.tag.row_in_bank;
    uint32_t v_home_sub = v_home_row / cfg_.geometry.rows_per_subarray;
    uint32_t v_seg = evicted->entry.tag.segment_index;
    e.ops.push_back(cmd_op(Command{CmdKind::Pre}));
    e.ops.push_back(cmd_op(Command{CmdKind::Act, 0, v_ext}));
    for (uint32_t i = 0; i < spb; ++i) {
      Command r{CmdKind::Reloc};
      r.column = evicted->slot * spb + i;
      r.dst_subarray = v_home_sub;
      r.dst_column = v_seg * spb + i;
      e.ops.push_back(cmd_op(r));
    }
    e.ops.push_back(cmd_op(Command{CmdKind::Act, 0, v_home_row}));
    e.ops.push_back(cmd_op(Command{CmdKind::Pre}));
    e.ops.push_back(cmd_op(Command{CmdKind::Act, 0, req.home.row_in_bank}));
  }
  for (uint32_t i = 0; i < spb; ++i) {
    Command r{CmdKind::Reloc};
    r.column = tag.segment_index * spb + i;
    r.dst_subarray = dst_sub;
    r.dst_column = dst_slot * spb + i;
    e.ops.push_back(cmd_op(r));
  }
  e.ops.push_back(cmd_op(Command{CmdKind::Act, 0, dst_ext}));
  EngineOp ins;
  ins.type = EngineOp::Type::Insert;
  ins.insert_tag = tag;
  ins.insert_row = dst_row;
  ins.insert_slot = dst_slot;
  e.ops.push_back(ins);
  e.ops.push_back(cmd_op(Command{CmdKind::Pre}));
  engines_[bank] = std::move(e);
}

void ChannelController::advance_engines_instant() {
  for (uint32_t b = 0; b < n_banks_; ++b) {
    Engine& e = engines_[b];
    while (e.active()) {
      EngineOp& op = e.ops[e.next];
      if (op.type == EngineOp::Type::Cmd) break;
      if (op.type == EngineOp::Type::Wait) {
        if (op.wait_until < 0) {
          op.wait_until = now_ + static_cast<Cycle>(
                                     ns_to_cycles(op.wait_ns, cfg_.timing.clock_period));
        }
        if (now_ < op.wait_until) break;
        ++e.next;
        continue;
      }
      if (op.type == EngineOp::Type::RowCopy) {
        uint32_t gb = banks_[b].global_bank();
        for (uint32_t col = 0; col < layout_.blocks_per_row; ++col) {
          store_.copy_in(store_.key(gb, op.copy_dst_row, col),
                         store_.read(store_.key(gb, op.copy_src_row, col)));
        }
        if (op.copy_counts_commands) {
          bank_counters_[b].acts += 2;
          bank_counters_[b].pres += 1;
        }
        ++e.next;
        continue;
      }
      // Insert
      fts_[b].insert(op.insert_tag, op.insert_row, op.insert_slot);
      ++bank_counters_[b].insertions;
      ++e.next;
    }
  }
}

Cycle ChannelController::engine_next_time(uint32_t bank) const {
  const Engine& e = engines_[bank];
  if (!e.active()) return kFar;
  const EngineOp& op = e.ops[e.next];
  if (op.type == EngineOp::Type::Wait) return op.wait_until < 0 ? now_ + 1 : op.wait_until;
  if (op.type != EngineOp::Type::Cmd) return now_ + 1;
  const BankModel& bm = banks_[bank];
  switch (op.cmd.kind) {
    case CmdKind::Act: return bm.earliest_act(op.cmd.row);
    case CmdKind::Pre: return bm.earliest_pre();
    case CmdKind::Reloc: return bm.earliest_reloc();
    case CmdKind::Rd:
    case CmdKind::Wr:
      return bm.open_subarray() ? bm.earliest_col(*bm.open_subarray()) : now_ + 1;
  }
  return now_ + 1;
}

bool ChannelController::try_issue_engine_cmd(Cycle& hint) {
  for (uint32_t b = 0; b < n_banks_; ++b) {
    Engine& e = engines_[b];
    if (!e.active()) continue;
    const EngineOp& op = e.ops[e.next];
    if (op.type == EngineOp::Type::Wait) {
      hint = std::min(hint, engine_next_time(b));
      continue;
    }
    if (op.type != EngineOp::Type::Cmd) continue;  // handled by instant pass
    if (banks_[b].can_issue(op.cmd, now_)) {
      issue_counted(b, op.cmd);
      ++e.next;
      return true;
    }
    hint = std::min(hint, engine_next_time(b));
  }
  return false;
}

bool ChannelController::issue_demand_column(std::deque<MemoryRequest>& queue, size_t index,
                                            const PhysicalTarget& target) {
  MemoryRequest req = queue[index];
  const uint32_t bank = req.bank;
  Counters& c = bank_counters_[bank];

  Command cmd;
  cmd.kind = req.kind == ReqKind::Read ? CmdKind::Rd : CmdKind::Wr;
  cmd.column = target.column;
  cmd.wr_seq = req.id + 1;  // sequence 0 is the unwritten state
  issue_counted(bank, cmd);
  classify(req, MemoryRequest::RbClass::Hit);

  ++c.requests;
  if (req.kind == ReqKind::Read) {
    ++c.reads;
  } else {
    ++c.writes;
  }
  if (target.is_cache_row) {
    ++c.cache_row_accesses;
    if (req.rb == MemoryRequest::RbClass::Hit) ++c.cache_row_hits;
  }

  if (!fts_.empty()) {
    SegmentTag tag = tag_of(req.home);
    auto hit = fts_[bank].lookup(tag, req.kind == ReqKind::Write);
    assert(hit.has_value() == target.is_cache_row);
    if (hit) {
      ++c.cache_hits;
    } else {
      ++c.cache_misses;
      if (segment_cacheable(req.home) &&
          trackers_[bank].should_insert(tag, cfg_.policy.insertion_threshold)) {
        schedule_fill(req, tag);
      }
    }
  }

  Cycle completion = now_ + static_cast<Cycle>(burst_cycles_);
  latencies_.record(static_cast<double>(completion - req.arrival) * cfg_.timing.clock_period);
  if (req.kind == ReqKind::Read) read_completions_.push_back(completion);
  queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(index));
  return true;
}

bool ChannelController::try_issue_demand(Cycle& hint) {
  const bool serve_writes = drain_mode_ || (read_q_.empty() && !write_q_.empty());
  std::deque<MemoryRequest>& q = serve_writes ? write_q_ : read_q_;
  if (q.empty()) return false;

  // Pass 1: row-buffer hits, oldest first.
  for (size_t i = 0; i < q.size(); ++i) {
    MemoryRequest& req = q[i];
    if (engines_[req.bank].active()) continue;
    PhysicalTarget target = redirect(req);
    BankModel& bank = banks_[req.bank];
    auto open = bank.open_row();
    if (open && *open == target.ext_row) {
      Cycle ready = bank.earliest_col(*bank.open_subarray());
      if (ready <= now_) return issue_demand_column(q, i, target);
      hint = std::min(hint, ready);
    }
  }

  // Pass 2: oldest request whose preparatory command is ready.
  for (size_t i = 0; i < q.size(); ++i) {
    MemoryRequest& req = q[i];
    if (engines_[req.bank].active()) continue;
    PhysicalTarget target = redirect(req);
    BankModel& bank = banks_[req.bank];
    auto open = bank.open_row();
    if (open && *open == target.ext_row) continue;  // covered by pass 1
    if (bank.any_active()) {
      Cycle ready = bank.earliest_pre();
      if (ready <= now_) {
        issue_counted(req.bank, Command{CmdKind::Pre});
        classify(req, MemoryRequest::RbClass::Conflict);
        return true;
      }
      hint = std::min(hint, ready);
    } else {
      Cycle ready = bank.earliest_act(target.ext_row);
      if (ready <= now_) {
        issue_counted(req.bank, Command{CmdKind::Act, 0, target.ext_row});
        classify(req, MemoryRequest::RbClass::Miss);
        return true;
      }
      hint = std::min(hint, ready);
    }
  }
  return false;
}

Cycle ChannelController::next_arrival_unblock() const {
  if (cursor_ >= trace_.size()) return kFar;
  Cycle arrival = trace_[cursor_].arrival;
  return arrival > now_ ? arrival : kFar;
}

void ChannelController::run() {
  for (;;) {
    process_completions();
    admit();
    update_drain_mode();
    advance_engines_instant();

    bool engines_active = false;
    for (const auto& e : engines_) engines_active |= e.active();
    if (cursor_ >= trace_.size() && read_q_.empty() && write_q_.empty() && !engines_active &&
        read_completions_.empty()) {
      break;
    }

    Cycle hint = kFar;
    if (try_issue_engine_cmd(hint)) {
      ++now_;
      continue;
    }
    if (try_issue_demand(hint)) {
      ++now_;
      continue;
    }
    Cycle next = std::min(hint, next_arrival_unblock());
    if (!read_completions_.empty()) next = std::min(next, read_completions_.front());
    now_ = std::max(now_ + 1, next == kFar ? now_ + 1 : next);
  }
  uint64_t relocs_before = 0;
  for (const auto& c : bank_counters_) relocs_before += c.relocs;
  flush_dirty();
  uint64_t relocs_after = 0;
  for (const auto& c : bank_counters_) relocs_after += c.relocs;
  flush_relocs_ = relocs_after - relocs_before;
}

void ChannelController::run_engines_to_completion() {
  for (;;) {
    advance_engines_instant();
    bool active = false;
    for (const auto& e : engines_) active |= e.active();
    if (!active) break;
    Cycle hint = kFar;
    if (try_issue_engine_cmd(hint)) {
      ++now_;
      continue;
    }
    now_ = std::max(now_ + 1, hint == kFar ? now_ + 1 : hint);
  }
}

void ChannelController::flush_dirty() {
  if (fts_.empty()) return;
  const uint32_t spb = cfg_.effective_segment_blocks();
  for (uint32_t b = 0; b < n_banks_; ++b) {
    FtsPortion& portion = fts_[b];
    for (uint32_t row = 0; row < portion.cache_rows(); ++row) {
      for (uint32_t slot = 0; slot < portion.segments_per_row(); ++slot) {
        const FtsEntry& entry = portion.entry_at(row, slot);
        if (!entry.valid || !entry.dirty) continue;
        uint32_t cache_ext = layout_.cache_row_ext(row);
        uint32_t home_row = entry.tag.row_in_bank;
        uint32_t gb = banks_[b].global_bank();
        if (cfg_.policy.mode == Mode::FigIdeal) {
          for (uint32_t i = 0; i < spb; ++i) {
            store_.copy_in(store_.key(gb, home_row, entry.tag.segment_index * spb + i),
                           store_.read(store_.key(gb, cache_ext, slot * spb + i)));
          }
          bank_counters_[b].relocs += spb;
        } else if (cfg_.policy.mode == Mode::LisaVilla) {
          Engine e;
          EngineOp wait;
          wait.type = EngineOp::Type::Wait;
          wait.wait_ns = lisa_copy_ns(home_row / cfg_.geometry.rows_per_subarray);
          e.ops.push_back(wait);
          EngineOp copy;
          copy.type = EngineOp::Type::RowCopy;
          copy.copy_src_row = cache_ext;
          copy.copy_dst_row = home_row;
          copy.copy_counts_commands = true;
          e.ops.push_back(copy);
          engines_[b] = std::move(e);
          run_engines_to_completion();
        } else {
          Engine e;
          auto cmd_op = [](Command cmd) {
            EngineOp op;
            op.type = EngineOp::Type::Cmd;
            op.cmd = cmd;
            return op;
          };
          if (banks_[b].any_active()) e.ops.push_back(cmd_op(Command{CmdKind::Pre}));
          e.ops.push_back(cmd_op(Command{CmdKind::Act, 0, cache_ext}));
          uint32_t home_sub = home_row / cfg_.geometry.rows_per_subarray;
          for (uint32_t i = 0; i < spb; ++i) {
            Command r{CmdKind::Reloc};
            r.column = slot * spb + i;
            r.dst_subarray = home_sub;
            r.dst_column = entry.tag.segment_index * spb + i;
            e.ops.push_back(cmd_op(r));
          }
          e.ops.push_back(cmd_op(Command{CmdKind::Act, 0, home_row}));
          e.ops.push_back(cmd_op(Command{CmdKind::Pre}));
          engines_[b] = std::move(e);
          run_engines_to_completion();
        }
        portion.clean_at(row, slot);
      }
    }
  }
}

size_t ChannelController::miss_tracker_peak() const {
  size_t peak = 0;
  for (const auto& t : trackers_) peak = std::max(peak, t.peak());
  return peak;
}

}  // namespace figsim
