#include "figsim/dram.hpp"

#include <algorithm>
#include <string>

#include "figsim/errors.hpp"

namespace figsim {

const char* cmd_name(CmdKind k) {
  switch (k) {
    case CmdKind::Act: return "ACT";
    case CmdKind::Rd: return "RD";
    case CmdKind::Wr: return "WR";
    case CmdKind::Pre: return "PRE";
    case CmdKind::Reloc: return "RELOC";
  }
  return "?";
}

bool BlockStore::home_state_equal(const BlockStore& a, const BlockStore& b) {
  auto covered = [](const BlockStore& x, const BlockStore& y) {
    for (const auto& [key, value] : x.map_) {
      if (!x.key_is_home(key)) continue;
      if (!(y.read(key) == value)) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

BankLayout BankLayout::from_config(const DramConfig& config) {
  const auto& g = config.geometry;
  const auto& p = config.policy;
  BankLayout l;
  l.slow_subarrays = g.subarrays_per_bank;
  l.rows_per_subarray = g.rows_per_subarray;
  l.blocks_per_row = g.blocks_per_row();
  l.all_fast = p.mode == Mode::LLDram;
  if (!p.caching_enabled()) return l;
  l.cache_rows = p.cache_rows_per_bank;
  if (p.mode == Mode::FigSlow) {
    l.cache_in_slow_subarray = true;
    l.slow_cache_subarray = p.cache_subarray;
  } else {
    l.fast_subarrays = p.fast_subarrays;
    l.fast_subarray_rows = p.fast_subarray_rows;
  }
  return l;
}

BankModel::BankModel(const BankLayout& layout, const TimingCycles& slow, const TimingCycles& fast,
                     uint32_t global_bank)
    : layout_(layout), slow_(slow), fast_(fast), global_bank_(global_bank),
      subarrays_(layout.total_subarrays()) {}

BankModel::Phase BankModel::subarray_phase(uint32_t subarray, Cycle now) const {
  const auto& s = subarrays_[subarray];
  if (!s.active) return Phase::Precharged;
  return now < s.act_cycle + static_cast<Cycle>(cycles_for(subarray).rcd) ? Phase::Activating
                                                                          : Phase::Active;
}

std::optional<uint32_t> BankModel::open_row() const {
  if (!open_subarray_) return std::nullopt;
  return subarrays_[*open_subarray_].row;
}

Cycle BankModel::open_row_act_cycle() const {
  return open_subarray_ ? subarrays_[*open_subarray_].act_cycle : kNever;
}

bool BankModel::can_issue(const Command& cmd, Cycle now) const {
  switch (cmd.kind) {
    case CmdKind::Act: {
      uint32_t total_rows = layout_.home_rows() + layout_.cache_rows;
      if (cmd.row >= total_rows) return false;
      uint32_t s = layout_.subarray_of_row(cmd.row);
      if (subarrays_[s].active) return false;
      if (now < last_pre_ + static_cast<Cycle>(cycles_for(s).rp)) return false;
      if (active_count_ == 0) return true;
      // Mid-relocation: allow activating the staging destination while the
      // latched source row stays open.
      return active_count_ == 1 && latched_src_ && subarrays_[*latched_src_].active &&
             staging_ && staging_->dst_subarray == s && s != *latched_src_;
    }
    case CmdKind::Rd:
    case CmdKind::Wr: {
      if (!open_subarray_) return false;
      if (cmd.column >= layout_.blocks_per_row) return false;
      const auto& s = subarrays_[*open_subarray_];
      if (now < s.act_cycle + static_cast<Cycle>(cycles_for(*open_subarray_).rcd)) return false;
      return now >= last_col_ + static_cast<Cycle>(slow_.ccd);
    }
    case CmdKind::Pre: {
      if (active_count_ == 0) return false;
      for (uint32_t i = 0; i < subarrays_.size(); ++i) {
        const auto& s = subarrays_[i];
        if (s.active && now < s.act_cycle + static_cast<Cycle>(cycles_for(i).ras)) return false;
      }
      return true;
    }
    case CmdKind::Reloc: {
      if (active_count_ != 1 || !open_subarray_) return false;
      uint32_t src = *open_subarray_;
      if (latched_src_ && *latched_src_ != src) return false;
      const auto& s = subarrays_[src];
      if (now < s.act_cycle + static_cast<Cycle>(cycles_for(src).ras)) return false;  // restored
      if (cmd.dst_subarray >= layout_.total_subarrays() || cmd.dst_subarray == src) return false;
      if (subarrays_[cmd.dst_subarray].active) return false;
      if (staging_ && staging_->dst_subarray != cmd.dst_subarray) return false;
      if (cmd.column >= layout_.blocks_per_row || cmd.dst_column >= layout_.blocks_per_row)
        return false;
      return now >= last_reloc_ + static_cast<Cycle>(slow_.reloc);
    }
  }
  return false;
}

void BankModel::issue(const Command& cmd, Cycle now, BlockStore& store) {
  if (!can_issue(cmd, now)) {
    throw IllegalCommand(std::string(cmd_name(cmd.kind)) + " at cycle " + std::to_string(now) +
                         " on bank " + std::to_string(global_bank_));
  }
  switch (cmd.kind) {
    case CmdKind::Act: {
      uint32_t s = layout_.subarray_of_row(cmd.row);
      if (staging_ && staging_->dst_subarray == s) {
        // Activating the destination row overwrites exactly the staged
        // columns; every other block in the row keeps its prior token.
        for (const auto& [col, value] : staging_->columns) {
          store.copy_in(store.key(global_bank_, cmd.row, col), value);
        }
        staging_.reset();
      }
      subarrays_[s] = Subarray{true, cmd.row, now};
      open_subarray_ = s;
      ++active_count_;
      break;
    }
    case CmdKind::Rd:
      last_col_ = now;
      break;
    case CmdKind::Wr: {
      uint32_t row = subarrays_[*open_subarray_].row;
      store.write_demand(store.key(global_bank_, row, cmd.column), cmd.wr_seq);
      last_col_ = now;
      break;
    }
    case CmdKind::Pre: {
      for (auto& s : subarrays_) s.active = false;
      active_count_ = 0;
      open_subarray_.reset();
      latched_src_.reset();
      staging_.reset();  // uncommitted staged columns are lost
      last_pre_ = now;
      break;
    }
    case CmdKind::Reloc: {
      uint32_t src = *open_subarray_;
      uint32_t src_row = subarrays_[src].row;
      TokenValue v = store.read(store.key(global_bank_, src_row, cmd.column));
      if (!staging_) staging_ = Staging{cmd.dst_subarray, {}};
      auto& cols = staging_->columns;
      auto it = std::find_if(cols.begin(), cols.end(),
                             [&](const auto& p) { return p.first == cmd.dst_column; });
      if (it != cols.end()) {
        it->second = v;
      } else {
        cols.emplace_back(cmd.dst_column, v);
      }
      latched_src_ = src;
      last_reloc_ = now;
      break;
    }
  }
}

Cycle BankModel::earliest_act(uint32_t ext_row) const {
  uint32_t s = layout_.subarray_of_row(ext_row);
  return last_pre_ + static_cast<Cycle>(cycles_for(s).rp);
}

Cycle BankModel::earliest_col(uint32_t open_sub) const {
  Cycle a = subarrays_[open_sub].act_cycle + static_cast<Cycle>(cycles_for(open_sub).rcd);
  Cycle b = last_col_ + static_cast<Cycle>(slow_.ccd);
  return std::max(a, b);
}

Cycle BankModel::earliest_pre() const {
  Cycle ready = 0;
  for (uint32_t i = 0; i < subarrays_.size(); ++i) {
    const auto& s = subarrays_[i];
    if (s.active) ready = std::max(ready, s.act_cycle + static_cast<Cycle>(cycles_for(i).ras));
  }
  return ready;
}

Cycle BankModel::earliest_reloc() const {
  Cycle ready = last_reloc_ + static_cast<Cycle>(slow_.reloc);
  if (open_subarray_) {
    const auto& s = subarrays_[*open_subarray_];
    ready = std::max(ready, s.act_cycle + static_cast<Cycle>(cycles_for(*open_subarray_).ras));
  }
  return ready;
}

Cycle BankModel::next_ready_hint(Cycle now) const {
  Cycle best = now + 64;  // fallback bound keeps skip-ahead safe
  auto consider = [&](Cycle c) {
    if (c > now && c < best) best = c;
  };
  if (open_subarray_) {
    consider(earliest_col(*open_subarray_));
    consider(earliest_pre());
  } else {
    consider(last_pre_ + static_cast<Cycle>(std::max(slow_.rp, fast_.rp)));
    consider(last_pre_ + static_cast<Cycle>(std::min(slow_.rp, fast_.rp)));
  }
  return best;
}

double relocation_latency(uint32_t n_blocks, bool source_open, const TimingParams& src_timings,
                          const TimingParams& dst_timings) {
  double total = source_open ? 0.0 : src_timings.t_ras;
  total += static_cast<double>(n_blocks) * src_timings.t_reloc;
  total += dst_timings.t_rcd + dst_timings.t_rp;
  return total;
}

double relocation_latency(uint32_t n_blocks, bool source_open, const TimingParams& timings) {
  return relocation_latency(n_blocks, source_open, timings, timings);
}

double relocation_latency(Mode mode, uint32_t n_blocks, bool source_open,
                          const TimingParams& src_timings, const TimingParams& dst_timings) {
  if (mode == Mode::FigIdeal) return 0.0;
  return relocation_latency(n_blocks, source_open, src_timings, dst_timings);
}

}  // namespace figsim
