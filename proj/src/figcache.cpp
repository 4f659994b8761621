#include "figsim/figcache.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <string>

#include "figsim/errors.hpp"

namespace figsim {

bool EvictionState::pending() const {
  for (uint8_t b : pending_mask) {
    if (b) return true;
  }
  return false;
}

void EvictionState::clear() {
  victim_row.reset();
  std::fill(pending_mask.begin(), pending_mask.end(), 0);
}

bool MissTracker::should_insert(SegmentTag home, uint32_t threshold) {
  if (threshold <= 1) return true;
  uint32_t& count = counts_[home.key()];
  ++count;
  peak_ = std::max(peak_, counts_.size());
  if (count >= threshold) {
    counts_.erase(home.key());
    return true;
  }
  return false;
}

FtsPortion::FtsPortion(uint32_t cache_rows, uint32_t segments_per_row, uint32_t max_benefit,
                       Replacement policy, uint64_t rng_seed)
    : cache_rows_(cache_rows),
      segments_per_row_(segments_per_row),
      max_benefit_(max_benefit),
      policy_(policy),
      entries_(static_cast<size_t>(cache_rows) * segments_per_row),
      rng_(rng_seed) {
  eviction_.pending_mask.assign(segments_per_row, 0);
}

std::optional<Hit> FtsPortion::lookup(SegmentTag home, bool is_write) {
  auto it = tag_index_.find(home.key());
  if (it == tag_index_.end()) return std::nullopt;
  FtsEntry& e = entries_[it->second];
  if (e.benefit < max_benefit_) ++e.benefit;
  if (is_write) e.dirty = true;
  e.last_use = ++use_counter_;
  return Hit{it->second / segments_per_row_, it->second % segments_per_row_};
}

std::optional<Hit> FtsPortion::peek(SegmentTag home) const {
  auto it = tag_index_.find(home.key());
  if (it == tag_index_.end()) return std::nullopt;
  return Hit{it->second / segments_per_row_, it->second % segments_per_row_};
}

std::optional<uint32_t> FtsPortion::free_slot_index() const {
  if (full()) return std::nullopt;
  for (uint32_t i = 0; i < entries_.size(); ++i) {
    if (!entries_[i].valid) return i;
  }
  return std::nullopt;
}

uint32_t FtsPortion::select_victim_row() {
  assert(!eviction_.pending());
  uint64_t best_sum = ~0ull;
  uint32_t best_row = 0;
  for (uint32_t row = 0; row < cache_rows_; ++row) {
    uint64_t sum = 0;
    for (uint32_t slot = 0; slot < segments_per_row_; ++slot) {
      const FtsEntry& e = entries_[index_of(row, slot)];
      if (e.valid) sum += e.benefit;
    }
    if (sum < best_sum) {  // ties break toward the lowest row id
      best_sum = sum;
      best_row = row;
    }
  }
  eviction_.victim_row = best_row;
  std::fill(eviction_.pending_mask.begin(), eviction_.pending_mask.end(), 1);
  return best_row;
}

EvictedSegment FtsPortion::evict_next_segment() {
  assert(eviction_.pending());
  const uint32_t row = *eviction_.victim_row;
  // Marked-but-invalid slots are skipped: their mask bit clears without a
  // writeback and the search continues.
  uint32_t best_slot = segments_per_row_;
  uint32_t best_benefit = ~0u;
  for (uint32_t slot = 0; slot < segments_per_row_; ++slot) {
    if (!eviction_.pending_mask[slot]) continue;
    const FtsEntry& e = entries_[index_of(row, slot)];
    if (!e.valid) {
      eviction_.pending_mask[slot] = 0;
      continue;
    }
    if (e.benefit < best_benefit) {
      best_benefit = e.benefit;
      best_slot = slot;
    }
  }
  if (best_slot == segments_per_row_) {
    // Every marked slot was empty; pick a fresh victim row and retry.
    eviction_.clear();
    select_victim_row();
    return evict_next_segment();
  }
  eviction_.pending_mask[best_slot] = 0;
  EvictedSegment out{row, best_slot, entries_[index_of(row, best_slot)]};
  invalidate(index_of(row, best_slot));
  if (!eviction_.pending()) eviction_.victim_row.reset();
  return out;
}

EvictedSegment FtsPortion::evict_for_policy() {
  uint32_t chosen = 0;
  switch (policy_) {
    case Replacement::SegmentBenefit: {
      uint32_t best_benefit = ~0u;
      for (uint32_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].valid && entries_[i].benefit < best_benefit) {
          best_benefit = entries_[i].benefit;
          chosen = i;
        }
      }
      break;
    }
    case Replacement::LRU: {
      uint64_t oldest = ~0ull;
      for (uint32_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].valid && entries_[i].last_use < oldest) {
          oldest = entries_[i].last_use;
          chosen = i;
        }
      }
      break;
    }
    case Replacement::Random: {
      uint64_t nth = rng_.bounded(valid_count_);
      for (uint32_t i = 0; i < entries_.size(); ++i) {
        if (!entries_[i].valid) continue;
        if (nth == 0) {
          chosen = i;
          break;
        }
        --nth;
      }
      break;
    }
    case Replacement::RowBenefit:
      assert(false && "RowBenefit uses select_victim_row/evict_next_segment");
      break;
  }
  EvictedSegment out{chosen / segments_per_row_, chosen % segments_per_row_, entries_[chosen]};
  invalidate(chosen);
  return out;
}

uint32_t FtsPortion::acquire_slot(std::optional<EvictedSegment>& evicted) {
  evicted.reset();
  if (auto free = free_slot_index()) return *free;
  if (policy_ == Replacement::RowBenefit) {
    if (!eviction_.pending()) select_victim_row();
    evicted = evict_next_segment();
  } else {
    evicted = evict_for_policy();
  }
  return index_of(evicted->cache_row, evicted->slot);
}

void FtsPortion::insert(SegmentTag home, uint32_t cache_row, uint32_t slot) {
  uint32_t index = index_of(cache_row, slot);
  FtsEntry& e = entries_[index];
  if (e.valid) {
    throw SlotOccupied("cache row " + std::to_string(cache_row) + " slot " + std::to_string(slot));
  }
  assert(tag_index_.find(home.key()) == tag_index_.end() && "duplicate tag");
  e.tag = home;
  e.valid = true;
  e.dirty = false;
  e.benefit = std::min(1u, max_benefit_);
  e.last_use = ++use_counter_;
  tag_index_[home.key()] = index;
  ++valid_count_;
}

void FtsPortion::invalidate(uint32_t index) {
  FtsEntry& e = entries_[index];
  assert(e.valid);
  tag_index_.erase(e.tag.key());
  e.valid = false;
  e.dirty = false;
  e.benefit = 0;
  e.last_use = 0;
  --valid_count_;
}

void FtsPortion::check_invariants() const {
  uint32_t valid = 0;
  for (uint32_t i = 0; i < entries_.size(); ++i) {
    const FtsEntry& e = entries_[i];
    if (!e.valid) {
      assert(!e.dirty && e.benefit == 0);
      continue;
    }
    ++valid;
    assert(e.benefit <= max_benefit_);
    [[maybe_unused]] auto it = tag_index_.find(e.tag.key());
    assert(it != tag_index_.end() && it->second == i);
  }
  assert(valid == valid_count_);
  assert(tag_index_.size() == valid_count_);
  assert(eviction_.pending() == eviction_.victim_row.has_value());
}

FtsAccounting fts_accounting(const DramConfig& config) {
  const auto& g = config.geometry;
  FtsAccounting a;
  uint32_t segments_per_row = config.effective_segments_per_row();
  a.entries_per_bank = static_cast<uint64_t>(config.policy.cache_rows_per_bank) * segments_per_row;
  a.segments_per_bank = static_cast<uint64_t>(g.rows_per_bank()) * segments_per_row;
  a.tag_bits_computed =
      a.segments_per_bank <= 1
          ? 0
          : static_cast<uint32_t>(std::bit_width(a.segments_per_bank - 1));
  a.entry_bits_computed = a.tag_bits_computed + config.policy.benefit_bits + 2;
  a.entry_bits_nominal = a.tag_bits_nominal + config.policy.benefit_bits + 2;
  double banks = static_cast<double>(g.banks_per_channel());
  a.bytes_per_channel_computed =
      banks * static_cast<double>(a.entries_per_bank) * a.entry_bits_computed / 8.0;
  a.bytes_per_channel_nominal =
      banks * static_cast<double>(a.entries_per_bank) * a.entry_bits_nominal / 8.0;
  a.kb_per_channel_nominal = a.bytes_per_channel_nominal / 1024.0;
  return a;
}

}  // namespace figsim
