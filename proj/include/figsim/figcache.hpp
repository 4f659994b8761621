#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "figsim/config.hpp"
#include "figsim/rng.hpp"

namespace figsim {

// Home identity of a cached row segment within one bank.
struct SegmentTag {
  uint32_t row_in_bank = 0;
  uint32_t segment_index = 0;
  bool operator==(const SegmentTag& o) const {
    return row_in_bank == o.row_in_bank && segment_index == o.segment_index;
  }
  uint64_t key() const { return (static_cast<uint64_t>(row_in_bank) << 32) | segment_index; }
};

struct FtsEntry {
  SegmentTag tag;
  bool valid = false;
  bool dirty = false;
  uint32_t benefit = 0;
  uint64_t last_use = 0;  // recency, LRU policy only
};

struct Hit {
  uint32_t cache_row = 0;
  uint32_t slot = 0;
};

struct EvictedSegment {
  uint32_t cache_row = 0;
  uint32_t slot = 0;
  FtsEntry entry;  // snapshot taken before invalidation
};

// Row-granularity eviction bookkeeping: the victim row register plus the
// bitvector of its not-yet-evicted slots.
struct EvictionState {
  std::optional<uint32_t> victim_row;
  std::vector<uint8_t> pending_mask;

  bool pending() const;
  void clear();
};

// Tracks consecutive misses per home segment when insertion_threshold > 1.
// Unbounded by design; its peak size is reported, not capped.
class MissTracker {
 public:
  bool should_insert(SegmentTag home, uint32_t threshold);
  size_t size() const { return counts_.size(); }
  size_t peak() const { return peak_; }

 private:
  std::unordered_map<uint64_t, uint32_t> counts_;
  size_t peak_ = 0;
};

// One bank's portion of the tag store: a fully associative array of
// cache_rows x segments_per_row entries. Entry index <-> (cache_row, slot) is
// the fixed bijection index = cache_row * segments_per_row + slot.
class FtsPortion {
 public:
  FtsPortion(uint32_t cache_rows, uint32_t segments_per_row, uint32_t max_benefit,
             Replacement policy, uint64_t rng_seed);

  // Hit: benefit saturating-incremented, dirty set on writes, recency bumped.
  // Miss: no state change.
  std::optional<Hit> lookup(SegmentTag home, bool is_write);
  // Same association check without any side effects (scheduler previews).
  std::optional<Hit> peek(SegmentTag home) const;

  bool full() const { return valid_count_ == entries_.size(); }
  std::optional<uint32_t> free_slot_index() const;

  // RowBenefit replacement. select_victim_row picks the row with the lowest
  // benefit sum and marks all its slots; evict_next_segment drains marked
  // slots in ascending-benefit order, one per insertion.
  uint32_t select_victim_row();
  EvictedSegment evict_next_segment();
  bool has_pending_eviction() const { return eviction_.pending(); }
  const EvictionState& eviction_state() const { return eviction_; }

  // SegmentBenefit / LRU / Random eviction of a single slot.
  EvictedSegment evict_for_policy();

  // Frees one slot for an insertion: a free slot if any exist, otherwise an
  // eviction under the configured policy (reported through `evicted`).
  uint32_t acquire_slot(std::optional<EvictedSegment>& evicted);

  // Marks the slot valid with benefit 1 (the triggering access counts as one
  // use). Throws SlotOccupied if the slot is still valid.
  void insert(SegmentTag home, uint32_t cache_row, uint32_t slot);

  // Clears the dirty flag after an end-of-run writeback.
  void clean_at(uint32_t cache_row, uint32_t slot) {
    entries_[index_of(cache_row, slot)].dirty = false;
  }

  uint32_t cache_rows() const { return cache_rows_; }
  uint32_t segments_per_row() const { return segments_per_row_; }
  uint32_t valid_count() const { return valid_count_; }
  const FtsEntry& entry_at(uint32_t cache_row, uint32_t slot) const {
    return entries_[index_of(cache_row, slot)];
  }
  const std::vector<FtsEntry>& entries() const { return entries_; }

  // Debug-run invariants: tag uniqueness, valid count, benefit bounds.
  void check_invariants() const;

 private:
  uint32_t index_of(uint32_t cache_row, uint32_t slot) const {
    return cache_row * segments_per_row_ + slot;
  }
  void invalidate(uint32_t index);

  uint32_t cache_rows_;
  uint32_t segments_per_row_;
  uint32_t max_benefit_;
  Replacement policy_;
  std::vector<FtsEntry> entries_;
  std::unordered_map<uint64_t, uint32_t> tag_index_;
  EvictionState eviction_;
  uint32_t valid_count_ = 0;
  uint64_t use_counter_ = 0;
  Rng rng_;
};

// Storage accounting for the tag store, independent of any simulation run.
// `computed` derives the tag width from the geometry; `nominal` fixes the
// published 19-bit tag so the 26-bit / 26.0 KB design point is visible next
// to the derived number.
struct FtsAccounting {
  uint64_t entries_per_bank = 0;
  uint64_t segments_per_bank = 0;
  uint32_t tag_bits_computed = 0;
  uint32_t entry_bits_computed = 0;
  double bytes_per_channel_computed = 0;
  uint32_t tag_bits_nominal = 19;
  uint32_t entry_bits_nominal = 0;
  double bytes_per_channel_nominal = 0;
  double kb_per_channel_nominal = 0;
};

FtsAccounting fts_accounting(const DramConfig& config);

}  // namespace figsim
