#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "figsim/dram.hpp"

// Naive flat-array model of one bank's block contents. It replays the same
// command stream with plain-map bookkeeping (open rows, staged columns) and
// is compared cell-for-cell against the BlockStore afterwards.
namespace oracle {

class FlatBank {
 public:
  FlatBank(const figsim::BankLayout& layout, const figsim::BlockStore& initial,
           uint32_t global_bank)
      : layout_(layout), bank_(global_bank) {
    const uint32_t rows = layout.home_rows() + layout.cache_rows;
    content_.resize(rows);
    for (uint32_t r = 0; r < rows; ++r) {
      content_[r].resize(layout.blocks_per_row);
      for (uint32_t c = 0; c < layout.blocks_per_row; ++c) {
        content_[r][c] = initial.read(initial.key(global_bank, r, c));
      }
    }
    open_row_.assign(layout.total_subarrays(), -1);
  }

  void apply(const figsim::Command& cmd, uint64_t) {
    using figsim::CmdKind;
    switch (cmd.kind) {
      case CmdKind::Act: {
        uint32_t s = layout_.subarray_of_row(cmd.row);
        open_row_[s] = static_cast<int64_t>(cmd.row);
        last_act_sub_ = static_cast<int>(s);
        // Commit any columns staged toward this subarray.
        if (staged_sub_ == static_cast<int>(s)) {
          for (auto& [col, value] : staged_) content_[cmd.row][col] = value;
          staged_.clear();
          staged_sub_ = -1;
        }
        break;
      }
      case CmdKind::Wr: {
        int64_t row = open_row_[static_cast<uint32_t>(last_act_sub_)];
        auto& cell = content_[static_cast<uint32_t>(row)][cmd.column];
        if (cmd.wr_seq >= cell.seq) {
          cell = figsim::BlockStore::write_token(cmd.wr_seq);
        }
        break;
      }
      case CmdKind::Rd:
        break;
      case CmdKind::Pre:
        for (auto& r : open_row_) r = -1;
        staged_.clear();
        staged_sub_ = -1;
        last_act_sub_ = -1;
        break;
      case CmdKind::Reloc: {
        int64_t src_row = open_row_[static_cast<uint32_t>(last_act_sub_)];
        staged_[cmd.dst_column] = content_[static_cast<uint32_t>(src_row)][cmd.column];
        staged_sub_ = static_cast<int>(cmd.dst_subarray);
        break;
      }
    }
  }

  bool matches(const figsim::BlockStore& store) const {
    for (uint32_t r = 0; r < content_.size(); ++r) {
      for (uint32_t c = 0; c < layout_.blocks_per_row; ++c) {
        if (!(store.read(store.key(bank_, r, c)) == content_[r][c])) return false;
      }
    }
    return true;
  }

  const figsim::TokenValue& at(uint32_t row, uint32_t col) const { return content_[row][col]; }

 private:
  figsim::BankLayout layout_;
  uint32_t bank_;
  std::vector<std::vector<figsim::TokenValue>> content_;
  std::vector<int64_t> open_row_;
  std::map<uint32_t, figsim::TokenValue> staged_;
  int staged_sub_ = -1;
  int last_act_sub_ = -1;
};

}  // namespace oracle
