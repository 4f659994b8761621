#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "figsim/config.hpp"
#include "figsim/errors.hpp"

namespace figsim {

// Physical block location. Interleaving order {row, rank, bankgroup, bank,
// channel, column} with the column in the lowest-order bits above the block
// offset and the row in the highest.
struct DecodedAddress {
  uint32_t channel = 0;
  uint32_t rank = 0;
  uint32_t bank_group = 0;
  uint32_t bank = 0;
  uint32_t row_in_bank = 0;
  uint32_t block_column = 0;

  // derived
  uint32_t subarray = 0;
  uint32_t row_in_subarray = 0;
  uint32_t segment_index = 0;

  bool operator==(const DecodedAddress& o) const {
    return channel == o.channel && rank == o.rank && bank_group == o.bank_group &&
           bank == o.bank && row_in_bank == o.row_in_bank && block_column == o.block_column;
  }
};

inline uint32_t bit_width_of(uint64_t count) {
  return count <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(count - 1));
}

inline DecodedAddress decode_address(uint64_t addr, const DramGeometry& g) {
  if (addr % g.block_bytes != 0) {
    throw AlignmentError("address 0x" + std::to_string(addr) + " not block-aligned");
  }
  if (addr >= g.capacity_bytes()) {
    throw OutOfRange("address exceeds capacity (" + std::to_string(g.capacity_bytes()) + " bytes)");
  }
  uint64_t v = addr / g.block_bytes;
  auto take = [&v](uint32_t count) {
    uint32_t bits = bit_width_of(count);
    uint32_t field = static_cast<uint32_t>(v & ((1ull << bits) - 1));
    v >>= bits;
    return field;
  };
  DecodedAddress d;
  d.block_column = take(g.blocks_per_row());
  d.channel = take(g.channels);
  d.bank = take(g.banks_per_group);
  d.bank_group = take(g.bank_groups);
  d.rank = take(g.ranks_per_channel);
  d.row_in_bank = take(g.rows_per_bank());
  d.subarray = d.row_in_bank / g.rows_per_subarray;
  d.row_in_subarray = d.row_in_bank % g.rows_per_subarray;
  d.segment_index = d.block_column / g.blocks_per_segment;
  return d;
}

inline uint64_t encode_address(const DecodedAddress& d, const DramGeometry& g) {
  uint64_t v = 0;
  auto put = [&v](uint32_t field, uint32_t count) {
    v = (v << bit_width_of(count)) | field;
  };
  put(d.row_in_bank, g.rows_per_bank());
  put(d.rank, g.ranks_per_channel);
  put(d.bank_group, g.bank_groups);
  put(d.bank, g.banks_per_group);
  put(d.channel, g.channels);
  put(d.block_column, g.blocks_per_row());
  return v * g.block_bytes;
}

// Flat per-channel bank index, used to key controller and stats structures.
inline uint32_t bank_index_in_channel(const DecodedAddress& d, const DramGeometry& g) {
  return (d.rank * g.bank_groups + d.bank_group) * g.banks_per_group + d.bank;
}

inline uint32_t global_bank_index(const DecodedAddress& d, const DramGeometry& g) {
  return d.channel * g.banks_per_channel() + bank_index_in_channel(d, g);
}

}  // namespace figsim
