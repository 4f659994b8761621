#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "figsim/config.hpp"

namespace figsim {

enum class ReqKind { Read, Write };

struct TraceRecord {
  uint64_t arrival = 0;  // cycle
  ReqKind kind = ReqKind::Read;
  uint64_t address = 0;
  bool operator==(const TraceRecord& o) const {
    return arrival == o.arrival && kind == o.kind && address == o.address;
  }
};

// Text trace: one `<arrival-cycle> <R|W> <hex-address>` per line, '#'
// comments. Records must be sorted by arrival and block-aligned.
std::vector<TraceRecord> parse_trace(std::istream& in, uint64_t block_bytes = 64);
std::vector<TraceRecord> parse_trace_file(const std::string& path, uint64_t block_bytes = 64);
void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);
void write_trace_file(const std::string& path, const std::vector<TraceRecord>& records);

enum class Placement { SpreadAcrossSubarrays, SingleSubarray };

// Hot-set workload: with probability hot_fraction the next access lands in a
// uniformly chosen hot segment, otherwise anywhere in the footprint.
// Inter-arrival gaps are geometric with the given mean.
struct SyntheticSpec {
  uint64_t total_requests = 100000;
  uint32_t hot_segments = 64;
  double hot_fraction = 0.9;
  uint64_t footprint_bytes = 0;  // 0 = full capacity
  double write_ratio = 0.2;
  double inter_arrival = 4.0;  // mean gap in cycles
  uint64_t seed = 1;
  Placement placement = Placement::SpreadAcrossSubarrays;
};

// Parses "hot=64,frac=0.9,n=100000,ia=4,wr=0.2,footprint=...,placement=spread".
SyntheticSpec parse_synthetic_spec(const std::string& text);

std::vector<TraceRecord> generate_synthetic(const SyntheticSpec& spec, const DramGeometry& g);

// The hot segment base addresses the generator would pick (exposed for tests).
std::vector<uint64_t> synthetic_hot_segment_bases(const SyntheticSpec& spec,
                                                  const DramGeometry& g);

}  // namespace figsim
