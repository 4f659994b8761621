#include "figsim/workload.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "figsim/address.hpp"
#include "figsim/errors.hpp"
#include "figsim/rng.hpp"

namespace figsim {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::istream& in, uint64_t block_bytes) {
  std::vector<TraceRecord> records;
  std::string line;
  int lineno = 0;
  uint64_t last_arrival = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string arrival_s, kind_s, addr_s, extra;
    if (!(ls >> arrival_s >> kind_s >> addr_s) || (ls >> extra)) {
      throw ParseError("trace line " + std::to_string(lineno) +
                       ": expected '<cycle> <R|W> <hex-address>'");
    }
    TraceRecord r;
    try {
      size_t pos = 0;
      r.arrival = std::stoull(arrival_s, &pos, 10);
      if (pos != arrival_s.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError("trace line " + std::to_string(lineno) + ": bad cycle '" + arrival_s + "'");
    }
    if (kind_s == "R") {
      r.kind = ReqKind::Read;
    } else if (kind_s == "W") {
      r.kind = ReqKind::Write;
    } else {
      throw ParseError("trace line " + std::to_string(lineno) + ": unknown kind '" + kind_s + "'");
    }
    try {
      std::string hex = addr_s;
      if (hex.rfind("0x", 0) == 0 || hex.rfind("0X", 0) == 0) hex = hex.substr(2);
      if (hex.empty()) throw std::invalid_argument("");
      size_t pos = 0;
      r.address = std::stoull(hex, &pos, 16);
      if (pos != hex.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError("trace line " + std::to_string(lineno) + ": bad address '" + addr_s + "'");
    }
    if (r.address % block_bytes != 0) {
      throw AlignmentError("trace line " + std::to_string(lineno) + ": address 0x" + addr_s +
                           " not aligned to " + std::to_string(block_bytes) + " bytes");
    }
    if (!records.empty() && r.arrival < last_arrival) {
      throw OrderingError("trace line " + std::to_string(lineno) + ": arrival " +
                          std::to_string(r.arrival) + " before previous " +
                          std::to_string(last_arrival));
    }
    last_arrival = r.arrival;
    records.push_back(r);
  }
  return records;
}

std::vector<TraceRecord> parse_trace_file(const std::string& path, uint64_t block_bytes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path + "'");
  return parse_trace(in, block_bytes);
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%" PRIu64 " %c 0x%" PRIx64 "\n", r.arrival,
                  r.kind == ReqKind::Read ? 'R' : 'W', r.address);
    out << buf;
  }
}

void write_trace_file(const std::string& path, const std::vector<TraceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file '" + path + "'");
  write_trace(out, records);
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  SyntheticSpec spec;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("synthetic spec item '" + item + "'");
    std::string key = trim(item.substr(0, eq));
    std::string value = trim(item.substr(eq + 1));
    try {
      if (key == "n") {
        spec.total_requests = std::stoull(value);
      } else if (key == "hot") {
        spec.hot_segments = static_cast<uint32_t>(std::stoul(value));
      } else if (key == "frac") {
        spec.hot_fraction = std::stod(value);
      } else if (key == "footprint") {
        spec.footprint_bytes = std::stoull(value);
      } else if (key == "wr") {
        spec.write_ratio = std::stod(value);
      } else if (key == "ia") {
        spec.inter_arrival = std::stod(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "placement") {
        if (value == "spread") {
          spec.placement = Placement::SpreadAcrossSubarrays;
        } else if (value == "single") {
          spec.placement = Placement::SingleSubarray;
        } else {
          throw ParseError("placement '" + value + "' (want spread|single)");
        }
      } else {
        throw ParseError("unknown synthetic key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("synthetic spec value for '" + key + "': '" + value + "'");
    }
  }
  if (spec.hot_fraction < 0.0 || spec.hot_fraction > 1.0) {
    throw ValidationError("hot_fraction", "must be in [0, 1]");
  }
  if (spec.write_ratio < 0.0 || spec.write_ratio > 1.0) {
    throw ValidationError("write_ratio", "must be in [0, 1]");
  }
  if (spec.inter_arrival < 0.0) throw ValidationError("inter_arrival", "must be non-negative");
  return spec;
}

std::vector<uint64_t> synthetic_hot_segment_bases(const SyntheticSpec& spec,
                                                  const DramGeometry& g) {
  const uint64_t footprint =
      spec.footprint_bytes == 0 ? g.capacity_bytes() : spec.footprint_bytes;
  if (footprint > g.capacity_bytes()) {
    throw ValidationError("footprint_bytes", "exceeds DRAM capacity");
  }
  const uint64_t segment_bytes = static_cast<uint64_t>(g.blocks_per_segment) * g.block_bytes;
  const uint64_t footprint_segments = footprint / segment_bytes;
  if (spec.hot_segments > footprint_segments) {
    throw ValidationError("hot_segments", "footprint holds fewer segments than requested");
  }

  // Subarrays reachable inside the footprint: interleaving puts the row index
  // in the top bits, so the footprint caps the highest reachable row.
  const uint64_t blocks_per_row_span =
      static_cast<uint64_t>(g.blocks_per_row()) * g.channels * g.banks_per_channel();
  const uint64_t footprint_rows =
      std::max<uint64_t>(1, footprint / (blocks_per_row_span * g.block_bytes));
  const uint32_t reachable_subarrays = static_cast<uint32_t>(std::min<uint64_t>(
      g.subarrays_per_bank, (footprint_rows + g.rows_per_subarray - 1) / g.rows_per_subarray));

  Rng rng(splitmix64(spec.seed) ^ 0x5eedull);
  std::set<uint64_t> chosen;
  std::vector<uint64_t> bases;
  bases.reserve(spec.hot_segments);
  for (uint32_t i = 0; i < spec.hot_segments; ++i) {
    uint64_t base = 0;
    for (int attempt = 0; attempt < 4096; ++attempt) {
      if (spec.placement == Placement::SpreadAcrossSubarrays) {
        DecodedAddress d;
        d.channel = static_cast<uint32_t>(rng.bounded(g.channels));
        d.rank = static_cast<uint32_t>(rng.bounded(g.ranks_per_channel));
        d.bank_group = static_cast<uint32_t>(rng.bounded(g.bank_groups));
        d.bank = static_cast<uint32_t>(rng.bounded(g.banks_per_group));
        uint32_t subarray = i % reachable_subarrays;
        d.row_in_bank = subarray * g.rows_per_subarray +
                        static_cast<uint32_t>(rng.bounded(g.rows_per_subarray));
        d.block_column =
            static_cast<uint32_t>(rng.bounded(g.segments_per_row())) * g.blocks_per_segment;
        base = encode_address(d, g);
      } else {
        DecodedAddress d;
        d.channel = static_cast<uint32_t>(rng.bounded(g.channels));
        d.rank = static_cast<uint32_t>(rng.bounded(g.ranks_per_channel));
        d.bank_group = static_cast<uint32_t>(rng.bounded(g.bank_groups));
        d.bank = static_cast<uint32_t>(rng.bounded(g.banks_per_group));
        d.row_in_bank = static_cast<uint32_t>(rng.bounded(g.rows_per_subarray));  // subarray 0
        d.block_column =
            static_cast<uint32_t>(rng.bounded(g.segments_per_row())) * g.blocks_per_segment;
        base = encode_address(d, g);
      }
      if (base + segment_bytes <= footprint && !chosen.count(base)) break;
      base = ~0ull;
    }
    if (base == ~0ull) {
      // Dense footprint fallback: next unused segment in linear order.
      for (uint64_t s = 0; s < footprint_segments; ++s) {
        if (!chosen.count(s * segment_bytes)) {
          base = s * segment_bytes;
          break;
        }
      }
    }
    chosen.insert(base);
    bases.push_back(base);
  }
  return bases;
}

std::vector<TraceRecord> generate_synthetic(const SyntheticSpec& spec, const DramGeometry& g) {
  const uint64_t footprint =
      spec.footprint_bytes == 0 ? g.capacity_bytes() : spec.footprint_bytes;
  std::vector<uint64_t> hot = synthetic_hot_segment_bases(spec, g);

  Rng rng(spec.seed);
  const double gap_p = 1.0 / (1.0 + spec.inter_arrival);
  std::vector<TraceRecord> records;
  records.reserve(spec.total_requests);
  uint64_t cycle = 0;
  const uint64_t footprint_blocks = footprint / g.block_bytes;
  for (uint64_t i = 0; i < spec.total_requests; ++i) {
    TraceRecord r;
    r.arrival = cycle;
    cycle += spec.inter_arrival <= 0.0 ? 0 : rng.geometric(gap_p);
    r.kind = rng.chance(spec.write_ratio) ? ReqKind::Write : ReqKind::Read;
    if (!hot.empty() && rng.chance(spec.hot_fraction)) {
      uint64_t seg = hot[rng.bounded(hot.size())];
      r.address = seg + rng.bounded(g.blocks_per_segment) * g.block_bytes;
    } else {
      r.address = rng.bounded(footprint_blocks) * g.block_bytes;
    }
    records.push_back(r);
  }
  return records;
}

}  // namespace figsim
