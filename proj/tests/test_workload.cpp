#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "figsim/address.hpp"
#include "figsim/errors.hpp"
#include "figsim/workload.hpp"

using namespace figsim;

TEST_CASE("trace parsing handles the minimal record") {
  std::istringstream in("0 R 0x0\n");
  auto records = parse_trace(in);
  REQUIRE(records.size() == 1);
  CHECK(records[0].arrival == 0);
  CHECK(records[0].kind == ReqKind::Read);
  CHECK(records[0].address == 0);
}

TEST_CASE("trace parsing rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
  };
  CHECK_THROWS_AS(parse("5 X 0x40\n"), ParseError);
  CHECK_THROWS_AS(parse("abc R 0x40\n"), ParseError);
  CHECK_THROWS_AS(parse("5 R zz\n"), ParseError);
  CHECK_THROWS_AS(parse("5 R\n"), ParseError);
  CHECK_THROWS_AS(parse("10 R 0x40\n5 R 0x80\n"), OrderingError);
  CHECK_THROWS_AS(parse("5 R 0x41\n"), AlignmentError);
  CHECK_NOTHROW(parse("# comment\n\n5 R 0x40 # trailing comment\n"));
}

TEST_CASE("generate -> serialize -> parse round-trips losslessly") {
  DramGeometry g;
  SyntheticSpec spec;
  spec.total_requests = 500;
  spec.seed = 17;
  spec.footprint_bytes = 1 << 26;
  auto records = generate_synthetic(spec, g);
  std::ostringstream out;
  write_trace(out, records);
  std::istringstream in(out.str());
  auto parsed = parse_trace(in, g.block_bytes);
  CHECK(parsed == records);
}

TEST_CASE("synthetic generation is deterministic in the seed") {
  DramGeometry g;
  SyntheticSpec spec;
  spec.total_requests = 300;
  spec.seed = 5;
  std::ostringstream a, b;
  write_trace(a, generate_synthetic(spec, g));
  write_trace(b, generate_synthetic(spec, g));
  CHECK(a.str() == b.str());
  spec.seed = 6;
  std::ostringstream c;
  write_trace(c, generate_synthetic(spec, g));
  CHECK(a.str() != c.str());
}

TEST_CASE("degenerate hot set confines all accesses to one segment") {
  DramGeometry g;
  SyntheticSpec spec;
  spec.total_requests = 2000;
  spec.hot_segments = 1;
  spec.hot_fraction = 1.0;
  spec.seed = 3;
  auto bases = synthetic_hot_segment_bases(spec, g);
  REQUIRE(bases.size() == 1);
  uint64_t seg_bytes = g.blocks_per_segment * g.block_bytes;
  for (const auto& r : generate_synthetic(spec, g)) {
    CHECK(r.address >= bases[0]);
    CHECK(r.address < bases[0] + seg_bytes);
  }
}

TEST_CASE("hot-set access share lands within 1% of hot_fraction") {
  DramGeometry g;
  SyntheticSpec spec;
  spec.total_requests = 1000000;
  spec.hot_segments = 64;
  spec.hot_fraction = 0.9;
  spec.seed = 11;
  auto bases = synthetic_hot_segment_bases(spec, g);
  std::map<uint64_t, bool> hot;
  uint64_t seg_bytes = g.blocks_per_segment * g.block_bytes;
  for (uint64_t b : bases) hot[b] = true;
  uint64_t in_hot = 0;
  auto records = generate_synthetic(spec, g);
  for (const auto& r : records) {
    uint64_t seg_base = r.address / seg_bytes * seg_bytes;
    if (hot.count(seg_base)) ++in_hot;
  }
  double share = static_cast<double>(in_hot) / static_cast<double>(records.size());
  CHECK(share > 0.89);
  CHECK(share < 0.91);
}

TEST_CASE("uniform traffic passes a chi-square check across address bins") {
  DramGeometry g;
  SyntheticSpec spec;
  spec.total_requests = 1000000;
  spec.hot_segments = 0;
  spec.hot_fraction = 0.0;
  spec.footprint_bytes = 1ull << 30;
  spec.seed = 23;
  constexpr int kBins = 256;
  uint64_t counts[kBins] = {0};
  for (const auto& r : generate_synthetic(spec, g)) {
    ++counts[r.address / (spec.footprint_bytes / kBins)];
  }
  double expected = static_cast<double>(spec.total_requests) / kBins;
  double chi2 = 0;
  for (uint64_t c : counts) {
    double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  // df = 255: mean 255, sigma = sqrt(2*255) ~ 22.6; 3 sigma above the mean.
  CHECK(chi2 < 255.0 + 3.0 * std::sqrt(2.0 * 255.0));
}

TEST_CASE("spread placement cycles hot segments across subarrays") {
  DramGeometry g;
  SyntheticSpec spec;
  spec.hot_segments = 64;
  spec.seed = 9;
  spec.placement = Placement::SpreadAcrossSubarrays;
  auto bases = synthetic_hot_segment_bases(spec, g);
  REQUIRE(bases.size() == 64);
  for (uint32_t i = 0; i < 64; ++i) {
    DecodedAddress d = decode_address(bases[i], g);
    CHECK(d.subarray == i % g.subarrays_per_bank);
  }

  spec.placement = Placement::SingleSubarray;
  for (uint64_t base : synthetic_hot_segment_bases(spec, g)) {
    CHECK(decode_address(base, g).subarray == 0);
  }
}

TEST_CASE("synthetic spec string parsing") {
  SyntheticSpec s = parse_synthetic_spec("hot=32,frac=0.5,n=1234,ia=8,wr=0.1,placement=single");
  CHECK(s.hot_segments == 32);
  CHECK(s.hot_fraction == 0.5);
  CHECK(s.total_requests == 1234);
  CHECK(s.inter_arrival == 8.0);
  CHECK(s.write_ratio == 0.1);
  CHECK(s.placement == Placement::SingleSubarray);
  CHECK_THROWS_AS(parse_synthetic_spec("bogus=1"), ParseError);
  CHECK_THROWS_AS(parse_synthetic_spec("frac=1.5"), ValidationError);
}
