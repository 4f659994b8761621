#include "figsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "figsim/errors.hpp"

namespace figsim {

namespace {

bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    uint64_t r = std::stoull(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not a non-negative integer: '" + v + "'");
  }
}

double parse_f64(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not a number: '" + v + "'");
  }
}

std::string fmt_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest form that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[64];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

int64_t uj_to_pj(double uj) { return static_cast<int64_t>(std::llround(uj * 1e6)); }

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Base: return "base";
    case Mode::FigFast: return "figcache-fast";
    case Mode::FigSlow: return "figcache-slow";
    case Mode::LisaVilla: return "lisa-villa";
    case Mode::FigIdeal: return "figcache-ideal";
    case Mode::LLDram: return "ll-dram";
  }
  return "?";
}

const char* replacement_name(Replacement r) {
  switch (r) {
    case Replacement::RowBenefit: return "row-benefit";
    case Replacement::SegmentBenefit: return "segment-benefit";
    case Replacement::LRU: return "lru";
    case Replacement::Random: return "random";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "base") return Mode::Base;
  if (s == "figcache-fast" || s == "fig-fast") return Mode::FigFast;
  if (s == "figcache-slow" || s == "fig-slow") return Mode::FigSlow;
  if (s == "lisa-villa" || s == "lisa") return Mode::LisaVilla;
  if (s == "figcache-ideal" || s == "fig-ideal") return Mode::FigIdeal;
  if (s == "ll-dram" || s == "lldram") return Mode::LLDram;
  throw ParseError("unknown mode '" + s + "'");
}

Replacement parse_replacement(const std::string& s) {
  if (s == "row-benefit" || s == "RowBenefit") return Replacement::RowBenefit;
  if (s == "segment-benefit" || s == "SegmentBenefit") return Replacement::SegmentBenefit;
  if (s == "lru" || s == "LRU") return Replacement::LRU;
  if (s == "random" || s == "Random") return Replacement::Random;
  throw ParseError("unknown replacement policy '" + s + "'");
}

uint64_t ns_to_cycles(double ns, double clock_period) {
  double q = ns / clock_period;
  return static_cast<uint64_t>(std::ceil(q - 1e-9));
}

TimingCycles to_cycles(const TimingParams& t) {
  TimingCycles c;
  c.rcd = ns_to_cycles(t.t_rcd, t.clock_period);
  c.rp = ns_to_cycles(t.t_rp, t.clock_period);
  c.ras = ns_to_cycles(t.t_ras, t.clock_period);
  c.reloc = ns_to_cycles(t.t_reloc, t.clock_period);
  c.ccd = ns_to_cycles(t.t_ccd, t.clock_period);
  c.burst = ns_to_cycles(t.t_burst, t.clock_period);
  return c;
}

TimingParams derive_fast_timings(const TimingParams& base, const FastReductions& red) {
  auto snap = [&](double ns, double reduction) {
    double scaled = ns * (1.0 - reduction);
    return static_cast<double>(ns_to_cycles(scaled, base.clock_period)) * base.clock_period;
  };
  TimingParams fast = base;
  fast.t_rcd = snap(base.t_rcd, red.rcd);
  fast.t_rp = snap(base.t_rp, red.rp);
  fast.t_ras = snap(base.t_ras, red.ras);
  return fast;
}

int64_t EnergyParams::act_pj() const { return uj_to_pj(e_act); }
int64_t EnergyParams::pre_pj() const { return uj_to_pj(e_pre); }
int64_t EnergyParams::rd_pj() const { return uj_to_pj(e_rd); }
int64_t EnergyParams::wr_pj() const { return uj_to_pj(e_wr); }
int64_t EnergyParams::reloc_pj() const { return uj_to_pj(e_reloc); }
double EnergyParams::static_pj_per_ns() const { return e_static * 1e6; }

namespace {

struct KeyHandler {
  std::function<void(DramConfig&, const std::string& value, const std::string& key)> set;
};

const std::map<std::string, KeyHandler>& key_table() {
  static const std::map<std::string, KeyHandler> table = {
      // geometry
      {"channels", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.channels = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"ranks_per_channel", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.ranks_per_channel = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"bank_groups", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.bank_groups = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"banks_per_group", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.banks_per_group = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"subarrays_per_bank", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.subarrays_per_bank = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"rows_per_subarray", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.rows_per_subarray = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"row_bytes", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.row_bytes = parse_u64(v, k); }}},
      {"block_bytes", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.block_bytes = parse_u64(v, k); }}},
      {"blocks_per_segment", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.geometry.blocks_per_segment = static_cast<uint32_t>(parse_u64(v, k)); }}},
      // timing
      {"t_rcd", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.timing.t_rcd = parse_f64(v, k); }}},
      {"t_rp", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.timing.t_rp = parse_f64(v, k); }}},
      {"t_ras", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.timing.t_ras = parse_f64(v, k); }}},
      {"t_reloc", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.timing.t_reloc = parse_f64(v, k); }}},
      {"t_ccd", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.timing.t_ccd = parse_f64(v, k); }}},
      {"t_burst", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.timing.t_burst = parse_f64(v, k); }}},
      {"clock_period", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.timing.clock_period = parse_f64(v, k); }}},
      // energy
      {"e_act", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.energy.e_act = parse_f64(v, k); }}},
      {"e_pre", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.energy.e_pre = parse_f64(v, k); }}},
      {"e_rd", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.energy.e_rd = parse_f64(v, k); }}},
      {"e_wr", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.energy.e_wr = parse_f64(v, k); }}},
      {"e_reloc", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.energy.e_reloc = parse_f64(v, k); }}},
      {"e_static", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.energy.e_static = parse_f64(v, k); }}},
      // policy
      {"mode", {[](DramConfig& c, const std::string& v, const std::string&) {
         c.policy.mode = parse_mode(v); }}},
      {"cache_rows_per_bank", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.cache_rows_per_bank = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"replacement", {[](DramConfig& c, const std::string& v, const std::string&) {
         c.policy.replacement = parse_replacement(v); }}},
      {"insertion_threshold", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.insertion_threshold = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"benefit_bits", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.benefit_bits = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"lisa_hop_ns", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.lisa_hop_ns = parse_f64(v, k); }}},
      {"random_seed", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.random_seed = parse_u64(v, k); }}},
      {"fast_subarrays", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.fast_subarrays = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"fast_subarray_rows", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.fast_subarray_rows = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"cache_subarray", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.cache_subarray = static_cast<uint32_t>(parse_u64(v, k)); }}},
      {"lisa_base_ns", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.lisa_base_ns = parse_f64(v, k); }}},
      {"max_outstanding", {[](DramConfig& c, const std::string& v, const std::string& k) {
         c.policy.max_outstanding = static_cast<uint32_t>(parse_u64(v, k)); }}},
  };
  return table;
}

// Cache sizing defaults depend on the mode, applied only for keys the file
// did not set explicitly.
void apply_mode_defaults(DramConfig& c, const std::set<std::string>& explicit_keys) {
  const Mode m = c.policy.mode;
  if (!explicit_keys.count("cache_rows_per_bank")) {
    c.policy.cache_rows_per_bank = (m == Mode::LisaVilla) ? 512 : 64;
  }
  if (!explicit_keys.count("fast_subarrays")) {
    switch (m) {
      case Mode::FigFast:
      case Mode::FigIdeal: c.policy.fast_subarrays = 2; break;
      case Mode::LisaVilla: c.policy.fast_subarrays = 16; break;
      default: c.policy.fast_subarrays = 0; break;
    }
  }
  if (!explicit_keys.count("cache_subarray")) {
    c.policy.cache_subarray = c.geometry.subarrays_per_bank - 1;
  }
}

}  // namespace

void apply_config_key(DramConfig& config, const std::string& key, const std::string& value) {
  auto it = key_table().find(key);
  if (it == key_table().end()) throw ParseError("unknown key '" + key + "'");
  it->second.set(config, value, key);
}

DramConfig load_config_text(const std::string& text) {
  DramConfig config;
  std::set<std::string> explicit_keys;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("line " + std::to_string(lineno) + ": empty key or value");
    }
    try {
      apply_config_key(config, key, value);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    explicit_keys.insert(key);
  }
  apply_mode_defaults(config, explicit_keys);
  validate(config);
  return config;
}

DramConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str());
}

std::string save_config_text(const DramConfig& c) {
  std::ostringstream out;
  out << "channels = " << c.geometry.channels << "\n"
      << "ranks_per_channel = " << c.geometry.ranks_per_channel << "\n"
      << "bank_groups = " << c.geometry.bank_groups << "\n"
      << "banks_per_group = " << c.geometry.banks_per_group << "\n"
      << "subarrays_per_bank = " << c.geometry.subarrays_per_bank << "\n"
      << "rows_per_subarray = " << c.geometry.rows_per_subarray << "\n"
      << "row_bytes = " << c.geometry.row_bytes << "\n"
      << "block_bytes = " << c.geometry.block_bytes << "\n"
      << "blocks_per_segment = " << c.geometry.blocks_per_segment << "\n"
      << "t_rcd = " << fmt_f64(c.timing.t_rcd) << "\n"
      << "t_rp = " << fmt_f64(c.timing.t_rp) << "\n"
      << "t_ras = " << fmt_f64(c.timing.t_ras) << "\n"
      << "t_reloc = " << fmt_f64(c.timing.t_reloc) << "\n"
      << "t_ccd = " << fmt_f64(c.timing.t_ccd) << "\n"
      << "t_burst = " << fmt_f64(c.timing.t_burst) << "\n"
      << "clock_period = " << fmt_f64(c.timing.clock_period) << "\n"
      << "e_act = " << fmt_f64(c.energy.e_act) << "\n"
      << "e_pre = " << fmt_f64(c.energy.e_pre) << "\n"
      << "e_rd = " << fmt_f64(c.energy.e_rd) << "\n"
      << "e_wr = " << fmt_f64(c.energy.e_wr) << "\n"
      << "e_reloc = " << fmt_f64(c.energy.e_reloc) << "\n"
      << "e_static = " << fmt_f64(c.energy.e_static) << "\n"
      << "mode = " << mode_name(c.policy.mode) << "\n"
      << "cache_rows_per_bank = " << c.policy.cache_rows_per_bank << "\n"
      << "replacement = " << replacement_name(c.policy.replacement) << "\n"
      << "insertion_threshold = " << c.policy.insertion_threshold << "\n"
      << "benefit_bits = " << c.policy.benefit_bits << "\n"
      << "lisa_hop_ns = " << fmt_f64(c.policy.lisa_hop_ns) << "\n"
      << "random_seed = " << c.policy.random_seed << "\n"
      << "fast_subarrays = " << c.policy.fast_subarrays << "\n"
      << "fast_subarray_rows = " << c.policy.fast_subarray_rows << "\n"
      << "cache_subarray = " << c.policy.cache_subarray << "\n"
      << "lisa_base_ns = " << fmt_f64(c.policy.lisa_base_ns) << "\n"
      << "max_outstanding = " << c.policy.max_outstanding << "\n";
  return out.str();
}

void save_config(const DramConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file '" + path + "'");
  out << save_config_text(config);
}

void validate(const DramConfig& c) {
  const auto& g = c.geometry;
  auto require = [](bool ok, const char* field, const std::string& why) {
    if (!ok) throw ValidationError(field, why);
  };

  require(g.channels > 0 && is_pow2(g.channels), "channels", "must be a positive power of two");
  require(g.ranks_per_channel > 0 && is_pow2(g.ranks_per_channel), "ranks_per_channel",
          "must be a positive power of two");
  require(g.bank_groups > 0 && is_pow2(g.bank_groups), "bank_groups",
          "must be a positive power of two");
  require(g.banks_per_group > 0 && is_pow2(g.banks_per_group), "banks_per_group",
          "must be a positive power of two");
  require(g.subarrays_per_bank > 0 && is_pow2(g.subarrays_per_bank), "subarrays_per_bank",
          "must be a positive power of two");
  require(g.rows_per_subarray > 0 && is_pow2(g.rows_per_subarray), "rows_per_subarray",
          "must be a positive power of two");
  require(g.block_bytes > 0 && is_pow2(g.block_bytes), "block_bytes",
          "must be a positive power of two");
  require(g.row_bytes > 0 && is_pow2(g.row_bytes), "row_bytes",
          "must be a positive power of two");
  require(g.row_bytes % g.block_bytes == 0, "row_bytes", "must be divisible by block_bytes");
  require(g.blocks_per_segment > 0, "blocks_per_segment", "must be positive");
  require(g.blocks_per_row() % g.blocks_per_segment == 0, "blocks_per_segment",
          "must divide blocks_per_row (" + std::to_string(g.blocks_per_row()) + ")");
  // Block-identity keys pack bank/row/column into fixed bit fields.
  require(g.blocks_per_row() <= (1u << 16), "row_bytes", "more than 2^16 blocks per row");
  require(g.rows_per_bank() <= (1u << 23), "rows_per_subarray", "more than 2^23 rows per bank");

  const auto& t = c.timing;
  require(t.t_rcd > 0, "t_rcd", "must be positive");
  require(t.t_rp > 0, "t_rp", "must be positive");
  require(t.t_ras > 0, "t_ras", "must be positive");
  require(t.t_reloc > 0, "t_reloc", "must be positive");
  require(t.t_ccd > 0, "t_ccd", "must be positive");
  require(t.t_burst > 0, "t_burst", "must be positive");
  require(t.clock_period > 0, "clock_period", "must be positive");
  require(t.t_ras >= t.t_rcd, "t_ras", "must be >= t_rcd");

  const auto& e = c.energy;
  require(e.e_act >= 0 && e.e_pre >= 0 && e.e_rd >= 0 && e.e_wr >= 0 && e.e_reloc >= 0 &&
              e.e_static >= 0,
          "energy", "all energy parameters must be non-negative");

  const auto& p = c.policy;
  require(p.insertion_threshold >= 1, "insertion_threshold", "must be >= 1");
  require(p.benefit_bits <= 16, "benefit_bits", "must be at most 16");
  require(p.lisa_hop_ns >= 0, "lisa_hop_ns", "must be non-negative");
  require(p.lisa_base_ns >= 0, "lisa_base_ns", "must be non-negative");
  require(p.max_outstanding >= 1, "max_outstanding", "must be >= 1");

  validate_mode(c);
}

void validate_mode(const DramConfig& c) {
  const auto& p = c.policy;
  const auto& g = c.geometry;
  switch (p.mode) {
    case Mode::Base:
    case Mode::LLDram:
      return;  // cache parameters are ignored
    case Mode::FigFast:
    case Mode::FigIdeal:
    case Mode::LisaVilla: {
      if (p.cache_rows_per_bank == 0)
        throw ValidationError("cache_rows_per_bank", "must be positive in caching modes");
      if (p.fast_subarrays == 0)
        throw ValidationError("fast_subarrays", "must be positive for fast-subarray caches");
      uint64_t rows = static_cast<uint64_t>(p.fast_subarrays) * p.fast_subarray_rows;
      if (rows != p.cache_rows_per_bank) {
        throw ValidationError(
            "cache_rows_per_bank",
            "fast_subarrays * fast_subarray_rows = " + std::to_string(rows) +
                " does not match cache_rows_per_bank = " + std::to_string(p.cache_rows_per_bank));
      }
      return;
    }
    case Mode::FigSlow: {
      if (p.cache_rows_per_bank == 0)
        throw ValidationError("cache_rows_per_bank", "must be positive in caching modes");
      if (p.cache_subarray >= g.subarrays_per_bank) {
        throw ValidationError("cache_subarray",
                              "index " + std::to_string(p.cache_subarray) + " out of range (" +
                                  std::to_string(g.subarrays_per_bank) + " subarrays)");
      }
      if (p.cache_rows_per_bank > g.rows_per_subarray) {
        throw ValidationError("cache_rows_per_bank",
                              std::to_string(p.cache_rows_per_bank) + " exceeds rows_per_subarray (" +
                                  std::to_string(g.rows_per_subarray) + ")");
      }
      return;
    }
  }
}

}  // namespace figsim
