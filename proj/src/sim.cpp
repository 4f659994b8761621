#include "figsim/sim.hpp"

#include <algorithm>

#include "figsim/address.hpp"
#include "figsim/errors.hpp"

namespace figsim {

SimResult run_simulation(const DramConfig& config, const std::vector<TraceRecord>& trace) {
  validate(config);
  const auto& g = config.geometry;
  auto store = std::make_shared<BlockStore>(g);

  std::vector<std::vector<MemoryRequest>> per_channel(g.channels);
  for (size_t i = 0; i < trace.size(); ++i) {
    const TraceRecord& rec = trace[i];
    if (i > 0 && rec.arrival < trace[i - 1].arrival) {
      throw OrderingError("trace record " + std::to_string(i) + " arrives out of order");
    }
    MemoryRequest req;
    req.id = i;
    req.kind = rec.kind;
    req.address = rec.address;
    req.arrival = static_cast<Cycle>(rec.arrival);
    req.home = decode_address(rec.address, g);
    req.bank = bank_index_in_channel(req.home, g);
    per_channel[req.home.channel].push_back(req);
  }

  std::vector<Counters> per_bank(g.banks_total());
  LatencyRecorder latencies;
  uint64_t max_cycles = 0;
  size_t tracker_peak = 0;
  uint64_t flush_relocs = 0;
  for (uint32_t ch = 0; ch < g.channels; ++ch) {
    ChannelController controller(config, ch, *store);
    controller.set_trace(std::move(per_channel[ch]));
    controller.run();
    const auto& counters = controller.bank_counters();
    for (uint32_t b = 0; b < counters.size(); ++b) {
      per_bank[ch * g.banks_per_channel() + b] = counters[b];
    }
    latencies.merge(controller.latencies());
    max_cycles = std::max(max_cycles, static_cast<uint64_t>(controller.now()));
    tracker_peak = std::max(tracker_peak, controller.miss_tracker_peak());
    flush_relocs += controller.flush_relocs();
  }

  Counters totals;
  for (const auto& c : per_bank) totals += c;
  SimResult result;
  result.report = finalize(config, config.policy.random_seed, totals, per_bank, latencies,
                           max_cycles, tracker_peak);
  result.report.flush_relocs = flush_relocs;
  result.store = store;
  return result;
}

}  // namespace figsim
