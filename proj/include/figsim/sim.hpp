#pragma once

#include <memory>
#include <vector>

#include "figsim/config.hpp"
#include "figsim/controller.hpp"
#include "figsim/dram.hpp"
#include "figsim/stats.hpp"
#include "figsim/workload.hpp"

namespace figsim {

struct SimResult {
  RunReport report;
  std::shared_ptr<BlockStore> store;  // final memory state, for integrity checks
};

// Runs one trace to drain across all channels and produces the report.
// Channels are independent; they execute one after another here and their
// counters merge afterwards.
SimResult run_simulation(const DramConfig& config, const std::vector<TraceRecord>& trace);

}  // namespace figsim
