#pragma once

#include <optional>
#include <vector>

#include "hempsim/core/config.hpp"
#include "hempsim/core/types.hpp"
#include "hempsim/ledger/chain.hpp"

namespace hempsim::sim {

/// Per-lot summary for the raw dump.
struct LotSummary {
  LotId id = 0;
  int season = 0;
  Stage terminal = Stage::Finished;
  std::optional<DropReason> reason;
  SimTime arrived_at = 0.0;
  SimTime terminated_at = 0.0;
  std::uint64_t termination_order = 0;
  bool measured = false;
  CannabinoidState final_state;
  RandomInputs inputs;  // last drawn values; t_prime is the last harvest window
  int retests = 0;
  int plc_passes = 0;
  bool false_pass_preharvest = false;
  bool false_pass_harvest = false;
  bool fake_qualified = false;
  std::vector<Stage> trace;
};

struct RunOptions {
  bool keep_chain = false;
  bool keep_lots = false;
  bool keep_history = false;  // full Lot objects, for property checks
};

struct ReplicationResult {
  ReplicationStats stats;
  std::vector<LotSummary> lots;
  std::vector<Lot> history;
  std::optional<ledger::LedgerState> chain;
  std::uint64_t events = 0;
};

/// One deterministic run: consecutive seasons of lots until the measured
/// window [warmup, warmup + length) of terminations is filled, then drained.
ReplicationResult run_replication(const ScenarioConfig& cfg, int replication_index, const RunOptions& opts = {});

}  // namespace hempsim::sim
