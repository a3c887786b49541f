#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hempsim {

using SimTime = double;  // simulated days
using LotId = std::uint64_t;

/// Cannabinoid content as fractions of dry mass (0.003 == 0.3%).
struct CannabinoidState {
  double cbd = 0.0;
  double thc = 0.0;

  friend bool operator==(const CannabinoidState&, const CannabinoidState&) = default;
};

enum class Stage : std::uint8_t {
  Germination,
  SoilPrep,
  Transplant,
  Cultivation,
  PreHarvestTest,
  Harvest,
  DryWait,
  Drying,
  ExtractWait,
  Extraction,
  Winterization,
  PLC,
  FinalCOA,
  Finished,
  Dropped,
  Destroyed,
};

enum class DropReason : std::uint8_t {
  SeedlingWaitExceeded,
  DryWaitExceeded,
  PreHarvestFail,
  HarvestDeadlineExceeded,
  FinalCOAFail,
};

std::string_view to_string(Stage s);
std::string_view to_string(DropReason r);

bool is_terminal(Stage s);

struct StageInterval {
  SimTime enter = 0.0;
  SimTime exit = 0.0;
};

/// One unit of product. The cannabinoid history and stage trace are append-only.
struct Lot {
  LotId id = 0;
  int season_index = 0;
  int index_in_season = 0;
  Stage stage = Stage::Germination;
  std::vector<std::pair<Stage, CannabinoidState>> cannabinoid_history;
  std::map<Stage, StageInterval> timestamps;
  std::vector<Stage> trace;
  std::optional<DropReason> drop_reason;

  void enter(Stage s, SimTime now);
  void leave(Stage s, SimTime now);
  void snapshot(Stage s, const CannabinoidState& state);
  [[nodiscard]] const CannabinoidState* latest_state() const;
};

/// Checks a stage trace against the lifecycle order. Germination and SoilPrep
/// may come in either order; PreHarvestTest/Harvest may repeat (retest) and
/// PLC may repeat once. Terminal stages end the trace.
bool is_valid_trace(const std::vector<Stage>& trace);

/// Realization of the per-lot random input factors.
struct RandomInputs {
  double eps = 0.0;        // cultivation growth noise
  double t_prime = 0.0;    // pre-harvest sample to harvest completion, days
  double eps_prime = 0.0;  // harvest-window growth noise
  double q_extract = 1.0;
  double w_winter = 1.0;
  double q_u = 1.0;  // CBD retained per PLC pass
  double q_v = 1.0;  // THC retained per PLC pass
};

/// Final outputs of one finished lot.
struct LotOutput {
  LotId lot_id = 0;
  double cbd = 0.0;
  double thc = 0.0;
  double cycle_time = 0.0;
};

struct ReplicationStats {
  int replication_index = 0;
  int lots_observed = 0;  // K
  int finished = 0;
  int dry_drops = 0;
  int seedling_drops = 0;
  int destroyed_preharvest = 0;
  int destroyed_final = 0;
  int retests = 0;
  int false_pass_preharvest = 0;  // K_fp
  int false_pass_harvest = 0;     // K_fh
  int fake_qualified = 0;         // K_fq

  // Per-record ledger latencies, days. `ledger_*` is the end-to-end latency
  // (verification plus confirmation where the topology has one).
  double verification_mean = 0.0;
  double verification_sd = 0.0;
  double confirmation_mean = 0.0;
  double confirmation_sd = 0.0;
  double ledger_latency_mean = 0.0;
  double ledger_latency_sd = 0.0;
  int records_verified = 0;
  int records_rejected = 0;

  std::vector<LotOutput> outputs;
  std::vector<double> harvest_windows;  // observed t' of lots that proceeded past harvest

  [[nodiscard]] double rate(int count) const {
    return lots_observed > 0 ? static_cast<double>(count) / lots_observed : 0.0;
  }
  [[nodiscard]] int removed() const {
    return dry_drops + seedling_drops + destroyed_preharvest + destroyed_final;
  }
};

}  // namespace hempsim
