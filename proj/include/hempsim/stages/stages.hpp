#pragma once

#include <optional>
#include <stdexcept>

#include "hempsim/core/types.hpp"

namespace hempsim::stages {

class NegativeCannabinoid : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Decision { Proceed, Destroy, Drop, Retest };

std::string_view to_string(Decision d);

/// What happened to one lot at one stage.
struct StageOutcome {
  LotId lot_id = 0;
  Stage stage = Stage::Germination;
  double duration = 0.0;
  CannabinoidState state_after;
  Decision decision = Decision::Proceed;
};

// Linear growth: total cannabinoid g*t + eps split r:1 between CBD and THC.
CannabinoidState cultivation_growth(double g, double t, double r, double eps);

// Further growth over the t' days between pre-harvest sampling and harvest.
CannabinoidState harvest_increment(const CannabinoidState& state, double g, double t_prime, double r, double eps_prime);

CannabinoidState extraction_step(const CannabinoidState& state, double q);
CannabinoidState winterization_step(const CannabinoidState& state, double w);
CannabinoidState plc_step(const CannabinoidState& state, double q_u, double q_v);

/// Result of a regulatory gate. `false_pass` marks a lot let through on a
/// falsified report; `reported` is the value the participant submits.
struct GateResult {
  Decision decision = Decision::Proceed;
  double reported = 0.0;
  bool false_pass = false;
};

/// THC above gamma_v destroys the lot unless the report is falsified.
GateResult preharvest_gate(const CannabinoidState& truth, double gamma_v, bool tampered);

/// Harvest must complete within `limit` days of sampling, otherwise retest.
GateResult harvest_deadline_gate(double t_prime, double limit, bool tampered);

enum class CoaDecision { Accept, RepeatPLC, Reject };

std::string_view to_string(CoaDecision d);

struct CoaResult {
  CoaDecision decision = CoaDecision::Accept;
  double reported_thc = 0.0;
  bool false_pass = false;
};

CoaResult final_coa_gate(const CannabinoidState& state, double gamma, int plc_passes_used, bool tampered,
                         int max_passes = 2);

enum class WaitKind { SeedlingWait, DryWait };

/// nullopt keeps the lot; otherwise the reason it is dropped.
std::optional<DropReason> drop_rules(WaitKind kind, double waited, double limit);

}  // namespace hempsim::stages
