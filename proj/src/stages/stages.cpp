#include "hempsim/stages/stages.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hempsim::stages {

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Proceed: return "Proceed";
    case Decision::Destroy: return "Destroy";
    case Decision::Drop: return "Drop";
    case Decision::Retest: return "Retest";
  }
  return "?";
}

std::string_view to_string(CoaDecision d) {
  switch (d) {
    case CoaDecision::Accept: return "Accept";
    case CoaDecision::RepeatPLC: return "RepeatPLC";
    case CoaDecision::Reject: return "Reject";
  }
  return "?";
}

namespace {

CannabinoidState split(double total, double r) {
  return {total * r / (r + 1.0), total / (r + 1.0)};
}

double accumulated(double g, double t, double eps) {
  if (g < 0.0 || t < 0.0) throw std::invalid_argument("growth: g and t must be non-negative");
  const double total = g * t + eps;
  // Tolerate rounding at the truncation boundary eps == -g t.
  if (total < 0.0) {
    if (total > -1e-15) return 0.0;
    throw NegativeCannabinoid("growth: g*t + eps = " + std::to_string(total) + " < 0");
  }
  return total;
}

void check_fraction(double f, const char* what) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

CannabinoidState cultivation_growth(double g, double t, double r, double eps) {
  if (!(r > 0.0)) throw std::invalid_argument("growth: r must be positive");
  return split(accumulated(g, t, eps), r);
}

CannabinoidState harvest_increment(const CannabinoidState& state, double g, double t_prime, double r,
                                   double eps_prime) {
  if (!(r > 0.0)) throw std::invalid_argument("growth: r must be positive");
  const auto inc = split(accumulated(g, t_prime, eps_prime), r);
  return {state.cbd + inc.cbd, state.thc + inc.thc};
}

CannabinoidState extraction_step(const CannabinoidState& state, double q) {
  check_fraction(q, "extraction yield Q");
  return {q * state.cbd, q * state.thc};
}

CannabinoidState winterization_step(const CannabinoidState& state, double w) {
  check_fraction(w, "winterization yield W");
  return {w * state.cbd, w * state.thc};
}

CannabinoidState plc_step(const CannabinoidState& state, double q_u, double q_v) {
  check_fraction(q_u, "PLC CBD retention Q_u");
  check_fraction(q_v, "PLC THC retention Q_v");
  return {q_u * state.cbd, q_v * state.thc};
}

GateResult preharvest_gate(const CannabinoidState& truth, double gamma_v, bool tampered) {
  if (!(gamma_v > 0.0)) throw std::invalid_argument("pre-harvest limit must be positive");
  if (truth.thc <= gamma_v) return {Decision::Proceed, truth.thc, false};
  if (tampered) return {Decision::Proceed, gamma_v, true};
  return {Decision::Destroy, truth.thc, false};
}

GateResult harvest_deadline_gate(double t_prime, double limit, bool tampered) {
  if (t_prime < 0.0) throw std::invalid_argument("harvest window must be non-negative");
  if (t_prime <= limit) return {Decision::Proceed, t_prime, false};
  if (tampered) return {Decision::Proceed, limit, true};
  return {Decision::Retest, t_prime, false};
}

CoaResult final_coa_gate(const CannabinoidState& state, double gamma, int plc_passes_used, bool tampered,
                         int max_passes) {
  if (plc_passes_used < 1 || plc_passes_used > max_passes)
    throw std::invalid_argument("PLC passes used must lie in [1, max_passes]");
  if (state.thc < gamma) return {CoaDecision::Accept, state.thc, false};
  if (plc_passes_used < max_passes) return {CoaDecision::RepeatPLC, state.thc, false};
  // Falsified certificate: report a value just under the limit.
  if (tampered) return {CoaDecision::Accept, std::nextafter(gamma, 0.0), true};
  return {CoaDecision::Reject, state.thc, false};
}

std::optional<DropReason> drop_rules(WaitKind kind, double waited, double limit) {
  if (waited < 0.0) throw std::invalid_argument("waiting time must be non-negative");
  if (waited <= limit) return std::nullopt;
  return kind == WaitKind::SeedlingWait ? DropReason::SeedlingWaitExceeded : DropReason::DryWaitExceeded;
}

}  // namespace hempsim::stages
