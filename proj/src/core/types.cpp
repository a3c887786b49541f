#include "hempsim/core/types.hpp"

#include <algorithm>

namespace hempsim {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Germination: return "Germination";
    case Stage::SoilPrep: return "SoilPrep";
    case Stage::Transplant: return "Transplant";
    case Stage::Cultivation: return "Cultivation";
    case Stage::PreHarvestTest: return "PreHarvestTest";
    case Stage::Harvest: return "Harvest";
    case Stage::DryWait: return "DryWait";
    case Stage::Drying: return "Drying";
    case Stage::ExtractWait: return "ExtractWait";
    case Stage::Extraction: return "Extraction";
    case Stage::Winterization: return "Winterization";
    case Stage::PLC: return "PLC";
    case Stage::FinalCOA: return "FinalCOA";
    case Stage::Finished: return "Finished";
    case Stage::Dropped: return "Dropped";
    case Stage::Destroyed: return "Destroyed";
  }
  return "?";
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::SeedlingWaitExceeded: return "SeedlingWaitExceeded";
    case DropReason::DryWaitExceeded: return "DryWaitExceeded";
    case DropReason::PreHarvestFail: return "PreHarvestFail";
    case DropReason::HarvestDeadlineExceeded: return "HarvestDeadlineExceeded";
    case DropReason::FinalCOAFail: return "FinalCOAFail";
  }
  return "?";
}

bool is_terminal(Stage s) {
  return s == Stage::Finished || s == Stage::Dropped || s == Stage::Destroyed;
}

void Lot::enter(Stage s, SimTime now) {
  stage = s;
  trace.push_back(s);
  auto [it, inserted] = timestamps.try_emplace(s, StageInterval{now, now});
  if (!inserted) it->second.exit = now;
}

void Lot::leave(Stage s, SimTime now) {
  if (auto it = timestamps.find(s); it != timestamps.end()) it->second.exit = std::max(it->second.exit, now);
}

void Lot::snapshot(Stage s, const CannabinoidState& state) { cannabinoid_history.emplace_back(s, state); }

const CannabinoidState* Lot::latest_state() const {
  return cannabinoid_history.empty() ? nullptr : &cannabinoid_history.back().second;
}

namespace {

bool allowed(Stage from, Stage to, int plc_passes) {
  switch (from) {
    case Stage::Transplant: return to == Stage::Cultivation;
    case Stage::Cultivation: return to == Stage::PreHarvestTest;
    case Stage::PreHarvestTest: return to == Stage::Harvest || to == Stage::Destroyed;
    case Stage::Harvest: return to == Stage::PreHarvestTest || to == Stage::DryWait;
    // A harvest record rejected by verification sends the lot back to testing.
    case Stage::DryWait: return to == Stage::Drying || to == Stage::Dropped || to == Stage::PreHarvestTest;
    case Stage::Drying: return to == Stage::ExtractWait;
    case Stage::ExtractWait: return to == Stage::Extraction;
    case Stage::Extraction: return to == Stage::Winterization;
    case Stage::Winterization: return to == Stage::PLC;
    case Stage::PLC: return to == Stage::FinalCOA;
    case Stage::FinalCOA:
      return to == Stage::Finished || to == Stage::Destroyed || (to == Stage::PLC && plc_passes < 2);
    default: return false;
  }
}

}  // namespace

bool is_valid_trace(const std::vector<Stage>& trace) {
  if (trace.size() < 2) return trace.empty() || trace[0] == Stage::Germination || trace[0] == Stage::SoilPrep;
  const bool opening = (trace[0] == Stage::Germination && trace[1] == Stage::SoilPrep) ||
                       (trace[0] == Stage::SoilPrep && trace[1] == Stage::Germination);
  if (!opening) return false;
  int plc = 0;
  for (std::size_t i = 2; i < trace.size(); ++i) {
    const Stage prev = trace[i - 1];
    const Stage cur = trace[i];
    if (is_terminal(prev)) return false;
    const bool ok = (i == 2) ? (cur == Stage::Transplant || cur == Stage::Dropped) : allowed(prev, cur, plc);
    if (!ok) return false;
    if (cur == Stage::PLC) ++plc;
  }
  return true;
}

}  // namespace hempsim
