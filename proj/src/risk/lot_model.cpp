#include "hempsim/risk/lot_model.hpp"

#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hempsim/sim/replication.hpp"
#include "hempsim/stages/stages.hpp"
#include "hempsim/stochastic/distributions.hpp"

namespace hempsim::risk {

std::string_view to_string(Target t) { return t == Target::CBD ? "cbd" : "thc"; }

Target parse_target(std::string_view s) {
  if (s == "cbd" || s == "CBD") return Target::CBD;
  if (s == "thc" || s == "THC") return Target::THC;
  throw std::invalid_argument("unknown target '" + std::string(s) + "' (expected cbd or thc)");
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> observations) : values_(std::move(observations)) {
  if (values_.empty()) throw std::invalid_argument("empirical distribution needs at least one observation");
}

double EmpiricalDistribution::sample(stochastic::RngStream& s) const {
  return values_[s.next_u64() % values_.size()];
}

double EmpiricalDistribution::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

EmpiricalDistribution pilot_harvest_windows(const ScenarioConfig& cfg) {
  std::vector<double> obs;
  for (int j = 0; j < std::max(1, cfg.shapley.pilot_reps); ++j) {
    const auto res = sim::run_replication(cfg, j);
    obs.insert(obs.end(), res.stats.harvest_windows.begin(), res.stats.harvest_windows.end());
  }
  if (obs.empty()) throw std::runtime_error("pilot runs produced no harvested lots; cannot estimate t'");
  return EmpiricalDistribution(std::move(obs));
}

namespace {

enum Slot { kEps, kTPrime, kEpsPrime, kQ, kW, kQu, kQv, kSlots };

}  // namespace

OutputModel make_lot_model(const ScenarioConfig& cfg, Target target, EmpiricalDistribution t_prime) {
  const double g = cfg.growth_rate_g;
  const double r = cfg.cbd_thc_ratio_r;
  const double lambda = cfg.lambda_var;
  const auto cult = cfg.durations.cultivation;
  const auto yields = cfg.yields;
  auto window = std::make_shared<const EmpiricalDistribution>(std::move(t_prime));

  auto unif = [](UniformBounds b) {
    return [b](stochastic::RngStream& s) { return stochastic::sample(stochastic::Uniform{b.lo, b.hi}, s); };
  };

  std::vector<std::pair<Slot, InputFactor>> all = {
      {kEps,
       {"eps",
        [g, lambda, cult](stochastic::RngStream& s) {
          const double t = stochastic::sample(stochastic::Uniform{cult.lo, cult.hi}, s);
          return g * t + stochastic::sample_growth_noise(g, t, lambda, s);
        }}},
      {kTPrime, {"t_prime", [window](stochastic::RngStream& s) { return window->sample(s); }}},
      {kEpsPrime, {"eps_prime", [](stochastic::RngStream& s) { return s.next_uniform(); }}},
      {kQ, {"Q", unif(yields.q_extract)}},
      {kW, {"W", unif(yields.w_winter)}},
      {kQu, {"Q_u", unif(yields.q_u)}},
      {kQv, {"Q_v", unif(yields.q_v)}},
  };

  OutputModel model;
  std::vector<int> slot_of;  // model input index -> slot
  for (auto& [slot, f] : all) {
    if (target == Target::THC && slot == kQu) continue;
    slot_of.push_back(slot);
    model.inputs.push_back(std::move(f));
  }

  const double gamma = cfg.thc_final_limit;
  const int max_passes = cfg.max_plc_passes;
  model.response = [=](std::span<const double> z) {
    double v[kSlots] = {0, 0, 0, 1, 1, 1, 1};
    for (std::size_t i = 0; i < slot_of.size(); ++i) v[slot_of[i]] = z[i];
    const double total = v[kEps];
    const double tp = v[kTPrime];
    const double eps_prime = stochastic::growth_noise_quantile(g, tp, lambda, v[kEpsPrime]);

    auto state = stages::cultivation_growth(1.0, total, r, 0.0);  // g t + eps already summed
    state = stages::harvest_increment(state, g, tp, r, eps_prime);
    state = stages::extraction_step(state, v[kQ]);
    state = stages::winterization_step(state, v[kW]);
    int passes = 0;
    do {
      state = stages::plc_step(state, v[kQu], v[kQv]);
      ++passes;
    } while (state.thc >= gamma && passes < max_passes);
    return target == Target::CBD ? state.cbd : state.thc;
  };
  return model;
}

}  // namespace hempsim::risk
