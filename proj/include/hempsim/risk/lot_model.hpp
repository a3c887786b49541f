#pragma once

#include <string_view>
#include <vector>

#include "hempsim/core/config.hpp"
#include "hempsim/risk/shapley.hpp"

namespace hempsim::risk {

enum class Target { CBD, THC };

std::string_view to_string(Target t);
Target parse_target(std::string_view s);

/// Empirical distribution of the harvest window t' observed in full
/// simulation runs; sampled by drawing one observation uniformly.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> observations);

  double sample(stochastic::RngStream& s) const;
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] double mean() const;

 private:
  std::vector<double> values_;
};

/// t' observations from `cfg.shapley.pilot_reps` simulation replications.
EmpiricalDistribution pilot_harvest_windows(const ScenarioConfig& cfg);

/// Queue-free trajectory evaluator of one lot from cultivation through PLC.
/// CBD uses {eps, t', eps', Q, W, Q_u, Q_v}; THC drops Q_u, which never
/// touches THC. The eps input is the total cultivated cannabinoid g t + eps
/// (t drawn from the cultivation duration); eps' enters as a uniform mapped
/// through the truncated-normal quantile at the sampled t', so every input is
/// independently resampleable. The PLC repeat gate is applied; lots are not
/// removed by the other gates.
OutputModel make_lot_model(const ScenarioConfig& cfg, Target target, EmpiricalDistribution t_prime);

}  // namespace hempsim::risk
