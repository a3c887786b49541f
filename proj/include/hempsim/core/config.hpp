#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hempsim {

struct UniformBounds {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
  friend bool operator==(const UniformBounds&, const UniformBounds&) = default;
};

enum class Topology { TwoLayer, SingleChain, None };

std::string_view to_string(Topology t);
Topology parse_topology(std::string_view s);

struct StageDurations {
  UniformBounds germination{5, 10};
  UniformBounds soil_prep{1, 2};
  UniformBounds transplant{1, 2};
  UniformBounds cultivation{50, 60};
  UniformBounds preharvest_test{2, 7};
  UniformBounds harvest{1, 2};
  UniformBounds drying{1, 2};
  UniformBounds extraction{1, 2};
  UniformBounds winterization{1, 3};
  UniformBounds plc{1, 5};

  friend bool operator==(const StageDurations&, const StageDurations&) = default;
};

/// Bounds of the processing yield factors.
struct YieldBounds {
  UniformBounds q_extract{0.6, 0.8};
  UniformBounds w_winter{0.95, 1.0};
  UniformBounds q_u{0.9, 1.0};
  UniformBounds q_v{0.3, 0.5};

  friend bool operator==(const YieldBounds&, const YieldBounds&) = default;
};

struct Resources {
  int n_f = 10;  // field crews: transplant and harvest
  int n_l = 10;  // pre-harvest lab
  int n_d = 3;   // dryers
  int n_p = 2;   // per processing step: extraction, winterization, PLC
  bool dynamic_dryers = false;

  friend bool operator==(const Resources&, const Resources&) = default;
};

struct ChainConfig {
  Topology topology = Topology::TwoLayer;
  int n_shards = 2;
  int n_s = 4;       // validators per shard
  int n_r = 2;       // root regulators; also the single-chain validator count
  double mu_v = 0.1;   // mean on-site verification time, days
  double mu_c = 0.05;  // mean root confirmation time, days
  double mu_s = 0.15;  // mean single-chain verification time, days
  int panel_m = 1;
  double miss_prob = 0.0;  // probability a tampered record escapes verification

  [[nodiscard]] bool enabled() const { return topology != Topology::None; }
  friend bool operator==(const ChainConfig&, const ChainConfig&) = default;
};

struct RunConfig {
  int warmup_lots = 200;
  int run_length_lots = 500;
  int replications = 100;
  std::uint64_t master_seed = 20200601;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ShapleyConfig {
  int outer_K = 10;
  int inner_I = 100;
  int permutations_m = 3000;
  int macro_J = 10;
  int pilot_reps = 5;  // replications used to estimate the t' distribution

  friend bool operator==(const ShapleyConfig&, const ShapleyConfig&) = default;
};

struct ScenarioConfig {
  int n_lots_per_season = 50;
  double season_length_days = 365.0;
  double growth_rate_g = 0.102 / 56.0;
  double cbd_thc_ratio_r = 28.0;
  double lambda_var = 0.5;
  double thc_preharvest_limit = 0.003;  // gamma_v
  double thc_final_limit = 0.0005;      // gamma
  double harvest_deadline_days = 15.0;
  double seedling_wait_limit = 2.0;  // L_t
  double dry_wait_limit = 2.0;       // L_d
  double harvest_delay_policy = 0.0;
  int max_plc_passes = 2;
  Resources resources;
  ChainConfig chain;
  double tamper_prob_p2 = 0.3;
  RunConfig run;
  StageDurations durations;
  YieldBounds yields;
  ShapleyConfig shapley;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

enum class ConfigErrorKind { InvalidRange, InvalidProbability, ZeroResource, InvalidValue, Unsupported };

std::string_view to_string(ConfigErrorKind k);

struct ConfigIssue {
  ConfigErrorKind kind;
  std::string key;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  [[nodiscard]] const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Every invariant violation in `cfg`; empty when the config is usable.
std::vector<ConfigIssue> check_config(const ScenarioConfig& cfg);

/// Returns `cfg` unchanged, or throws ConfigError listing every violation.
ScenarioConfig validate_config(const ScenarioConfig& cfg);

/// Flat `key = value` text; `#` starts a comment. Unknown keys are an error.
ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ScenarioConfig& cfg);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hempsim
