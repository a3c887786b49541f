#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hempsim/core/config.hpp"
#include "hempsim/risk/lot_model.hpp"
#include "hempsim/risk/shapley.hpp"
#include "hempsim/sim/replication.hpp"

namespace hempsim::report {

enum class Format { Csv, Json };

Format parse_format(std::string_view s);

struct Variant {
  std::string label;
  ScenarioConfig cfg;
};

enum class Scenario { Simulate, Security, Scalability, Resources };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view s);

struct ExperimentSpec {
  std::string name;
  Scenario scenario = Scenario::Simulate;
  std::vector<Variant> variants;
  std::filesystem::path out_dir;  // empty: nothing written
  Format format = Format::Csv;
  int threads = 1;
  bool dump_lots = false;
  bool export_chain = false;  // replication 0 of each variant
};

/// Replications 0..J-1 of one config, fanned out over `threads` workers and
/// returned in replication order.
std::vector<sim::ReplicationResult> run_replications(const ScenarioConfig& cfg, int threads,
                                                     const sim::RunOptions& opts = {});

/// Mean and sample SD across replications, one per variant.
struct Cell {
  double mean = 0.0;
  double sd = 0.0;
};

struct MetricRow {
  std::string name;
  std::vector<Cell> cells;
};

struct Table {
  std::string title;
  std::vector<std::string> variants;
  std::vector<MetricRow> rows;
  int replications = 0;
  std::vector<std::string> notes;
};

struct ExperimentReport {
  Table main;     // the paper-shaped comparison table
  Table summary;  // every counter, for inspection
  std::vector<std::vector<ReplicationStats>> stats;  // [variant][replication]
  std::vector<std::filesystem::path> written;
};

/// The paper's comparisons built on top of `base`.
ExperimentSpec security_spec(const ScenarioConfig& base);
ExperimentSpec scalability_spec(const ScenarioConfig& base);
ExperimentSpec resources_spec(const ScenarioConfig& base);
ExperimentSpec simulate_spec(const ScenarioConfig& base);
ExperimentSpec scenario_spec(Scenario s, const ScenarioConfig& base);

ExperimentReport run_experiment(const ExperimentSpec& spec);

std::string render_csv(const Table& t);
std::string render_json(const Table& t);
std::string render_text(const Table& t);

/// Per-lot rows of every replication.
std::string render_lots_csv(const std::vector<sim::ReplicationResult>& reps);

struct ShapleyRequest {
  risk::Target target = risk::Target::CBD;
  bool exact = false;
  int m = 3000;
  int outer_K = 10;
  int inner_I = 100;
  int macro_J = 10;
  int threads = 1;
};

struct ShapleyReport {
  risk::Target target = risk::Target::CBD;
  std::vector<risk::ShapleyResult> reps;
  risk::RcSummary summary;
  double t_prime_mean = 0.0;
  std::size_t t_prime_observations = 0;
  ShapleyRequest request;
};

/// Pilot simulation for t', then J macro-replications of the Shapley estimator.
ShapleyReport run_shapley(const ScenarioConfig& cfg, const ShapleyRequest& req);
/// Same, with a caller-supplied model (bypasses the pilot).
ShapleyReport run_shapley(const risk::OutputModel& model, std::uint64_t seed, const ShapleyRequest& req);

std::string render_shapley_csv(const ShapleyReport& r);
std::string render_shapley_json(const ShapleyReport& r);
std::string render_shapley_text(const ShapleyReport& r);

void write_file(const std::filesystem::path& p, const std::string& content);
std::string read_file(const std::filesystem::path& p);

}  // namespace hempsim::report
