// hempsim: run hemp supply-chain scenarios, Shapley risk analysis and chain audits.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

#include "hempsim/core/config.hpp"
#include "hempsim/ledger/chain.hpp"
#include "hempsim/report/experiment.hpp"

namespace {

using namespace hempsim;

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  int reps = 0;
  std::string out;
  std::string format = "csv";
  int parallel = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario config file (flat key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides run.seed)");
  cmd->add_option("--reps", c.reps, "replications J (overrides run.reps)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory for tables");
  cmd->add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--parallel", c.parallel, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
}

ScenarioConfig load(const Common& c, const CLI::App* cmd) {
  ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : load_config(c.config);
  if (cmd->count("--seed")) cfg.run.master_seed = c.seed;
  if (cmd->count("--reps")) cfg.run.replications = c.reps;
  return validate_config(cfg);
}

int threads(const Common& c) {
  if (c.parallel > 0) return c.parallel;
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_tables(report::ExperimentSpec spec, const Common& c) {
  spec.out_dir = c.out;
  spec.format = report::parse_format(c.format);
  spec.threads = threads(c);
  const auto rep = report::run_experiment(spec);
  std::cout << report::render_text(rep.main) << '\n';
  for (const auto& p : rep.written) std::cerr << "wrote " << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hempsim - discrete-event digital twin of a ledger-backed hemp supply chain"};
  app.require_subcommand(1);

  Common sim_opts;
  bool dump_lots = false, export_chain = false;
  auto* simulate = app.add_subcommand("simulate", "run replications of one scenario config");
  add_common(simulate, sim_opts);
  simulate->add_flag("--dump-lots", dump_lots, "write per-lot raw rows");
  simulate->add_flag("--export-chain", export_chain, "write the chain of replication 0 as JSON lines");

  Common cmp_opts;
  std::string scenario = "all";
  bool cmp_dump = false;
  auto* compare = app.add_subcommand("compare", "paper comparisons: security, scalability, resources or all");
  add_common(compare, cmp_opts);
  compare->add_option("scenario", scenario, "which comparison")
      ->check(CLI::IsMember({"security", "scalability", "resources", "all"}));
  compare->add_flag("--dump-lots", cmp_dump, "write per-lot raw rows");

  Common sh_opts;
  std::string target = "cbd", estimator = "sampled";
  int m = 0, K = 0, I = 0, J = 0;
  auto* shapley = app.add_subcommand("shapley", "Shapley decomposition of final CBD or THC variance");
  add_common(shapley, sh_opts);
  shapley->add_option("--target", target, "output")->check(CLI::IsMember({"cbd", "thc"}));
  shapley->add_option("--estimator", estimator, "exact (all L! orderings) or sampled")
      ->check(CLI::IsMember({"exact", "sampled"}));
  shapley->add_option("--m", m, "sampled orderings (overrides shapley.m)")->check(CLI::PositiveNumber);
  shapley->add_option("--K", K, "outer samples (overrides shapley.outer_K)")->check(CLI::PositiveNumber);
  shapley->add_option("--I", I, "inner samples (overrides shapley.inner_I)")->check(CLI::Range(2, 1 << 30));
  shapley->add_option("--J", J, "macro-replications (overrides shapley.macro_J)")->check(CLI::Range(2, 1 << 30));

  std::string chain_file;
  auto* audit = app.add_subcommand("audit", "verify hash links and merkle roots of a chain export");
  audit->add_option("file", chain_file, "chain export (JSON lines)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      auto spec = report::simulate_spec(load(sim_opts, simulate));
      spec.dump_lots = dump_lots;
      spec.export_chain = export_chain;
      return run_tables(std::move(spec), sim_opts);
    }
    if (*compare) {
      const auto cfg = load(cmp_opts, compare);
      std::vector<report::Scenario> which;
      if (scenario == "all")
        which = {report::Scenario::Security, report::Scenario::Scalability, report::Scenario::Resources};
      else
        which = {report::parse_scenario(scenario)};
      for (auto s : which) {
        auto spec = report::scenario_spec(s, cfg);
        spec.dump_lots = cmp_dump;
        run_tables(std::move(spec), cmp_opts);
      }
      return 0;
    }
    if (*shapley) {
      const auto cfg = load(sh_opts, shapley);
      report::ShapleyRequest req;
      req.target = risk::parse_target(target);
      req.exact = estimator == "exact";
      req.m = m > 0 ? m : cfg.shapley.permutations_m;
      req.outer_K = K > 0 ? K : cfg.shapley.outer_K;
      req.inner_I = I > 0 ? I : cfg.shapley.inner_I;
      req.macro_J = J > 0 ? J : cfg.shapley.macro_J;
      req.threads = threads(sh_opts);
      const auto rep = report::run_shapley(cfg, req);
      std::cout << report::render_shapley_text(rep);
      if (!sh_opts.out.empty()) {
        const bool csv = sh_opts.format == "csv";
        const auto path = std::filesystem::path(sh_opts.out) /
                          ("shapley_" + std::string(risk::to_string(req.target)) + (csv ? ".csv" : ".json"));
        report::write_file(path, csv ? report::render_shapley_csv(rep) : report::render_shapley_json(rep));
        std::cerr << "wrote " << path.string() << '\n';
      }
      return 0;
    }
    if (*audit) {
      const auto state = ledger::parse_chain(report::read_file(chain_file));
      const auto res = ledger::audit_chain(state);
      if (res.ok()) {
        std::cout << "Ok (" << state.block_count() << " blocks, digest "
                  << ledger::to_hex(ledger::audit_digest(state)) << ")\n";
        return 0;
      }
      const auto* v = res.first();
      std::cout << "Violation at " << v->chain << " height " << v->height << ": " << v->reason << '\n';
      if (res.violations.size() > 1) std::cout << "(" << res.violations.size() - 1 << " further violations)\n";
      return 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& i : e.issues()) std::cerr << "  " << i.key << ": " << i.message << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
