#include "hempsim/report/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hempsim::report {

using nlohmann::ordered_json;

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw std::invalid_argument("unknown format '" + std::string(s) + "' (expected csv or json)");
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Simulate: return "simulate";
    case Scenario::Security: return "security";
    case Scenario::Scalability: return "scalability";
    case Scenario::Resources: return "resources";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  for (auto sc : {Scenario::Simulate, Scenario::Security, Scenario::Scalability, Scenario::Resources})
    if (to_string(sc) == s) return sc;
  throw std::invalid_argument("unknown scenario '" + std::string(s) + "'");
}

std::vector<sim::ReplicationResult> run_replications(const ScenarioConfig& cfg, int threads,
                                                     const sim::RunOptions& opts) {
  validate_config(cfg);
  const int J = cfg.run.replications;
  std::vector<sim::ReplicationResult> out(J);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (int j = next++; j < J; j = next++) {
      try {
        out[j] = sim::run_replication(cfg, j, opts);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min(threads, J));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// --- scenarios -----------------------------------------------------------

ExperimentSpec security_spec(const ScenarioConfig& base) {
  ExperimentSpec s{"security", Scenario::Security, {}, {}, Format::Csv, 1, false, false};
  auto with = base;
  if (!with.chain.enabled()) with.chain.topology = Topology::TwoLayer;
  auto without = base;
  without.chain.topology = Topology::None;
  s.variants = {{"with_blockchain", with}, {"without_blockchain", without}};
  return s;
}

ExperimentSpec scalability_spec(const ScenarioConfig& base) {
  ExperimentSpec s{"scalability", Scenario::Scalability, {}, {}, Format::Csv, 1, false, false};
  auto two = base;
  two.chain.topology = Topology::TwoLayer;
  auto single = base;
  single.chain.topology = Topology::SingleChain;
  s.variants = {{"two_layer", two}, {"single_chain", single}};
  return s;
}

ExperimentSpec resources_spec(const ScenarioConfig& base) {
  ExperimentSpec s{"resources", Scenario::Resources, {}, {}, Format::Csv, 1, false, false};
  auto fixed = base;
  fixed.resources.dynamic_dryers = false;
  auto dynamic = base;
  dynamic.resources.dynamic_dryers = true;
  s.variants = {{"fixed", fixed}, {"dynamic", dynamic}};
  return s;
}

ExperimentSpec simulate_spec(const ScenarioConfig& base) {
  return {"simulate", Scenario::Simulate, {{"base", base}}, {}, Format::Csv, 1, false, false};
}

ExperimentSpec scenario_spec(Scenario s, const ScenarioConfig& base) {
  switch (s) {
    case Scenario::Security: return security_spec(base);
    case Scenario::Scalability: return scalability_spec(base);
    case Scenario::Resources: return resources_spec(base);
    case Scenario::Simulate: break;
  }
  return simulate_spec(base);
}

// --- aggregation ---------------------------------------------------------

namespace {

using Extract = std::function<double(const ReplicationStats&)>;

struct Metric {
  std::string name;
  Extract get;
};

Metric pct(std::string name, int ReplicationStats::*field) {
  return {std::move(name), [field](const ReplicationStats& s) { return 100.0 * s.rate(s.*field); }};
}

Metric count(std::string name, int ReplicationStats::*field) {
  return {std::move(name), [field](const ReplicationStats& s) { return static_cast<double>(s.*field); }};
}

Metric real(std::string name, double ReplicationStats::*field) {
  return {std::move(name), [field](const ReplicationStats& s) { return s.*field; }};
}

std::vector<Metric> main_metrics(Scenario s) {
  switch (s) {
    case Scenario::Security:
      return {pct("False Pass Pre-Harvest (%)", &ReplicationStats::false_pass_preharvest),
              pct("False Pass Harvest (%)", &ReplicationStats::false_pass_harvest),
              pct("Fake Qualified (%)", &ReplicationStats::fake_qualified)};
    case Scenario::Scalability:
      return {real("Mean Verification Time", &ReplicationStats::ledger_latency_mean),
              real("SD Verification Time", &ReplicationStats::ledger_latency_sd),
              count("Finished #", &ReplicationStats::finished), count("Dry Drop #", &ReplicationStats::dry_drops)};
    case Scenario::Resources:
      return {count("Finished #", &ReplicationStats::finished), count("Dry Drop #", &ReplicationStats::dry_drops)};
    case Scenario::Simulate: break;
  }
  return {count("Finished #", &ReplicationStats::finished), count("Dry Drop #", &ReplicationStats::dry_drops),
          count("Seedling Drop #", &ReplicationStats::seedling_drops),
          count("Destroyed Pre-Harvest #", &ReplicationStats::destroyed_preharvest),
          count("Destroyed Final COA #", &ReplicationStats::destroyed_final),
          pct("False Pass Pre-Harvest (%)", &ReplicationStats::false_pass_preharvest),
          pct("False Pass Harvest (%)", &ReplicationStats::false_pass_harvest),
          pct("Fake Qualified (%)", &ReplicationStats::fake_qualified),
          real("Mean Verification Time", &ReplicationStats::ledger_latency_mean)};
}

std::vector<Metric> summary_metrics() {
  return {count("Lots Observed", &ReplicationStats::lots_observed),
          count("Finished #", &ReplicationStats::finished),
          count("Dry Drop #", &ReplicationStats::dry_drops),
          count("Seedling Drop #", &ReplicationStats::seedling_drops),
          count("Destroyed Pre-Harvest #", &ReplicationStats::destroyed_preharvest),
          count("Destroyed Final COA #", &ReplicationStats::destroyed_final),
          count("Retests #", &ReplicationStats::retests),
          count("K_fp", &ReplicationStats::false_pass_preharvest),
          count("K_fh", &ReplicationStats::false_pass_harvest),
          count("K_fq", &ReplicationStats::fake_qualified),
          real("Verification Mean", &ReplicationStats::verification_mean),
          real("Verification SD", &ReplicationStats::verification_sd),
          real("Confirmation Mean", &ReplicationStats::confirmation_mean),
          real("Confirmation SD", &ReplicationStats::confirmation_sd),
          real("Ledger Latency Mean", &ReplicationStats::ledger_latency_mean),
          real("Ledger Latency SD", &ReplicationStats::ledger_latency_sd),
          count("Records Verified", &ReplicationStats::records_verified),
          count("Records Rejected", &ReplicationStats::records_rejected)};
}

Cell across(const std::vector<ReplicationStats>& reps, const Extract& get) {
  Cell c;
  if (reps.empty()) return c;
  double s = 0.0;
  for (const auto& r : reps) s += get(r);
  c.mean = s / static_cast<double>(reps.size());
  if (reps.size() > 1) {
    double ss = 0.0;
    for (const auto& r : reps) ss += (get(r) - c.mean) * (get(r) - c.mean);
    c.sd = std::sqrt(ss / static_cast<double>(reps.size() - 1));
  }
  return c;
}

Table build(const std::string& title, const std::vector<Metric>& metrics, const std::vector<std::string>& variants,
            const std::vector<std::vector<ReplicationStats>>& stats) {
  Table t;
  t.title = title;
  t.variants = variants;
  t.replications = stats.empty() ? 0 : static_cast<int>(stats.front().size());
  for (const auto& m : metrics) {
    MetricRow row{m.name, {}};
    for (const auto& v : stats) row.cells.push_back(across(v, m.get));
    t.rows.push_back(std::move(row));
  }
  t.notes.push_back("+/- values are across-replication sample standard deviations over J = " +
                    std::to_string(t.replications) + " replications");
  return t;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  if (spec.variants.empty()) throw std::invalid_argument("experiment needs at least one variant");
  std::set<std::string> labels;
  for (const auto& v : spec.variants) {
    if (!labels.insert(v.label).second) throw std::invalid_argument("duplicate variant label '" + v.label + "'");
    validate_config(v.cfg);
  }

  ExperimentReport rep;
  std::vector<std::string> names;
  sim::RunOptions opts;
  opts.keep_lots = spec.dump_lots;
  for (const auto& v : spec.variants) {
    names.push_back(v.label);
    auto results = run_replications(v.cfg, spec.threads, opts);
    std::vector<ReplicationStats> stats;
    for (auto& r : results) stats.push_back(std::move(r.stats));
    rep.stats.push_back(std::move(stats));

    if (!spec.out_dir.empty() && spec.dump_lots) {
      auto path = spec.out_dir / (spec.name + "_lots_" + v.label + ".csv");
      write_file(path, render_lots_csv(results));
      rep.written.push_back(path);
    }
    if (!spec.out_dir.empty() && spec.export_chain && v.cfg.chain.enabled()) {
      sim::RunOptions chain_opts;
      chain_opts.keep_chain = true;
      auto r0 = sim::run_replication(v.cfg, 0, chain_opts);
      auto path = spec.out_dir / (spec.name + "_chain_" + v.label + ".jsonl");
      write_file(path, ledger::export_chain(*r0.chain));
      rep.written.push_back(path);
    }
  }

  rep.main = build(spec.name, main_metrics(spec.scenario), names, rep.stats);
  rep.summary = build(spec.name + "_summary", summary_metrics(), names, rep.stats);
  if (spec.scenario == Scenario::Scalability || spec.scenario == Scenario::Simulate)
    rep.main.notes.push_back("verification time: per-record submission to confirmation, days");
  if (spec.scenario == Scenario::Security)
    rep.main.notes.push_back("rates: K_fp / K, K_fh / K, K_fq / K over the measured window of K lots");

  if (!spec.out_dir.empty()) {
    const std::string ext = spec.format == Format::Csv ? ".csv" : ".json";
    auto render = [&](const Table& t) { return spec.format == Format::Csv ? render_csv(t) : render_json(t); };
    for (const Table* t : {&rep.main, &rep.summary}) {
      auto path = spec.out_dir / (t->title + ext);
      write_file(path, render(*t));
      rep.written.push_back(path);
    }
  }
  return rep;
}

// --- rendering -----------------------------------------------------------

std::string render_csv(const Table& t) {
  std::ostringstream o;
  o << "metric";
  for (const auto& v : t.variants) o << ',' << v << "_mean," << v << "_sd";
  o << '\n';
  for (const auto& r : t.rows) {
    o << r.name;
    for (const auto& c : r.cells) o << ',' << num(c.mean) << ',' << num(c.sd);
    o << '\n';
  }
  for (const auto& n : t.notes) o << "# " << n << '\n';
  return o.str();
}

std::string render_json(const Table& t) {
  ordered_json j;
  j["table"] = t.title;
  j["replications"] = t.replications;
  j["variants"] = t.variants;
  ordered_json rows = ordered_json::array();
  for (const auto& r : t.rows) {
    ordered_json row;
    row["metric"] = r.name;
    for (std::size_t i = 0; i < r.cells.size(); ++i)
      row[t.variants[i]] = {{"mean", r.cells[i].mean}, {"sd", r.cells[i].sd}};
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["notes"] = t.notes;
  return j.dump(2) + "\n";
}

std::string render_text(const Table& t) {
  std::size_t w0 = 6;
  for (const auto& r : t.rows) w0 = std::max(w0, r.name.size());
  std::vector<std::string> cells;
  std::size_t wc = 0;
  for (const auto& v : t.variants) wc = std::max(wc, v.size());
  for (const auto& r : t.rows)
    for (const auto& c : r.cells) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f +/- %.2f", c.mean, c.sd);
      cells.emplace_back(buf);
      wc = std::max(wc, cells.back().size());
    }
  std::ostringstream o;
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  o << pad(t.title, w0);
  for (const auto& v : t.variants) o << " | " << pad(v, wc);
  o << '\n' << std::string(w0 + t.variants.size() * (wc + 3), '-') << '\n';
  std::size_t k = 0;
  for (const auto& r : t.rows) {
    o << pad(r.name, w0);
    for (std::size_t i = 0; i < r.cells.size(); ++i) o << " | " << pad(cells[k++], wc);
    o << '\n';
  }
  for (const auto& n : t.notes) o << "  " << n << '\n';
  return o.str();
}

std::string render_lots_csv(const std::vector<sim::ReplicationResult>& reps) {
  std::ostringstream o;
  o << "replication,lot,season,terminal,reason,measured,termination_order,arrived_at,terminated_at,cbd,thc,"
       "eps,t_prime,eps_prime,Q,W,Q_u,Q_v,retests,plc_passes,false_pass_preharvest,false_pass_harvest,"
       "fake_qualified\n";
  for (std::size_t j = 0; j < reps.size(); ++j) {
    for (const auto& l : reps[j].lots) {
      o << j << ',' << l.id << ',' << l.season << ',' << to_string(l.terminal) << ','
        << (l.reason ? std::string(to_string(*l.reason)) : std::string()) << ',' << l.measured << ','
        << l.termination_order << ',' << num(l.arrived_at) << ',' << num(l.terminated_at) << ','
        << num(l.final_state.cbd) << ',' << num(l.final_state.thc) << ',' << num(l.inputs.eps) << ','
        << num(l.inputs.t_prime) << ',' << num(l.inputs.eps_prime) << ',' << num(l.inputs.q_extract) << ','
        << num(l.inputs.w_winter) << ',' << num(l.inputs.q_u) << ',' << num(l.inputs.q_v) << ',' << l.retests
        << ',' << l.plc_passes << ',' << l.false_pass_preharvest << ',' << l.false_pass_harvest << ','
        << l.fake_qualified << '\n';
    }
  }
  return o.str();
}

// --- shapley ------------------------------------------------------------

ShapleyReport run_shapley(const risk::OutputModel& model, std::uint64_t seed, const ShapleyRequest& req) {
  ShapleyReport out;
  out.request = req;
  out.target = req.target;
  for (int j = 0; j < req.macro_J; ++j) {
    risk::CostSettings cs;
    cs.outer_K = req.outer_K;
    cs.inner_I = req.inner_I;
    cs.seed = seed;
    cs.label = "shapley:" + std::string(risk::to_string(req.target)) + ":macro:" + std::to_string(j);
    out.reps.push_back(req.exact ? risk::shapley_exact(model, cs, req.threads)
                                 : risk::shapley_sampled(model, req.m, cs, req.threads));
  }
  out.summary = risk::relative_contributions(out.reps);
  return out;
}

ShapleyReport run_shapley(const ScenarioConfig& cfg, const ShapleyRequest& req) {
  validate_config(cfg);
  auto window = risk::pilot_harvest_windows(cfg);
  const double mean = window.mean();
  const std::size_t n = window.values().size();
  auto model = risk::make_lot_model(cfg, req.target, std::move(window));
  auto out = run_shapley(model, cfg.run.master_seed, req);
  out.t_prime_mean = mean;
  out.t_prime_observations = n;
  return out;
}

namespace {

std::string estimator_name(const ShapleyRequest& r) {
  return r.exact ? "exact" : "sampled(m=" + std::to_string(r.m) + ")";
}

double max_identity_gap(const ShapleyReport& r) {
  double gap = 0.0;
  for (const auto& rep : r.reps)
    if (rep.total_variance > 0.0) gap = std::max(gap, std::abs(rep.sum_rc() - 1.0));
  return gap;
}

}  // namespace

std::string render_shapley_csv(const ShapleyReport& r) {
  std::ostringstream o;
  o << "input,rc_mean_pct,rc_sd_pct,rc_stderr_pct\n";
  for (const auto& row : r.summary.rows)
    o << row.label << ',' << num(100 * row.mean) << ',' << num(100 * row.sd) << ',' << num(100 * row.std_error) << '\n';
  o << "# target=" << risk::to_string(r.target) << " estimator=" << estimator_name(r.request)
    << " K=" << r.request.outer_K << " I=" << r.request.inner_I << " J=" << r.request.macro_J << '\n';
  o << "# residual |sum RC - 1| = " << num(r.summary.residual)
    << "; max per-replication |sum RC - 1| = " << num(max_identity_gap(r)) << '\n';
  if (r.summary.degenerate) o << "# output variance is zero; all contributions reported as 0\n";
  return o.str();
}

std::string render_shapley_json(const ShapleyReport& r) {
  ordered_json j;
  j["target"] = std::string(risk::to_string(r.target));
  j["estimator"] = estimator_name(r.request);
  j["K"] = r.request.outer_K;
  j["I"] = r.request.inner_I;
  j["J"] = r.request.macro_J;
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.summary.rows)
    rows.push_back({{"input", row.label}, {"rc_mean", row.mean}, {"rc_sd", row.sd}, {"rc_stderr", row.std_error}});
  j["rows"] = std::move(rows);
  ordered_json reps = ordered_json::array();
  for (const auto& rep : r.reps)
    reps.push_back({{"s", rep.s}, {"s_stderr", rep.s_stderr}, {"total_variance", rep.total_variance}, {"rc", rep.rc}});
  j["replications"] = std::move(reps);
  j["residual"] = r.summary.residual;
  j["max_replication_residual"] = max_identity_gap(r);
  j["degenerate"] = r.summary.degenerate;
  if (r.t_prime_observations > 0) {
    j["t_prime_mean"] = r.t_prime_mean;
    j["t_prime_observations"] = r.t_prime_observations;
  }
  return j.dump(2) + "\n";
}

std::string render_shapley_text(const ShapleyReport& r) {
  std::ostringstream o;
  o << "relative contribution to Var[" << risk::to_string(r.target) << "], " << estimator_name(r.request)
    << ", K=" << r.request.outer_K << " I=" << r.request.inner_I << " J=" << r.request.macro_J << '\n';
  for (const auto& row : r.summary.rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-10s %6.1f%% +/- %.1f\n", row.label.c_str(), 100 * row.mean, 100 * row.sd);
    o << buf;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "  residual |sum RC - 1| = %.3g\n", r.summary.residual);
  o << buf;
  if (r.summary.degenerate) o << "  output variance is zero; all contributions reported as 0\n";
  return o.str();
}

// --- io -----------------------------------------------------------------

void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + p.string() + "'");
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + p.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace hempsim::report
