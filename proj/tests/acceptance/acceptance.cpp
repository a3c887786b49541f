// Acceptance harness: one PASS/FAIL line per criterion.
//   acceptance            run all ten
//   acceptance --only N   run criterion N (exit code reflects it)

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hempsim/des/event_calendar.hpp"
#include "hempsim/des/resource_pool.hpp"
#include "hempsim/ledger/chain.hpp"
#include "hempsim/report/experiment.hpp"
#include "hempsim/risk/lot_model.hpp"
#include "hempsim/risk/shapley.hpp"
#include "hempsim/sim/replication.hpp"
#include "hempsim/stages/stages.hpp"
#include "hempsim/stochastic/distributions.hpp"

using namespace hempsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double mean_of(const std::vector<ReplicationStats>& reps, const std::function<double(const ReplicationStats&)>& get) {
  double s = 0;
  for (const auto& r : reps) s += get(r);
  return s / static_cast<double>(reps.size());
}

// Criterion 1 -----------------------------------------------------------

Outcome growth_unit_check() {
  const auto s = stages::cultivation_growth(0.0018, 56, 28, 0.0);
  const bool ok = std::abs(s.cbd - 0.097324) < 5e-7 && std::abs(s.thc - 0.0034758) < 5e-7;
  return {ok, fmt("cbd=%.7f thc=%.8f", s.cbd, s.thc)};
}

// Criterion 2 -----------------------------------------------------------

struct Interval {
  double mean, sd;
  [[nodiscard]] bool overlaps(const Interval& o) const {
    return mean - sd <= o.mean + o.sd && o.mean - o.sd <= mean + sd;
  }
};

Outcome security() {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg;
  auto spec = report::security_spec(cfg);
  spec.threads = workers();
  const auto rep = report::run_experiment(spec);
  const auto& on = rep.stats[0];
  const auto& off = rep.stats[1];

  bool on_zero = true;
  for (const auto& s : on)
    on_zero = on_zero && s.false_pass_preharvest == 0 && s.false_pass_harvest == 0 && s.fake_qualified == 0;

  const Interval paper[3] = {{2.03, 1.23}, {2.98, 2.28}, {0.68, 0.69}};
  bool positive = true, overlap = true;
  std::ostringstream d;
  d << "J=" << on.size() << " chain-on all zero=" << (on_zero ? "yes" : "no") << "; chain-off";
  for (int i = 0; i < 3; ++i) {
    const auto& cell = rep.main.rows[i].cells[1];
    positive = positive && cell.mean > 0.0;
    const bool ov = Interval{cell.mean, cell.sd}.overlaps(paper[i]);
    overlap = overlap && ov;
    d << fmt(" %.2f+/-%.2f%%", cell.mean, cell.sd) << (ov ? "" : "(no overlap)");
  }
  const double secs = seconds_since(t0);
  d << fmt("; %.1fs", secs);
  return {on_zero && positive && overlap && secs < 120.0, d.str()};
}

// Criterion 3 -----------------------------------------------------------

Outcome scalability() {
  ScenarioConfig cfg;
  auto spec = report::scalability_spec(cfg);
  spec.threads = workers();
  const auto rep = report::run_experiment(spec);
  const auto& two = rep.stats[0];
  const auto& single = rep.stats[1];
  int faster = 0;
  for (std::size_t j = 0; j < two.size(); ++j)
    if (two[j].ledger_latency_mean < single[j].ledger_latency_mean) ++faster;
  const double fin2 = mean_of(two, [](auto& s) { return s.finished; });
  const double fin1 = mean_of(single, [](auto& s) { return s.finished; });
  const double dry2 = mean_of(two, [](auto& s) { return s.dry_drops; });
  const double dry1 = mean_of(single, [](auto& s) { return s.dry_drops; });
  const int needed = static_cast<int>(std::ceil(0.95 * static_cast<double>(two.size())));
  const bool ok = faster >= needed && fin2 > fin1 && dry2 < dry1;
  std::ostringstream d;
  d << "faster in " << faster << "/" << two.size()
    << fmt("; latency %.3f vs %.3f", mean_of(two, [](auto& s) { return s.ledger_latency_mean; }),
           mean_of(single, [](auto& s) { return s.ledger_latency_mean; }))
    << fmt("; finished %.2f vs %.2f; dry drops %.2f vs %.2f", fin2, fin1, dry2, dry1);
  return {ok, d.str()};
}

// Criterion 4 -----------------------------------------------------------

Outcome resources() {
  ScenarioConfig cfg;
  auto spec = report::resources_spec(cfg);
  spec.threads = workers();
  const auto rep = report::run_experiment(spec);
  const double fin_fixed = mean_of(rep.stats[0], [](auto& s) { return s.finished; });
  const double fin_dyn = mean_of(rep.stats[1], [](auto& s) { return s.finished; });
  const double dry_fixed = mean_of(rep.stats[0], [](auto& s) { return s.dry_drops; });
  const double dry_dyn = mean_of(rep.stats[1], [](auto& s) { return s.dry_drops; });
  // A 5x reduction needs drops to reduce in the first place.
  const bool ok = dry_fixed > 0.0 && 5.0 * dry_dyn <= dry_fixed && fin_dyn > fin_fixed;
  return {ok, fmt("dry drops fixed %.2f -> dynamic %.2f; finished %.2f -> %.2f", dry_fixed, dry_dyn, fin_fixed,
                  fin_dyn)};
}

// Criteria 5 and 7 share the lot-model runs --------------------------------

struct TableFour {
  report::ShapleyReport cbd, thc;
  double seconds = 0.0;
};

const TableFour& table_four() {
  static const TableFour t = [] {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig cfg;
    report::ShapleyRequest req;
    req.m = 3000;
    req.outer_K = 10;
    req.inner_I = 100;
    req.macro_J = 10;
    req.threads = workers();
    TableFour out;
    req.target = risk::Target::CBD;
    req.exact = false;
    out.cbd = report::run_shapley(cfg, req);
    req.target = risk::Target::THC;
    req.exact = true;
    out.thc = report::run_shapley(cfg, req);
    out.seconds = seconds_since(t0);
    return out;
  }();
  return t;
}

Outcome shapley_identity() {
  const auto& t = table_four();
  double worst_gap = 0.0, worst_rc = 0.0;
  for (const auto* r : {&t.cbd, &t.thc})
    for (const auto& rep : r->reps) {
      const double scale = std::max(1e-300, std::abs(rep.total_variance));
      worst_gap = std::max(worst_gap, std::abs(rep.sum_s() - rep.total_variance) / scale);
      worst_rc = std::max(worst_rc, std::abs(rep.sum_rc() - 1.0));
    }
  const bool ok = worst_gap < 1e-9 && worst_rc <= 0.05;
  return {ok, fmt("max relative |sum s - Var| = %.2e, max |sum RC - 1| = %.2e over %.0f macro-replications",
                  worst_gap, worst_rc, static_cast<double>(t.cbd.reps.size() + t.thc.reps.size()))};
}

// Criterion 6 -----------------------------------------------------------

Outcome shapley_oracle() {
  risk::OutputModel m;
  for (const char* l : {"Z1", "Z2", "Z3"})
    m.inputs.push_back({l, [](stochastic::RngStream& s) { return stochastic::standard_normal(s); }});
  m.response = [](std::span<const double> z) { return z[0] + z[1] + 0.0 * z[2]; };
  risk::CostSettings cs;
  cs.outer_K = 200;
  cs.inner_I = 200;
  cs.seed = 2024;
  cs.label = "oracle";
  const auto exact = risk::shapley_exact(m, cs, workers());
  const auto sampled = risk::shapley_sampled(m, 60, cs, workers());
  const double truth[3] = {1.0, 1.0, 0.0};
  bool ok = true;
  std::ostringstream d;
  d << "exact s =";
  for (int i = 0; i < 3; ++i) {
    ok = ok && std::abs(exact.s[i] - truth[i]) <= 3.0 * exact.s_stderr[i] + 1e-12;
    ok = ok && std::abs(sampled.s[i] - exact.s[i]) <=
                   3.0 * std::hypot(sampled.s_stderr[i], exact.s_stderr[i]) + 1e-12;
    d << fmt(" %.3f(%.3f)", exact.s[i], exact.s_stderr[i]);
  }
  d << "; sampled m=60 =";
  for (int i = 0; i < 3; ++i) d << fmt(" %.3f(%.3f)", sampled.s[i], sampled.s_stderr[i]);
  return {ok, d.str()};
}

// Criterion 7 -----------------------------------------------------------

std::map<std::string, double> rc_by_label(const risk::RcSummary& s) {
  std::map<std::string, double> m;
  for (const auto& r : s.rows) m[r.label] = 100.0 * r.mean;
  return m;
}

std::vector<std::string> ranked(const risk::RcSummary& s) {
  auto rows = s.rows;
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.mean > b.mean; });
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.label);
  return out;
}

Outcome table_four_direction() {
  const auto& t = table_four();
  const auto cbd = rc_by_label(t.cbd.summary);
  const auto thc = rc_by_label(t.thc.summary);
  const auto cbd_rank = ranked(t.cbd.summary);
  const auto thc_rank = ranked(t.thc.summary);
  const bool eps_top = cbd_rank.front() == "eps" && thc_rank.front() == "eps";
  const bool cbd_range = cbd.at("eps") >= 55.0 && cbd.at("eps") <= 85.0;
  const bool thc_range = thc.at("eps") >= 45.0 && thc.at("eps") <= 75.0;
  const bool runners_up = thc_rank.size() >= 3 &&
                          ((thc_rank[1] == "Q_v" && thc_rank[2] == "eps_prime") ||
                           (thc_rank[1] == "eps_prime" && thc_rank[2] == "Q_v"));
  const bool fast = t.seconds < 600.0;
  std::ostringstream d;
  d << fmt("CBD eps %.1f%%; THC eps %.1f%%, ", cbd.at("eps"), thc.at("eps")) << thc_rank[1]
    << fmt(" %.1f%%, ", thc.at(thc_rank[1])) << thc_rank[2] << fmt(" %.1f%%; %.1fs", thc.at(thc_rank[2]), t.seconds);
  return {eps_top && cbd_range && thc_range && runners_up && fast, d.str()};
}

// Criterion 8 -----------------------------------------------------------

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + '\n';
  return s;
}

Outcome ledger_audit() {
  ScenarioConfig cfg;
  sim::RunOptions o;
  o.keep_chain = true;
  const auto run = sim::run_replication(cfg, 0, o);
  const auto text = ledger::export_chain(*run.chain);
  const auto clean = ledger::audit_chain(ledger::parse_chain(text));

  auto lines = split_lines(text);
  const std::size_t n_shard0 = run.chain->shard(0).size();
  const std::size_t target = n_shard0 / 2;  // a middle block of shard 0

  // Single-byte payload mutation.
  auto mutated = lines;
  const auto key = mutated[target].find("\"stage\":\"");
  bool flip_ok = false;
  if (key != std::string::npos) {
    char& c = mutated[target][key + 9];
    c = static_cast<char>(c ^ 0x20);  // toggles letter case
    const auto res = ledger::audit_chain(ledger::parse_chain(join_lines(mutated)));
    flip_ok = !res.ok() && res.first()->chain == "shard:0" && res.first()->height == target &&
              res.first()->reason.find("merkle") != std::string::npos;
  }

  // Block deletion.
  auto deleted = lines;
  deleted.erase(deleted.begin() + static_cast<std::ptrdiff_t>(target));
  const auto res = ledger::audit_chain(ledger::parse_chain(join_lines(deleted)));
  const bool delete_ok = !res.ok() && res.first()->chain == "shard:0" && res.first()->height == target + 1 &&
                         res.first()->reason.find("prev_hash") != std::string::npos;

  std::ostringstream d;
  d << "export of " << run.chain->block_count() << " blocks audits " << (clean.ok() ? "Ok" : "with violations")
    << "; payload flip at shard:0 height " << target << (flip_ok ? " detected" : " NOT detected")
    << "; deletion detected at successor " << (delete_ok ? "yes" : "no");
  return {clean.ok() && flip_ok && delete_ok, d.str()};
}

// Criterion 9 -----------------------------------------------------------

Outcome determinism() {
  ScenarioConfig cfg;
  cfg.run.replications = 8;
  const auto base = std::filesystem::temp_directory_path() / "hempsim_acceptance_determinism";
  std::filesystem::remove_all(base);
  std::vector<std::map<std::string, std::string>> runs;
  for (int threads : {1, 3}) {
    std::map<std::string, std::string> files;
    for (auto scenario : {report::Scenario::Simulate, report::Scenario::Security}) {
      auto spec = scenario == report::Scenario::Simulate ? report::simulate_spec(cfg)
                                                          : report::scenario_spec(scenario, cfg);
      spec.out_dir = base / std::to_string(threads);
      spec.threads = threads;
      spec.export_chain = true;
      spec.dump_lots = true;
      for (const auto& p : report::run_experiment(spec).written) files[p.filename().string()] = report::read_file(p);
    }
    runs.push_back(std::move(files));
  }
  std::filesystem::remove_all(base);
  bool same = runs[0].size() == runs[1].size() && !runs[0].empty();
  std::size_t bytes = 0;
  for (const auto& [name, content] : runs[0]) {
    const auto it = runs[1].find(name);
    same = same && it != runs[1].end() && it->second == content;
    bytes += content.size();
  }
  return {same, std::to_string(runs[0].size()) + " files (" + std::to_string(bytes) +
                    " bytes) byte-identical across two runs with 1 and 3 workers"};
}

// Criterion 10 ----------------------------------------------------------

Outcome properties() {
  std::vector<std::string> failed;
  auto require = [&](bool ok, const char* what) {
    if (!ok) failed.emplace_back(what);
  };

  // Ratio law, monotone THC after harvest, conservation: one run without a ledger.
  {
    ScenarioConfig cfg;
    cfg.chain.topology = Topology::None;
    sim::RunOptions o;
    o.keep_history = true;
    o.keep_lots = true;
    const auto r = sim::run_replication(cfg, 0, o);
    bool ratio = true, mono = true;
    for (const auto& lot : r.history) {
      bool harvested = false;
      double prev = 0.0;
      for (const auto& [stage, st] : lot.cannabinoid_history) {
        if (st.thc > 0.0 && stage != Stage::PLC)
          ratio = ratio && std::abs(st.cbd / st.thc - cfg.cbd_thc_ratio_r) <= 1e-9 * cfg.cbd_thc_ratio_r;
        if (stage == Stage::Harvest) {
          harvested = true;
        } else if (harvested && stage != Stage::Cultivation) {
          mono = mono && st.thc <= prev;
        }
        prev = st.thc;
      }
    }
    require(ratio, "ratio law");
    require(mono, "post-harvest THC monotone");
    const auto& s = r.stats;
    bool traces = true;
    int measured = 0;
    for (const auto& l : r.lots) {
      traces = traces && is_terminal(l.terminal) && is_valid_trace(l.trace);
      measured += l.measured;
    }
    require(traces && measured == s.lots_observed && s.lots_observed == cfg.run.run_length_lots &&
                s.finished + s.removed() == s.lots_observed,
            "lot conservation");
  }

  // Gate soundness at p2 = 0 over 10^4 lots.
  {
    ScenarioConfig cfg;
    cfg.chain.topology = Topology::None;
    cfg.tamper_prob_p2 = 0.0;
    cfg.run.warmup_lots = 0;
    cfg.run.run_length_lots = 10000;
    const auto r = sim::run_replication(cfg, 0);
    bool ok = r.stats.false_pass_preharvest == 0 && r.stats.false_pass_harvest == 0 && r.stats.fake_qualified == 0;
    for (const auto& out : r.stats.outputs) ok = ok && out.thc < cfg.thc_final_limit;
    require(ok, "gate soundness");
  }

  // FIFO discipline on a busy M/M/2 queue.
  {
    des::EventCalendar cal;
    des::ResourcePool pool("fifo", 2, cal);
    stochastic::RngStream arr(1, "fifo/arrivals"), svc(1, "fifo/service");
    double t = 0;
    for (LotId l = 0; l < 5000; ++l) {
      t += stochastic::sample(stochastic::Exponential{1.0}, arr);
      const double s = stochastic::sample(stochastic::Exponential{1.8}, svc);
      cal.schedule(t, [&, l, s] {
        pool.acquire(l, [&, s](SimTime) { cal.schedule_in(s, [&] { pool.release(); }); });
      });
    }
    cal.run();
    bool ordered = pool.grant_order().size() == 5000;
    for (std::size_t i = 0; ordered && i < pool.grant_order().size(); ++i) ordered = pool.grant_order()[i] == i;
    require(ordered, "FIFO discipline");
  }

  // Stream reproducibility.
  {
    stochastic::RngStream a(99, "rep:3/lot:17/eps");
    auto b = stochastic::RngStream(99, "rep:3").child("lot:17").child("eps");
    bool same = true;
    for (int i = 0; i < 10000; ++i) same = same && a.next_u64() == b.next_u64();
    require(same, "stream reproducibility");
  }

  if (failed.empty())
    return {true, "ratio law, THC monotonicity, gate soundness (10^4 lots), conservation, FIFO, streams"};
  std::string d = "failed:";
  for (const auto& f : failed) d += " " + f + ";";
  return {false, d};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> c = {
      {"growth law unit check", growth_unit_check},
      {"security table", security},
      {"cyber efficiency table", scalability},
      {"physical efficiency table", resources},
      {"Shapley decomposition identity", shapley_identity},
      {"Shapley additive oracle", shapley_oracle},
      {"risk table direction", table_four_direction},
      {"ledger audit", ledger_audit},
      {"determinism", determinism},
      {"property suites", properties},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::optional<int> only;
  app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (int i = 1; i <= 10; ++i) {
    if (only && *only != i) continue;
    const auto& [name, fn] = criteria()[i - 1];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s: %s -- %s\n", i, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
