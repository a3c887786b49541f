#include <doctest.h>

#include <cmath>
#include <map>

#include "hempsim/ledger/chain.hpp"
#include "hempsim/sim/replication.hpp"

using namespace hempsim;
using namespace hempsim::sim;

namespace {

ScenarioConfig small(Topology topo = Topology::TwoLayer) {
  ScenarioConfig c;
  c.chain.topology = topo;
  c.run.warmup_lots = 50;
  c.run.run_length_lots = 150;
  return c;
}

void check_same(const ReplicationStats& a, const ReplicationStats& b) {
  CHECK(a.lots_observed == b.lots_observed);
  CHECK(a.finished == b.finished);
  CHECK(a.dry_drops == b.dry_drops);
  CHECK(a.seedling_drops == b.seedling_drops);
  CHECK(a.destroyed_preharvest == b.destroyed_preharvest);
  CHECK(a.destroyed_final == b.destroyed_final);
  CHECK(a.retests == b.retests);
  CHECK(a.false_pass_preharvest == b.false_pass_preharvest);
  CHECK(a.false_pass_harvest == b.false_pass_harvest);
  CHECK(a.fake_qualified == b.fake_qualified);
  CHECK(a.ledger_latency_mean == b.ledger_latency_mean);
  CHECK(a.ledger_latency_sd == b.ledger_latency_sd);
  REQUIRE(a.outputs.size() == b.outputs.size());
  for (std::size_t i = 0; i < a.outputs.size(); ++i) {
    CHECK(a.outputs[i].lot_id == b.outputs[i].lot_id);
    CHECK(a.outputs[i].cbd == b.outputs[i].cbd);
    CHECK(a.outputs[i].thc == b.outputs[i].thc);
  }
  CHECK(a.harvest_windows == b.harvest_windows);
}

}  // namespace

TEST_CASE("same seed, same replication: identical statistics and chain") {
  const auto cfg = small();
  RunOptions o;
  o.keep_chain = true;
  const auto a = run_replication(cfg, 3, o);
  const auto b = run_replication(cfg, 3, o);
  check_same(a.stats, b.stats);
  CHECK(a.events == b.events);
  REQUIRE(a.chain);
  CHECK(ledger::export_chain(*a.chain) == ledger::export_chain(*b.chain));
  CHECK(ledger::audit_chain(*a.chain).ok());

  const auto other = run_replication(cfg, 4);
  CHECK(other.stats.harvest_windows != a.stats.harvest_windows);
}

TEST_CASE("ledger-backed runs have no false passes") {
  for (auto topo : {Topology::TwoLayer, Topology::SingleChain}) {
    auto cfg = small(topo);
    for (int j = 0; j < 3; ++j) {
      const auto r = run_replication(cfg, j);
      CHECK(r.stats.false_pass_preharvest == 0);
      CHECK(r.stats.false_pass_harvest == 0);
      CHECK(r.stats.fake_qualified == 0);
    }
  }
  // The same inputs without a ledger do let falsified lots through.
  const auto off = run_replication(small(Topology::None), 0);
  CHECK(off.stats.false_pass_preharvest > 0);
}

TEST_CASE("zero warmup and one season of run length measures exactly one season") {
  auto cfg = small();
  cfg.run.warmup_lots = 0;
  cfg.run.run_length_lots = cfg.n_lots_per_season;
  RunOptions o;
  o.keep_lots = true;
  const auto r = run_replication(cfg, 0, o);
  CHECK(r.stats.lots_observed == cfg.n_lots_per_season);
  int measured = 0;
  for (const auto& l : r.lots) {
    CHECK(l.season == 0);
    measured += l.measured;
  }
  CHECK(measured == cfg.n_lots_per_season);
}

TEST_CASE("lot conservation and valid traces") {
  for (auto topo : {Topology::TwoLayer, Topology::SingleChain, Topology::None}) {
    CAPTURE(to_string(topo));
    RunOptions o;
    o.keep_lots = true;
    o.keep_history = true;
    const auto r = run_replication(small(topo), 1, o);
    const auto& s = r.stats;
    CHECK(s.lots_observed == small(topo).run.run_length_lots);
    CHECK(s.finished + s.removed() == s.lots_observed);
    CHECK(s.outputs.size() == static_cast<std::size_t>(s.finished));
    int measured = 0;
    for (const auto& l : r.lots) {
      CHECK(is_terminal(l.terminal));
      if (l.measured) ++measured;
      CHECK(is_valid_trace(l.trace));
      CHECK(l.trace.back() == l.terminal);
      CHECK(l.terminated_at >= l.arrived_at);
    }
    CHECK(measured == s.lots_observed);
  }
}

TEST_CASE("gate soundness without tampering") {
  auto cfg = small(Topology::None);
  cfg.tamper_prob_p2 = 0.0;
  cfg.run.warmup_lots = 0;
  cfg.run.run_length_lots = 10000;
  RunOptions o;
  o.keep_history = true;
  const auto r = run_replication(cfg, 0, o);
  CHECK(r.stats.lots_observed == 10000);
  CHECK(r.stats.false_pass_preharvest == 0);
  CHECK(r.stats.false_pass_harvest == 0);
  CHECK(r.stats.fake_qualified == 0);
  for (const auto& out : r.stats.outputs) CHECK(out.thc < cfg.thc_final_limit);

  // A lot only reaches harvest if its first sample (the cultivation state) passed.
  int harvested_over_limit = 0, harvested = 0;
  for (const auto& lot : r.history) {
    const CannabinoidState* cultivated = nullptr;
    bool reached_harvest = false;
    for (const auto& [stage, st] : lot.cannabinoid_history) {
      if (stage == Stage::Cultivation && !cultivated) cultivated = &st;
      if (stage == Stage::Harvest) reached_harvest = true;
    }
    if (!reached_harvest) continue;
    ++harvested;
    if (cultivated->thc > cfg.thc_preharvest_limit) ++harvested_over_limit;
  }
  CHECK(harvested > 1000);
  CHECK(harvested_over_limit == 0);
}

TEST_CASE("ratio law and monotone THC after harvest") {
  auto cfg = small(Topology::None);
  RunOptions o;
  o.keep_history = true;
  const auto r = run_replication(cfg, 2, o);
  int checked = 0;
  for (const auto& lot : r.history) {
    double prev_thc = -1.0, prev_ratio = 0.0;
    bool after_harvest = false;
    for (const auto& [stage, st] : lot.cannabinoid_history) {
      if (st.thc <= 0.0) continue;
      const double ratio = st.cbd / st.thc;
      if (stage == Stage::PLC) {
        CHECK(ratio >= prev_ratio * (1 - 1e-12));
      } else {
        CHECK(ratio == doctest::Approx(cfg.cbd_thc_ratio_r).epsilon(1e-9));
      }
      if (stage == Stage::Harvest) {
        after_harvest = true;
        prev_thc = st.thc;
      } else if (after_harvest && stage != Stage::Cultivation) {
        CHECK(st.thc <= prev_thc);
        prev_thc = st.thc;
      }
      prev_ratio = ratio;
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("stage durations respect their bounds") {
  const auto cfg = small(Topology::None);
  RunOptions o;
  o.keep_history = true;
  const auto r = run_replication(cfg, 0, o);
  const auto& d = cfg.durations;
  for (const auto& lot : r.history) {
    auto it = lot.timestamps.find(Stage::Cultivation);
    if (it == lot.timestamps.end() || lot.cannabinoid_history.empty()) continue;
    const double t = it->second.exit - it->second.enter;
    CHECK(t >= d.cultivation.lo - 1e-9);
    CHECK(t <= d.cultivation.hi + 1e-9);
    auto g = lot.timestamps.find(Stage::Germination);
    if (g != lot.timestamps.end() && g->second.exit > g->second.enter) {
      CHECK(g->second.exit - g->second.enter >= d.germination.lo - 1e-9);
      CHECK(g->second.exit - g->second.enter <= d.germination.hi + 1e-9);
    }
  }
}

TEST_CASE("common random numbers across topologies") {
  RunOptions o;
  o.keep_lots = true;
  auto on = small(Topology::TwoLayer);
  auto off = small(Topology::None);
  on.tamper_prob_p2 = off.tamper_prob_p2 = 0.0;
  const auto a = run_replication(on, 0, o);
  const auto b = run_replication(off, 0, o);
  std::map<LotId, double> eps;
  for (const auto& l : b.lots) eps[l.id] = l.inputs.eps;
  int compared = 0;
  for (const auto& l : a.lots) {
    if (l.inputs.eps == 0.0 || !eps.count(l.id) || eps[l.id] == 0.0) continue;
    CHECK(l.inputs.eps == eps[l.id]);
    ++compared;
  }
  CHECK(compared > 100);
  CHECK(a.stats.records_rejected == 0);
}

TEST_CASE("dynamic dryers under dry-wait pressure") {
  auto cfg = small(Topology::None);
  cfg.resources.n_d = 1;
  cfg.durations.drying = {3, 5};
  cfg.thc_preharvest_limit = 0.05;  // most lots reach harvest
  cfg.tamper_prob_p2 = 0.0;
  auto dyn = cfg;
  dyn.resources.dynamic_dryers = true;
  int fixed_drops = 0, dyn_drops = 0;
  for (int j = 0; j < 3; ++j) {
    fixed_drops += run_replication(cfg, j).stats.dry_drops;
    dyn_drops += run_replication(dyn, j).stats.dry_drops;
  }
  CHECK(fixed_drops > 0);
  CHECK(dyn_drops == 0);
}

TEST_CASE("invalid configs are refused") {
  auto cfg = small();
  cfg.resources.n_f = 0;
  CHECK_THROWS_AS(run_replication(cfg, 0), ConfigError);
}
