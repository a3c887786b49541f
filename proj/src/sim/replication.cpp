#include "hempsim/sim/replication.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "hempsim/des/resource_pool.hpp"
#include "hempsim/ledger/network.hpp"
#include "hempsim/stages/stages.hpp"
#include "hempsim/stochastic/distributions.hpp"

namespace hempsim::sim {

namespace {

using ledger::ParticipantRole;
using ledger::RecordKind;
using ledger::Verdict;
using stochastic::RngStream;

// One stream per lot per random factor, so changing one stage's draws never
// shifts another's.
struct LotStreams {
  explicit LotStreams(const RngStream& lot)
      : germination(lot.child("germination")),
        soil_prep(lot.child("soil_prep")),
        transplant(lot.child("transplant")),
        cultivation(lot.child("cultivation")),
        eps(lot.child("eps")),
        test(lot.child("preharvest_test")),
        harvest(lot.child("harvest")),
        eps_prime(lot.child("eps_prime")),
        drying(lot.child("drying")),
        extraction(lot.child("extraction")),
        winterization(lot.child("winterization")),
        plc(lot.child("plc")),
        q(lot.child("Q")),
        w(lot.child("W")),
        q_u(lot.child("Q_u")),
        q_v(lot.child("Q_v")),
        tamper_fp(lot.child("tamper:preharvest")),
        tamper_fh(lot.child("tamper:harvest")),
        tamper_fq(lot.child("tamper:coa")) {}

  RngStream germination, soil_prep, transplant, cultivation, eps, test, harvest, eps_prime, drying, extraction,
      winterization, plc, q, w, q_u, q_v, tamper_fp, tamper_fh, tamper_fq;
};

struct LotCtx {
  LotCtx(Lot l, const RngStream& stream) : lot(std::move(l)), rng(stream) {}

  Lot lot;
  LotStreams rng;
  SimTime arrived_at = 0.0;
  SimTime germinated_at = 0.0;
  int early_pending = 2;
  std::optional<des::RequestId> transplant_req;
  bool transplanted = false;

  CannabinoidState state;         // current true state
  CannabinoidState sample_state;  // state when the pre-harvest sample was taken
  SimTime sampled_at = 0.0;
  RandomInputs inputs;
  std::vector<double> accepted_windows;

  std::optional<bool> tamper_fp, tamper_fh, tamper_fq;
  bool fp = false, fh = false, fq = false;
  int retests = 0;
  int plc_passes = 0;

  // Dry-wait bookkeeping. `dry_token` invalidates a pending timeout.
  std::uint64_t dry_token = 0;
  std::optional<des::RequestId> dry_req;
  bool in_dry_load = false;

  std::vector<ledger::Receipt> receipts;

  bool terminated = false;
  SimTime terminated_at = 0.0;
  std::uint64_t termination_order = 0;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

class Replication {
 public:
  Replication(const ScenarioConfig& cfg, int rep)
      : cfg_(cfg),
        rep_(rep),
        base_(cfg.run.master_seed, "rep:" + std::to_string(rep)),
        field_("field", cfg.resources.n_f, cal_),
        lab_("lab", cfg.resources.n_l, cal_),
        dryer_("dryer", cfg.resources.n_d, cal_),
        extract_("extraction", cfg.resources.n_p, cal_),
        winter_("winterization", cfg.resources.n_p, cal_),
        plc_("plc", cfg.resources.n_p, cal_),
        net_(cfg.chain, cal_, base_.child("ledger")) {}

  ReplicationResult run(const RunOptions& opts) {
    const int n = cfg_.n_lots_per_season;
    const int wanted = cfg_.run.warmup_lots + cfg_.run.run_length_lots;
    const int seasons = n > 0 ? (wanted + n - 1) / n : 0;
    for (int s = 0; s < seasons; ++s) {
      for (int i = 0; i < n; ++i) {
        Lot lot;
        lot.id = static_cast<LotId>(s) * n + i;
        lot.season_index = s;
        lot.index_in_season = i;
        const RngStream stream = base_.child("lot:" + std::to_string(lot.id));
        lots_.push_back(std::make_unique<LotCtx>(std::move(lot), stream));
        LotCtx* c = lots_.back().get();
        cal_.schedule(s * cfg_.season_length_days, [this, c] { arrive(*c); });
      }
    }
    cal_.run();
    return collect(opts);
  }

 private:
  double draw(const UniformBounds& b, RngStream& s) { return stochastic::sample(stochastic::Uniform{b.lo, b.hi}, s); }

  bool tamper(std::optional<bool>& cached, RngStream& s) {
    if (!cached) cached = s.next_uniform() < cfg_.tamper_prob_p2;
    return *cached;
  }

  ledger::DataRecord record(const LotCtx& c, RecordKind kind, ParticipantRole role) {
    ledger::DataRecord r;
    r.record_id = next_record_++;
    r.lot_id = c.lot.id;
    r.role = role;
    r.participant_location = c.lot.index_in_season;
    r.kind = kind;
    r.submitted_at = cal_.now();
    r.payload["season"] = std::to_string(c.lot.season_index);
    r.payload["stage"] = std::string(to_string(c.lot.stage));
    return r;
  }

  void inform(LotCtx& c, RecordKind kind, ParticipantRole role) { submit(c, record(c, kind, role), nullptr); }

  void submit(LotCtx& c, ledger::DataRecord r, std::function<void(Verdict)> then) {
    net_.submit(std::move(r), [&c, then = std::move(then)](const ledger::DataRecord&, const ledger::Receipt& rc) {
      c.receipts.push_back(rc);
      if (then && !c.terminated) then(rc.verdict);
    });
  }

  void terminate(LotCtx& c, Stage terminal, std::optional<DropReason> reason) {
    if (c.in_dry_load) {
      c.in_dry_load = false;
      --dry_load_;
    }
    c.lot.leave(c.lot.stage, cal_.now());
    c.lot.enter(terminal, cal_.now());
    c.lot.drop_reason = reason;
    c.terminated = true;
    c.terminated_at = cal_.now();
    c.termination_order = terminations_++;
  }

  // --- cultivation ------------------------------------------------------

  void arrive(LotCtx& c) {
    const SimTime now = cal_.now();
    c.arrived_at = now;
    c.lot.enter(Stage::Germination, now);
    c.lot.enter(Stage::SoilPrep, now);
    inform(c, RecordKind::SeedSource, ParticipantRole::Breeder);
    inform(c, RecordKind::FieldInfo, ParticipantRole::Grower);
    cal_.schedule_in(draw(cfg_.durations.germination, c.rng.germination), [this, &c] {
      c.lot.leave(Stage::Germination, cal_.now());
      c.germinated_at = cal_.now();
      // Seedlings must be transplanted within L_t of germination.
      cal_.schedule(c.germinated_at + cfg_.seedling_wait_limit, [this, &c] { seedling_timeout(c); });
      early_done(c);
    });
    cal_.schedule_in(draw(cfg_.durations.soil_prep, c.rng.soil_prep), [this, &c] {
      c.lot.leave(Stage::SoilPrep, cal_.now());
      early_done(c);
    });
  }

  void early_done(LotCtx& c) {
    if (--c.early_pending > 0 || c.terminated) return;
    c.transplant_req = field_.acquire(c.lot.id, [this, &c](SimTime) {
      c.transplanted = true;
      c.lot.enter(Stage::Transplant, cal_.now());
      cal_.schedule_in(draw(cfg_.durations.transplant, c.rng.transplant), [this, &c] {
        field_.release();
        c.lot.leave(Stage::Transplant, cal_.now());
        cultivate(c);
      });
    });
  }

  void seedling_timeout(LotCtx& c) {
    if (c.transplanted || c.terminated) return;
    if (c.transplant_req) field_.cancel(*c.transplant_req);
    terminate(c, Stage::Dropped, DropReason::SeedlingWaitExceeded);
  }

  void cultivate(LotCtx& c) {
    c.lot.enter(Stage::Cultivation, cal_.now());
    const double t = draw(cfg_.durations.cultivation, c.rng.cultivation);
    cal_.schedule_in(t, [this, &c, t] {
      const double g = cfg_.growth_rate_g;
      c.inputs.eps = stochastic::sample_growth_noise(g, t, cfg_.lambda_var, c.rng.eps);
      c.state = stages::cultivation_growth(g, t, cfg_.cbd_thc_ratio_r, c.inputs.eps);
      c.lot.snapshot(Stage::Cultivation, c.state);
      c.lot.leave(Stage::Cultivation, cal_.now());
      inform(c, RecordKind::CultivationData, ParticipantRole::Grower);
      take_sample(c);
    });
  }

  // --- pre-harvest test, harvest and the 15-day rule -------------------

  void take_sample(LotCtx& c) {
    c.sample_state = c.state;
    c.sampled_at = cal_.now();
    c.lot.enter(Stage::PreHarvestTest, cal_.now());
    inform(c, RecordKind::PreHarvestRequest, ParticipantRole::Grower);
    lab_.acquire(c.lot.id, [this, &c](SimTime) {
      cal_.schedule_in(draw(cfg_.durations.preharvest_test, c.rng.test), [this, &c] {
        lab_.release();
        test_result(c);
      });
    });
  }

  void test_result(LotCtx& c) {
    const auto truth = c.sample_state;
    const double gamma_v = cfg_.thc_preharvest_limit;
    const bool tampered = truth.thc > gamma_v && tamper(c.tamper_fp, c.rng.tamper_fp);
    const auto gate = stages::preharvest_gate(truth, gamma_v, tampered);

    auto rec = record(c, RecordKind::PreHarvestResult, ParticipantRole::Lab);
    rec.reported_values["thc"] = gate.reported;
    rec.true_values["thc"] = truth.thc;
    rec.tampered = gate.false_pass;
    if (gate.decision == stages::Decision::Destroy) {
      submit(c, std::move(rec), nullptr);
      terminate(c, Stage::Destroyed, DropReason::PreHarvestFail);
      return;
    }
    // Harvest waits for the result to be authentic.
    submit(c, std::move(rec), [this, &c, gate](Verdict v) {
      if (v == Verdict::Rejected) {
        terminate(c, Stage::Destroyed, DropReason::PreHarvestFail);
        return;
      }
      if (gate.false_pass) c.fp = true;
      c.lot.leave(Stage::PreHarvestTest, cal_.now());
      cal_.schedule_in(cfg_.harvest_delay_policy, [this, &c] { harvest(c); });
    });
  }

  void harvest(LotCtx& c) {
    c.lot.enter(Stage::Harvest, cal_.now());
    field_.acquire(c.lot.id, [this, &c](SimTime) {
      cal_.schedule_in(draw(cfg_.durations.harvest, c.rng.harvest), [this, &c] {
        field_.release();
        harvested(c);
      });
    });
  }

  void harvested(LotCtx& c) {
    const SimTime now = cal_.now();
    const double g = cfg_.growth_rate_g;
    const double t_prime = now - c.sampled_at;
    const double eps_prime = stochastic::sample_growth_noise(g, t_prime, cfg_.lambda_var, c.rng.eps_prime);
    c.inputs.t_prime = t_prime;
    c.inputs.eps_prime = eps_prime;
    c.state = stages::harvest_increment(c.sample_state, g, t_prime, cfg_.cbd_thc_ratio_r, eps_prime);
    c.lot.snapshot(Stage::Harvest, c.state);
    c.lot.leave(Stage::Harvest, now);

    const double limit = cfg_.harvest_deadline_days;
    const bool tampered = t_prime > limit && tamper(c.tamper_fh, c.rng.tamper_fh);
    const auto gate = stages::harvest_deadline_gate(t_prime, limit, tampered);

    auto rec = record(c, RecordKind::HarvestData, ParticipantRole::Grower);
    rec.reported_values["t_prime"] = gate.reported;
    rec.true_values["t_prime"] = t_prime;
    rec.tampered = gate.false_pass;
    if (gate.decision == stages::Decision::Retest) {
      submit(c, std::move(rec), nullptr);
      retest(c);
      return;
    }

    // Harvested biomass starts its dry-wait clock now, ledger delay included.
    c.lot.enter(Stage::DryWait, now);
    c.in_dry_load = true;
    ++dry_load_;
    if (cfg_.resources.dynamic_dryers) dryer_.resize(std::max(cfg_.resources.n_d, dry_load_));
    const auto token = ++c.dry_token;
    cal_.schedule(now + cfg_.dry_wait_limit, [this, &c, token] { dry_timeout(c, token); });

    submit(c, std::move(rec), [this, &c, gate, t_prime](Verdict v) {
      if (v == Verdict::Rejected) {
        ++c.dry_token;
        c.in_dry_load = false;
        --dry_load_;
        retest(c);
        return;
      }
      if (gate.false_pass) c.fh = true;
      c.accepted_windows.push_back(t_prime);
      c.dry_req = dryer_.acquire(c.lot.id, [this, &c](SimTime) { dry(c); });
    });
  }

  void retest(LotCtx& c) {
    ++c.retests;
    c.lot.leave(c.lot.stage, cal_.now());
    take_sample(c);
  }

  void dry_timeout(LotCtx& c, std::uint64_t token) {
    if (c.terminated || token != c.dry_token) return;
    if (c.dry_req) dryer_.cancel(*c.dry_req);
    terminate(c, Stage::Dropped, DropReason::DryWaitExceeded);
  }

  // --- stabilization and manufacturing ---------------------------------

  void dry(LotCtx& c) {
    ++c.dry_token;
    c.lot.leave(Stage::DryWait, cal_.now());
    c.lot.enter(Stage::Drying, cal_.now());
    cal_.schedule_in(draw(cfg_.durations.drying, c.rng.drying), [this, &c] {
      dryer_.release();
      c.in_dry_load = false;
      --dry_load_;
      c.lot.leave(Stage::Drying, cal_.now());
      inform(c, RecordKind::DryingData, ParticipantRole::Dryer);
      inform(c, RecordKind::PostStabilizationTest, ParticipantRole::Lab);
      inform(c, RecordKind::TransportData, ParticipantRole::Transporter);
      c.lot.enter(Stage::ExtractWait, cal_.now());
      extract_.acquire(c.lot.id, [this, &c](SimTime) { extract(c); });
    });
  }

  void extract(LotCtx& c) {
    c.lot.leave(Stage::ExtractWait, cal_.now());
    c.lot.enter(Stage::Extraction, cal_.now());
    cal_.schedule_in(draw(cfg_.durations.extraction, c.rng.extraction), [this, &c] {
      extract_.release();
      c.inputs.q_extract = draw(cfg_.yields.q_extract, c.rng.q);
      c.state = stages::extraction_step(c.state, c.inputs.q_extract);
      c.lot.snapshot(Stage::Extraction, c.state);
      c.lot.leave(Stage::Extraction, cal_.now());
      inform(c, RecordKind::ExtractionData, ParticipantRole::Processor);
      c.lot.enter(Stage::Winterization, cal_.now());
      winter_.acquire(c.lot.id, [this, &c](SimTime) { winterize(c); });
    });
  }

  void winterize(LotCtx& c) {
    cal_.schedule_in(draw(cfg_.durations.winterization, c.rng.winterization), [this, &c] {
      winter_.release();
      c.inputs.w_winter = draw(cfg_.yields.w_winter, c.rng.w);
      c.state = stages::winterization_step(c.state, c.inputs.w_winter);
      c.lot.snapshot(Stage::Winterization, c.state);
      c.lot.leave(Stage::Winterization, cal_.now());
      inform(c, RecordKind::WinterizationData, ParticipantRole::Processor);
      purify(c);
    });
  }

  void purify(LotCtx& c) {
    c.lot.enter(Stage::PLC, cal_.now());
    plc_.acquire(c.lot.id, [this, &c](SimTime) {
      cal_.schedule_in(draw(cfg_.durations.plc, c.rng.plc), [this, &c] {
        plc_.release();
        // The same retention factors apply to both passes of a lot.
        if (c.plc_passes == 0) {
          c.inputs.q_u = draw(cfg_.yields.q_u, c.rng.q_u);
          c.inputs.q_v = draw(cfg_.yields.q_v, c.rng.q_v);
        }
        c.state = stages::plc_step(c.state, c.inputs.q_u, c.inputs.q_v);
        ++c.plc_passes;
        c.lot.snapshot(Stage::PLC, c.state);
        c.lot.leave(Stage::PLC, cal_.now());
        inform(c, RecordKind::PLCData, ParticipantRole::Processor);
        certify(c);
      });
    });
  }

  void certify(LotCtx& c) {
    c.lot.enter(Stage::FinalCOA, cal_.now());
    const double gamma = cfg_.thc_final_limit;
    const int max_passes = cfg_.max_plc_passes;
    const bool would_reject = c.state.thc >= gamma && c.plc_passes >= max_passes;
    const bool tampered = would_reject && tamper(c.tamper_fq, c.rng.tamper_fq);
    const auto res = stages::final_coa_gate(c.state, gamma, c.plc_passes, tampered, max_passes);

    if (res.decision == stages::CoaDecision::RepeatPLC) {
      c.lot.leave(Stage::FinalCOA, cal_.now());
      purify(c);
      return;
    }
    auto rec = record(c, RecordKind::FinalCOA, ParticipantRole::Lab);
    rec.reported_values["thc"] = res.reported_thc;
    rec.true_values["thc"] = c.state.thc;
    rec.tampered = res.false_pass;
    if (res.decision == stages::CoaDecision::Reject) {
      submit(c, std::move(rec), nullptr);
      terminate(c, Stage::Destroyed, DropReason::FinalCOAFail);
      return;
    }
    submit(c, std::move(rec), [this, &c, res](Verdict v) {
      if (v == Verdict::Rejected) {
        terminate(c, Stage::Destroyed, DropReason::FinalCOAFail);
        return;
      }
      if (res.false_pass) c.fq = true;
      terminate(c, Stage::Finished, std::nullopt);
    });
  }

  // --- statistics ------------------------------------------------------

  ReplicationResult collect(const RunOptions& opts) {
    ReplicationResult out;
    out.events = cal_.fired();
    auto& st = out.stats;
    st.replication_index = rep_;

    std::vector<LotCtx*> order;
    for (auto& c : lots_) order.push_back(c.get());
    std::sort(order.begin(), order.end(),
              [](const LotCtx* a, const LotCtx* b) { return a->termination_order < b->termination_order; });

    const auto lo = static_cast<std::uint64_t>(cfg_.run.warmup_lots);
    const auto hi = lo + static_cast<std::uint64_t>(cfg_.run.run_length_lots);
    std::vector<double> ver, conf, total;
    for (LotCtx* c : order) {
      const bool measured = c->terminated && c->termination_order >= lo && c->termination_order < hi;
      if (measured) {
        ++st.lots_observed;
        const Stage s = c->lot.stage;
        if (s == Stage::Finished) {
          ++st.finished;
          st.outputs.push_back({c->lot.id, c->state.cbd, c->state.thc, c->terminated_at - c->arrived_at});
        } else if (c->lot.drop_reason == DropReason::DryWaitExceeded) {
          ++st.dry_drops;
        } else if (c->lot.drop_reason == DropReason::SeedlingWaitExceeded) {
          ++st.seedling_drops;
        } else if (c->lot.drop_reason == DropReason::PreHarvestFail) {
          ++st.destroyed_preharvest;
        } else if (c->lot.drop_reason == DropReason::FinalCOAFail) {
          ++st.destroyed_final;
        }
        st.retests += c->retests;
        st.false_pass_preharvest += c->fp;
        st.false_pass_harvest += c->fh;
        st.fake_qualified += c->fq;
        st.harvest_windows.insert(st.harvest_windows.end(), c->accepted_windows.begin(), c->accepted_windows.end());
        for (const auto& r : c->receipts) {
          if (r.verdict == Verdict::Rejected)
            ++st.records_rejected;
          else
            ++st.records_verified;
          ver.push_back(r.verification_time());
          conf.push_back(r.confirmation_time());
          total.push_back(r.total_time());
        }
      }
      if (opts.keep_lots) {
        LotSummary s;
        s.id = c->lot.id;
        s.season = c->lot.season_index;
        s.terminal = c->lot.stage;
        s.reason = c->lot.drop_reason;
        s.arrived_at = c->arrived_at;
        s.terminated_at = c->terminated_at;
        s.termination_order = c->termination_order;
        s.measured = measured;
        s.final_state = c->state;
        s.inputs = c->inputs;
        s.retests = c->retests;
        s.plc_passes = c->plc_passes;
        s.false_pass_preharvest = c->fp;
        s.false_pass_harvest = c->fh;
        s.fake_qualified = c->fq;
        s.trace = c->lot.trace;
        out.lots.push_back(std::move(s));
      }
      if (opts.keep_history) out.history.push_back(c->lot);
    }
    st.verification_mean = mean_of(ver);
    st.verification_sd = sd_of(ver);
    st.confirmation_mean = mean_of(conf);
    st.confirmation_sd = sd_of(conf);
    st.ledger_latency_mean = mean_of(total);
    st.ledger_latency_sd = sd_of(total);
    if (opts.keep_chain) out.chain = net_.state();
    return out;
  }

  const ScenarioConfig& cfg_;
  int rep_;
  RngStream base_;
  des::EventCalendar cal_;
  des::ResourcePool field_, lab_, dryer_, extract_, winter_, plc_;
  ledger::LedgerNetwork net_;
  std::vector<std::unique_ptr<LotCtx>> lots_;
  std::uint64_t next_record_ = 1;
  std::uint64_t terminations_ = 0;
  int dry_load_ = 0;
};

}  // namespace

ReplicationResult run_replication(const ScenarioConfig& cfg, int replication_index, const RunOptions& opts) {
  const ScenarioConfig checked = validate_config(cfg);
  Replication rep(checked, replication_index);
  return rep.run(opts);
}

}  // namespace hempsim::sim
