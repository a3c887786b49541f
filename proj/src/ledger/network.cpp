#include "hempsim/ledger/network.hpp"

#include "hempsim/stochastic/distributions.hpp"

namespace hempsim::ledger {

int assign_shard(const DataRecord& rec, int n_shards) {
  if (n_shards < 1) throw std::invalid_argument("assign_shard: need at least one shard");
  return rec.participant_location % n_shards;
}

Verdict verify_record(const DataRecord& rec, double miss_prob, stochastic::RngStream& detect) {
  if (!rec.tampered) return Verdict::Verified;
  if (miss_prob > 0.0 && detect.next_uniform() < miss_prob) return Verdict::Verified;
  return Verdict::Rejected;
}

LedgerNetwork::LedgerNetwork(const ChainConfig& cfg, des::EventCalendar& calendar, const stochastic::RngStream& base)
    : cfg_(cfg),
      calendar_(&calendar),
      state_(cfg.topology == Topology::TwoLayer ? cfg.n_shards : cfg.topology == Topology::SingleChain ? 1 : 0),
      detect_(base.child("detect")) {
  switch (cfg_.topology) {
    case Topology::TwoLayer:
      for (int s = 0; s < cfg_.n_shards; ++s) {
        shard_pools_.push_back(
            std::make_unique<des::ResourcePool>("shard:" + std::to_string(s), cfg_.n_s, calendar));
        shard_service_.push_back(base.child("shard:" + std::to_string(s)));
      }
      root_pool_ = std::make_unique<des::ResourcePool>("root", cfg_.n_r, calendar);
      root_service_ = std::make_unique<stochastic::RngStream>(base.child("root"));
      break;
    case Topology::SingleChain:
      shard_pools_.push_back(std::make_unique<des::ResourcePool>("single", cfg_.n_r, calendar));
      shard_service_.push_back(base.child("single"));
      break;
    case Topology::None:
      break;
  }
}

void LedgerNetwork::submit(DataRecord rec, Callback on_done) {
  check_record(rec);
  ++submitted_;
  auto p = std::make_shared<Pending>(Pending{std::move(rec), std::move(on_done), {}});
  const SimTime now = calendar_->now();
  p->receipt.submitted_at = now;

  if (cfg_.topology == Topology::None) {
    // Accepted at face value, no delay.
    p->receipt.verified_at = p->receipt.confirmed_at = now;
    calendar_->schedule(now, [p] { p->on_done(p->rec, p->receipt); });
    return;
  }
  const int shard = cfg_.topology == Topology::TwoLayer ? assign_shard(p->rec, cfg_.n_shards) : 0;
  verify(std::move(p), shard);
}

void LedgerNetwork::verify(std::shared_ptr<Pending> p, int shard) {
  auto& pool = *shard_pools_[shard];
  const LotId lot = p->rec.lot_id;
  pool.acquire(lot, [this, p, shard](SimTime) {
    const double mean = cfg_.topology == Topology::TwoLayer ? cfg_.mu_v : cfg_.mu_s;
    const double service = stochastic::sample(stochastic::Exponential{mean}, shard_service_[shard]);
    calendar_->schedule_in(service, [this, p, shard] {
      shard_pools_[shard]->release();
      const SimTime now = calendar_->now();
      p->receipt.verified_at = now;
      p->receipt.verdict = verify_record(p->rec, cfg_.miss_prob, detect_);
      if (p->receipt.verdict == Verdict::Rejected) {
        ++rejected_;
        p->receipt.confirmed_at = now;
        p->on_done(p->rec, p->receipt);
        return;
      }
      const std::string validator = "authority:" + std::to_string(shard);
      const ShardBlock& block = state_.append_shard_block(shard, {p->rec}, validator, now);
      if (cfg_.topology == Topology::SingleChain) {
        p->receipt.confirmed_at = now;
        p->on_done(p->rec, p->receipt);
        return;
      }
      confirm(p, block);
    });
  });
}

void LedgerNetwork::confirm(std::shared_ptr<Pending> p, const ShardBlock& block) {
  ShardHeaderRef ref{block.shard_id, block.height, block.hash};
  root_pool_->acquire(p->rec.lot_id, [this, p, ref](SimTime) {
    const double service = stochastic::sample(stochastic::Exponential{cfg_.mu_c}, *root_service_);
    calendar_->schedule_in(service, [this, p, ref] {
      root_pool_->release();
      const SimTime now = calendar_->now();
      state_.append_root_block({ref}, "regulator", now);
      p->receipt.confirmed_at = now;
      p->on_done(p->rec, p->receipt);
    });
  });
}

}  // namespace hempsim::ledger
