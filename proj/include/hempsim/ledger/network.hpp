#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hempsim/core/config.hpp"
#include "hempsim/des/event_calendar.hpp"
#include "hempsim/des/resource_pool.hpp"
#include "hempsim/ledger/chain.hpp"
#include "hempsim/stochastic/rng_stream.hpp"

namespace hempsim::ledger {

/// Participant location index mod shard count.
int assign_shard(const DataRecord& rec, int n_shards);

enum class Verdict { Verified, Rejected };

/// On-site check of one record. A tampered record is rejected unless it slips
/// through with probability `miss_prob`; `detect` is only drawn for tampered
/// records.
Verdict verify_record(const DataRecord& rec, double miss_prob, stochastic::RngStream& detect);

/// Timing of one record through the ledger, in days.
struct Receipt {
  Verdict verdict = Verdict::Verified;
  SimTime submitted_at = 0.0;
  SimTime verified_at = 0.0;
  SimTime confirmed_at = 0.0;  // == verified_at when there is no confirmation stage

  [[nodiscard]] double verification_time() const { return verified_at - submitted_at; }
  [[nodiscard]] double confirmation_time() const { return confirmed_at - verified_at; }
  [[nodiscard]] double total_time() const { return confirmed_at - submitted_at; }
};

/// Verification and confirmation queues coupled to a replication's event
/// calendar. The callback fires once the record is authentic (confirmed) or
/// once it has been rejected.
class LedgerNetwork {
 public:
  using Callback = std::function<void(const DataRecord&, const Receipt&)>;

  LedgerNetwork(const ChainConfig& cfg, des::EventCalendar& calendar, const stochastic::RngStream& base);

  void submit(DataRecord rec, Callback on_done);

  [[nodiscard]] const LedgerState& state() const { return state_; }
  [[nodiscard]] Topology topology() const { return cfg_.topology; }
  [[nodiscard]] std::uint64_t submitted() const { return submitted_; }
  [[nodiscard]] std::uint64_t rejected() const { return rejected_; }

  [[nodiscard]] const des::ResourcePool& shard_pool(int i) const { return *shard_pools_.at(i); }
  [[nodiscard]] const des::ResourcePool& root_pool() const { return *root_pool_; }

 private:
  struct Pending {
    DataRecord rec;
    Callback on_done;
    Receipt receipt;
  };

  void verify(std::shared_ptr<Pending> p, int shard);
  void confirm(std::shared_ptr<Pending> p, const ShardBlock& block);

  ChainConfig cfg_;
  des::EventCalendar* calendar_;
  LedgerState state_;
  std::vector<std::unique_ptr<des::ResourcePool>> shard_pools_;
  std::unique_ptr<des::ResourcePool> root_pool_;
  std::vector<stochastic::RngStream> shard_service_;
  std::unique_ptr<stochastic::RngStream> root_service_;
  stochastic::RngStream detect_;
  std::uint64_t submitted_ = 0;
  std::uint64_t rejected_ = 0;
};

}  // namespace hempsim::ledger
