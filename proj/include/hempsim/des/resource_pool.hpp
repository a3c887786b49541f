#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "hempsim/des/event_calendar.hpp"

namespace hempsim::des {

using RequestId = std::uint64_t;

/// Multi-server FIFO pool with an unbounded waiting buffer. A request that
/// reaches the head of the queue while a server is free is granted through a
/// zero-delay calendar event; the callback receives the time spent waiting.
class ResourcePool {
 public:
  using Grant = std::function<void(SimTime waited)>;

  ResourcePool(std::string name, int capacity, EventCalendar& calendar);

  ResourcePool(const ResourcePool&) = delete;
  ResourcePool& operator=(const ResourcePool&) = delete;
  ResourcePool(ResourcePool&&) = default;

  RequestId acquire(LotId lot, Grant on_grant);

  /// Withdraws a request still waiting in the queue. Returns false once the
  /// request has been granted a server.
  bool cancel(RequestId id);

  void release();

  /// Growth is immediate; shrinking happens as busy servers release.
  void resize(int new_capacity);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] int capacity() const { return capacity_; }
  [[nodiscard]] int busy() const { return busy_; }
  [[nodiscard]] std::size_t queue_length() const { return queue_.size(); }
  [[nodiscard]] const std::vector<SimTime>& waits() const { return waits_; }
  [[nodiscard]] const std::vector<LotId>& grant_order() const { return grant_order_; }
  [[nodiscard]] std::uint64_t arrivals() const { return arrivals_; }

  /// Time-average number waiting (excluding those in service) over [0, now].
  [[nodiscard]] double mean_queue_length() const;

 private:
  struct Request {
    RequestId id;
    LotId lot;
    SimTime enqueued;
    Grant on_grant;
  };

  void account();
  void dispatch();
  void grant(Request req);

  std::string name_;
  int capacity_;
  int busy_ = 0;
  EventCalendar* calendar_;
  std::deque<Request> queue_;
  RequestId next_id_ = 1;
  std::uint64_t arrivals_ = 0;
  std::vector<SimTime> waits_;
  std::vector<LotId> grant_order_;
  double queue_area_ = 0.0;
  SimTime last_change_ = 0.0;
};

}  // namespace hempsim::des
