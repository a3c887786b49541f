#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "hempsim/core/types.hpp"

namespace hempsim::des {

class TimeInPast : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Pending events ordered by (time, insertion sequence). The clock only
/// advances when an event is dequeued, so it never moves backward.
class EventCalendar {
 public:
  using Action = std::function<void()>;

  void schedule(SimTime at, Action action);
  void schedule_in(SimTime delay, Action action) { schedule(now_ + delay, std::move(action)); }

  /// Fires the earliest event; false when the calendar is empty.
  bool step();
  void run();

  [[nodiscard]] SimTime now() const { return now_; }
  [[nodiscard]] bool empty() const { return queue_.empty(); }
  [[nodiscard]] std::size_t pending() const { return queue_.size(); }
  [[nodiscard]] std::uint64_t fired() const { return fired_; }

 private:
  struct Entry {
    SimTime time;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
};

}  // namespace hempsim::des
