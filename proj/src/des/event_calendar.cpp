#include "hempsim/des/event_calendar.hpp"

#include <string>

namespace hempsim::des {

void EventCalendar::schedule(SimTime at, Action action) {
  if (at < now_)
    throw TimeInPast("event at t=" + std::to_string(at) + " precedes clock t=" + std::to_string(now_));
  queue_.push(Entry{at, next_seq_++, std::move(action)});
}

bool EventCalendar::step() {
  if (queue_.empty()) return false;
  // priority_queue::top is const; move the action out before popping.
  Entry e = std::move(const_cast<Entry&>(queue_.top()));
  queue_.pop();
  now_ = e.time;
  ++fired_;
  e.action();
  return true;
}

void EventCalendar::run() {
  while (step()) {
  }
}

}  // namespace hempsim::des
