#include "hempsim/des/resource_pool.hpp"

#include <algorithm>
#include <stdexcept>

namespace hempsim::des {

ResourcePool::ResourcePool(std::string name, int capacity, EventCalendar& calendar)
    : name_(std::move(name)), capacity_(capacity), calendar_(&calendar) {
  if (capacity < 0) throw std::invalid_argument("pool " + name_ + ": negative capacity");
}

void ResourcePool::account() {
  const SimTime now = calendar_->now();
  queue_area_ += static_cast<double>(queue_.size()) * (now - last_change_);
  last_change_ = now;
}

RequestId ResourcePool::acquire(LotId lot, Grant on_grant) {
  account();
  const RequestId id = next_id_++;
  ++arrivals_;
  queue_.push_back(Request{id, lot, calendar_->now(), std::move(on_grant)});
  dispatch();
  return id;
}

bool ResourcePool::cancel(RequestId id) {
  auto it = std::find_if(queue_.begin(), queue_.end(), [id](const Request& r) { return r.id == id; });
  if (it == queue_.end()) return false;
  account();
  queue_.erase(it);
  return true;
}

void ResourcePool::release() {
  if (busy_ <= 0) throw std::logic_error("pool " + name_ + ": release without a busy server");
  --busy_;
  dispatch();
}

void ResourcePool::resize(int new_capacity) {
  if (new_capacity < 0) throw std::invalid_argument("pool " + name_ + ": negative capacity");
  capacity_ = new_capacity;
  dispatch();
}

void ResourcePool::dispatch() {
  while (busy_ < capacity_ && !queue_.empty()) {
    account();
    Request req = std::move(queue_.front());
    queue_.pop_front();
    grant(std::move(req));
  }
}

void ResourcePool::grant(Request req) {
  ++busy_;
  const SimTime waited = calendar_->now() - req.enqueued;
  waits_.push_back(waited);
  grant_order_.push_back(req.lot);
  calendar_->schedule(calendar_->now(), [cb = std::move(req.on_grant), waited] { cb(waited); });
}

double ResourcePool::mean_queue_length() const {
  const SimTime now = calendar_->now();
  const double area = queue_area_ + static_cast<double>(queue_.size()) * (now - last_change_);
  return now > 0.0 ? area / now : 0.0;
}

}  // namespace hempsim::des
