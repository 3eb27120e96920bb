#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <vector>

namespace navstack {

// Simulation clock. Time only moves forward, driven by the Scheduler.
class SimClock {
 public:
  double now() const {
    std::lock_guard<std::mutex> lk(mu_);
    return now_;
  }

 private:
  friend class Scheduler;
  void set(double t) {
    std::lock_guard<std::mutex> lk(mu_);
    now_ = t;
  }

  mutable std::mutex mu_;
  double now_ = 0.0;
};

using SimClockPtr = std::shared_ptr<SimClock>;

// Deterministic discrete-event scheduler over simulation time. Events at the
// same time fire in scheduling order. Pumping is re-entrancy safe in the sense
// that event callbacks may schedule new events, but run_until itself must not
// be entered concurrently; the stack guarantees strict caller/worker
// alternation (a blocked service caller never pumps while its handler does).
class Scheduler {
 public:
  using TaskId = std::uint64_t;

  explicit Scheduler(SimClockPtr clock = nullptr)
      : clock_(clock ? std::move(clock) : std::make_shared<SimClock>()) {}

  const SimClockPtr& clock() const { return clock_; }
  double now() const { return clock_->now(); }

  TaskId schedule_at(double t, std::function<void(double)> fn) {
    std::lock_guard<std::mutex> lk(mu_);
    TaskId id = next_id_++;
    heap_.push(Event{t, seq_++, id, std::move(fn), 0.0});
    return id;
  }

  // Fires first at `first`, then every `period` seconds until cancelled.
  TaskId schedule_every(double period, double first, std::function<void(double)> fn) {
    std::lock_guard<std::mutex> lk(mu_);
    TaskId id = next_id_++;
    heap_.push(Event{first, seq_++, id, std::move(fn), period});
    return id;
  }

  void cancel(TaskId id) {
    std::lock_guard<std::mutex> lk(mu_);
    cancelled_.push_back(id);
  }

  // Runs every event with time <= t, then advances the clock to t.
  void run_until(double t) {
    while (true) {
      Event ev;
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (heap_.empty() || heap_.top().time > t) break;
        ev = heap_.top();
        heap_.pop();
        if (is_cancelled(ev.id)) continue;
        if (ev.period > 0.0) {
          heap_.push(Event{ev.time + ev.period, seq_++, ev.id, ev.fn, ev.period});
        }
      }
      if (ev.time > clock_->now()) clock_->set(ev.time);
      ev.fn(ev.time);
    }
    if (t > clock_->now()) clock_->set(t);
  }

  void run_for(double dt) { run_until(now() + dt); }

 private:
  struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    TaskId id = 0;
    std::function<void(double)> fn;
    double period = 0.0;

    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      return seq > o.seq;
    }
  };

  bool is_cancelled(TaskId id) {
    for (TaskId c : cancelled_) {
      if (c == id) return true;
    }
    return false;
  }

  SimClockPtr clock_;
  std::mutex mu_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
  std::uint64_t seq_ = 0;
  TaskId next_id_ = 1;
  std::vector<TaskId> cancelled_;
};

}  // namespace navstack
