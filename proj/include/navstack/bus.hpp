#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "navstack/messages.hpp"
#include "navstack/scheduler.hpp"

namespace navstack {

struct Envelope {
  std::string topic;
  std::string publisher;
  std::uint64_t seq = 0;  // per-publisher, strictly increasing
  double stamp = 0.0;     // simulation time at publish
  Payload payload;
};

// Bounded per-subscription queue. When full, the oldest envelope is dropped.
class Subscription {
 public:
  Subscription(std::string topic, std::size_t capacity)
      : topic_(std::move(topic)), capacity_(capacity) {}

  const std::string& topic() const { return topic_; }

  std::optional<Envelope> try_pop() {
    std::lock_guard<std::mutex> lk(mu_);
    if (queue_.empty()) return std::nullopt;
    Envelope e = std::move(queue_.front());
    queue_.pop_front();
    return e;
  }

  std::vector<Envelope> drain() {
    std::lock_guard<std::mutex> lk(mu_);
    std::vector<Envelope> out(queue_.begin(), queue_.end());
    queue_.clear();
    return out;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return queue_.size();
  }

  std::uint64_t dropped() const {
    std::lock_guard<std::mutex> lk(mu_);
    return dropped_;
  }

 private:
  friend class Bus;
  void push(Envelope e) {
    std::lock_guard<std::mutex> lk(mu_);
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(std::move(e));
  }

  std::string topic_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<Envelope> queue_;
  std::uint64_t dropped_ = 0;
};

using SubscriptionPtr = std::shared_ptr<Subscription>;

enum class CallStatus { ok, unknown_service, timeout, busy };

inline const char* to_string(CallStatus s) {
  switch (s) {
    case CallStatus::ok: return "ok";
    case CallStatus::unknown_service: return "unknown_service";
    case CallStatus::timeout: return "timeout";
    case CallStatus::busy: return "busy";
  }
  return "?";
}

struct CallResult {
  CallStatus status = CallStatus::unknown_service;
  ServiceResponse response;
};

struct Topology {
  struct Topic {
    std::string name;
    std::vector<std::string> publishers;
    std::vector<std::string> subscribers;
  };
  struct Service {
    std::string name;
    std::string server;
  };
  std::vector<Topic> topics;
  std::vector<Service> services;

  bool has_edge_pub(const std::string& node, const std::string& topic) const;
  bool has_edge_sub(const std::string& node, const std::string& topic) const;
  bool has_service(const std::string& name) const;
};

class Publisher;

struct ServiceOptions {
  // When true, a call arriving while another is queued or in flight is
  // rejected immediately instead of waiting its turn.
  bool reject_when_busy = false;
};

// In-process message bus: named topics with bounded subscriber queues and
// synchronous services. Thread-safe; service handlers run on a per-service
// worker thread so call timeouts can fire while a handler is still busy.
class Bus {
 public:
  using Handler = std::function<ServiceResponse(const ServiceRequest&)>;
  using ServiceOptions = navstack::ServiceOptions;

  explicit Bus(SimClockPtr clock = nullptr)
      : clock_(clock ? std::move(clock) : std::make_shared<SimClock>()) {}
  ~Bus();

  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  // Remap entries must be installed before any node wiring.
  void remap(const std::string& from, const std::string& to);
  std::string resolve(const std::string& name) const;

  Publisher advertise(const std::string& topic, const std::string& node);
  SubscriptionPtr subscribe(const std::string& topic, std::size_t capacity,
                            const std::string& node);

  void register_service(const std::string& name, const std::string& node,
                        Handler handler, ServiceOptions opts = {});

  CallResult call(const std::string& name, ServiceRequest request,
                  double timeout_s);

  Topology topology() const;

  const SimClockPtr& clock() const { return clock_; }

 private:
  friend class Publisher;

  struct TopicEntry {
    std::vector<std::weak_ptr<Subscription>> subs;
    std::vector<std::string> publisher_nodes;
    std::vector<std::string> subscriber_nodes;
  };

  struct PendingCall {
    ServiceRequest request;
    std::mutex mu;
    std::condition_variable cv;
    bool done = false;
    bool abandoned = false;
    ServiceResponse response;
  };

  struct ServiceEntry {
    std::string node;
    Handler handler;
    bool reject_when_busy = false;
    std::thread worker;
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::shared_ptr<PendingCall>> queue;
    bool in_flight = false;
    bool stopping = false;
  };

  static void validate_name(const std::string& name);
  void publish_to(const std::string& topic, const std::string& node,
                  std::uint64_t seq, Payload payload);
  void service_worker(ServiceEntry* entry);

  SimClockPtr clock_;
  mutable std::mutex mu_;
  bool wired_ = false;
  std::map<std::string, std::string> remaps_;
  std::map<std::string, TopicEntry> topics_;
  std::map<std::string, std::unique_ptr<ServiceEntry>> services_;
};

// Handle for publishing to one topic. Copyable; copies share the sequence
// counter so per-publisher ordering stays well defined.
class Publisher {
 public:
  Publisher() = default;

  void publish(Payload payload) {
    if (!state_) throw Error("publish on an unwired publisher handle");
    std::lock_guard<std::mutex> lk(state_->mu);
    std::uint64_t seq = ++state_->seq;
    state_->bus->publish_to(state_->topic, state_->node, seq, std::move(payload));
  }

  const std::string& topic() const {
    static const std::string empty;
    return state_ ? state_->topic : empty;
  }

 private:
  friend class Bus;
  struct State {
    Bus* bus = nullptr;
    std::string topic;
    std::string node;
    std::mutex mu;
    std::uint64_t seq = 0;
  };
  explicit Publisher(std::shared_ptr<State> s) : state_(std::move(s)) {}
  std::shared_ptr<State> state_;
};

}  // namespace navstack
