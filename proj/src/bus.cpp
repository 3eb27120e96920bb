#include "navstack/bus.hpp"

#include <algorithm>
#include <chrono>

namespace navstack {

bool Topology::has_edge_pub(const std::string& node, const std::string& topic) const {
  for (const auto& t : topics) {
    if (t.name != topic) continue;
    return std::find(t.publishers.begin(), t.publishers.end(), node) != t.publishers.end();
  }
  return false;
}

bool Topology::has_edge_sub(const std::string& node, const std::string& topic) const {
  for (const auto& t : topics) {
    if (t.name != topic) continue;
    return std::find(t.subscribers.begin(), t.subscribers.end(), node) != t.subscribers.end();
  }
  return false;
}

bool Topology::has_service(const std::string& name) const {
  for (const auto& s : services) {
    if (s.name == name) return true;
  }
  return false;
}

Bus::~Bus() {
  std::vector<ServiceEntry*> entries;
  {
    std::lock_guard<std::mutex> lk(mu_);
    for (auto& [name, entry] : services_) entries.push_back(entry.get());
  }
  for (ServiceEntry* e : entries) {
    {
      std::lock_guard<std::mutex> lk(e->mu);
      e->stopping = true;
    }
    e->cv.notify_all();
    if (e->worker.joinable()) e->worker.join();
  }
}

void Bus::validate_name(const std::string& name) {
  if (name.empty()) throw Error("invalid bus name: empty");
  if (name.front() != '/') throw Error("invalid bus name '" + name + "': missing leading slash");
  for (char c : name) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw Error("invalid bus name '" + name + "': embedded whitespace");
    }
  }
  if (name.size() < 2) throw Error("invalid bus name '" + name + "': no body");
}

void Bus::remap(const std::string& from, const std::string& to) {
  validate_name(from);
  validate_name(to);
  std::lock_guard<std::mutex> lk(mu_);
  if (wired_) throw Error("remap('" + from + "') after node wiring");
  remaps_[from] = to;
}

std::string Bus::resolve(const std::string& name) const {
  validate_name(name);
  std::lock_guard<std::mutex> lk(mu_);
  std::string cur = name;
  for (int hops = 0; hops < 64; ++hops) {
    auto it = remaps_.find(cur);
    if (it == remaps_.end() || it->second == cur) return cur;
    cur = it->second;
  }
  throw Error("remap cycle while resolving '" + name + "'");
}

Publisher Bus::advertise(const std::string& topic, const std::string& node) {
  std::string resolved = resolve(topic);
  std::lock_guard<std::mutex> lk(mu_);
  wired_ = true;
  topics_[resolved].publisher_nodes.push_back(node);
  auto state = std::make_shared<Publisher::State>();
  state->bus = this;
  state->topic = resolved;
  state->node = node;
  return Publisher(std::move(state));
}

SubscriptionPtr Bus::subscribe(const std::string& topic, std::size_t capacity,
                               const std::string& node) {
  if (capacity == 0) throw Error("subscription capacity must be positive");
  std::string resolved = resolve(topic);
  std::lock_guard<std::mutex> lk(mu_);
  wired_ = true;
  auto sub = std::make_shared<Subscription>(resolved, capacity);
  auto& entry = topics_[resolved];
  entry.subs.push_back(sub);
  entry.subscriber_nodes.push_back(node);
  return sub;
}

void Bus::publish_to(const std::string& topic, const std::string& node,
                     std::uint64_t seq, Payload payload) {
  Envelope e;
  e.topic = topic;
  e.publisher = node;
  e.seq = seq;
  e.stamp = clock_->now();
  e.payload = std::move(payload);

  std::vector<SubscriptionPtr> targets;
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = topics_.find(topic);
    if (it == topics_.end()) return;
    auto& subs = it->second.subs;
    targets.reserve(subs.size());
    for (auto w = subs.begin(); w != subs.end();) {
      if (auto s = w->lock()) {
        targets.push_back(std::move(s));
        ++w;
      } else {
        w = subs.erase(w);
      }
    }
  }
  for (auto& s : targets) s->push(e);
}

void Bus::register_service(const std::string& name, const std::string& node,
                           Handler handler, ServiceOptions opts) {
  std::string resolved = resolve(name);
  std::lock_guard<std::mutex> lk(mu_);
  wired_ = true;
  if (services_.count(resolved)) {
    throw Error("service '" + resolved + "' already registered");
  }
  auto entry = std::make_unique<ServiceEntry>();
  entry->node = node;
  entry->handler = std::move(handler);
  entry->reject_when_busy = opts.reject_when_busy;
  ServiceEntry* raw = entry.get();
  entry->worker = std::thread([this, raw] { service_worker(raw); });
  services_[resolved] = std::move(entry);
}

void Bus::service_worker(ServiceEntry* entry) {
  while (true) {
    std::shared_ptr<PendingCall> call;
    {
      std::unique_lock<std::mutex> lk(entry->mu);
      entry->cv.wait(lk, [&] { return entry->stopping || !entry->queue.empty(); });
      if (entry->stopping && entry->queue.empty()) return;
      call = std::move(entry->queue.front());
      entry->queue.pop_front();
      entry->in_flight = true;
    }
    ServiceResponse resp = entry->handler(call->request);
    // Mark idle before waking the caller: on a single core the caller may
    // issue its next call before this thread runs again, and a finished
    // handler must not read as busy.
    {
      std::lock_guard<std::mutex> lk(entry->mu);
      entry->in_flight = false;
    }
    {
      std::lock_guard<std::mutex> lk(call->mu);
      if (!call->abandoned) {
        call->response = std::move(resp);
        call->done = true;
      }
    }
    call->cv.notify_all();
  }
}

CallResult Bus::call(const std::string& name, ServiceRequest request,
                     double timeout_s) {
  std::string resolved = resolve(name);
  ServiceEntry* entry = nullptr;
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = services_.find(resolved);
    if (it == services_.end()) return {CallStatus::unknown_service, Ack{false}};
    entry = it->second.get();
  }

  auto call = std::make_shared<PendingCall>();
  call->request = std::move(request);
  {
    std::lock_guard<std::mutex> lk(entry->mu);
    if (entry->reject_when_busy && (entry->in_flight || !entry->queue.empty())) {
      return {CallStatus::busy, Ack{false}};
    }
    entry->queue.push_back(call);
  }
  entry->cv.notify_all();

  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(timeout_s));
  std::unique_lock<std::mutex> lk(call->mu);
  if (!call->cv.wait_until(lk, deadline, [&] { return call->done; })) {
    call->abandoned = true;
    return {CallStatus::timeout, Ack{false}};
  }
  return {CallStatus::ok, std::move(call->response)};
}

Topology Bus::topology() const {
  std::lock_guard<std::mutex> lk(mu_);
  Topology out;
  for (const auto& [name, entry] : topics_) {
    Topology::Topic t;
    t.name = name;
    t.publishers = entry.publisher_nodes;
    t.subscribers = entry.subscriber_nodes;
    out.topics.push_back(std::move(t));
  }
  for (const auto& [name, entry] : services_) {
    out.services.push_back({name, entry->node});
  }
  return out;
}

}  // namespace navstack
