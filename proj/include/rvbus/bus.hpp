#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rvbus/event.hpp"

namespace rvbus {

// Per-(topic, subscriber) delivery characteristics. Jitter is a uniform
// additive draw in [0, jitter_max_ns]; FIFO order per link is preserved by
// clamping each delivery to be no earlier than the previous one.
struct LinkProfile {
    std::uint64_t base_latency_ns = 0;
    std::uint64_t jitter_max_ns = 0;
};

struct BusConfig {
    std::uint64_t seed = 0;
    LinkProfile default_link;
    std::map<std::pair<std::string, std::string>, LinkProfile> links;  // (topic, subscriber)

    const LinkProfile& link(const std::string& topic, const std::string& subscriber) const {
        auto it = links.find({topic, subscriber});
        return it == links.end() ? default_link : it->second;
    }
};

// FIFO clamp rule for one link: a raw delivery time is pushed up to the
// previous scheduled delivery when jitter would reorder it.
inline Timestamp clamp_delivery(Timestamp raw, Timestamp last_scheduled) {
    return raw < last_scheduled ? last_scheduled : raw;
}

class SimBus;

// A simulated process. Callbacks of one node never overlap: anything that
// fires while the node is inside a callback (including a blocking service
// call) is deferred until the node is idle again.
class NodeHandle {
  public:
    const std::string& id() const { return id_; }

  private:
    friend class SimBus;
    explicit NodeHandle(std::string id) : id_(std::move(id)) {}
    std::string id_;
    bool busy = false;
    std::deque<std::function<void()>> deferred;
    std::map<std::string, std::optional<Event>> latest_slots;
};

struct DeliveryRecord {
    Event event;
    std::string subscriber;
    Timestamp delivered_at;
};

class SimBus {
  public:
    explicit SimBus(BusConfig cfg = {});

    Timestamp now() const { return now_; }

    NodeHandle* add_node(const std::string& id);

    void advertise(NodeHandle* node, const std::string& topic);
    void subscribe(NodeHandle* node, const std::string& topic,
                   std::function<void(const Event&)> cb);
    // Keep-latest subscription: deliveries overwrite a one-element slot that
    // the node samples at its own pace; no callback runs.
    void subscribe_latest(NodeHandle* node, const std::string& topic);
    std::optional<Event> take_latest(NodeHandle* node, const std::string& topic);

    // Interception taps observe deliveries on a topic without node
    // serialization; this is how a monitor attaches to the bus.
    void add_tap(const std::string& topic, const std::string& tap_id,
                 std::function<void(const Event&)> cb);

    void create_timer(NodeHandle* node, std::uint64_t period_ns, std::function<void()> cb);

    // Publication stamps the event at the current logical time, then advances
    // the clock by one nanosecond, so events published by one node within a
    // single callback carry strictly increasing timestamps.
    Event publish(NodeHandle* node, const std::string& topic, FieldMap fields);
    Event publish_external(const std::string& publisher, const std::string& topic,
                           FieldMap fields);

    using ServiceHandler = std::function<FieldMap(const FieldMap&)>;
    void advertise_service(NodeHandle* node, const std::string& service, ServiceHandler handler);
    void advertise_service_external(const std::string& service, ServiceHandler handler);
    bool has_service(const std::string& service) const;

    // Synchronous within the simulation: the handler runs inline; the caller
    // node stays busy (none of its other callbacks run) until the response
    // mapping is returned. `node` may be null for non-node callers.
    FieldMap call_service(NodeHandle* node, const std::string& service, const FieldMap& request);

    // Processes pending timer and delivery items in logical-time order (ties
    // broken by (time, item kind, key, sequence)) until the predicate holds
    // or nothing remains. Re-entrant: callbacks may pump the same bus while
    // waiting for a condition.
    void run(const std::function<bool()>& until);
    void run_until_stop() { run([this] { return stop_requested_; }); }
    void pump_until(const std::function<bool()>& cond) { run(cond); }

    void request_stop() { stop_requested_ = true; }
    bool stop_requested() const { return stop_requested_; }

    // Shutdown quiesce: timers stop firing, but deliveries of everything
    // already published still land, so observers see a complete prefix.
    void finish_deliveries();

    // Advances the logical clock without processing queued items; models
    // time consumed inside a callback (e.g. an oracle exchange).
    void consume_time(std::uint64_t ns) { now_.nanos += ns; }

    std::uint64_t channel_seq(const std::string& topic) const;

    const std::vector<DeliveryRecord>& delivery_trace() const { return deliveries_; }
    const std::vector<Event>& publication_trace() const { return publications_; }
    const std::vector<Event>& service_trace() const { return service_events_; }
    void enable_tracing(bool on) { tracing_ = on; }

  private:
    struct QueueItem {
        Timestamp at;
        int rank;  // deliveries before timers at equal time
        std::string key;
        std::uint64_t seq;
        std::function<void()> action;
    };
    struct ItemOrder {
        bool operator()(const QueueItem& a, const QueueItem& b) const {
            auto ka = std::tie(a.at.nanos, a.rank, a.key, a.seq);
            auto kb = std::tie(b.at.nanos, b.rank, b.key, b.seq);
            return ka > kb;  // min-heap
        }
    };
    struct Subscription {
        NodeHandle* node = nullptr;
        std::function<void(const Event&)> cb;
        bool keep_latest = false;
        Timestamp last_scheduled;  // FIFO clamp state
        std::uint64_t delivered = 0;
    };
    struct Tap {
        std::string id;
        std::function<void(const Event&)> cb;
        Timestamp last_scheduled;
    };
    struct Topic {
        bool advertised = false;
        std::uint64_t next_seq = 0;
        std::vector<Subscription> subs;
        std::vector<Tap> taps;
    };
    struct Service {
        NodeHandle* node = nullptr;  // null for external handlers
        ServiceHandler handler;
        std::uint64_t next_req_seq = 0;
        std::uint64_t next_res_seq = 0;
    };

    void schedule(Timestamp at, int rank, std::string key, std::function<void()> action);
    void run_on_node(NodeHandle* node, const std::function<void()>& fn);
    std::uint64_t draw_jitter(std::uint64_t jitter_max);
    Event publish_impl(const std::string& publisher, const std::string& topic, FieldMap fields);

    BusConfig cfg_;
    std::mt19937_64 rng_;
    Timestamp now_;
    bool stop_requested_ = false;
    bool tracing_ = false;
    std::uint64_t next_item_id_ = 0;
    std::priority_queue<QueueItem, std::vector<QueueItem>, ItemOrder> queue_;
    std::vector<std::unique_ptr<NodeHandle>> nodes_;
    std::map<std::string, Topic> topics_;
    std::map<std::string, Service> services_;
    std::vector<DeliveryRecord> deliveries_;
    std::vector<Event> publications_;
    std::vector<Event> service_events_;
};

}  // namespace rvbus
