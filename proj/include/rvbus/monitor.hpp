#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rvbus/bus.hpp"
#include "rvbus/config.hpp"
#include "rvbus/event.hpp"
#include "rvbus/oracle.hpp"

namespace rvbus {

// Global release order: publication time, then channel, then sequence.
// Keying by the composite rather than the raw timestamp keeps min-selection
// total when two channels publish at the same instant.
struct OrderKey {
    Timestamp time;
    ChannelId channel;
    std::uint64_t seq = 0;

    friend bool operator==(const OrderKey&, const OrderKey&) = default;
    friend bool operator<(const OrderKey& a, const OrderKey& b) {
        if (a.time != b.time) return a.time < b.time;
        if (!(a.channel == b.channel)) return a.channel < b.channel;
        return a.seq < b.seq;
    }
};

inline OrderKey order_key(const Event& e) { return OrderKey{e.pub_time, e.channel, e.seq}; }

struct WaitRecord {
    ChannelId channel;
    std::uint64_t seq = 0;
    Timestamp pub_time;
    Timestamp buffered_at;
    Timestamp released_at;
};

// The per-channel timestamp queues plus timestamp->event mapping behind the
// ordering mechanism. Channels are grouped into gate units: every unit must
// hold at least one pending event before the earliest buffered event may be
// released. A mediated service contributes its request and response channels
// as one unit, since a response can only ever follow its own request.
class ReorderBuffer {
  public:
    using ReleaseFn = std::function<void(const Event&)>;
    using ClockFn = std::function<Timestamp()>;

    void add_unit(std::vector<ChannelId> channels);
    bool is_ordered(const ChannelId& ch) const { return unit_of_.count(ch) > 0; }
    const std::vector<std::vector<ChannelId>>& units() const { return units_; }

    void set_release_fn(ReleaseFn fn) { release_ = std::move(fn); }
    void set_clock(ClockFn fn) { clock_ = std::move(fn); }

    // Algorithm step: append, then release the globally earliest event while
    // no gate unit is empty.
    void add_to_buffer(const Event& e);
    void drain();

    // End-of-run drain: releases everything in ascending order without the
    // all-units-non-empty gate.
    void flush();

    bool empty() const { return messages_.empty(); }
    std::size_t pending() const { return messages_.size(); }
    std::size_t queue_depth(const ChannelId& ch) const;

    const std::vector<WaitRecord>& wait_records() const { return waits_; }

    // Sortedness check: every queue ascending by timestamp. Counted after
    // each add/drain when enabled.
    void enable_invariant_checks(bool on) { check_invariants_ = on; }
    std::uint64_t invariant_violations() const { return invariant_violations_; }

  private:
    bool gate_open() const;
    void release_min();
    void check_sorted();
    Timestamp now() const { return clock_ ? clock_() : Timestamp{}; }

    std::vector<std::vector<ChannelId>> units_;
    std::map<ChannelId, std::size_t> unit_of_;
    std::map<ChannelId, std::deque<OrderKey>> queues_;
    std::map<OrderKey, Event> messages_;
    std::map<OrderKey, Timestamp> buffered_at_;
    ReleaseFn release_;
    ClockFn clock_;
    std::vector<WaitRecord> waits_;
    bool check_invariants_ = false;
    std::uint64_t invariant_violations_ = 0;
    bool draining_ = false;
};

struct MonitorOptions {
    bool ordering_enabled = true;
    // Simulated cost of one oracle exchange, per active monitor instance;
    // models the evaluation latency a query incurs as the sliced state grows.
    std::uint64_t oracle_cost_per_instance_ns = 4'000;
    bool check_invariants = false;
    // Off by default: once a property reports a negative verdict, keep
    // reporting the conclusive False for it from then on.
    bool latch_verdicts = false;
};

struct VerdictRecord {
    std::string property_id;
    Timestamp time;
    Verdict verdict;
};

// The monitor node: intercepts topic traffic via bus taps, mediates service
// calls, reorders events by publication time, queries the oracle, publishes
// verdicts, filters violations, and logs.
class Monitor {
  public:
    Monitor(MonitorConfig cfg, const std::vector<NamedProperty>& properties,
            MonitorOptions opt = {});

    // Wires taps for every configured topic and providers for every mediated
    // service name. The transform hook maps raw events to the oracle's
    // predicate vocabulary; identity when unset.
    void attach(SimBus& bus);
    void set_transform(std::function<Event(const Event&)> fn) { transform_ = std::move(fn); }

    void on_topic_message(const Event& e);
    FieldMap mediate_service(const ServiceSpec& spec, const FieldMap& request);
    void flush();

    // Sends one event to the oracle (or, offline, appends it to the log) and
    // returns the step verdict: negative iff any property is negative.
    Verdict dispatch(const Event& e);

    const std::vector<std::string>& event_log() const { return event_log_; }
    const std::vector<VerdictRecord>& verdict_log() const { return verdict_log_; }
    const std::vector<WaitRecord>& wait_records() const { return buffer_.wait_records(); }
    const std::vector<OrderKey>& dispatched_keys() const { return dispatched_keys_; }
    std::uint64_t buffered_count() const { return buffered_count_; }
    std::uint64_t dispatched_ordered_count() const { return dispatched_ordered_count_; }
    std::uint64_t invariant_violations() const { return buffer_.invariant_violations(); }
    std::uint64_t unconfigured_events() const { return unconfigured_events_; }
    bool buffers_empty() const { return buffer_.empty(); }
    std::size_t negative_count(const std::string& property_id) const;
    const OracleSession& oracle() const { return oracle_; }
    const MonitorConfig& config() const { return cfg_; }

    static constexpr const char* kVerdictTopic = "/verdict";
    static constexpr const char* kErrorTopic = "/monitor_error";

  private:
    Verdict release(const Event& e);
    Verdict combined(const std::vector<std::pair<std::string, Verdict>>& verdicts) const;
    void publish_verdicts(const Event& e, const std::vector<std::pair<std::string, Verdict>>& vs);
    void publish_error(const ChannelId& channel, const std::string& reason);
    Verdict wait_for_verdict(const OrderKey& key, const std::string& what);
    Event make_service_event(ChannelKind kind, const std::string& service, const FieldMap& fields,
                             std::optional<Timestamp> pub_override = std::nullopt);

    MonitorConfig cfg_;
    MonitorOptions opt_;
    OracleSession oracle_;
    ReorderBuffer buffer_;
    SimBus* bus_ = nullptr;
    std::function<Event(const Event&)> transform_;

    std::vector<std::string> event_log_;
    std::vector<VerdictRecord> verdict_log_;
    std::vector<OrderKey> dispatched_keys_;
    std::map<OrderKey, Verdict> release_verdicts_;
    std::map<std::string, std::size_t> negatives_;
    std::set<std::string> latched_;
    std::map<ChannelId, std::uint64_t> service_seq_;
    std::uint64_t buffered_count_ = 0;
    std::uint64_t dispatched_ordered_count_ = 0;
    std::uint64_t unconfigured_events_ = 0;
    bool oracle_busy_ = false;
};

}  // namespace rvbus
