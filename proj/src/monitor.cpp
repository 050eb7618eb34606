#include "rvbus/monitor.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace rvbus {

void ReorderBuffer::add_unit(std::vector<ChannelId> channels) {
    std::size_t unit = units_.size();
    for (const auto& ch : channels) {
        unit_of_[ch] = unit;
        queues_[ch];
    }
    units_.push_back(std::move(channels));
}

std::size_t ReorderBuffer::queue_depth(const ChannelId& ch) const {
    auto it = queues_.find(ch);
    return it == queues_.end() ? 0 : it->second.size();
}

void ReorderBuffer::add_to_buffer(const Event& e) {
    assert(is_ordered(e.channel));
    OrderKey key = order_key(e);
    queues_[e.channel].push_back(key);
    messages_.emplace(key, e);
    buffered_at_.emplace(key, now());
    if (check_invariants_) check_sorted();
    drain();
}

bool ReorderBuffer::gate_open() const {
    for (const auto& unit : units_) {
        bool nonempty = false;
        for (const auto& ch : unit) {
            auto it = queues_.find(ch);
            if (it != queues_.end() && !it->second.empty()) {
                nonempty = true;
                break;
            }
        }
        if (!nonempty) return false;
    }
    return true;
}

void ReorderBuffer::release_min() {
    auto it = messages_.begin();
    OrderKey key = it->first;
    Event e = it->second;
    messages_.erase(it);
    auto& q = queues_[key.channel];
    assert(!q.empty() && q.front() == key);
    q.pop_front();
    WaitRecord w;
    w.channel = key.channel;
    w.seq = key.seq;
    w.pub_time = key.time;
    w.buffered_at = buffered_at_[key];
    w.released_at = now();
    buffered_at_.erase(key);
    waits_.push_back(w);
    if (release_) release_(e);
    // The release callback may advance the clock; record with the time at
    // which the exchange started.
    waits_.back().released_at = w.released_at;
}

void ReorderBuffer::drain() {
    // Re-entrancy guard: a release callback can feed new events back into
    // the buffer (a mediated response); the outer loop picks them up.
    if (draining_) return;
    draining_ = true;
    while (!messages_.empty() && gate_open()) {
        release_min();
        if (check_invariants_) check_sorted();
    }
    draining_ = false;
}

void ReorderBuffer::flush() {
    draining_ = true;
    while (!messages_.empty()) {
        release_min();
        if (check_invariants_) check_sorted();
    }
    draining_ = false;
}

void ReorderBuffer::check_sorted() {
    for (const auto& [ch, q] : queues_)
        if (!std::is_sorted(q.begin(), q.end())) ++invariant_violations_;
}

Monitor::Monitor(MonitorConfig cfg, const std::vector<NamedProperty>& properties,
                 MonitorOptions opt)
    : cfg_(std::move(cfg)), opt_(opt) {
    for (const auto& p : properties) oracle_.add_property(p.id, p.spec);

    if (opt_.ordering_enabled) {
        for (const auto& t : cfg_.topics)
            if (t.ordered) buffer_.add_unit({topic_channel(t.name)});
        for (const auto& s : cfg_.services)
            if (s.ordered) buffer_.add_unit({request_channel(s.name), response_channel(s.name)});
    }
    buffer_.enable_invariant_checks(opt_.check_invariants);
    buffer_.set_release_fn([this](const Event& e) {
        Verdict v = release(e);
        release_verdicts_[order_key(e)] = v;
    });
}

void Monitor::attach(SimBus& bus) {
    bus_ = &bus;
    buffer_.set_clock([this] { return bus_->now(); });
    bus.advertise(nullptr, kVerdictTopic);
    bus.advertise(nullptr, kErrorTopic);
    for (const auto& t : cfg_.topics) {
        bus.add_tap(t.name, "monitor", [this](const Event& e) { on_topic_message(e); });
        if (t.filtered) bus.advertise(nullptr, t.name + "_mon");
    }
    for (const auto& s : cfg_.services) {
        const ServiceSpec* spec = cfg_.find_service(s.name);
        bus.advertise_service_external(
            s.mediated_name, [this, spec](const FieldMap& req) { return mediate_service(*spec, req); });
    }
}

void Monitor::on_topic_message(const Event& e) {
    const TopicSpec* t = cfg_.find_topic(e.channel.name);
    if (!t || e.channel.kind != ChannelKind::Topic) {
        ++unconfigured_events_;
        return;
    }
    if (opt_.ordering_enabled && t->ordered) {
        ++buffered_count_;
        buffer_.add_to_buffer(e);
        return;
    }
    Verdict v = dispatch(e);
    if (t->filtered && cfg_.filtering && cfg_.mode == MonitorMode::Online && bus_) {
        if (!is_negative(v)) bus_->publish_external("monitor", e.channel.name + "_mon", e.fields);
    }
}

Verdict Monitor::release(const Event& e) {
    ++dispatched_ordered_count_;
    Verdict v = dispatch(e);
    if (e.channel.kind == ChannelKind::Topic) {
        const TopicSpec* t = cfg_.find_topic(e.channel.name);
        if (t && t->filtered && cfg_.filtering && cfg_.mode == MonitorMode::Online && bus_) {
            if (!is_negative(v)) bus_->publish_external("monitor", e.channel.name + "_mon", e.fields);
        }
    }
    return v;
}

Verdict Monitor::combined(const std::vector<std::pair<std::string, Verdict>>& verdicts) const {
    for (const auto& [id, v] : verdicts)
        if (is_negative(v)) return Verdict::CurrentlyFalse;
    return Verdict::CurrentlyTrue;
}

void Monitor::publish_verdicts(const Event& e,
                               const std::vector<std::pair<std::string, Verdict>>& vs) {
    for (const auto& [id, v] : vs) {
        verdict_log_.push_back({id, e.pub_time, v});
        if (is_negative(v)) ++negatives_[id];
        if (bus_)
            bus_->publish_external("monitor", kVerdictTopic,
                                   FieldMap{{"property_id", id},
                                            {"time", static_cast<std::int64_t>(e.pub_time.nanos)},
                                            {"verdict", std::string(to_string(v))}});
    }
}

void Monitor::publish_error(const ChannelId& channel, const std::string& reason) {
    if (!bus_) return;
    bus_->publish_external("monitor", kErrorTopic,
                           FieldMap{{"channel", channel.display()},
                                    {"reason", reason},
                                    {"time", static_cast<std::int64_t>(bus_->now().nanos)}});
}

Verdict Monitor::dispatch(const Event& raw) {
    // Buffer mutation and the oracle exchange form one serialized critical
    // region; the single-threaded bus never interleaves exchanges.
    assert(!oracle_busy_ && "oracle exchange must be serialized");
    oracle_busy_ = true;
    Event e = transform_ ? transform_(raw) : raw;
    dispatched_keys_.push_back(order_key(raw));

    if (cfg_.mode == MonitorMode::Offline) {
        event_log_.push_back(serialize_event(e));
        oracle_busy_ = false;
        // Placeholder; never published or logged.
        return Verdict::CurrentlyTrue;
    }

    if (bus_ && opt_.oracle_cost_per_instance_ns > 0) {
        std::uint64_t instances = std::max<std::size_t>(1, oracle_.total_instances());
        bus_->consume_time(opt_.oracle_cost_per_instance_ns * instances);
    }
    event_log_.push_back(serialize_event(e));
    auto verdicts = oracle_.update(e);
    if (opt_.latch_verdicts) {
        for (auto& [id, v] : verdicts) {
            if (latched_.count(id))
                v = Verdict::False;
            else if (is_negative(v))
                latched_.insert(id);
        }
    }
    publish_verdicts(e, verdicts);
    Verdict v = combined(verdicts);
    if (is_negative(v)) {
        std::string bad;
        for (const auto& [id, pv] : verdicts)
            if (is_negative(pv)) bad += (bad.empty() ? "" : ",") + id;
        publish_error(raw.channel, "property " + bad + " violated by " + raw.channel.display() +
                                       " seq " + std::to_string(raw.seq));
    }
    oracle_busy_ = false;
    return v;
}

Verdict Monitor::wait_for_verdict(const OrderKey& key, const std::string& what) {
    if (!bus_) throw std::runtime_error("ordered mediation requires an attached bus");
    bus_->pump_until([this, &key] {
        return release_verdicts_.count(key) > 0 || bus_->stop_requested();
    });
    auto it = release_verdicts_.find(key);
    if (it == release_verdicts_.end())
        throw std::runtime_error("ordering stalled while awaiting verdict on " + what +
                                 "; no further traffic can release it (deadlock hazard)");
    return it->second;
}

Event Monitor::make_service_event(ChannelKind kind, const std::string& service,
                                  const FieldMap& fields, std::optional<Timestamp> pub_override) {
    Event e;
    e.channel = ChannelId{kind, service};
    e.pub_time = pub_override ? *pub_override : (bus_ ? bus_->now() : Timestamp{});
    e.seq = service_seq_[e.channel]++;
    e.fields = fields;
    return e;
}

FieldMap Monitor::mediate_service(const ServiceSpec& spec, const FieldMap& request) {
    const bool ordered = opt_.ordering_enabled && spec.ordered;
    const bool online = cfg_.mode == MonitorMode::Online;

    Event req_ev = make_service_event(ChannelKind::ServiceRequest, spec.name, request);
    Verdict req_v = Verdict::CurrentlyTrue;
    if (ordered) {
        ++buffered_count_;
        buffer_.add_to_buffer(req_ev);
        if (online) req_v = wait_for_verdict(order_key(req_ev), "request " + spec.name);
    } else {
        req_v = dispatch(req_ev);
    }

    if (online && cfg_.filtering && is_negative(req_v)) {
        // Bypass the real invocation entirely on a negative request verdict.
        return FieldMap{{"success", false}, {"reason", std::string("request rejected by monitor")}};
    }

    FieldMap response;
    if (!bus_ || !bus_->has_service(spec.name))
        return FieldMap{{"success", false}, {"reason", std::string("service unavailable")}};
    response = bus_->call_service(nullptr, spec.name, request);

    // The response completes the request it answers: stamp it adjacent to
    // the request so the pair is contiguous in publication order.
    Event res_ev = make_service_event(ChannelKind::ServiceResponse, spec.name, response,
                                      req_ev.pub_time + 1);
    Verdict res_v = Verdict::CurrentlyTrue;
    if (ordered) {
        ++buffered_count_;
        buffer_.add_to_buffer(res_ev);
        if (online) res_v = wait_for_verdict(order_key(res_ev), "response " + spec.name);
    } else {
        res_v = dispatch(res_ev);
    }

    if (online && cfg_.filtering && is_negative(res_v)) {
        return FieldMap{{"success", false}, {"reason", std::string("response rejected by monitor")}};
    }
    return response;
}

void Monitor::flush() { buffer_.flush(); }

std::size_t Monitor::negative_count(const std::string& property_id) const {
    auto it = negatives_.find(property_id);
    return it == negatives_.end() ? 0 : it->second;
}

}  // namespace rvbus
