#include "rvbus/bus.hpp"

#include <stdexcept>

namespace rvbus {

SimBus::SimBus(BusConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {}

NodeHandle* SimBus::add_node(const std::string& id) {
    nodes_.push_back(std::unique_ptr<NodeHandle>(new NodeHandle(id)));
    return nodes_.back().get();
}

void SimBus::advertise(NodeHandle*, const std::string& topic) {
    topics_[topic].advertised = true;
}

void SimBus::subscribe(NodeHandle* node, const std::string& topic,
                       std::function<void(const Event&)> cb) {
    Subscription sub;
    sub.node = node;
    sub.cb = std::move(cb);
    topics_[topic].subs.push_back(std::move(sub));
}

void SimBus::subscribe_latest(NodeHandle* node, const std::string& topic) {
    Subscription sub;
    sub.node = node;
    sub.keep_latest = true;
    topics_[topic].subs.push_back(std::move(sub));
    node->latest_slots[topic] = std::nullopt;
}

std::optional<Event> SimBus::take_latest(NodeHandle* node, const std::string& topic) {
    auto it = node->latest_slots.find(topic);
    if (it == node->latest_slots.end()) return std::nullopt;
    std::optional<Event> out;
    out.swap(it->second);
    return out;
}

void SimBus::add_tap(const std::string& topic, const std::string& tap_id,
                     std::function<void(const Event&)> cb) {
    Tap tap;
    tap.id = tap_id;
    tap.cb = std::move(cb);
    topics_[topic].taps.push_back(std::move(tap));
}

void SimBus::create_timer(NodeHandle* node, std::uint64_t period_ns, std::function<void()> cb) {
    if (period_ns == 0) throw std::invalid_argument("timer period must be positive");
    auto shared_cb = std::make_shared<std::function<void()>>(std::move(cb));
    // First firing one period in; re-armed on the fixed grid regardless of
    // how long callbacks take.
    auto arm_holder = std::make_shared<std::function<void(Timestamp)>>();
    *arm_holder = [this, node, period_ns, shared_cb, arm_holder](Timestamp at) {
        schedule(at, /*rank=*/1, "timer:" + node->id(), [this, node, period_ns, shared_cb,
                                                         arm_holder, at] {
            (*arm_holder)(Timestamp{at.nanos + period_ns});
            run_on_node(node, *shared_cb);
        });
    };
    (*arm_holder)(Timestamp{now_.nanos + period_ns});
}

std::uint64_t SimBus::draw_jitter(std::uint64_t jitter_max) {
    if (jitter_max == 0) return 0;
    // rng() % n keeps the draw sequence identical across standard libraries.
    return rng_() % (jitter_max + 1);
}

Event SimBus::publish_impl(const std::string& publisher, const std::string& topic,
                           FieldMap fields) {
    auto it = topics_.find(topic);
    if (it == topics_.end() || !it->second.advertised)
        throw std::runtime_error("publish on unknown topic " + topic);
    Topic& t = it->second;

    Event e;
    e.channel = topic_channel(topic);
    e.pub_time = now_;
    e.seq = t.next_seq++;
    e.fields = std::move(fields);
    now_.nanos += 1;  // publication cost; makes per-node stamps strictly increase
    if (tracing_) publications_.push_back(e);

    for (auto& sub : t.subs) {
        const LinkProfile& link = cfg_.link(topic, sub.node->id());
        Timestamp raw{e.pub_time.nanos + link.base_latency_ns + draw_jitter(link.jitter_max_ns)};
        Timestamp at = clamp_delivery(raw, sub.last_scheduled);
        sub.last_scheduled = at;
        Subscription* sub_ptr = &sub;
        schedule(at, /*rank=*/0, topic, [this, e, sub_ptr, at] {
            if (tracing_) deliveries_.push_back({e, sub_ptr->node->id(), at});
            ++sub_ptr->delivered;
            if (sub_ptr->keep_latest) {
                sub_ptr->node->latest_slots[e.channel.name] = e;
            } else {
                run_on_node(sub_ptr->node, [sub_ptr, e] { sub_ptr->cb(e); });
            }
        });
    }
    for (auto& tap : t.taps) {
        const LinkProfile& link = cfg_.link(topic, tap.id);
        Timestamp raw{e.pub_time.nanos + link.base_latency_ns + draw_jitter(link.jitter_max_ns)};
        Timestamp at = clamp_delivery(raw, tap.last_scheduled);
        tap.last_scheduled = at;
        Tap* tap_ptr = &tap;
        schedule(at, /*rank=*/0, topic, [this, e, tap_ptr, at] {
            if (tracing_) deliveries_.push_back({e, tap_ptr->id, at});
            tap_ptr->cb(e);
        });
    }
    (void)publisher;
    return e;
}

Event SimBus::publish(NodeHandle* node, const std::string& topic, FieldMap fields) {
    return publish_impl(node->id(), topic, std::move(fields));
}

Event SimBus::publish_external(const std::string& publisher, const std::string& topic,
                               FieldMap fields) {
    return publish_impl(publisher, topic, std::move(fields));
}

void SimBus::advertise_service(NodeHandle* node, const std::string& service,
                               ServiceHandler handler) {
    Service s;
    s.node = node;
    s.handler = std::move(handler);
    services_[service] = std::move(s);
}

void SimBus::advertise_service_external(const std::string& service, ServiceHandler handler) {
    Service s;
    s.handler = std::move(handler);
    services_[service] = std::move(s);
}

bool SimBus::has_service(const std::string& service) const {
    return services_.count(service) > 0;
}

FieldMap SimBus::call_service(NodeHandle* node, const std::string& service,
                              const FieldMap& request) {
    auto it = services_.find(service);
    if (it == services_.end()) throw std::runtime_error("unknown service " + service);
    Service& s = it->second;

    if (tracing_) {
        Event req;
        req.channel = request_channel(service);
        req.pub_time = now_;
        req.seq = s.next_req_seq++;
        req.fields = request;
        service_events_.push_back(req);
    } else {
        s.next_req_seq++;
    }

    FieldMap response;
    if (s.node) {
        if (s.node->busy)
            throw std::runtime_error("re-entrant service call into busy node " + s.node->id());
        s.node->busy = true;
        response = s.handler(request);
        s.node->busy = false;
    } else {
        response = s.handler(request);
    }

    if (tracing_) {
        Event res;
        res.channel = response_channel(service);
        res.pub_time = now_;
        res.seq = s.next_res_seq++;
        res.fields = response;
        service_events_.push_back(res);
    } else {
        s.next_res_seq++;
    }
    (void)node;  // caller stays busy by virtue of being inside its own callback
    return response;
}

void SimBus::schedule(Timestamp at, int rank, std::string key, std::function<void()> action) {
    queue_.push(QueueItem{at, rank, std::move(key), next_item_id_++, std::move(action)});
}

void SimBus::run_on_node(NodeHandle* node, const std::function<void()>& fn) {
    if (node->busy) {
        node->deferred.push_back(fn);
        return;
    }
    node->busy = true;
    fn();
    node->busy = false;
    while (!node->deferred.empty() && !node->busy) {
        auto next = node->deferred.front();
        node->deferred.pop_front();
        node->busy = true;
        next();
        node->busy = false;
    }
}

void SimBus::run(const std::function<bool()>& until) {
    while (!until()) {
        if (queue_.empty()) return;
        QueueItem item = queue_.top();
        queue_.pop();
        if (item.at > now_) now_ = item.at;
        item.action();
    }
}

void SimBus::finish_deliveries() {
    while (!queue_.empty()) {
        QueueItem item = queue_.top();
        queue_.pop();
        if (item.rank != 0) continue;  // drop timers; publishers have stopped
        if (item.at > now_) now_ = item.at;
        item.action();
    }
}

std::uint64_t SimBus::channel_seq(const std::string& topic) const {
    auto it = topics_.find(topic);
    return it == topics_.end() ? 0 : it->second.next_seq;
}

}  // namespace rvbus
