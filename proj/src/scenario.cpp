#include "rvbus/scenario.hpp"

namespace rvbus {

int status_for_percentage(std::int64_t pct) {
    if (pct > 40) return 1;
    if (pct > 30) return 2;
    return 3;
}

std::string percentage_bucket(std::int64_t pct) {
    if (pct > 40 && pct <= 100) return "1";
    if (pct > 30 && pct <= 40) return "2";
    if (pct >= 0 && pct <= 30) return "3";
    return "INVALID";
}

std::string status_bucket(std::int64_t status) {
    if (status >= 0 && status <= 3) return std::to_string(status);
    return "INVALID";
}

namespace {

std::optional<std::int64_t> int_field(const Event& e, const char* key) {
    auto it = e.fields.find(key);
    if (it == e.fields.end()) return std::nullopt;
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    return std::nullopt;
}

}  // namespace

Event build_oracle_event(const Event& raw) {
    Event e = raw;
    if (raw.channel.kind == ChannelKind::Topic) {
        e.fields["topic"] = raw.channel.name;
        if (raw.channel.name == "/battery_percentage") {
            if (raw.fields.count("percentage")) {
                auto pct = int_field(raw, "percentage");
                e.fields["percentage"] = pct ? percentage_bucket(*pct) : std::string("INVALID");
            }
        } else if (raw.channel.name == "/battery_status") {
            if (raw.fields.count("status")) {
                auto st = int_field(raw, "status");
                e.fields["status"] = st ? status_bucket(*st) : std::string("INVALID");
            }
        }
        return e;
    }
    // Service channels carry explicit request/response markers.
    e.fields["service"] = raw.channel.name;
    e.fields["request"] = raw.channel.kind == ChannelKind::ServiceRequest;
    e.fields["response"] = raw.channel.kind == ChannelKind::ServiceResponse;
    return e;
}

std::vector<NamedProperty> case_study_properties() {
    // 2b binds *s explicitly; the grammar requires every variable reference
    // to sit under a quantifier.
    return {
        {"1a",
         "forall[i]. forall[s]. ({topic: \"/battery_status\", id: *i, status: *s} -> "
         "once({topic: \"/input_accepted\", id: *i}) and "
         "once({topic: \"/battery_percentage\", id: *i, percentage: *s}))"},
        {"1b",
         "forall[i]. (not {topic: \"/battery_status\", id: *i} -> "
         "once[1:]({topic: \"/battery_status\", id: *i}) or "
         "not once[100:]({topic: \"/input_accepted\", id: *i}))"},
        {"2a",
         "forall[i]. forall[s]. ({service: \"/SetLED\", req_id: *i, req_status: *s} -> "
         "once({topic: \"/battery_status\", id: *i, status: *s, status_change: True}))"},
        {"2b",
         "forall[i]. forall[s]. (not {service: \"/SetLED\", req_id: *i, req_status: *s} -> "
         "once[1:]({service: \"/SetLED\", req_id: *i, req_status: *s}) or "
         "not once[100:]({topic: \"/battery_status\", id: *i, status: *s, status_change: "
         "True}))"},
        {"3a",
         "forall[i]. ({service: \"/SetLED\", response: True, res_id: *i} -> "
         "once({service: \"/SetLED\", request: True, req_id: *i}))"},
        {"3b",
         "forall[i]. (not {service: \"/SetLED\", response: True, res_id: *i} -> "
         "once[1:]({service: \"/SetLED\", response: True, res_id: *i}) or "
         "not once[100:]({service: \"/SetLED\", request: True, req_id: *i}))"},
    };
}

MonitorConfig case_study_config() {
    MonitorConfig cfg;
    cfg.monitor_id = "battery_supervisor_monitor";
    cfg.mode = MonitorMode::Online;
    cfg.filtering = true;
    cfg.log_path = "monitor_events.jsonl";
    cfg.topics = {
        {"/battery_percentage", /*ordered=*/true, /*filtered=*/false},
        {"/input_accepted", true, false},
        {"/battery_status", true, false},
        {"/status_accepted", false, false},
        {"/LED_panel", false, false},
    };
    cfg.services = {{"/SetLED", "/SetLED_mon", /*ordered=*/true}};
    return cfg;
}

BusConfig case_study_bus_config(const ScenarioOptions& opt) {
    BusConfig cfg;
    cfg.seed = opt.seed;
    cfg.default_link = {millis(1), 0};
    // Supervisor-side topics reach the monitor promptly; percentage
    // deliveries are jittered, which is what makes out-of-order arrivals
    // (and, without ordering, false negatives) occur.
    cfg.links[{"/battery_percentage", "monitor"}] = {millis(1), opt.pct_jitter_ns};
    cfg.links[{"/input_accepted", "monitor"}] = {millis(2), 0};
    cfg.links[{"/battery_status", "monitor"}] = {millis(2), 0};
    return cfg;
}

BatteryScenario::BatteryScenario(ScenarioOptions opt) : opt_(std::move(opt)) {
    bus_ = std::make_unique<SimBus>(case_study_bus_config(opt_));
    bus_->enable_tracing(opt_.tracing);

    battery_ = bus_->add_node("battery");
    supervisor_ = bus_->add_node("supervisor");
    led_caller_ = bus_->add_node("led_caller");
    led_panel_ = bus_->add_node("led_panel");

    bus_->advertise(battery_, "/battery_percentage");
    bus_->advertise(supervisor_, "/input_accepted");
    bus_->advertise(supervisor_, "/battery_status");
    bus_->advertise(supervisor_, "/status_change");
    bus_->advertise(led_panel_, "/status_accepted");
    bus_->advertise(led_panel_, "/LED_panel");

    wire_battery();
    wire_supervisor();
    wire_led_caller();
    wire_led_panel();

    if (opt_.monitor_enabled) {
        MonitorConfig cfg = case_study_config();
        cfg.mode = opt_.mode;
        cfg.filtering = opt_.filtering;
        MonitorOptions mopt;
        mopt.ordering_enabled = opt_.ordering_enabled;
        mopt.oracle_cost_per_instance_ns = opt_.oracle_cost_per_instance_ns;
        mopt.check_invariants = opt_.check_invariants;
        monitor_ = std::make_unique<Monitor>(cfg, case_study_properties(), mopt);
        monitor_->set_transform(build_oracle_event);
        monitor_->attach(*bus_);
    }
}

void BatteryScenario::wire_battery() {
    bus_->create_timer(battery_, kBatteryPeriodNs, [this] {
        if (battery_done_) return;
        bus_->publish(battery_, "/battery_percentage",
                      {{"id", battery_next_id_}, {"percentage", battery_percentage_}});
        if (battery_percentage_ <= opt_.battery_floor) {
            battery_done_ = true;
            bus_->request_stop();
            return;
        }
        ++battery_next_id_;
        --battery_percentage_;
    });
    bus_->subscribe_latest(supervisor_, "/battery_percentage");
}

void BatteryScenario::wire_supervisor() {
    bus_->create_timer(supervisor_, kSupervisorPeriodNs, [this] {
        auto sample = bus_->take_latest(supervisor_, "/battery_percentage");
        if (!sample) return;
        auto id = std::get<std::int64_t>(sample->fields.at("id"));
        auto pct = std::get<std::int64_t>(sample->fields.at("percentage"));
        int status = status_for_percentage(pct);
        bool changed = !last_status_ || *last_status_ != status;

        bus_->publish(supervisor_, "/input_accepted", {{"id", id}});
        bus_->publish(supervisor_, "/battery_status",
                      {{"id", id}, {"status", std::int64_t(status)}, {"status_change", changed}});
        if (changed) {
            bus_->publish(supervisor_, "/status_change",
                          {{"id", id}, {"status", std::int64_t(status)}});
            status_changes_.emplace_back(id, status);
            last_status_ = status;
        }
    });
}

void BatteryScenario::wire_led_caller() {
    bus_->subscribe(led_caller_, "/status_change", [this](const Event& e) {
        if (bus_->stop_requested()) return;  // no new calls during shutdown
        auto id = std::get<std::int64_t>(e.fields.at("id"));
        auto status = std::get<std::int64_t>(e.fields.at("status"));
        FieldMap request{{"req_id", id}, {"req_status", std::to_string(status)}};
        const std::string service = opt_.monitor_enabled ? "/SetLED_mon" : "/SetLED";

        ServiceCallRecord rec;
        rec.call_index = static_cast<int>(service_calls_.size()) + 1;
        rec.req_id = id;
        rec.req_status = std::to_string(status);
        rec.started = bus_->now();
        FieldMap response = bus_->call_service(led_caller_, service, request);
        rec.completed = bus_->now();
        auto ok = response.find("success");
        rec.ok = ok != response.end() && std::get<bool>(ok->second);
        if (!rec.ok) ++rejected_calls_;
        service_calls_.push_back(std::move(rec));
    });
}

void BatteryScenario::wire_led_panel() {
    bus_->advertise_service(led_panel_, "/SetLED", [this](const FieldMap& req) -> FieldMap {
        auto id_it = req.find("req_id");
        auto st_it = req.find("req_status");
        if (id_it == req.end() || st_it == req.end()) return {{"success", false}};
        const std::string* status_str = std::get_if<std::string>(&st_it->second);
        int status = status_str ? std::atoi(status_str->c_str()) : 0;
        if (status < 1 || status > 3) return {{"success", false}};

        auto id = std::get<std::int64_t>(id_it->second);
        bus_->publish(led_panel_, "/status_accepted", {{"id", id}});
        led_green_ = status == 1;
        led_yellow_ = status == 2;
        led_red_ = status == 3;
        bus_->publish(led_panel_, "/LED_panel",
                      {{"green", led_green_}, {"yellow", led_yellow_}, {"red", led_red_}});
        return {{"success", true}, {"res_id", id}};
    });
    bus_->create_timer(led_panel_, kLedPanelPeriodNs, [this] {
        bus_->publish(led_panel_, "/LED_panel",
                      {{"green", led_green_}, {"yellow", led_yellow_}, {"red", led_red_}});
    });
}

void BatteryScenario::run() {
    bus_->run_until_stop();
    bus_->finish_deliveries();
    if (monitor_) monitor_->flush();
}

}  // namespace rvbus
