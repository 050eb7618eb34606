#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rvbus/bench.hpp"
#include "rvbus/config.hpp"
#include "rvbus/oracle.hpp"
#include "rvbus/scenario.hpp"

namespace py = pybind11;
using namespace rvbus;

namespace {

FieldValue field_from_py(const py::handle& value) {
    if (py::isinstance<py::bool_>(value)) return value.cast<bool>();
    if (py::isinstance<py::int_>(value)) return value.cast<std::int64_t>();
    if (py::isinstance<py::float_>(value)) return value.cast<double>();
    if (py::isinstance<py::str>(value)) return value.cast<std::string>();
    throw py::type_error("field values must be str, int, float, or bool");
}

py::object field_to_py(const FieldValue& value) {
    return std::visit([](const auto& v) -> py::object { return py::cast(v); }, value);
}

Event event_from_dict(const py::dict& d) {
    Event e;
    std::string kind = d.contains("kind") ? d["kind"].cast<std::string>() : "topic";
    auto parsed = channel_kind_from_string(kind);
    if (!parsed) throw py::value_error("kind must be topic|service_request|service_response");
    e.channel.kind = *parsed;
    e.channel.name = d["channel"].cast<std::string>();
    if (d.contains("time")) e.pub_time.nanos = d["time"].cast<std::uint64_t>();
    if (d.contains("seq")) e.seq = d["seq"].cast<std::uint64_t>();
    if (d.contains("fields"))
        for (auto item : d["fields"].cast<py::dict>())
            e.fields[item.first.cast<std::string>()] = field_from_py(item.second);
    return e;
}

py::dict event_to_dict(const Event& e) {
    py::dict d;
    d["channel"] = e.channel.name;
    d["kind"] = to_string(e.channel.kind);
    d["time"] = e.pub_time.nanos;
    d["seq"] = e.seq;
    py::dict fields;
    for (const auto& [k, v] : e.fields) fields[py::str(k)] = field_to_py(v);
    d["fields"] = fields;
    return d;
}

py::dict report_to_dict(const RunReport& report) {
    py::dict d;
    d["seed"] = report.seed;
    d["monitor"] = report.monitor_enabled;
    d["ordering"] = report.ordering_enabled;
    py::dict verdicts;
    for (const auto& [prop, counts] : report.verdict_counts)
        verdicts[py::str(prop)] = py::make_tuple(counts.first, counts.second);
    d["verdict_counts"] = verdicts;
    py::list calls;
    for (const auto& c : report.calls) {
        py::dict call;
        call["call_index"] = c.call_index;
        call["req_id"] = c.req_id;
        call["req_status"] = c.req_status;
        call["ok"] = c.ok;
        call["roundtrip_ns"] = c.roundtrip_ns();
        calls.append(call);
    }
    d["calls"] = calls;
    py::list waits;
    for (const auto& w : report.waits) {
        py::dict wait;
        wait["channel"] = w.channel.display();
        wait["seq"] = w.seq;
        wait["pub_time"] = w.pub_time.nanos;
        wait["buffered_at"] = w.buffered_at.nanos;
        wait["released_at"] = w.released_at.nanos;
        waits.append(wait);
    }
    d["waits"] = waits;
    py::list events;
    for (const auto& line : report.event_lines) events.append(line);
    d["event_lines"] = events;
    py::list verdict_lines;
    for (const auto& v : report.verdicts)
        verdict_lines.append(serialize_verdict(v.property_id, v.time, v.verdict));
    d["verdict_lines"] = verdict_lines;
    d["invariant_violations"] = report.invariant_violations;
    d["buffers_empty_after_flush"] = report.buffers_empty_after_flush;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Runtime verification over a simulated publish-subscribe/service bus";

    m.def("serialize_event", [](const py::dict& d) { return serialize_event(event_from_dict(d)); },
          py::arg("event"), "Serialize an event dict to its JSON line form.");
    m.def("deserialize_event", [](const std::string& line) {
              return event_to_dict(deserialize_event(line));
          },
          py::arg("line"), "Parse a JSON event line back into an event dict.");

    m.def("parse_property", [](const std::string& text) { return to_string(parse_property(text)); },
          py::arg("text"), "Parse a past-MTL property; returns its normalized rendering.");

    m.def("brute_force_eval",
          [](const std::string& spec, const std::vector<py::dict>& trace) {
              PropertyAst ast = parse_property(spec);
              std::vector<Event> events;
              for (const auto& d : trace) events.push_back(event_from_dict(d));
              std::vector<std::string> out;
              for (Verdict v : brute_force_eval(ast, events)) out.emplace_back(to_string(v));
              return out;
          },
          py::arg("spec"), py::arg("trace"),
          "Reference evaluation of a property over a full trace of event dicts.");

    py::class_<MonitorState>(m, "PropertyMonitor")
        .def(py::init([](const std::string& property_id, const std::string& spec) {
                 return MonitorState(property_id, parse_property(spec));
             }),
             py::arg("property_id"), py::arg("spec"))
        .def("update",
             [](MonitorState& self, const py::dict& event) {
                 return std::string(to_string(self.update(event_from_dict(event))));
             },
             py::arg("event"), "Feed one event; returns the verdict string.")
        .def_property_readonly("property_id", &MonitorState::property_id)
        .def_property_readonly("steps", &MonitorState::step_count)
        .def_property_readonly("instances", &MonitorState::instance_count);

    m.def("validate_config",
          [](const std::string& text) {
              MonitorConfig cfg = parse_config(text);
              py::list hazards;
              for (const auto& h : validate_ordering_safety(cfg)) hazards.append(h.reason);
              py::dict d;
              d["monitor_id"] = cfg.monitor_id;
              d["topics"] = cfg.topics.size();
              d["services"] = cfg.services.size();
              d["hazards"] = hazards;
              return d;
          },
          py::arg("text"), "Parse a monitor config and report deadlock hazards.");

    m.def("case_study_properties", [] {
        py::list out;
        for (const auto& p : case_study_properties()) out.append(py::make_tuple(p.id, p.spec));
        return out;
    });

    m.def("run_case_study",
          [](std::uint64_t seed, bool monitor, bool ordering, std::uint64_t jitter_ns,
             int battery_floor) {
              ScenarioOptions opt;
              opt.seed = seed;
              opt.monitor_enabled = monitor;
              opt.ordering_enabled = ordering;
              opt.pct_jitter_ns = jitter_ns;
              opt.battery_floor = battery_floor;
              return report_to_dict(run_case_study(opt));
          },
          py::arg("seed") = 1, py::arg("monitor") = true, py::arg("ordering") = true,
          py::arg("jitter_ns") = 2 * kBatteryPeriodNs, py::arg("battery_floor") = 0,
          "Run one battery case-study scenario and return its report.");

    m.def("check_log",
          [](const std::vector<std::string>& event_lines, const std::string& properties_text) {
              auto props = parse_property_file(properties_text);
              CheckResult r = check_log(event_lines, props);
              return py::make_tuple(r.verdict_lines, r.any_negative);
          },
          py::arg("event_lines"), py::arg("properties_text"),
          "Replay serialized events through the oracle; returns (verdict_lines, any_negative).");
}
