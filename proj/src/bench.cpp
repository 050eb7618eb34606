#include "rvbus/bench.hpp"

#include <cmath>
#include <sstream>

namespace rvbus {

RunReport run_case_study(const ScenarioOptions& opt) {
    BatteryScenario scenario(opt);
    scenario.run();

    RunReport report;
    report.seed = opt.seed;
    report.monitor_enabled = opt.monitor_enabled;
    report.ordering_enabled = opt.ordering_enabled;
    report.calls = scenario.service_calls();
    if (opt.tracing) {
        for (const auto& d : scenario.bus().delivery_trace()) {
            Event annotated = d.event;
            annotated.fields["delivered_at"] = static_cast<std::int64_t>(d.delivered_at.nanos);
            annotated.fields["subscriber"] = d.subscriber;
            report.trace_lines.push_back(serialize_event(annotated));
        }
    }
    if (Monitor* m = scenario.monitor()) {
        for (const auto& v : m->verdict_log()) {
            auto& counts = report.verdict_counts[v.property_id];
            if (is_negative(v.verdict))
                ++counts.second;
            else
                ++counts.first;
        }
        report.waits = m->wait_records();
        report.event_lines = m->event_log();
        report.verdicts = m->verdict_log();
        report.dispatched_keys = m->dispatched_keys();
        report.invariant_violations = m->invariant_violations();
        report.buffers_empty_after_flush = m->buffers_empty();
        report.buffered_count = m->buffered_count();
        report.dispatched_ordered_count = m->dispatched_ordered_count();
    }
    return report;
}

StatSummary summarize_series(const std::string& name, const std::vector<double>& values) {
    StatSummary s;
    s.series = name;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    var /= static_cast<double>(values.size());
    s.stddev = std::sqrt(var);
    return s;
}

std::string roundtrip_csv(const std::vector<RunReport>& reports) {
    std::ostringstream out;
    out << "run,call_index,req_id,req_status,ok,ns\n";
    for (std::size_t run = 0; run < reports.size(); ++run)
        for (const auto& c : reports[run].calls)
            out << run << ',' << c.call_index << ',' << c.req_id << ',' << c.req_status << ','
                << (c.ok ? 1 : 0) << ',' << c.roundtrip_ns() << '\n';
    return out.str();
}

std::string wait_csv(const std::vector<RunReport>& reports) {
    std::ostringstream out;
    out << "run,channel,seq,pub_time,buffered_at,released_at\n";
    for (std::size_t run = 0; run < reports.size(); ++run)
        for (const auto& w : reports[run].waits)
            out << run << ',' << w.channel.display() << ',' << w.seq << ',' << w.pub_time.nanos
                << ',' << w.buffered_at.nanos << ',' << w.released_at.nanos << '\n';
    return out.str();
}

std::string verdicts_csv(const std::vector<RunReport>& reports) {
    std::ostringstream out;
    out << "run,property,negatives\n";
    for (std::size_t run = 0; run < reports.size(); ++run)
        for (const auto& [prop, counts] : reports[run].verdict_counts)
            out << run << ',' << prop << ',' << counts.second << '\n';
    return out.str();
}

std::string summary_csv(const std::vector<StatSummary>& rows) {
    std::ostringstream out;
    out << "series,count,mean,std\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.series << ',' << r.count << ',';
        std::snprintf(buf, sizeof(buf), "%.6f", r.mean);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.6f", r.stddev);
        out << buf << '\n';
    }
    return out.str();
}

CheckResult check_log(const std::vector<std::string>& event_lines,
                      const std::vector<NamedProperty>& properties) {
    OracleSession oracle;
    for (const auto& p : properties) oracle.add_property(p.id, p.spec);

    CheckResult result;
    for (const auto& line : event_lines) {
        Event e = deserialize_event(line);
        for (const auto& [id, v] : oracle.update(e)) {
            result.verdict_lines.push_back(serialize_verdict(id, e.pub_time, v));
            if (is_negative(v)) result.any_negative = true;
        }
    }
    return result;
}

}  // namespace rvbus
