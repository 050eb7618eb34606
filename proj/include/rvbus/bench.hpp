#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rvbus/monitor.hpp"
#include "rvbus/scenario.hpp"

namespace rvbus {

struct RunReport {
    std::uint64_t seed = 0;
    bool monitor_enabled = true;
    bool ordering_enabled = true;
    // Per property: (currently_true, currently_false) totals.
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> verdict_counts;
    std::vector<ServiceCallRecord> calls;
    std::vector<WaitRecord> waits;
    std::vector<std::string> event_lines;
    std::vector<VerdictRecord> verdicts;
    std::vector<OrderKey> dispatched_keys;
    std::vector<std::string> trace_lines;  // delivery trace, when enabled
    std::uint64_t invariant_violations = 0;
    bool buffers_empty_after_flush = true;
    std::uint64_t buffered_count = 0;
    std::uint64_t dispatched_ordered_count = 0;

    std::uint64_t negatives(const std::string& property_id) const {
        auto it = verdict_counts.find(property_id);
        return it == verdict_counts.end() ? 0 : it->second.second;
    }
};

RunReport run_case_study(const ScenarioOptions& opt);

struct StatSummary {
    std::string series;
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population convention
};

StatSummary summarize_series(const std::string& name, const std::vector<double>& values);

// CSV writers behind `run`; formats are pinned so reruns are byte-identical.
std::string roundtrip_csv(const std::vector<RunReport>& reports);
std::string wait_csv(const std::vector<RunReport>& reports);
std::string verdicts_csv(const std::vector<RunReport>& reports);
std::string summary_csv(const std::vector<StatSummary>& rows);

// Offline checker: replays an event log through the oracle; returns verdict
// lines (one per event per property) and whether any verdict was negative.
struct CheckResult {
    std::vector<std::string> verdict_lines;
    bool any_negative = false;
};
CheckResult check_log(const std::vector<std::string>& event_lines,
                      const std::vector<NamedProperty>& properties);

}  // namespace rvbus
