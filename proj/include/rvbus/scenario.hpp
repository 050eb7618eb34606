#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rvbus/bus.hpp"
#include "rvbus/config.hpp"
#include "rvbus/monitor.hpp"
#include "rvbus/property.hpp"

namespace rvbus {

// Battery / Battery-Supervisor / LED-Panel scenario. The battery counts a
// percentage down from 100, one point per message; the supervisor samples the
// latest percentage at its own slower rate and reports a status; status
// changes trigger a SetLED service call through a dedicated caller node so
// the supervisor's periodic processing never blocks on the call.

constexpr std::uint64_t kBatteryPeriodNs = seconds(1) / 25;     // 25 Hz
constexpr std::uint64_t kSupervisorPeriodNs = seconds(1) / 10;  // 10 Hz
constexpr std::uint64_t kLedPanelPeriodNs = seconds(1) / 35;    // 35 Hz

// Status thresholds: 1 above 40%, 2 in (30,40], 3 in [0,30].
int status_for_percentage(std::int64_t pct);

// Table-style predicate buckets shared by the supervisor and the oracle.
std::string percentage_bucket(std::int64_t pct);
std::string status_bucket(std::int64_t status);

// Predicate layer: rewrites raw channel payloads into the oracle vocabulary
// (bucket strings, request/response booleans, topic/service name keys).
// Total: unknown channels pass through with just the name key added.
Event build_oracle_event(const Event& raw);

// The six case-study properties, in declaration order 1a..3b.
std::vector<NamedProperty> case_study_properties();

// Monitor configuration matching the shipped case_study.config fixture.
MonitorConfig case_study_config();

struct ServiceCallRecord {
    int call_index = 0;  // 1-based
    std::int64_t req_id = 0;
    std::string req_status;
    Timestamp started;
    Timestamp completed;
    bool ok = false;

    std::uint64_t roundtrip_ns() const { return completed.nanos - started.nanos; }
};

struct ScenarioOptions {
    std::uint64_t seed = 0;
    bool monitor_enabled = true;
    bool ordering_enabled = true;
    MonitorMode mode = MonitorMode::Online;
    bool filtering = true;
    // Jitter on battery-percentage delivery to the monitor; default twice the
    // battery inter-publication gap so cross-topic inversions provably occur.
    std::uint64_t pct_jitter_ns = 2 * kBatteryPeriodNs;
    int battery_floor = 0;  // run stops once this percentage is published
    std::uint64_t oracle_cost_per_instance_ns = 4'000;
    bool check_invariants = false;
    bool tracing = false;
};

BusConfig case_study_bus_config(const ScenarioOptions& opt);

class BatteryScenario {
  public:
    explicit BatteryScenario(ScenarioOptions opt);

    // Runs to the battery floor, then flushes the monitor.
    void run();

    SimBus& bus() { return *bus_; }
    Monitor* monitor() { return monitor_.get(); }
    const std::vector<ServiceCallRecord>& service_calls() const { return service_calls_; }
    const std::vector<std::pair<std::int64_t, int>>& status_changes() const {
        return status_changes_;
    }
    int rejected_calls() const { return rejected_calls_; }
    const ScenarioOptions& options() const { return opt_; }

  private:
    void wire_battery();
    void wire_supervisor();
    void wire_led_caller();
    void wire_led_panel();

    ScenarioOptions opt_;
    std::unique_ptr<SimBus> bus_;
    std::unique_ptr<Monitor> monitor_;

    NodeHandle* battery_ = nullptr;
    NodeHandle* supervisor_ = nullptr;
    NodeHandle* led_caller_ = nullptr;
    NodeHandle* led_panel_ = nullptr;

    std::int64_t battery_next_id_ = 0;
    std::int64_t battery_percentage_ = 100;
    bool battery_done_ = false;

    std::optional<int> last_status_;

    bool led_green_ = false, led_yellow_ = false, led_red_ = false;

    std::vector<ServiceCallRecord> service_calls_;
    std::vector<std::pair<std::int64_t, int>> status_changes_;  // (id, status)
    int rejected_calls_ = 0;
};

}  // namespace rvbus
