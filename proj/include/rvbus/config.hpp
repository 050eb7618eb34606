#pragma once

#include <string>
#include <vector>

#include "rvbus/event.hpp"

namespace rvbus {

enum class MonitorMode { Online, Offline };

struct TopicSpec {
    std::string name;
    bool ordered = false;
    bool filtered = false;
};

struct ServiceSpec {
    std::string name;           // real service, e.g. /SetLED
    std::string mediated_name;  // monitor-facing, e.g. /SetLED_mon
    bool ordered = false;
};

struct Dependency {
    ChannelId dependent;
    std::string depends_on;  // topic name
};

struct MonitorConfig {
    std::string monitor_id;
    MonitorMode mode = MonitorMode::Online;
    bool filtering = false;
    std::string log_path;
    std::vector<TopicSpec> topics;
    std::vector<ServiceSpec> services;
    std::vector<Dependency> dependencies;

    const TopicSpec* find_topic(const std::string& name) const;
    const ServiceSpec* find_service(const std::string& name) const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plain-text YAML config; structural and invariant validation included
// (unique channel names, filtered topics require online mode, dependency
// endpoints must name configured channels).
MonitorConfig parse_config(const std::string& text);
std::string render_config(const MonitorConfig& cfg);

// Channel references in the `dependencies` section use a compact string form:
// "/name" or "topic:/name" for topics, "request:/svc" / "response:/svc" for
// service channels.
ChannelId parse_channel_ref(const std::string& ref);
std::string channel_ref(const ChannelId& id);

struct Hazard {
    ChannelId blocked;     // the filtered, ordered topic t
    ChannelId dependent;   // the ordered channel x that relies on t
    std::string reason;
};

// The deadlock-hazard rule: a topic that is both ordered and filtered must
// not share the ordering set with a channel that depends on it; ordered
// channels on a declared dependency cycle are also reported.
std::vector<Hazard> validate_ordering_safety(const MonitorConfig& cfg);

}  // namespace rvbus
