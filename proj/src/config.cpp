#include "rvbus/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace rvbus {

namespace {

std::string at_mark(const YAML::Mark& mark) {
    return " (line " + std::to_string(mark.line + 1) + ")";
}

bool get_bool(const YAML::Node& node, const char* key, const char* ctx) {
    if (!node[key]) throw ConfigError(std::string(ctx) + " missing `" + key + "`" + at_mark(node.Mark()));
    try {
        return node[key].as<bool>();
    } catch (const YAML::Exception&) {
        throw ConfigError(std::string("`") + key + "` must be a boolean" + at_mark(node[key].Mark()));
    }
}

std::string get_string(const YAML::Node& node, const char* key, const char* ctx) {
    if (!node[key]) throw ConfigError(std::string(ctx) + " missing `" + key + "`" + at_mark(node.Mark()));
    if (!node[key].IsScalar())
        throw ConfigError(std::string("`") + key + "` must be a string" + at_mark(node[key].Mark()));
    return node[key].as<std::string>();
}

void check_known_keys(const YAML::Node& node, const std::set<std::string>& known,
                      const char* ctx) {
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!known.count(key))
            throw ConfigError(std::string("unknown key `") + key + "` in " + ctx +
                              at_mark(kv.first.Mark()));
    }
}

void validate(const MonitorConfig& cfg) {
    if (cfg.monitor_id.empty()) throw ConfigError("monitor_id required");
    std::set<std::string> topic_names;
    for (const auto& t : cfg.topics) {
        if (t.name.empty()) throw ConfigError("topic name must be non-empty");
        if (!topic_names.insert(t.name).second)
            throw ConfigError("duplicate topic " + t.name);
        if (t.filtered && cfg.mode == MonitorMode::Offline)
            throw ConfigError("topic " + t.name +
                              " is filtered but mode is offline; offline monitors only log");
    }
    std::set<std::string> service_names;
    for (const auto& s : cfg.services) {
        if (s.name.empty() || s.mediated_name.empty())
            throw ConfigError("service names must be non-empty");
        if (s.mediated_name == s.name)
            throw ConfigError("service " + s.name + " mediated_name must differ from name");
        if (!service_names.insert(s.name).second)
            throw ConfigError("duplicate service " + s.name);
        if (topic_names.count(s.name))
            throw ConfigError("channel name " + s.name + " used as both topic and service");
    }
    auto channel_configured = [&](const ChannelId& id) {
        if (id.kind == ChannelKind::Topic) return topic_names.count(id.name) > 0;
        return service_names.count(id.name) > 0;
    };
    for (const auto& d : cfg.dependencies) {
        if (!channel_configured(d.dependent))
            throw ConfigError("dependency references unconfigured channel " +
                              d.dependent.display());
        if (!topic_names.count(d.depends_on))
            throw ConfigError("dependency references unconfigured topic " + d.depends_on);
    }
}

}  // namespace

const TopicSpec* MonitorConfig::find_topic(const std::string& name) const {
    for (const auto& t : topics)
        if (t.name == name) return &t;
    return nullptr;
}

const ServiceSpec* MonitorConfig::find_service(const std::string& name) const {
    for (const auto& s : services)
        if (s.name == name) return &s;
    return nullptr;
}

ChannelId parse_channel_ref(const std::string& ref) {
    auto colon = ref.find(':');
    if (colon == std::string::npos) return topic_channel(ref);  // bare name = topic
    const std::string kind = ref.substr(0, colon);
    const std::string name = ref.substr(colon + 1);
    if (kind == "topic") return topic_channel(name);
    if (kind == "request") return request_channel(name);
    if (kind == "response") return response_channel(name);
    throw ConfigError("unknown channel kind `" + kind + "` in reference " + ref);
}

std::string channel_ref(const ChannelId& id) {
    switch (id.kind) {
        case ChannelKind::Topic: return "topic:" + id.name;
        case ChannelKind::ServiceRequest: return "request:" + id.name;
        case ChannelKind::ServiceResponse: return "response:" + id.name;
    }
    return id.name;
}

MonitorConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& ex) {
        throw ConfigError(std::string("syntax error: ") + ex.msg + at_mark(ex.mark));
    }
    if (!root.IsMap()) throw ConfigError("monitor_id required");
    check_known_keys(root, {"monitor_id", "mode", "filtering", "log", "topics", "services",
                            "dependencies"},
                     "config");

    MonitorConfig cfg;
    cfg.monitor_id = root["monitor_id"] ? root["monitor_id"].as<std::string>() : "";
    if (root["mode"]) {
        const std::string mode = root["mode"].as<std::string>();
        if (mode == "online")
            cfg.mode = MonitorMode::Online;
        else if (mode == "offline")
            cfg.mode = MonitorMode::Offline;
        else
            throw ConfigError("mode must be online|offline" + at_mark(root["mode"].Mark()));
    }
    if (root["filtering"]) cfg.filtering = get_bool(root, "filtering", "config");
    if (root["log"]) cfg.log_path = root["log"].as<std::string>();

    if (root["topics"]) {
        if (!root["topics"].IsSequence())
            throw ConfigError("topics must be a list" + at_mark(root["topics"].Mark()));
        for (const auto& item : root["topics"]) {
            check_known_keys(item, {"name", "ordered", "filtered"}, "topic entry");
            TopicSpec t;
            t.name = get_string(item, "name", "topic entry");
            t.ordered = item["ordered"] ? get_bool(item, "ordered", "topic entry") : false;
            t.filtered = item["filtered"] ? get_bool(item, "filtered", "topic entry") : false;
            cfg.topics.push_back(std::move(t));
        }
    }
    if (root["services"]) {
        if (!root["services"].IsSequence())
            throw ConfigError("services must be a list" + at_mark(root["services"].Mark()));
        for (const auto& item : root["services"]) {
            check_known_keys(item, {"name", "mediated_name", "ordered"}, "service entry");
            ServiceSpec s;
            s.name = get_string(item, "name", "service entry");
            s.mediated_name = get_string(item, "mediated_name", "service entry");
            s.ordered = item["ordered"] ? get_bool(item, "ordered", "service entry") : false;
            cfg.services.push_back(std::move(s));
        }
    }
    if (root["dependencies"]) {
        if (!root["dependencies"].IsSequence())
            throw ConfigError("dependencies must be a list" + at_mark(root["dependencies"].Mark()));
        for (const auto& item : root["dependencies"]) {
            check_known_keys(item, {"dependent", "depends_on"}, "dependency entry");
            Dependency d;
            d.dependent = parse_channel_ref(get_string(item, "dependent", "dependency entry"));
            d.depends_on = get_string(item, "depends_on", "dependency entry");
            cfg.dependencies.push_back(std::move(d));
        }
    }
    validate(cfg);
    return cfg;
}

std::string render_config(const MonitorConfig& cfg) {
    std::ostringstream out;
    out << "monitor_id: " << cfg.monitor_id << "\n";
    out << "mode: " << (cfg.mode == MonitorMode::Online ? "online" : "offline") << "\n";
    out << "filtering: " << (cfg.filtering ? "true" : "false") << "\n";
    out << "log: " << cfg.log_path << "\n";
    out << "topics:\n";
    for (const auto& t : cfg.topics)
        out << "  - {name: " << t.name << ", ordered: " << (t.ordered ? "true" : "false")
            << ", filtered: " << (t.filtered ? "true" : "false") << "}\n";
    out << "services:\n";
    for (const auto& s : cfg.services)
        out << "  - {name: " << s.name << ", mediated_name: " << s.mediated_name
            << ", ordered: " << (s.ordered ? "true" : "false") << "}\n";
    out << "dependencies:\n";
    for (const auto& d : cfg.dependencies)
        out << "  - {dependent: \"" << channel_ref(d.dependent) << "\", depends_on: "
            << d.depends_on << "}\n";
    return out.str();
}

std::vector<Hazard> validate_ordering_safety(const MonitorConfig& cfg) {
    std::vector<Hazard> hazards;

    auto ordered_channels = [&]() {
        std::vector<ChannelId> out;
        for (const auto& t : cfg.topics)
            if (t.ordered) out.push_back(topic_channel(t.name));
        for (const auto& s : cfg.services)
            if (s.ordered) {
                out.push_back(request_channel(s.name));
                out.push_back(response_channel(s.name));
            }
        return out;
    }();
    auto is_ordered = [&](const ChannelId& id) {
        return std::find(ordered_channels.begin(), ordered_channels.end(), id) !=
               ordered_channels.end();
    };

    // Rule 1: filtered+ordered topic t with an ordered dependent x.
    for (const auto& t : cfg.topics) {
        if (!(t.ordered && t.filtered)) continue;
        for (const auto& d : cfg.dependencies) {
            if (d.depends_on != t.name) continue;
            if (!is_ordered(d.dependent)) continue;
            Hazard h;
            h.blocked = topic_channel(t.name);
            h.dependent = d.dependent;
            h.reason = "topic " + t.name + " is ordered and filtered while ordered channel " +
                       d.dependent.display() +
                       " depends on it; buffering can deadlock the ordering process";
            hazards.push_back(std::move(h));
        }
    }

    // Rule 2: ordered channel pairs on a dependency cycle.
    // Edges: dependent -> depends_on (topic). Walk each ordered channel.
    for (const auto& start : ordered_channels) {
        std::vector<ChannelId> path{start};
        ChannelId current = start;
        for (std::size_t hops = 0; hops < cfg.dependencies.size() + 1; ++hops) {
            const Dependency* next = nullptr;
            for (const auto& d : cfg.dependencies)
                if (d.dependent == current) {
                    next = &d;
                    break;
                }
            if (!next) break;
            ChannelId target = topic_channel(next->depends_on);
            if (target == start) {
                if (is_ordered(start)) {
                    Hazard h;
                    h.blocked = start;
                    h.dependent = current;
                    h.reason = "ordered channels " + start.display() + " and " +
                               current.display() + " form a dependency cycle";
                    // Deduplicate the symmetric report.
                    bool seen = false;
                    for (const auto& existing : hazards)
                        if (existing.blocked == current && existing.dependent == start &&
                            existing.reason.find("cycle") != std::string::npos)
                            seen = true;
                    if (!seen && !(start == current)) hazards.push_back(std::move(h));
                }
                break;
            }
            current = target;
            path.push_back(current);
        }
    }
    return hazards;
}

}  // namespace rvbus
