#include "rvbus/event.hpp"

#include <array>

#include <json.hpp>

namespace rvbus {

using nlohmann::json;

namespace {

const std::array<std::string, 4> kReservedKeys = {"channel", "kind", "seq", "time"};

bool is_reserved(const std::string& key) {
    for (const auto& r : kReservedKeys)
        if (key == r) return true;
    return false;
}

json field_to_json(const FieldValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

}  // namespace

const char* to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::Topic: return "topic";
        case ChannelKind::ServiceRequest: return "service_request";
        case ChannelKind::ServiceResponse: return "service_response";
    }
    return "?";
}

std::optional<ChannelKind> channel_kind_from_string(const std::string& s) {
    if (s == "topic") return ChannelKind::Topic;
    if (s == "service_request") return ChannelKind::ServiceRequest;
    if (s == "service_response") return ChannelKind::ServiceResponse;
    return std::nullopt;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::True: return "true";
        case Verdict::CurrentlyTrue: return "currently_true";
        case Verdict::CurrentlyFalse: return "currently_false";
        case Verdict::False: return "false";
    }
    return "?";
}

std::optional<Verdict> verdict_from_string(const std::string& s) {
    if (s == "true") return Verdict::True;
    if (s == "currently_true") return Verdict::CurrentlyTrue;
    if (s == "currently_false") return Verdict::CurrentlyFalse;
    if (s == "false") return Verdict::False;
    return std::nullopt;
}

std::string serialize_event(const Event& e) {
    // nlohmann's default object type is std::map, so dump() already emits
    // keys in lexicographic order.
    json j;
    j["channel"] = e.channel.name;
    j["kind"] = to_string(e.channel.kind);
    j["time"] = e.pub_time.nanos;
    j["seq"] = e.seq;
    for (const auto& [key, value] : e.fields) {
        if (is_reserved(key))
            throw SerializeError("field key collides with reserved key `" + key + "`");
        j[key] = field_to_json(value);
    }
    return j.dump();
}

Event deserialize_event(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& ex) {
        throw ParseError(std::string("malformed event line: ") + ex.what(), ex.byte);
    }
    if (!j.is_object()) throw ParseError("event line is not a JSON object", 0);
    for (const auto& key : kReservedKeys)
        if (!j.contains(key)) throw ParseError("missing `" + key + "`", line.size());

    Event e;
    if (!j["channel"].is_string()) throw ParseError("`channel` must be a string", 0);
    e.channel.name = j["channel"].get<std::string>();
    auto kind = channel_kind_from_string(j["kind"].is_string() ? j["kind"].get<std::string>() : "");
    if (!kind) throw ParseError("unknown `kind`", 0);
    e.channel.kind = *kind;
    if (!j["time"].is_number_unsigned() && !j["time"].is_number_integer())
        throw ParseError("`time` must be an integer", 0);
    e.pub_time.nanos = j["time"].get<std::uint64_t>();
    e.seq = j["seq"].get<std::uint64_t>();

    for (auto it = j.begin(); it != j.end(); ++it) {
        if (is_reserved(it.key())) continue;
        const json& v = it.value();
        if (v.is_string())
            e.fields[it.key()] = v.get<std::string>();
        else if (v.is_boolean())
            e.fields[it.key()] = v.get<bool>();
        else if (v.is_number_integer() || v.is_number_unsigned())
            e.fields[it.key()] = v.get<std::int64_t>();
        else if (v.is_number_float())
            e.fields[it.key()] = v.get<double>();
        else
            throw ParseError("non-scalar value for key `" + it.key() + "`", 0);
    }
    return e;
}

std::string serialize_verdict(const std::string& property_id, Timestamp time, Verdict v) {
    json j;
    j["property_id"] = property_id;
    j["time"] = time.nanos;
    j["verdict"] = to_string(v);
    return j.dump();
}

}  // namespace rvbus
