#pragma once

#include <cstdint>
#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace rvbus {

// Simulated logical time, nanoseconds since scenario start.
struct Timestamp {
    std::uint64_t nanos = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
    Timestamp operator+(std::uint64_t ns) const { return Timestamp{nanos + ns}; }
};

constexpr std::uint64_t kNanosPerMicro = 1'000ull;
constexpr std::uint64_t kNanosPerMilli = 1'000'000ull;
constexpr std::uint64_t kNanosPerSec = 1'000'000'000ull;

constexpr std::uint64_t micros(std::uint64_t us) { return us * kNanosPerMicro; }
constexpr std::uint64_t millis(std::uint64_t ms) { return ms * kNanosPerMilli; }
constexpr std::uint64_t seconds(std::uint64_t s) { return s * kNanosPerSec; }

enum class ChannelKind { Topic, ServiceRequest, ServiceResponse };

const char* to_string(ChannelKind kind);
std::optional<ChannelKind> channel_kind_from_string(const std::string& s);

struct ChannelId {
    ChannelKind kind = ChannelKind::Topic;
    std::string name;

    friend bool operator==(const ChannelId&, const ChannelId&) = default;
    // Lexicographic on name, then kind rank; this is the channel tie-break
    // used everywhere an ordering over channels is needed.
    friend bool operator<(const ChannelId& a, const ChannelId& b) {
        if (a.name != b.name) return a.name < b.name;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    }
    std::string display() const { return std::string(to_string(kind)) + ":" + name; }
};

inline ChannelId topic_channel(std::string name) {
    return ChannelId{ChannelKind::Topic, std::move(name)};
}
inline ChannelId request_channel(std::string service) {
    return ChannelId{ChannelKind::ServiceRequest, std::move(service)};
}
inline ChannelId response_channel(std::string service) {
    return ChannelId{ChannelKind::ServiceResponse, std::move(service)};
}

// Flat scalar payloads only; the interchange format has no nesting.
using FieldValue = std::variant<std::string, std::int64_t, double, bool>;
using FieldMap = std::map<std::string, FieldValue>;

struct Event {
    ChannelId channel;
    Timestamp pub_time;
    std::uint64_t seq = 0;
    FieldMap fields;

    friend bool operator==(const Event&, const Event&) = default;
};

enum class Verdict { True, CurrentlyTrue, CurrentlyFalse, False };

// The negative subset {?⊥, ⊥}; this predicate alone drives filtering.
inline bool is_negative(Verdict v) {
    return v == Verdict::CurrentlyFalse || v == Verdict::False;
}

const char* to_string(Verdict v);
std::optional<Verdict> verdict_from_string(const std::string& s);

struct SerializeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
    std::size_t byte_offset;
};

// One-line JSON object: reserved keys channel/kind/time/seq plus the event's
// fields flattened at top level, keys in lexicographic order.
std::string serialize_event(const Event& e);
Event deserialize_event(const std::string& line);

// Verdict log line: {"property_id":...,"time":...,"verdict":...}.
std::string serialize_verdict(const std::string& property_id, Timestamp time, Verdict v);

}  // namespace rvbus
