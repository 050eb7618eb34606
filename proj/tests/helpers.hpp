#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rvbus/event.hpp"
#include "rvbus/property.hpp"

namespace rvbus::testing {

// Random events over a small key/value pool so that atom matches actually
// happen in randomized traces.
inline Event random_event(std::mt19937_64& rng) {
    static const std::vector<std::string> kTopics = {"/a", "/b", "/battery_status", "/svc"};
    static const std::vector<std::string> kKeys = {"id", "status", "x", "flag", "name"};
    Event e;
    int kind = static_cast<int>(rng() % 3);
    e.channel.kind = static_cast<ChannelKind>(kind);
    e.channel.name = kTopics[rng() % kTopics.size()];
    e.pub_time.nanos = rng() % 1'000'000;
    e.seq = rng() % 1000;
    std::size_t nfields = rng() % 4;
    for (std::size_t i = 0; i < nfields; ++i) {
        const std::string& key = kKeys[rng() % kKeys.size()];
        switch (rng() % 4) {
            case 0: e.fields[key] = static_cast<std::int64_t>(rng() % 7); break;
            case 1: e.fields[key] = std::string(rng() % 2 ? "1" : "2"); break;
            case 2: e.fields[key] = (rng() % 2) == 0; break;
            case 3: e.fields[key] = 0.5 * static_cast<double>(rng() % 5); break;
        }
    }
    return e;
}

// Random quantifier-free or singly-quantified past-MTL properties drawn from
// the same key/value pool as random_event.
inline std::string random_property_text(std::mt19937_64& rng) {
    bool quantified = rng() % 2 == 0;
    auto atom = [&](bool use_var) -> std::string {
        static const std::vector<std::string> kKeys = {"id", "status", "x", "flag"};
        std::string out = "{";
        std::size_t n = 1 + rng() % 2;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) out += ", ";
            const std::string& key = kKeys[rng() % kKeys.size()];
            out += key + ": ";
            if (use_var && i == 0 && quantified) {
                out += "*v";
            } else {
                switch (rng() % 3) {
                    case 0: out += std::to_string(rng() % 7); break;
                    case 1: out += rng() % 2 ? "\"1\"" : "\"2\""; break;
                    case 2: out += rng() % 2 ? "True" : "False"; break;
                }
            }
        }
        return out + "}";
    };
    std::function<std::string(int)> formula = [&](int depth) -> std::string {
        if (depth <= 0 || rng() % 3 == 0) return atom(rng() % 2 == 0);
        switch (rng() % 5) {
            case 0: return "not " + formula(depth - 1);
            case 1: return "(" + formula(depth - 1) + " and " + formula(depth - 1) + ")";
            case 2: return "(" + formula(depth - 1) + " or " + formula(depth - 1) + ")";
            case 3: return "(" + formula(depth - 1) + " -> " + formula(depth - 1) + ")";
            default: {
                std::uint64_t lo = rng() % 4;
                if (rng() % 2) return "once[" + std::to_string(lo) + ":](" + formula(depth - 1) + ")";
                std::uint64_t hi = lo + rng() % 5;
                return "once[" + std::to_string(lo) + ":" + std::to_string(hi) + "](" +
                       formula(depth - 1) + ")";
            }
        }
    };
    std::string body = formula(3);
    return quantified ? "forall[v]. (" + body + ")" : body;
}

}  // namespace rvbus::testing
