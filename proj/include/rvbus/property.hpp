#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rvbus/event.hpp"

namespace rvbus {

// Past-time MTL expressions in the Reelay style:
//   forall[v]. P | not P | P and P | P or P | P -> P
//   once(P) | once[l:](P) | once[l:u](P)
//   {key: literal_or_*var, ...}
// Precedence: not > and > or > ->; forall scopes maximally to the right.
// forall is only accepted as a (possibly nested) prefix; nested prefixes are
// flattened into a single quantifier block.

struct PropertyNode;
using PropertyNodePtr = std::shared_ptr<const PropertyNode>;

struct AtomConstraint {
    std::string key;
    // Exactly one of `literal` / `variable` is set.
    std::optional<FieldValue> literal;
    std::optional<std::string> variable;
};

struct PropertyNode {
    enum class Kind { Atom, Not, And, Or, Implies, Once, Forall };
    Kind kind = Kind::Atom;

    std::vector<AtomConstraint> constraints;  // Atom
    PropertyNodePtr left;                     // unary child / lhs
    PropertyNodePtr right;                    // rhs of binary nodes

    std::uint64_t once_lower = 0;                 // Once
    std::optional<std::uint64_t> once_upper;      // Once; empty = unbounded
    int once_id = -1;                             // dense index over Once nodes

    std::vector<std::string> variables;  // Forall (flattened prefix)
};

struct PropertyAst {
    PropertyNodePtr root;        // quantifier-free body
    std::vector<std::string> variables;  // empty for unquantified properties
    int once_count = 0;
    std::string source;
};

struct PropertyParseError : std::runtime_error {
    PropertyParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
    std::size_t position;
};

PropertyAst parse_property(const std::string& text);

// Debug rendering; parse(render(p)) is structurally identical.
std::string to_string(const PropertyAst& ast);

// Named property as read from a property file (`id:` / `spec:` blocks).
struct NamedProperty {
    std::string id;
    std::string spec;
};

std::vector<NamedProperty> parse_property_file(const std::string& text);

}  // namespace rvbus
