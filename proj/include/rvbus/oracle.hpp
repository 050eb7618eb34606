#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "rvbus/event.hpp"
#include "rvbus/property.hpp"

namespace rvbus {

using Binding = std::vector<FieldValue>;  // positional over the quantifier prefix

// True iff every constraint of `atom` holds for `event` under `binding`:
// literals compare for exact value (and type), variables compare against the
// bound value. A missing key makes the atom false.
bool atom_matches(const PropertyNode& atom, const Event& event, const Binding& binding,
                  const std::vector<std::string>& variables);

// Incremental evaluator for one property. Each delivered event is one time
// step. Quantified properties keep one instance per observed binding tuple;
// an instance is created the first time an event positively matches some
// atom's literal constraints while supplying values for all quantified
// variables. Steps before an instance's creation count as atom-false.
class MonitorState {
  public:
    MonitorState(std::string property_id, PropertyAst ast);

    const std::string& property_id() const { return property_id_; }
    const PropertyAst& ast() const { return ast_; }

    Verdict update(const Event& event);

    std::uint64_t step_count() const { return step_; }
    std::size_t instance_count() const;

  private:
    struct OnceMemory {
        bool any = false;
        std::uint64_t earliest = 0;          // unbounded upper
        std::deque<std::uint64_t> hits;      // bounded upper, pruned window
    };
    struct Instance {
        std::uint64_t created_at = 0;
        std::vector<OnceMemory> once;
    };
    // Pre-creation steps of an instance count as atom-false; the child of a
    // once node can still be true there (e.g. a negated atom). Its virtual
    // truth per step is instance-independent, so it is tabulated once.
    struct OnceVirtual {
        std::vector<std::uint32_t> prefix;  // prefix[i] = #true among virtual steps < i
        bool tail = false;                  // value for steps beyond the table
        bool any_true(std::uint64_t lo, std::uint64_t hi) const;
    };

    void build_virtual_tables();
    bool eval_step(const PropertyNode& node, const Event& event, const Binding& binding,
                   Instance& inst) const;

    std::string property_id_;
    PropertyAst ast_;
    std::uint64_t step_ = 0;
    std::map<Binding, Instance> instances_;
    Instance unquantified_;  // used when the property has no quantifier
    std::vector<OnceVirtual> once_virtual_;
};

// Reference evaluator: re-derives every verdict by scanning the whole trace
// prefix with the recursive semantics. Deliberately naive; the equivalence
// `update == brute_force_eval` is the main oracle test.
std::vector<Verdict> brute_force_eval(const PropertyAst& ast, const std::vector<Event>& trace);

// All properties of one oracle session, updated in lockstep per event.
class OracleSession {
  public:
    void add_property(const std::string& id, const std::string& spec_text);

    // One (property, verdict) pair per configured property, in declaration order.
    std::vector<std::pair<std::string, Verdict>> update(const Event& event);

    std::size_t total_instances() const;
    std::size_t property_count() const { return states_.size(); }
    const std::vector<MonitorState>& states() const { return states_; }

  private:
    std::vector<MonitorState> states_;
};

}  // namespace rvbus
