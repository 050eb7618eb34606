#include "rvbus/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace rvbus {

namespace {

int variable_index(const std::vector<std::string>& variables, const std::string& name) {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i] == name) return static_cast<int>(i);
    return -1;
}

// If `event` positively matches the atom's literal constraints and carries a
// value for every variable the atom references, extract the (partial)
// binding; returns false otherwise.
bool extract_binding(const PropertyNode& atom, const Event& event,
                     const std::vector<std::string>& variables, Binding& out,
                     std::vector<bool>& assigned) {
    for (const auto& c : atom.constraints) {
        auto it = event.fields.find(c.key);
        if (it == event.fields.end()) return false;
        if (c.literal) {
            if (!(it->second == *c.literal)) return false;
        } else {
            int idx = variable_index(variables, *c.variable);
            assert(idx >= 0);
            if (assigned[idx] && !(out[idx] == it->second)) return false;
            out[static_cast<std::size_t>(idx)] = it->second;
            assigned[static_cast<std::size_t>(idx)] = true;
        }
    }
    return true;
}

void collect_atoms(const PropertyNodePtr& node, std::vector<const PropertyNode*>& out) {
    if (!node) return;
    if (node->kind == PropertyNode::Kind::Atom) out.push_back(node.get());
    collect_atoms(node->left, out);
    collect_atoms(node->right, out);
}

// Bindings introduced by `event`: an atom creates a binding only when its
// variable references cover the full quantifier prefix.
std::vector<Binding> discover_bindings(const PropertyAst& ast, const Event& event) {
    std::vector<Binding> found;
    if (ast.variables.empty()) return found;
    std::vector<const PropertyNode*> atoms;
    collect_atoms(ast.root, atoms);
    for (const auto* atom : atoms) {
        Binding binding(ast.variables.size());
        std::vector<bool> assigned(ast.variables.size(), false);
        if (!extract_binding(*atom, event, ast.variables, binding, assigned)) continue;
        if (!std::all_of(assigned.begin(), assigned.end(), [](bool b) { return b; })) continue;
        if (std::find(found.begin(), found.end(), binding) == found.end())
            found.push_back(std::move(binding));
    }
    return found;
}

}  // namespace

bool atom_matches(const PropertyNode& atom, const Event& event, const Binding& binding,
                  const std::vector<std::string>& variables) {
    for (const auto& c : atom.constraints) {
        auto it = event.fields.find(c.key);
        if (it == event.fields.end()) return false;
        if (c.literal) {
            if (!(it->second == *c.literal)) return false;
        } else {
            int idx = variable_index(variables, *c.variable);
            if (idx < 0) return false;
            if (!(binding[static_cast<std::size_t>(idx)] == it->second)) return false;
        }
    }
    return true;
}

MonitorState::MonitorState(std::string property_id, PropertyAst ast)
    : property_id_(std::move(property_id)), ast_(std::move(ast)) {
    unquantified_.once.resize(static_cast<std::size_t>(ast_.once_count));
    build_virtual_tables();
}

bool MonitorState::OnceVirtual::any_true(std::uint64_t lo, std::uint64_t hi) const {
    if (lo > hi) return false;
    const std::uint64_t table = prefix.empty() ? 0 : prefix.size() - 1;
    if (lo < table) {
        std::uint64_t capped = std::min<std::uint64_t>(hi, table - 1);
        if (prefix[static_cast<std::size_t>(capped) + 1] - prefix[static_cast<std::size_t>(lo)] >
            0)
            return true;
    }
    return tail && hi >= table;
}

void MonitorState::build_virtual_tables() {
    once_virtual_.assign(static_cast<std::size_t>(ast_.once_count), {});
    if (ast_.once_count == 0) return;

    // Horizon after which every node's virtual value is provably constant:
    // each once node stabilizes one window past its child's stabilization.
    std::uint64_t horizon = 2;
    std::vector<const PropertyNode*> order;  // post-order
    std::function<void(const PropertyNodePtr&)> visit = [&](const PropertyNodePtr& node) {
        if (!node) return;
        visit(node->left);
        visit(node->right);
        if (node->kind == PropertyNode::Kind::Once)
            horizon += (node->once_upper ? *node->once_upper : node->once_lower) + 1;
        order.push_back(node.get());
    };
    visit(ast_.root);

    std::map<const PropertyNode*, std::vector<char>> values;
    for (const auto* node : order) values[node].resize(static_cast<std::size_t>(horizon), 0);
    for (std::uint64_t m = 0; m < horizon; ++m) {
        for (const auto* node : order) {
            char v = 0;
            switch (node->kind) {
                case PropertyNode::Kind::Atom: v = 0; break;
                case PropertyNode::Kind::Not: v = !values[node->left.get()][m]; break;
                case PropertyNode::Kind::And:
                    v = values[node->left.get()][m] && values[node->right.get()][m];
                    break;
                case PropertyNode::Kind::Or:
                    v = values[node->left.get()][m] || values[node->right.get()][m];
                    break;
                case PropertyNode::Kind::Implies:
                    v = !values[node->left.get()][m] || values[node->right.get()][m];
                    break;
                case PropertyNode::Kind::Once: {
                    if (m >= node->once_lower) {
                        const std::uint64_t hi = m - node->once_lower;
                        const std::uint64_t lo =
                            node->once_upper && m >= *node->once_upper ? m - *node->once_upper : 0;
                        const auto& child = values[node->left.get()];
                        for (std::uint64_t k = lo; k <= hi; ++k)
                            if (child[static_cast<std::size_t>(k)]) {
                                v = 1;
                                break;
                            }
                    }
                    break;
                }
                case PropertyNode::Kind::Forall: break;
            }
            values[node][static_cast<std::size_t>(m)] = v;
        }
    }
    for (const auto* node : order) {
        if (node->kind != PropertyNode::Kind::Once) continue;
        OnceVirtual& table = once_virtual_[static_cast<std::size_t>(node->once_id)];
        const auto& child = values[node->left.get()];
        table.prefix.resize(child.size() + 1, 0);
        for (std::size_t i = 0; i < child.size(); ++i)
            table.prefix[i + 1] = table.prefix[i] + (child[i] ? 1 : 0);
        table.tail = child.back() != 0;
    }
}

std::size_t MonitorState::instance_count() const {
    return ast_.variables.empty() ? 1 : instances_.size();
}

bool MonitorState::eval_step(const PropertyNode& node, const Event& event, const Binding& binding,
                             Instance& inst) const {
    using Kind = PropertyNode::Kind;
    const std::uint64_t n = step_;
    switch (node.kind) {
        case Kind::Atom:
            return atom_matches(node, event, binding, ast_.variables);
        case Kind::Not:
            return !eval_step(*node.left, event, binding, inst);
        case Kind::And: {
            // Children are always evaluated so Once memories below them advance.
            bool l = eval_step(*node.left, event, binding, inst);
            bool r = eval_step(*node.right, event, binding, inst);
            return l && r;
        }
        case Kind::Or: {
            bool l = eval_step(*node.left, event, binding, inst);
            bool r = eval_step(*node.right, event, binding, inst);
            return l || r;
        }
        case Kind::Implies: {
            bool l = eval_step(*node.left, event, binding, inst);
            bool r = eval_step(*node.right, event, binding, inst);
            return !l || r;
        }
        case Kind::Once: {
            bool child = eval_step(*node.left, event, binding, inst);
            OnceMemory& mem = inst.once[static_cast<std::size_t>(node.once_id)];
            if (child) {
                if (!mem.any) {
                    mem.any = true;
                    mem.earliest = n;
                }
                if (node.once_upper) mem.hits.push_back(n);
            }
            const std::uint64_t l = node.once_lower;
            if (n < l) return false;
            const std::uint64_t latest = n - l;
            const OnceVirtual& virt = once_virtual_[static_cast<std::size_t>(node.once_id)];
            // Steps before the instance existed: atom-false virtual history.
            bool virtual_hit = inst.created_at > 0 &&
                               [&] {
                                   const std::uint64_t hi =
                                       std::min<std::uint64_t>(latest, inst.created_at - 1);
                                   const std::uint64_t lo =
                                       node.once_upper && n >= *node.once_upper
                                           ? n - *node.once_upper
                                           : 0;
                                   return virt.any_true(lo, hi);
                               }();
            if (!node.once_upper) return virtual_hit || (mem.any && mem.earliest <= latest);
            const std::uint64_t u = *node.once_upper;
            const std::uint64_t lower = n >= u ? n - u : 0;
            while (!mem.hits.empty() && mem.hits.front() < lower) mem.hits.pop_front();
            return virtual_hit || (!mem.hits.empty() && mem.hits.front() <= latest);
        }
        case Kind::Forall:
            break;
    }
    return false;
}

Verdict MonitorState::update(const Event& event) {
    bool all_hold = true;
    if (ast_.variables.empty()) {
        all_hold = eval_step(*ast_.root, event, Binding{}, unquantified_);
    } else {
        for (Binding& b : discover_bindings(ast_, event)) {
            if (!instances_.count(b)) {
                Instance inst;
                inst.created_at = step_;
                inst.once.resize(static_cast<std::size_t>(ast_.once_count));
                instances_.emplace(std::move(b), std::move(inst));
            }
        }
        for (auto& [binding, inst] : instances_) {
            if (!eval_step(*ast_.root, event, binding, inst)) all_hold = false;
        }
    }
    ++step_;
    return all_hold ? Verdict::CurrentlyTrue : Verdict::CurrentlyFalse;
}

namespace {

// Recursive semantics over the whole prefix; `created_at` realizes the
// atoms-false-before-creation rule for sliced instances.
bool bf_eval(const PropertyNode& node, const std::vector<Event>& trace, std::uint64_t m,
             const Binding& binding, const std::vector<std::string>& variables,
             std::uint64_t created_at) {
    using Kind = PropertyNode::Kind;
    switch (node.kind) {
        case Kind::Atom:
            if (m < created_at) return false;
            return atom_matches(node, trace[m], binding, variables);
        case Kind::Not:
            return !bf_eval(*node.left, trace, m, binding, variables, created_at);
        case Kind::And:
            return bf_eval(*node.left, trace, m, binding, variables, created_at) &&
                   bf_eval(*node.right, trace, m, binding, variables, created_at);
        case Kind::Or:
            return bf_eval(*node.left, trace, m, binding, variables, created_at) ||
                   bf_eval(*node.right, trace, m, binding, variables, created_at);
        case Kind::Implies:
            return !bf_eval(*node.left, trace, m, binding, variables, created_at) ||
                   bf_eval(*node.right, trace, m, binding, variables, created_at);
        case Kind::Once: {
            if (m < node.once_lower) return false;
            const std::uint64_t latest = m - node.once_lower;
            const std::uint64_t lower =
                node.once_upper && m >= *node.once_upper ? m - *node.once_upper : 0;
            for (std::uint64_t k = lower; k <= latest; ++k)
                if (bf_eval(*node.left, trace, k, binding, variables, created_at)) return true;
            return false;
        }
        case Kind::Forall:
            break;
    }
    return false;
}

}  // namespace

std::vector<Verdict> brute_force_eval(const PropertyAst& ast, const std::vector<Event>& trace) {
    std::vector<Verdict> verdicts;
    verdicts.reserve(trace.size());
    std::map<Binding, std::uint64_t> created;  // binding -> first-match step
    for (std::uint64_t n = 0; n < trace.size(); ++n) {
        bool all_hold = true;
        if (ast.variables.empty()) {
            all_hold = bf_eval(*ast.root, trace, n, Binding{}, ast.variables, 0);
        } else {
            for (const Binding& b : discover_bindings(ast, trace[n]))
                created.emplace(b, n);
            for (const auto& [binding, created_at] : created)
                if (!bf_eval(*ast.root, trace, n, binding, ast.variables, created_at))
                    all_hold = false;
        }
        verdicts.push_back(all_hold ? Verdict::CurrentlyTrue : Verdict::CurrentlyFalse);
    }
    return verdicts;
}

void OracleSession::add_property(const std::string& id, const std::string& spec_text) {
    states_.emplace_back(id, parse_property(spec_text));
}

std::vector<std::pair<std::string, Verdict>> OracleSession::update(const Event& event) {
    std::vector<std::pair<std::string, Verdict>> out;
    out.reserve(states_.size());
    for (auto& state : states_)
        out.emplace_back(state.property_id(), state.update(event));
    return out;
}

std::size_t OracleSession::total_instances() const {
    std::size_t total = 0;
    for (const auto& s : states_) total += s.instance_count();
    return total;
}

}  // namespace rvbus
