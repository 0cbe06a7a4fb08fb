#include "aufuse/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace aufuse {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr std::string_view kPrevPrefix = "prev:";

std::string fmt(std::string_view a, std::string_view b) {
    std::string out(a);
    out += b;
    return out;
}

} // namespace

std::string_view role_name(VarRole role) {
    switch (role) {
        case VarRole::HiddenAu: return "hidden-AU";
        case VarRole::HiddenPhone: return "hidden-phone";
        case VarRole::MeasurementAu: return "measurement-AU";
        case VarRole::MeasurementPhone: return "measurement-phone";
    }
    throw std::logic_error("unreachable role");
}

VarRole role_from_name(std::string_view name) {
    if (name == "hidden-AU") return VarRole::HiddenAu;
    if (name == "hidden-phone") return VarRole::HiddenPhone;
    if (name == "measurement-AU") return VarRole::MeasurementAu;
    if (name == "measurement-phone") return VarRole::MeasurementPhone;
    throw std::invalid_argument(fmt("unknown variable role: ", name));
}

bool is_hidden(VarRole role) {
    return role == VarRole::HiddenAu || role == VarRole::HiddenPhone;
}

bool is_measurement(VarRole role) {
    return !is_hidden(role);
}

std::string ParentRef::to_string() const {
    return lag == 0 ? name : std::string(kPrevPrefix) + name;
}

ParentRef ParentRef::parse(std::string_view text) {
    if (text.starts_with(kPrevPrefix)) {
        return ParentRef{std::string(text.substr(kPrevPrefix.size())), 1};
    }
    return ParentRef{std::string(text), 0};
}

std::size_t FamilyShape::config_count() const {
    std::size_t count = 1;
    for (int card : parent_cards) count *= static_cast<std::size_t>(card);
    return count;
}

std::size_t FamilyShape::table_size() const {
    return config_count() * static_cast<std::size_t>(child_card);
}

std::size_t FamilyShape::config_index(std::span<const int> parent_values) const {
    if (parent_values.size() != parent_cards.size()) {
        throw std::invalid_argument("parent value count does not match family shape");
    }
    std::size_t index = 0;
    for (std::size_t i = 0; i < parent_cards.size(); ++i) {
        const int v = parent_values[i];
        if (v < 0 || v >= parent_cards[i]) {
            throw std::out_of_range("parent state out of range in config_index");
        }
        index = index * static_cast<std::size_t>(parent_cards[i]) + static_cast<std::size_t>(v);
    }
    return index;
}

void FamilyShape::decode_config(std::size_t config, std::span<int> out) const {
    if (out.size() != parent_cards.size()) {
        throw std::invalid_argument("output size does not match family shape");
    }
    for (std::size_t i = parent_cards.size(); i-- > 0;) {
        const auto card = static_cast<std::size_t>(parent_cards[i]);
        out[i] = static_cast<int>(config % card);
        config /= card;
    }
}

std::string to_string(const Violation& violation) {
    return violation.location + ": " + violation.message;
}

int NetworkSpec::var_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

const Variable* NetworkSpec::find_variable(std::string_view name) const {
    const int i = var_index(name);
    return i < 0 ? nullptr : &variables[static_cast<std::size_t>(i)];
}

const Variable& NetworkSpec::require_variable(std::string_view name) const {
    const Variable* v = find_variable(name);
    if (!v) throw std::invalid_argument(fmt("unknown variable: ", name));
    return *v;
}

int NetworkSpec::cardinality(std::string_view name) const {
    return require_variable(name).cardinality;
}

const Cpt* NetworkSpec::initial_cpt(std::string_view child) const {
    for (const auto& cpt : cpts) {
        if (cpt.child == child) return &cpt;
    }
    return nullptr;
}

const Cpt* NetworkSpec::transition_cpt(std::string_view child) const {
    for (const auto& cpt : transition_cpts) {
        if (cpt.child == child) return &cpt;
    }
    return nullptr;
}

std::vector<std::string> NetworkSpec::hidden_names() const {
    std::vector<std::string> out;
    for (const auto& v : variables) {
        if (is_hidden(v.role)) out.push_back(v.name);
    }
    return out;
}

std::vector<ParentRef> NetworkSpec::intra_parents(std::string_view child) const {
    std::vector<ParentRef> out;
    for (const auto& v : variables) {
        for (const auto& [src, dst] : intra_edges) {
            if (dst == child && src == v.name) out.push_back(ParentRef{v.name, 0});
        }
    }
    return out;
}

std::vector<ParentRef> NetworkSpec::inter_parents(std::string_view child) const {
    std::vector<ParentRef> out;
    for (const auto& v : variables) {
        for (const auto& [src, dst] : inter_edges) {
            if (dst == child && src == v.name) out.push_back(ParentRef{v.name, 1});
        }
    }
    return out;
}

std::optional<std::string> NetworkSpec::measurement_of(std::string_view hidden) const {
    for (const auto& [src, dst] : intra_edges) {
        if (src != hidden) continue;
        const Variable* child = find_variable(dst);
        if (child && is_measurement(child->role)) return dst;
    }
    return std::nullopt;
}

std::optional<std::string> NetworkSpec::hidden_parent_of(std::string_view meas) const {
    const Variable* v = find_variable(meas);
    if (!v || !is_measurement(v->role)) return std::nullopt;
    for (const auto& [src, dst] : intra_edges) {
        if (dst == meas) return src;
    }
    return std::nullopt;
}

FamilyShape NetworkSpec::family_shape(const Cpt& cpt) const {
    FamilyShape shape;
    shape.child_card = cardinality(cpt.child);
    shape.parent_cards.reserve(cpt.parents.size());
    for (const auto& parent : cpt.parents) {
        shape.parent_cards.push_back(cardinality(parent.name));
    }
    return shape;
}

namespace {

// Cycle probe over intra edges; returns a variable on some cycle, or empty.
std::string find_intra_cycle(const NetworkSpec& spec) {
    const std::size_t n = spec.variables.size();
    std::vector<std::vector<std::size_t>> children(n);
    std::vector<int> indegree(n, 0);
    for (const auto& [src, dst] : spec.intra_edges) {
        const int a = spec.var_index(src);
        const int b = spec.var_index(dst);
        if (a < 0 || b < 0) continue;  // reported separately
        children[static_cast<std::size_t>(a)].push_back(static_cast<std::size_t>(b));
        ++indegree[static_cast<std::size_t>(b)];
    }
    std::vector<bool> emitted(n, false);
    for (std::size_t done = 0; done < n; ++done) {
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!emitted[i] && indegree[i] == 0) {
                emitted[i] = true;
                for (auto c : children[i]) --indegree[c];
                found = true;
                break;
            }
        }
        if (!found) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!emitted[i]) return spec.variables[i].name;
            }
        }
    }
    return {};
}

void check_cpt_list(const NetworkSpec& spec, const std::vector<Cpt>& list, bool transition,
                    std::vector<Violation>& out) {
    const std::string kind = transition ? "transition_cpts" : "cpts";
    std::set<std::string> seen;
    for (const auto& cpt : list) {
        const std::string where = kind + "[" + cpt.child + "]";
        if (!seen.insert(cpt.child).second) {
            out.push_back({where, "duplicate CPT for this child"});
            continue;
        }
        const Variable* child = spec.find_variable(cpt.child);
        if (!child) {
            out.push_back({where, "CPT child is not a declared variable"});
            continue;
        }
        bool parents_ok = true;
        for (const auto& parent : cpt.parents) {
            if (!spec.find_variable(parent.name)) {
                out.push_back({where, "unknown parent '" + parent.name + "'"});
                parents_ok = false;
            }
            if (parent.lag != 0 && parent.lag != 1) {
                out.push_back({where, "parent lag must be 0 or 1"});
                parents_ok = false;
            }
            if (!transition && parent.lag != 0) {
                out.push_back({where, "initial-slice CPT has a previous-slice parent"});
                parents_ok = false;
            }
        }
        if (!parents_ok) continue;

        // Parent lists must match the edge sets exactly.
        auto expect = spec.intra_parents(cpt.child);
        if (transition) {
            auto inter = spec.inter_parents(cpt.child);
            expect.insert(expect.end(), inter.begin(), inter.end());
        }
        auto declared = cpt.parents;
        std::sort(expect.begin(), expect.end());
        std::sort(declared.begin(), declared.end());
        if (expect != declared) {
            out.push_back({where, "parent list does not match the edge set"});
            continue;
        }

        const FamilyShape shape = spec.family_shape(cpt);
        if (cpt.table.size() != shape.table_size()) {
            std::ostringstream msg;
            msg << "table has " << cpt.table.size() << " entries, expected " << shape.table_size();
            out.push_back({where, msg.str()});
            continue;
        }
        const auto k = static_cast<std::size_t>(shape.child_card);
        for (std::size_t j = 0; j < shape.config_count(); ++j) {
            double row_sum = 0.0;
            bool in_range = true;
            for (std::size_t s = 0; s < k; ++s) {
                const double p = cpt.table[j * k + s];
                if (!(p >= 0.0 && p <= 1.0)) in_range = false;
                row_sum += p;
            }
            if (!in_range) {
                std::ostringstream msg;
                msg << "row " << j << " has an entry outside [0,1]";
                out.push_back({where, msg.str()});
            } else if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
                std::ostringstream msg;
                msg << "row " << j << " sums to " << row_sum;
                out.push_back({where, msg.str()});
            }
        }
    }
    // Every variable needs a CPT in a present list.
    for (const auto& v : spec.variables) {
        if (!seen.contains(v.name)) {
            out.push_back({kind, "missing CPT for variable '" + v.name + "'"});
        }
    }
}

} // namespace

std::vector<Violation> validate(const NetworkSpec& spec) {
    std::vector<Violation> out;

    std::set<std::string> names;
    for (const auto& v : spec.variables) {
        const std::string where = "variable " + v.name;
        if (!names.insert(v.name).second) out.push_back({where, "duplicate variable name"});
        if (v.cardinality < 2) out.push_back({where, "cardinality must be >= 2"});
        if ((v.role == VarRole::HiddenAu || v.role == VarRole::MeasurementAu) && v.cardinality != 2) {
            out.push_back({where, "AU variables must be binary"});
        }
    }

    // All phone-role variables share one cardinality.
    int phone_card = -1;
    for (const auto& v : spec.variables) {
        if (v.role != VarRole::HiddenPhone && v.role != VarRole::MeasurementPhone) continue;
        if (phone_card < 0) {
            phone_card = v.cardinality;
        } else if (v.cardinality != phone_card) {
            out.push_back({"variable " + v.name, "phone variables must share one cardinality"});
        }
    }

    auto check_edges = [&](const std::vector<Edge>& edges, std::string_view kind) {
        std::set<Edge> seen;
        for (const auto& edge : edges) {
            const std::string where = std::string(kind) + " " + edge.first + "->" + edge.second;
            if (!seen.insert(edge).second) out.push_back({where, "duplicate edge"});
            const Variable* src = spec.find_variable(edge.first);
            const Variable* dst = spec.find_variable(edge.second);
            if (!src) out.push_back({where, "unknown source variable"});
            if (!dst) out.push_back({where, "unknown target variable"});
            if (kind == "intra_edge" && edge.first == edge.second) {
                out.push_back({where, "self edge within a slice"});
            }
            if (kind == "inter_edge") {
                if (src && is_measurement(src->role)) {
                    out.push_back({where, "measurement variable in an inter-slice edge"});
                }
                if (dst && is_measurement(dst->role)) {
                    out.push_back({where, "measurement variable in an inter-slice edge"});
                }
            }
        }
    };
    check_edges(spec.intra_edges, "intra_edge");
    check_edges(spec.inter_edges, "inter_edge");

    if (const std::string on_cycle = find_intra_cycle(spec); !on_cycle.empty()) {
        out.push_back({"intra_edges", "cycle through variable '" + on_cycle + "'"});
    }

    for (const auto& v : spec.variables) {
        if (!is_measurement(v.role)) continue;
        const std::string where = "variable " + v.name;
        int parent_count = 0;
        bool parent_ok = false;
        for (const auto& [src, dst] : spec.intra_edges) {
            if (dst == v.name) {
                ++parent_count;
                const Variable* parent = spec.find_variable(src);
                if (parent && is_hidden(parent->role)) {
                    const bool au_pair = v.role == VarRole::MeasurementAu && parent->role == VarRole::HiddenAu;
                    const bool phone_pair =
                        v.role == VarRole::MeasurementPhone && parent->role == VarRole::HiddenPhone;
                    parent_ok = au_pair || phone_pair;
                }
            }
            if (src == v.name) {
                out.push_back({where, "measurement variable has a child"});
            }
        }
        if (parent_count != 1) {
            out.push_back({where, "measurement variable must have exactly one parent"});
        } else if (!parent_ok) {
            out.push_back({where, "measurement parent must be its matching hidden variable"});
        }
    }

    check_cpt_list(spec, spec.cpts, false, out);
    if (spec.is_dynamic()) {
        check_cpt_list(spec, spec.transition_cpts, true, out);
    } else if (!spec.inter_edges.empty()) {
        out.push_back({"transition_cpts", "inter-slice edges declared but no transition CPTs"});
    }

    return out;
}

std::vector<std::string> topological_order(const NetworkSpec& spec) {
    const std::size_t n = spec.variables.size();
    std::vector<std::vector<std::size_t>> children(n);
    std::vector<int> indegree(n, 0);
    for (const auto& [src, dst] : spec.intra_edges) {
        const int a = spec.var_index(src);
        const int b = spec.var_index(dst);
        if (a < 0 || b < 0) throw std::invalid_argument("edge references unknown variable");
        children[static_cast<std::size_t>(a)].push_back(static_cast<std::size_t>(b));
        ++indegree[static_cast<std::size_t>(b)];
    }
    std::vector<std::string> order;
    order.reserve(n);
    std::vector<bool> emitted(n, false);
    for (std::size_t done = 0; done < n; ++done) {
        int pick = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (!emitted[i] && indegree[i] == 0) {
                pick = static_cast<int>(i);
                break;
            }
        }
        if (pick < 0) throw std::invalid_argument("cycle detected in intra-slice edges");
        emitted[static_cast<std::size_t>(pick)] = true;
        order.push_back(spec.variables[static_cast<std::size_t>(pick)].name);
        for (auto c : children[static_cast<std::size_t>(pick)]) --indegree[c];
    }
    return order;
}

double joint_log_prob(const NetworkSpec& spec, const Assignment& assignment) {
    double total = 0.0;
    for (const auto& v : spec.variables) {
        const auto it = assignment.find(v.name);
        if (it == assignment.end()) {
            throw std::invalid_argument("assignment missing variable '" + v.name + "'");
        }
        if (it->second < 0 || it->second >= v.cardinality) {
            throw std::out_of_range("assignment state out of range for '" + v.name + "'");
        }
        const Cpt* cpt = spec.initial_cpt(v.name);
        if (!cpt) throw std::invalid_argument("missing CPT for variable '" + v.name + "'");
        const FamilyShape shape = spec.family_shape(*cpt);
        std::vector<int> parent_values(cpt->parents.size());
        for (std::size_t i = 0; i < cpt->parents.size(); ++i) {
            const auto pit = assignment.find(cpt->parents[i].name);
            if (pit == assignment.end()) {
                throw std::invalid_argument("assignment missing variable '" + cpt->parents[i].name + "'");
            }
            parent_values[i] = pit->second;
        }
        const std::size_t row = shape.config_index(parent_values);
        const double p = cpt->table[row * static_cast<std::size_t>(shape.child_card) +
                                    static_cast<std::size_t>(it->second)];
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        total += std::log(p);
    }
    return total;
}

} // namespace aufuse
