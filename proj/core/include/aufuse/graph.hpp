#ifndef AUFUSE_GRAPH_HPP
#define AUFUSE_GRAPH_HPP

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aufuse {

/// Node kinds of the audiovisual model. AU nodes are binary
/// (absence/presence); the phone nodes share one cardinality P >= 2.
/// Measurement nodes are the observed, noisy counterparts of hidden nodes.
enum class VarRole {
    HiddenAu,
    HiddenPhone,
    MeasurementAu,
    MeasurementPhone,
};

std::string_view role_name(VarRole role);
VarRole role_from_name(std::string_view name);
bool is_hidden(VarRole role);
bool is_measurement(VarRole role);

struct Variable {
    std::string name;
    int cardinality = 2;
    VarRole role = VarRole::HiddenAu;
};

/// Reference to a CPT parent. lag 0 = same time slice, lag 1 = previous
/// slice (only meaningful inside transition CPTs). Serialized as "name" or
/// "prev:name".
struct ParentRef {
    std::string name;
    int lag = 0;

    auto operator<=>(const ParentRef&) const = default;
    std::string to_string() const;
    static ParentRef parse(std::string_view text);
};

/// Conditional probability table P(child | parents). The table is flat and
/// row-major: rows enumerate parent configurations over the declared parent
/// order with the first parent varying slowest; within a row, entries run
/// over child states. Cardinalities are resolved against the owning spec.
struct Cpt {
    std::string child;
    std::vector<ParentRef> parents;
    std::vector<double> table;
};

/// Row-major indexing shared by CPT tables and count tensors.
struct FamilyShape {
    int child_card = 0;
    std::vector<int> parent_cards;

    std::size_t config_count() const;
    std::size_t table_size() const;
    std::size_t config_index(std::span<const int> parent_values) const;
    void decode_config(std::size_t config, std::span<int> out) const;
};

using Edge = std::pair<std::string, std::string>;
using Assignment = std::map<std::string, int>;

struct Violation {
    std::string location;
    std::string message;
};

std::string to_string(const Violation& violation);

/// A discrete Bayesian network over one time slice plus, when
/// transition_cpts is non-empty, the two-slice template of a DBN.
/// inter_edges always point from slice t-1 (source) to slice t (target).
/// Instances are treated as immutable after construction and are safe to
/// share read-only across threads.
struct NetworkSpec {
    std::vector<Variable> variables;
    std::vector<Edge> intra_edges;
    std::vector<Edge> inter_edges;
    std::vector<Cpt> cpts;             // initial slice, one per variable
    std::vector<Cpt> transition_cpts;  // empty for a static BN

    bool is_dynamic() const { return !transition_cpts.empty(); }

    int var_index(std::string_view name) const;  // -1 when unknown
    const Variable* find_variable(std::string_view name) const;
    const Variable& require_variable(std::string_view name) const;
    int cardinality(std::string_view name) const;

    const Cpt* initial_cpt(std::string_view child) const;
    const Cpt* transition_cpt(std::string_view child) const;

    std::vector<std::string> hidden_names() const;
    std::vector<ParentRef> intra_parents(std::string_view child) const;
    std::vector<ParentRef> inter_parents(std::string_view child) const;

    /// The measurement node whose single parent is the given hidden node.
    std::optional<std::string> measurement_of(std::string_view hidden) const;
    /// The hidden parent of a measurement node.
    std::optional<std::string> hidden_parent_of(std::string_view meas) const;

    FamilyShape family_shape(const Cpt& cpt) const;
};

/// Checks every structural and numeric invariant and returns one entry per
/// breach; an empty result means the spec is valid. Never throws for
/// invalid content.
std::vector<Violation> validate(const NetworkSpec& spec);

/// Variables ordered so every intra-slice parent precedes its children.
/// Ties are broken by declaration order. Throws std::invalid_argument when
/// the intra edges contain a cycle.
std::vector<std::string> topological_order(const NetworkSpec& spec);

/// Sum of log CPT entries for a full initial-slice assignment. Returns
/// -infinity when the assignment hits a zero entry. Throws when a variable
/// is missing from the assignment or has no CPT.
double joint_log_prob(const NetworkSpec& spec, const Assignment& assignment);

} // namespace aufuse

#endif // AUFUSE_GRAPH_HPP
