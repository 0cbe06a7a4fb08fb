#ifndef AUFUSE_STRUCTURE_HPP
#define AUFUSE_STRUCTURE_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aufuse/counts.hpp"
#include "aufuse/graph.hpp"

namespace aufuse {

/// Node ordering for the K2 greedy search plus the per-family parent cap.
/// Without an explicit ordering the named rule applies: the phone variable
/// first, then AU variables by descending activation frequency in the
/// training data (ties by declaration order).
struct OrderingPolicy {
    std::optional<std::vector<std::string>> explicit_order;
    int max_parents = 3;
};

struct FamilySpec {
    std::string child;
    std::vector<ParentRef> parents;
};

/// A scored candidate structure. Scores are decomposable: total_score is
/// the sum of the per-family scores.
struct StructureCandidate {
    std::vector<Edge> intra_edges;
    std::vector<Edge> inter_edges;
    std::map<std::string, double> family_scores;
    double total_score = 0.0;
};

/// Log of the K2 family score,
///   sum_j [ lgamma(K) - lgamma(N_j + K) + sum_k lgamma(N_jk + 1) ],
/// the log-gamma form of the factorial score (K-1)!/(N_j+K-1)! * prod N_jk!.
double k2_family_log_score(const SufficientStats& stats);

/// Resolves the effective K2 ordering for the given hidden variables.
std::vector<std::string> resolve_ordering(const DataTable& data,
                                          std::span<const Variable> hidden_vars,
                                          const OrderingPolicy& policy);

/// Greedy K2 parent selection under the ordering: for each variable, add
/// the single predecessor whose addition most increases the family score,
/// stopping when nothing improves or max_parents is reached. Deterministic;
/// ties go to the earlier variable in the ordering.
std::vector<Edge> k2_search(const DataTable& data, std::span<const Variable> hidden_vars,
                            const OrderingPolicy& policy);

/// BIC score of one family on the table: maximized log-likelihood (pure
/// MLE, 0 log 0 = 0) minus (q/2) log S with q = (K-1) * #configs and S the
/// record count.
double bic_family_log_score(const SufficientStats& stats);

/// Sum of family BIC scores; the uniform structure prior contributes a
/// constant and is dropped. Throws on empty data.
double bic_log_score(std::span<const FamilySpec> families, const DataTable& data);

/// Scores a transition-model candidate (fixed intra edges + candidate inter
/// edges) family by family over the hidden variables.
StructureCandidate score_transition_candidate(std::span<const Variable> hidden_vars,
                                              std::span<const Edge> fixed_intra,
                                              std::span<const Edge> inter_edges,
                                              const DataTable& pair_data);

/// Greedy BIC hill-climbing over inter-slice edges {X_{t-1} -> Y_t}, seeded
/// with a self-loop on every hidden variable. Each step applies the single
/// add or remove with the greatest score gain until no move improves.
/// max_parents caps the number of inter-slice parents per family; intra
/// parents are fixed and not counted against the cap. Deterministic with
/// ties broken by lexicographic (source, target) order.
std::vector<Edge> transition_search(const DataTable& pair_data,
                                    std::span<const Variable> hidden_vars,
                                    std::span<const Edge> fixed_intra,
                                    const OrderingPolicy& policy);

struct ExpertEdgeOptions {
    int parent_hard_cap = 8;  // total parents per family after injection
};

/// Adds inter-slice edges from hidden-AU variables (slice t-1) to the
/// hidden-phone variable (slice t), the expert-knowledge refinement of the
/// learned transition model. Transition CPT parent lists are extended with
/// rows replicated, so the result is valid but should be refitted.
/// Idempotent; never removes edges; families not incident to an injected
/// edge are untouched.
NetworkSpec inject_expert_edges(const NetworkSpec& spec, std::span<const Edge> edges,
                                const ExpertEdgeOptions& options = {});

} // namespace aufuse

#endif // AUFUSE_STRUCTURE_HPP
