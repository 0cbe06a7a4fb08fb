#include "aufuse/structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace aufuse {

namespace {

int span_index(std::span<const Variable> vars, std::string_view name) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

// Canonical family parent order used everywhere a family is materialized
// from edge lists: lag-0 parents first, each group in variable order.
std::vector<ParentRef> family_parents(std::span<const Variable> vars,
                                      std::span<const Edge> intra_edges,
                                      std::span<const Edge> inter_edges, std::string_view child) {
    std::vector<ParentRef> parents;
    for (const auto& v : vars) {
        for (const auto& [src, dst] : intra_edges) {
            if (dst == child && src == v.name) parents.push_back(ParentRef{v.name, 0});
        }
    }
    for (const auto& v : vars) {
        for (const auto& [src, dst] : inter_edges) {
            if (dst == child && src == v.name) parents.push_back(ParentRef{v.name, 1});
        }
    }
    return parents;
}

void sort_edges_by_variable_order(std::vector<Edge>& edges, std::span<const Variable> vars) {
    std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
        const auto key = [&](const Edge& e) {
            return std::pair<int, int>(span_index(vars, e.first), span_index(vars, e.second));
        };
        return key(a) < key(b);
    });
}

} // namespace

double k2_family_log_score(const SufficientStats& stats) {
    const FamilyShape shape = stats.shape();
    const auto k = static_cast<std::size_t>(shape.child_card);
    const double lg_k = std::lgamma(static_cast<double>(shape.child_card));
    double score = 0.0;
    for (std::size_t j = 0; j < shape.config_count(); ++j) {
        score += lg_k - std::lgamma(static_cast<double>(stats.row_totals[j] + shape.child_card));
        for (std::size_t s = 0; s < k; ++s) {
            score += std::lgamma(static_cast<double>(stats.counts[j * k + s] + 1));
        }
    }
    return score;
}

std::vector<std::string> resolve_ordering(const DataTable& data,
                                          std::span<const Variable> hidden_vars,
                                          const OrderingPolicy& policy) {
    if (policy.explicit_order) {
        std::set<std::string> given(policy.explicit_order->begin(), policy.explicit_order->end());
        std::set<std::string> expected;
        for (const auto& v : hidden_vars) expected.insert(v.name);
        if (given != expected || policy.explicit_order->size() != hidden_vars.size()) {
            throw std::invalid_argument("explicit ordering is not a permutation of the hidden variables");
        }
        return *policy.explicit_order;
    }
    // Named rule: phone first, then AUs by descending activation frequency.
    std::vector<std::string> order;
    for (const auto& v : hidden_vars) {
        if (v.role == VarRole::HiddenPhone) order.push_back(v.name);
    }
    std::vector<std::pair<double, int>> aus;  // (-frequency, declaration index)
    for (std::size_t i = 0; i < hidden_vars.size(); ++i) {
        const auto& v = hidden_vars[i];
        if (v.role != VarRole::HiddenAu) continue;
        const int col = data.column_index(v.name);
        if (col < 0) throw std::invalid_argument("unknown variable: " + v.name);
        long long active = 0;
        long long present = 0;
        for (std::size_t row = 0; row < data.row_count(); ++row) {
            const int value = data.at(row, static_cast<std::size_t>(col));
            if (value == DataTable::kMissing) continue;
            ++present;
            if (value == 1) ++active;
        }
        const double freq = present > 0 ? static_cast<double>(active) / static_cast<double>(present) : 0.0;
        aus.emplace_back(-freq, static_cast<int>(i));
    }
    std::sort(aus.begin(), aus.end());
    for (const auto& [neg_freq, idx] : aus) {
        order.push_back(hidden_vars[static_cast<std::size_t>(idx)].name);
    }
    return order;
}

std::vector<Edge> k2_search(const DataTable& data, std::span<const Variable> hidden_vars,
                            const OrderingPolicy& policy) {
    if (policy.max_parents < 0) throw std::invalid_argument("max_parents must be >= 0");
    const auto order = resolve_ordering(data, hidden_vars, policy);

    std::vector<Edge> edges;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::string& child = order[pos];
        std::vector<ParentRef> parents;
        double current = k2_family_log_score(count_stats(data, child, parents));
        while (static_cast<int>(parents.size()) < policy.max_parents) {
            int best = -1;
            double best_score = current;
            for (std::size_t c = 0; c < pos; ++c) {
                const ParentRef candidate{order[c], 0};
                if (std::find(parents.begin(), parents.end(), candidate) != parents.end()) continue;
                std::vector<ParentRef> trial = parents;
                trial.push_back(candidate);
                const double score = k2_family_log_score(count_stats(data, child, trial));
                if (score > best_score) {
                    best_score = score;
                    best = static_cast<int>(c);
                }
            }
            if (best < 0) break;
            parents.push_back(ParentRef{order[static_cast<std::size_t>(best)], 0});
            current = best_score;
        }
        for (const auto& parent : parents) edges.emplace_back(parent.name, child);
    }
    sort_edges_by_variable_order(edges, hidden_vars);
    return edges;
}

double bic_family_log_score(const SufficientStats& stats) {
    if (stats.sample_count <= 0) throw std::invalid_argument("BIC score over empty data");
    const FamilyShape shape = stats.shape();
    const auto k = static_cast<std::size_t>(shape.child_card);
    double log_lik = 0.0;
    for (std::size_t j = 0; j < shape.config_count(); ++j) {
        const auto total = static_cast<double>(stats.row_totals[j]);
        if (total <= 0.0) continue;
        for (std::size_t s = 0; s < k; ++s) {
            const auto n = static_cast<double>(stats.counts[j * k + s]);
            if (n > 0.0) log_lik += n * std::log(n / total);
        }
    }
    const double q = static_cast<double>(shape.child_card - 1) *
                     static_cast<double>(shape.config_count());
    return log_lik - 0.5 * q * std::log(static_cast<double>(stats.sample_count));
}

double bic_log_score(std::span<const FamilySpec> families, const DataTable& data) {
    if (data.row_count() == 0) throw std::invalid_argument("BIC score over empty data");
    double total = 0.0;
    for (const auto& family : families) {
        total += bic_family_log_score(count_stats(data, family.child, family.parents));
    }
    return total;
}

StructureCandidate score_transition_candidate(std::span<const Variable> hidden_vars,
                                              std::span<const Edge> fixed_intra,
                                              std::span<const Edge> inter_edges,
                                              const DataTable& pair_data) {
    StructureCandidate candidate;
    candidate.intra_edges.assign(fixed_intra.begin(), fixed_intra.end());
    candidate.inter_edges.assign(inter_edges.begin(), inter_edges.end());
    for (const auto& v : hidden_vars) {
        const auto parents = family_parents(hidden_vars, fixed_intra, inter_edges, v.name);
        const double score = bic_family_log_score(count_stats(pair_data, v.name, parents));
        candidate.family_scores[v.name] = score;
        candidate.total_score += score;
    }
    return candidate;
}

std::vector<Edge> transition_search(const DataTable& pair_data,
                                    std::span<const Variable> hidden_vars,
                                    std::span<const Edge> fixed_intra,
                                    const OrderingPolicy& policy) {
    if (pair_data.row_count() == 0) throw std::invalid_argument("BIC score over empty data");
    if (policy.max_parents < 0) throw std::invalid_argument("max_parents must be >= 0");

    // Candidate moves in lexicographic (source, target) order for tie-breaks.
    std::vector<Edge> move_order;
    for (const auto& src : hidden_vars) {
        for (const auto& dst : hidden_vars) {
            move_order.emplace_back(src.name, dst.name);
        }
    }
    std::sort(move_order.begin(), move_order.end());

    std::set<Edge> inter;
    for (const auto& v : hidden_vars) inter.insert(Edge{v.name, v.name});

    std::map<std::string, double> memo;
    const auto family_score = [&](std::string_view child, const std::set<Edge>& edges) {
        std::vector<Edge> inter_list(edges.begin(), edges.end());
        const auto parents = family_parents(hidden_vars, fixed_intra, inter_list, child);
        std::string key(child);
        for (const auto& parent : parents) {
            key += '|';
            key += parent.to_string();
        }
        if (const auto it = memo.find(key); it != memo.end()) return it->second;
        const double score = bic_family_log_score(count_stats(pair_data, std::string(child), parents));
        memo.emplace(std::move(key), score);
        return score;
    };

    std::map<std::string, double> current;
    for (const auto& v : hidden_vars) current[v.name] = family_score(v.name, inter);

    const auto inter_parent_count = [&](std::string_view child) {
        int count = 0;
        for (const auto& [src, dst] : inter) {
            if (dst == child) ++count;
        }
        return count;
    };

    for (;;) {
        double best_gain = 0.0;
        int best_move = -1;
        bool best_is_add = false;
        for (std::size_t m = 0; m < move_order.size(); ++m) {
            const Edge& edge = move_order[m];
            const bool present = inter.contains(edge);
            std::set<Edge> trial = inter;
            if (present) {
                trial.erase(edge);
            } else {
                if (inter_parent_count(edge.second) >= policy.max_parents) continue;
                trial.insert(edge);
            }
            const double gain = family_score(edge.second, trial) - current[edge.second];
            if (gain > best_gain) {
                best_gain = gain;
                best_move = static_cast<int>(m);
                best_is_add = !present;
            }
        }
        if (best_move < 0) break;
        const Edge& edge = move_order[static_cast<std::size_t>(best_move)];
        if (best_is_add) {
            inter.insert(edge);
        } else {
            inter.erase(edge);
        }
        current[edge.second] = family_score(edge.second, inter);
    }

    std::vector<Edge> out(inter.begin(), inter.end());
    sort_edges_by_variable_order(out, hidden_vars);
    return out;
}

NetworkSpec inject_expert_edges(const NetworkSpec& spec, std::span<const Edge> edges,
                                const ExpertEdgeOptions& options) {
    if (!spec.is_dynamic()) {
        throw std::invalid_argument("expert edges can only be injected into a dynamic spec");
    }
    std::vector<Edge> additions;
    for (const auto& edge : edges) {
        const Variable& src = spec.require_variable(edge.first);
        const Variable& dst = spec.require_variable(edge.second);
        if (src.role != VarRole::HiddenAu || dst.role != VarRole::HiddenPhone) {
            throw std::invalid_argument("expert edge must run from a hidden AU (slice t-1) to the "
                                        "hidden phone (slice t): " +
                                        edge.first + "->" + edge.second);
        }
        const bool present =
            std::find(spec.inter_edges.begin(), spec.inter_edges.end(), edge) != spec.inter_edges.end();
        const bool queued = std::find(additions.begin(), additions.end(), edge) != additions.end();
        if (!present && !queued) additions.push_back(edge);
    }
    if (additions.empty()) return spec;

    std::sort(additions.begin(), additions.end(), [&](const Edge& a, const Edge& b) {
        return std::pair(spec.var_index(a.first), spec.var_index(a.second)) <
               std::pair(spec.var_index(b.first), spec.var_index(b.second));
    });

    NetworkSpec out = spec;
    out.inter_edges.insert(out.inter_edges.end(), additions.begin(), additions.end());

    std::set<std::string> touched;
    for (const auto& edge : additions) touched.insert(edge.second);

    for (const std::string& child : touched) {
        auto it = std::find_if(out.transition_cpts.begin(), out.transition_cpts.end(),
                               [&](const Cpt& cpt) { return cpt.child == child; });
        if (it == out.transition_cpts.end()) {
            throw std::invalid_argument("missing transition CPT for '" + child + "'");
        }
        const Cpt old_cpt = *it;
        std::vector<ParentRef> new_parents = out.intra_parents(child);
        auto inter = out.inter_parents(child);
        new_parents.insert(new_parents.end(), inter.begin(), inter.end());
        if (static_cast<int>(new_parents.size()) > options.parent_hard_cap) {
            throw std::invalid_argument("family of '" + child + "' would exceed the parent cap of " +
                                        std::to_string(options.parent_hard_cap));
        }

        // Replicate rows so each new parent is (for now) ignored; callers
        // refit parameters afterwards.
        std::vector<int> old_position;  // position of each old parent in the new list
        for (const auto& parent : old_cpt.parents) {
            const auto pos = std::find(new_parents.begin(), new_parents.end(), parent);
            if (pos == new_parents.end()) {
                throw std::logic_error("old parent disappeared while injecting expert edges");
            }
            old_position.push_back(static_cast<int>(pos - new_parents.begin()));
        }
        Cpt new_cpt;
        new_cpt.child = child;
        new_cpt.parents = new_parents;
        const FamilyShape new_shape = out.family_shape(new_cpt);
        const FamilyShape old_shape = out.family_shape(old_cpt);
        new_cpt.table.resize(new_shape.table_size());
        const auto k = static_cast<std::size_t>(new_shape.child_card);
        std::vector<int> new_values(new_parents.size());
        std::vector<int> old_values(old_cpt.parents.size());
        for (std::size_t j = 0; j < new_shape.config_count(); ++j) {
            new_shape.decode_config(j, new_values);
            for (std::size_t p = 0; p < old_values.size(); ++p) {
                old_values[p] = new_values[static_cast<std::size_t>(old_position[p])];
            }
            const std::size_t old_j = old_shape.config_index(old_values);
            for (std::size_t s = 0; s < k; ++s) {
                new_cpt.table[j * k + s] = old_cpt.table[old_j * k + s];
            }
        }
        *it = std::move(new_cpt);
    }
    return out;
}

} // namespace aufuse
