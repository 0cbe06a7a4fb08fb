#include "aufuse/params.hpp"

#include <algorithm>
#include <stdexcept>

namespace aufuse {

Cpt fit_cpt(const SufficientStats& stats, const SmoothingPolicy& smoothing) {
    if (smoothing.alpha < 0.0) throw std::invalid_argument("smoothing alpha must be >= 0");
    const FamilyShape shape = stats.shape();
    Cpt cpt;
    cpt.child = stats.child;
    cpt.parents = stats.parents;
    cpt.table.resize(shape.table_size());
    const auto k = static_cast<std::size_t>(shape.child_card);
    for (std::size_t j = 0; j < shape.config_count(); ++j) {
        const double denom =
            static_cast<double>(stats.row_totals[j]) + smoothing.alpha * static_cast<double>(k);
        if (denom <= 0.0) {
            // Unseen configuration under pure MLE: uniform.
            for (std::size_t s = 0; s < k; ++s) cpt.table[j * k + s] = 1.0 / static_cast<double>(k);
            continue;
        }
        for (std::size_t s = 0; s < k; ++s) {
            cpt.table[j * k + s] =
                (static_cast<double>(stats.counts[j * k + s]) + smoothing.alpha) / denom;
        }
    }
    return cpt;
}

namespace {

// Canonical family parent order: lag 0 in declaration order, then lag 1 in
// declaration order. Keeps fitted models byte-stable.
std::vector<ParentRef> canonical_parents(const NetworkSpec& spec, const std::string& child,
                                         bool with_inter) {
    std::vector<ParentRef> parents = spec.intra_parents(child);
    if (with_inter) {
        auto inter = spec.inter_parents(child);
        parents.insert(parents.end(), inter.begin(), inter.end());
    }
    return parents;
}

} // namespace

NetworkSpec fit_all(const NetworkSpec& structure, const DataTable& initial_data,
                    const DataTable* transition_data, const SmoothingPolicy& smoothing) {
    if (!transition_data && !structure.inter_edges.empty()) {
        throw std::invalid_argument("structure has inter-slice edges but no transition data given");
    }
    NetworkSpec fitted = structure;
    fitted.cpts.clear();
    fitted.transition_cpts.clear();

    for (const auto& v : fitted.variables) {
        const auto parents = canonical_parents(fitted, v.name, false);
        const MissingPolicy missing =
            is_measurement(v.role) ? MissingPolicy::SkipRecord : MissingPolicy::Error;
        fitted.cpts.push_back(fit_cpt(count_stats(initial_data, v.name, parents, missing), smoothing));
    }
    if (transition_data) {
        for (const auto& v : fitted.variables) {
            const auto parents = canonical_parents(fitted, v.name, true);
            const MissingPolicy missing =
                is_measurement(v.role) ? MissingPolicy::SkipRecord : MissingPolicy::Error;
            fitted.transition_cpts.push_back(
                fit_cpt(count_stats(*transition_data, v.name, parents, missing), smoothing));
        }
    }
    return fitted;
}

} // namespace aufuse
