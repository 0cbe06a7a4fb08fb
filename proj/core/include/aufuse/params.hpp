#ifndef AUFUSE_PARAMS_HPP
#define AUFUSE_PARAMS_HPP

#include "aufuse/counts.hpp"
#include "aufuse/graph.hpp"

namespace aufuse {

/// Additive (pseudo-count) smoothing; alpha = 0 is pure maximum likelihood.
struct SmoothingPolicy {
    double alpha = 1.0;
};

/// table[j][k] = (N_jk + alpha) / (N_j + alpha * K). Rows with no data and
/// alpha = 0 fall back to the uniform distribution.
Cpt fit_cpt(const SufficientStats& stats, const SmoothingPolicy& smoothing);

/// Fits every family of the given structure: initial-slice CPTs from
/// initial_data and, when transition_data is non-null, transition CPTs from
/// consecutive-frame-pair records. Existing CPTs on the input are ignored;
/// the returned spec carries freshly fitted tables and passes validate().
/// Parent order is canonical: lag-0 parents in declaration order, then
/// lag-1 parents in declaration order.
NetworkSpec fit_all(const NetworkSpec& structure, const DataTable& initial_data,
                    const DataTable* transition_data, const SmoothingPolicy& smoothing);

} // namespace aufuse

#endif // AUFUSE_PARAMS_HPP
