#ifndef AUFUSE_DATASET_HPP
#define AUFUSE_DATASET_HPP

#include "aufuse/corpus.hpp"
#include "aufuse/counts.hpp"
#include "aufuse/graph.hpp"

namespace aufuse {

/// Conventional name of the hidden phone variable in specs built from a
/// corpus; AU variables reuse the corpus AU names.
inline constexpr const char* kPhoneVarName = "Phone";

/// Ground-truth tables for structure learning (no measurement columns).
/// Columns are the corpus AU names plus, optionally, "Phone".
DataTable build_truth_table(const Corpus& corpus, bool include_phone);

/// Consecutive-frame ground-truth pairs: "prev:X" columns carry slice t-1.
DataTable build_truth_pair_table(const Corpus& corpus, bool include_phone);

/// Fitting tables keyed by the spec's variable names. Hidden variables
/// resolve to truth columns, measurement variables to the measurement
/// channel of their hidden parent (missing measurements stay missing).
DataTable build_initial_table(const Corpus& corpus, const NetworkSpec& spec);  // first frames
DataTable build_full_table(const Corpus& corpus, const NetworkSpec& spec);     // every frame
DataTable build_pair_table(const Corpus& corpus, const NetworkSpec& spec);     // frame pairs

} // namespace aufuse

#endif // AUFUSE_DATASET_HPP
