#ifndef AUFUSE_COUNTS_HPP
#define AUFUSE_COUNTS_HPP

#include <span>
#include <string>
#include <vector>

#include "aufuse/graph.hpp"

namespace aufuse {

/// Column-schema'd discrete dataset. A column named "prev:X" carries the
/// previous-slice value of X in consecutive-frame-pair tables. -1 marks a
/// missing value.
struct DataTable {
    std::vector<std::string> columns;
    std::vector<int> cardinalities;
    std::vector<int> values;  // row-major

    static constexpr int kMissing = -1;

    std::size_t column_count() const { return columns.size(); }
    std::size_t row_count() const {
        return columns.empty() ? 0 : values.size() / columns.size();
    }
    int column_index(std::string_view name) const;  // -1 when absent
    int at(std::size_t row, std::size_t col) const {
        return values[row * columns.size() + col];
    }
    void append_row(std::span<const int> row);
};

/// Count tensor for one family: counts[j][k] is the number of records with
/// the child in state k and the parents in configuration j (row-major over
/// the declared parent order).
struct SufficientStats {
    std::string child;
    std::vector<ParentRef> parents;
    int child_card = 0;
    std::vector<int> parent_cards;
    std::vector<long long> counts;      // [config][child state]
    std::vector<long long> row_totals;  // [config]
    long long sample_count = 0;

    FamilyShape shape() const { return FamilyShape{child_card, parent_cards}; }
};

enum class MissingPolicy {
    Error,       // a missing child/parent value is a contract breach
    SkipRecord,  // drop records with a missing child or parent value
};

/// Exact counts of (child, parents) co-occurrences over the table. The
/// child and lag-0 parents resolve to plain columns, lag-1 parents to
/// "prev:" columns. Throws on unknown columns or out-of-range states.
SufficientStats count_stats(const DataTable& data, const std::string& child,
                            std::span<const ParentRef> parents,
                            MissingPolicy missing = MissingPolicy::Error);

} // namespace aufuse

#endif // AUFUSE_COUNTS_HPP
