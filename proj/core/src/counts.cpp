#include "aufuse/counts.hpp"

#include <stdexcept>

namespace aufuse {

namespace {

std::string prev_column(const std::string& name) {
    return "prev:" + name;
}

} // namespace

int DataTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

void DataTable::append_row(std::span<const int> row) {
    if (row.size() != columns.size()) {
        throw std::invalid_argument("row width does not match table schema");
    }
    values.insert(values.end(), row.begin(), row.end());
}

SufficientStats count_stats(const DataTable& data, const std::string& child,
                            std::span<const ParentRef> parents, MissingPolicy missing) {
    SufficientStats stats;
    stats.child = child;
    stats.parents.assign(parents.begin(), parents.end());

    const int child_col = data.column_index(child);
    if (child_col < 0) throw std::invalid_argument("unknown variable: " + child);
    stats.child_card = data.cardinalities[static_cast<std::size_t>(child_col)];

    std::vector<int> parent_cols;
    parent_cols.reserve(parents.size());
    for (const auto& parent : parents) {
        const std::string column = parent.lag == 0 ? parent.name : prev_column(parent.name);
        const int col = data.column_index(column);
        if (col < 0) throw std::invalid_argument("unknown variable: " + column);
        parent_cols.push_back(col);
        stats.parent_cards.push_back(data.cardinalities[static_cast<std::size_t>(col)]);
    }

    const FamilyShape shape = stats.shape();
    stats.counts.assign(shape.table_size(), 0);
    stats.row_totals.assign(shape.config_count(), 0);

    const std::size_t width = data.column_count();
    const auto k = static_cast<std::size_t>(stats.child_card);
    std::vector<int> parent_values(parents.size());
    for (std::size_t row = 0; row < data.row_count(); ++row) {
        const int child_value = data.values[row * width + static_cast<std::size_t>(child_col)];
        bool incomplete = child_value == DataTable::kMissing;
        for (std::size_t p = 0; p < parent_cols.size() && !incomplete; ++p) {
            parent_values[p] = data.values[row * width + static_cast<std::size_t>(parent_cols[p])];
            incomplete = parent_values[p] == DataTable::kMissing;
        }
        if (incomplete) {
            if (missing == MissingPolicy::Error) {
                throw std::invalid_argument("record " + std::to_string(row) +
                                            " is missing a value for family of '" + child + "'");
            }
            continue;
        }
        if (child_value < 0 || child_value >= stats.child_card) {
            throw std::out_of_range("state index out of range for '" + child + "' in record " +
                                    std::to_string(row));
        }
        for (std::size_t p = 0; p < parent_cols.size(); ++p) {
            if (parent_values[p] < 0 || parent_values[p] >= stats.parent_cards[p]) {
                throw std::out_of_range("state index out of range for parent of '" + child +
                                        "' in record " + std::to_string(row));
            }
        }
        const std::size_t j = shape.config_index(parent_values);
        ++stats.counts[j * k + static_cast<std::size_t>(child_value)];
        ++stats.row_totals[j];
        ++stats.sample_count;
    }
    return stats;
}

} // namespace aufuse
