#include "aufuse/dataset.hpp"

#include <stdexcept>

namespace aufuse {

namespace {

int au_column(const Corpus& corpus, const std::string& name) {
    for (std::size_t i = 0; i < corpus.au_names.size(); ++i) {
        if (corpus.au_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

// How one spec variable reads out of a frame.
struct ChannelRef {
    enum Kind { AuTruth, PhoneTruth, AuMeas, PhoneMeas } kind;
    int au = -1;
};

int read_channel(const Frame& frame, const ChannelRef& ref) {
    switch (ref.kind) {
        case ChannelRef::AuTruth: return frame.au_truth[static_cast<std::size_t>(ref.au)];
        case ChannelRef::PhoneTruth: return frame.phone_truth;
        case ChannelRef::AuMeas: {
            const int value = frame.au_meas[static_cast<std::size_t>(ref.au)];
            return value < 0 ? DataTable::kMissing : value;
        }
        case ChannelRef::PhoneMeas:
            return frame.phone_meas < 0 ? DataTable::kMissing : frame.phone_meas;
    }
    throw std::logic_error("unreachable channel kind");
}

ChannelRef resolve_channel(const Corpus& corpus, const NetworkSpec& spec, const Variable& var) {
    switch (var.role) {
        case VarRole::HiddenAu: {
            const int au = au_column(corpus, var.name);
            if (au < 0) throw std::invalid_argument("corpus has no AU channel named " + var.name);
            return {ChannelRef::AuTruth, au};
        }
        case VarRole::HiddenPhone:
            if (var.cardinality != corpus.alphabet.size()) {
                throw std::invalid_argument("phone cardinality does not match the corpus alphabet");
            }
            return {ChannelRef::PhoneTruth, -1};
        case VarRole::MeasurementAu:
        case VarRole::MeasurementPhone: {
            const auto hidden = spec.hidden_parent_of(var.name);
            if (!hidden) {
                throw std::invalid_argument("measurement variable " + var.name + " has no hidden parent");
            }
            if (var.role == VarRole::MeasurementAu) {
                const int au = au_column(corpus, *hidden);
                if (au < 0) throw std::invalid_argument("corpus has no AU channel named " + *hidden);
                return {ChannelRef::AuMeas, au};
            }
            if (var.cardinality != corpus.alphabet.size()) {
                throw std::invalid_argument("phone cardinality does not match the corpus alphabet");
            }
            return {ChannelRef::PhoneMeas, -1};
        }
    }
    throw std::logic_error("unreachable role");
}

DataTable truth_schema(const Corpus& corpus, bool include_phone, bool pairs) {
    DataTable table;
    const auto add = [&](const std::string& name, int card) {
        table.columns.push_back(name);
        table.cardinalities.push_back(card);
    };
    if (pairs) {
        for (const auto& name : corpus.au_names) add("prev:" + name, 2);
        if (include_phone) add(std::string("prev:") + kPhoneVarName, corpus.alphabet.size());
    }
    for (const auto& name : corpus.au_names) add(name, 2);
    if (include_phone) add(kPhoneVarName, corpus.alphabet.size());
    return table;
}

void push_truth(const Frame& frame, bool include_phone, std::vector<int>& row) {
    for (const auto value : frame.au_truth) row.push_back(value);
    if (include_phone) row.push_back(frame.phone_truth);
}

} // namespace

DataTable build_truth_table(const Corpus& corpus, bool include_phone) {
    DataTable table = truth_schema(corpus, include_phone, false);
    std::vector<int> row;
    for (const auto& sequence : corpus.sequences) {
        for (const auto& frame : sequence.frames) {
            row.clear();
            push_truth(frame, include_phone, row);
            table.append_row(row);
        }
    }
    return table;
}

DataTable build_truth_pair_table(const Corpus& corpus, bool include_phone) {
    DataTable table = truth_schema(corpus, include_phone, true);
    std::vector<int> row;
    for (const auto& sequence : corpus.sequences) {
        for (std::size_t t = 1; t < sequence.frames.size(); ++t) {
            row.clear();
            push_truth(sequence.frames[t - 1], include_phone, row);
            push_truth(sequence.frames[t], include_phone, row);
            table.append_row(row);
        }
    }
    return table;
}

namespace {

DataTable spec_table(const Corpus& corpus, const NetworkSpec& spec, bool pairs, bool first_only) {
    DataTable table;
    std::vector<ChannelRef> channels;
    std::vector<ChannelRef> prev_channels;
    if (pairs) {
        for (const auto& var : spec.variables) {
            if (!is_hidden(var.role)) continue;
            table.columns.push_back("prev:" + var.name);
            table.cardinalities.push_back(var.cardinality);
            prev_channels.push_back(resolve_channel(corpus, spec, var));
        }
    }
    for (const auto& var : spec.variables) {
        table.columns.push_back(var.name);
        table.cardinalities.push_back(var.cardinality);
        channels.push_back(resolve_channel(corpus, spec, var));
    }

    std::vector<int> row;
    for (const auto& sequence : corpus.sequences) {
        if (pairs) {
            for (std::size_t t = 1; t < sequence.frames.size(); ++t) {
                row.clear();
                for (const auto& ref : prev_channels) {
                    row.push_back(read_channel(sequence.frames[t - 1], ref));
                }
                for (const auto& ref : channels) row.push_back(read_channel(sequence.frames[t], ref));
                table.append_row(row);
            }
        } else if (first_only) {
            if (sequence.frames.empty()) continue;
            row.clear();
            for (const auto& ref : channels) row.push_back(read_channel(sequence.frames[0], ref));
            table.append_row(row);
        } else {
            for (const auto& frame : sequence.frames) {
                row.clear();
                for (const auto& ref : channels) row.push_back(read_channel(frame, ref));
                table.append_row(row);
            }
        }
    }
    return table;
}

} // namespace

DataTable build_initial_table(const Corpus& corpus, const NetworkSpec& spec) {
    return spec_table(corpus, spec, false, true);
}

DataTable build_full_table(const Corpus& corpus, const NetworkSpec& spec) {
    return spec_table(corpus, spec, false, false);
}

DataTable build_pair_table(const Corpus& corpus, const NetworkSpec& spec) {
    return spec_table(corpus, spec, true, false);
}

} // namespace aufuse
