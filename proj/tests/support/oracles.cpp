#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aufuse::testing {

namespace {

struct HiddenLayout {
    std::vector<std::string> names;
    std::vector<int> cards;
    std::vector<std::vector<int>> states;  // every joint assignment as a value tuple
};

HiddenLayout hidden_layout(const NetworkSpec& spec) {
    HiddenLayout layout;
    for (const auto& v : spec.variables) {
        if (is_hidden(v.role)) {
            layout.names.push_back(v.name);
            layout.cards.push_back(v.cardinality);
        }
    }
    std::vector<int> tuple(layout.names.size(), 0);
    for (;;) {
        layout.states.push_back(tuple);
        std::size_t slot = layout.names.size();
        while (slot-- > 0) {
            if (++tuple[slot] < layout.cards[slot]) break;
            tuple[slot] = 0;
            if (slot == 0) return layout;
        }
        if (layout.names.empty()) return layout;
    }
}

int value_of(const HiddenLayout& layout, const std::vector<int>& tuple, const std::string& name) {
    for (std::size_t i = 0; i < layout.names.size(); ++i) {
        if (layout.names[i] == name) return tuple[i];
    }
    throw std::logic_error("oracle: unknown hidden variable " + name);
}

double cpt_prob(const NetworkSpec& spec, const Cpt& cpt, int child_value,
                const HiddenLayout& layout, const std::vector<int>& cur,
                const std::vector<int>* prev) {
    const FamilyShape shape = spec.family_shape(cpt);
    std::vector<int> parent_values;
    parent_values.reserve(cpt.parents.size());
    for (const auto& parent : cpt.parents) {
        if (parent.lag == 0) {
            parent_values.push_back(value_of(layout, cur, parent.name));
        } else {
            parent_values.push_back(value_of(layout, *prev, parent.name));
        }
    }
    const std::size_t row = shape.config_index(parent_values);
    return cpt.table[row * static_cast<std::size_t>(shape.child_card) +
                     static_cast<std::size_t>(child_value)];
}

double initial_prob(const NetworkSpec& spec, const HiddenLayout& layout,
                    const std::vector<int>& tuple) {
    double p = 1.0;
    for (std::size_t i = 0; i < layout.names.size(); ++i) {
        const Cpt* cpt = spec.initial_cpt(layout.names[i]);
        p *= cpt_prob(spec, *cpt, tuple[i], layout, tuple, nullptr);
    }
    return p;
}

double transition_prob(const NetworkSpec& spec, const HiddenLayout& layout,
                       const std::vector<int>& prev, const std::vector<int>& cur) {
    double p = 1.0;
    for (std::size_t i = 0; i < layout.names.size(); ++i) {
        const Cpt* cpt = spec.transition_cpt(layout.names[i]);
        p *= cpt_prob(spec, *cpt, cur[i], layout, cur, &prev);
    }
    return p;
}

double evidence_prob(const NetworkSpec& spec, const HiddenLayout& layout,
                     const std::vector<int>& tuple, const EvidenceFrame& frame, bool first) {
    double p = 1.0;
    for (const auto& [name, value] : frame.observations) {
        const Cpt* cpt = first || !spec.is_dynamic() ? spec.initial_cpt(name)
                                                     : spec.transition_cpt(name);
        p *= cpt_prob(spec, *cpt, value, layout, tuple, nullptr);
    }
    return p;
}

// Sums trajectory weights over frames [0, horizon); accumulate() receives
// (t, state tuple, trajectory weight) for every visited step of every
// complete trajectory.
template <typename Accumulate>
void walk(const NetworkSpec& spec, const HiddenLayout& layout,
          const std::vector<EvidenceFrame>& evidence, std::size_t horizon,
          std::vector<const std::vector<int>*>& path, double weight, Accumulate&& accumulate) {
    const std::size_t t = path.size();
    for (const auto& tuple : layout.states) {
        double step;
        if (t == 0) {
            step = initial_prob(spec, layout, tuple);
        } else if (spec.is_dynamic()) {
            step = transition_prob(spec, layout, *path.back(), tuple);
        } else {
            step = initial_prob(spec, layout, tuple);
        }
        step *= evidence_prob(spec, layout, tuple, evidence[t], t == 0);
        if (step == 0.0) continue;
        const double next_weight = weight * step;
        path.push_back(&tuple);
        if (path.size() == horizon) {
            accumulate(path, next_weight);
        } else {
            walk(spec, layout, evidence, horizon, path, next_weight, accumulate);
        }
        path.pop_back();
    }
}

std::map<std::string, std::vector<double>> normalize_marginals(
    const HiddenLayout& layout, const std::vector<std::vector<double>>& sums, double total) {
    std::map<std::string, std::vector<double>> out;
    for (std::size_t i = 0; i < layout.names.size(); ++i) {
        std::vector<double> marginal = sums[i];
        for (auto& v : marginal) {
            v = total > 0.0 ? v / total : 1.0 / static_cast<double>(marginal.size());
        }
        out[layout.names[i]] = std::move(marginal);
    }
    return out;
}

} // namespace

OracleBeliefs enumerate_dbn(const NetworkSpec& spec, const std::vector<EvidenceFrame>& evidence) {
    const HiddenLayout layout = hidden_layout(spec);
    const std::size_t horizon = evidence.size();
    OracleBeliefs out;

    // Filtered marginals at t: enumerate trajectories of length t+1.
    for (std::size_t t = 0; t < horizon; ++t) {
        std::vector<std::vector<double>> sums(layout.names.size());
        for (std::size_t i = 0; i < layout.names.size(); ++i) {
            sums[i].assign(static_cast<std::size_t>(layout.cards[i]), 0.0);
        }
        double total = 0.0;
        std::vector<const std::vector<int>*> path;
        walk(spec, layout, evidence, t + 1, path, 1.0,
             [&](const std::vector<const std::vector<int>*>& trajectory, double weight) {
                 total += weight;
                 const auto& last = *trajectory.back();
                 for (std::size_t i = 0; i < layout.names.size(); ++i) {
                     sums[i][static_cast<std::size_t>(last[i])] += weight;
                 }
             });
        out.filtered.push_back(normalize_marginals(layout, sums, total));
        if (t + 1 == horizon) {
            out.log_evidence =
                total > 0.0 ? std::log(total) : -std::numeric_limits<double>::infinity();
        }
    }

    // Smoothed marginals: one enumeration of full trajectories.
    {
        std::vector<std::vector<std::vector<double>>> sums(
            horizon, std::vector<std::vector<double>>(layout.names.size()));
        for (auto& frame : sums) {
            for (std::size_t i = 0; i < layout.names.size(); ++i) {
                frame[i].assign(static_cast<std::size_t>(layout.cards[i]), 0.0);
            }
        }
        double total = 0.0;
        std::vector<const std::vector<int>*> path;
        walk(spec, layout, evidence, horizon, path, 1.0,
             [&](const std::vector<const std::vector<int>*>& trajectory, double weight) {
                 total += weight;
                 for (std::size_t t = 0; t < horizon; ++t) {
                     const auto& tuple = *trajectory[t];
                     for (std::size_t i = 0; i < layout.names.size(); ++i) {
                         sums[t][i][static_cast<std::size_t>(tuple[i])] += weight;
                     }
                 }
             });
        for (std::size_t t = 0; t < horizon; ++t) {
            out.smoothed.push_back(normalize_marginals(layout, sums[t], total));
        }
    }
    return out;
}

long double k2_factorial_score(const SufficientStats& stats) {
    const auto factorial = [](long long n) {
        long double f = 1.0L;
        for (long long i = 2; i <= n; ++i) f *= static_cast<long double>(i);
        return f;
    };
    const FamilyShape shape = stats.shape();
    const auto k = static_cast<std::size_t>(shape.child_card);
    long double score = 1.0L;
    for (std::size_t j = 0; j < shape.config_count(); ++j) {
        score *= factorial(shape.child_card - 1) /
                 factorial(stats.row_totals[j] + shape.child_card - 1);
        for (std::size_t s = 0; s < k; ++s) {
            score *= factorial(stats.counts[j * k + s]);
        }
    }
    return score;
}

NaiveRates naive_rates(const std::vector<std::uint8_t>& truth,
                       const std::vector<std::uint8_t>& pred) {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1 && pred[i] == 1) ++tp;
        if (truth[i] == 0 && pred[i] == 1) ++fp;
        if (truth[i] == 1 && pred[i] == 0) ++fn;
        if (truth[i] == 0 && pred[i] == 0) ++tn;
    }
    NaiveRates rates;
    const double precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
    rates.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    rates.tpr = recall;
    rates.fpr = fp + tn > 0 ? double(fp) / double(fp + tn) : 0.0;
    const long double denom = std::sqrt(static_cast<long double>(tp + fp)) *
                              std::sqrt(static_cast<long double>(tp + fn)) *
                              std::sqrt(static_cast<long double>(tn + fp)) *
                              std::sqrt(static_cast<long double>(tn + fn));
    rates.mcc = denom > 0.0L ? static_cast<double>(
                                   (static_cast<long double>(tp) * tn - static_cast<long double>(fp) * fn) /
                                   denom)
                             : 0.0;
    return rates;
}

std::vector<RocPoint> naive_roc(const std::vector<std::uint8_t>& truth,
                                const std::vector<double>& scores) {
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.insert(thresholds.begin(), std::numeric_limits<double>::infinity());
    thresholds.push_back(-std::numeric_limits<double>::infinity());

    long long positives = 0;
    long long negatives = 0;
    for (const auto t : truth) (t == 1 ? positives : negatives) += 1;

    std::vector<RocPoint> points;
    for (const double threshold : thresholds) {
        long long tp = 0;
        long long fp = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (scores[i] > threshold) {
                truth[i] == 1 ? ++tp : ++fp;
            }
        }
        const double f = negatives > 0 ? double(fp) / double(negatives) : 0.0;
        const double t = positives > 0 ? double(tp) / double(positives) : 0.0;
        if (!points.empty() && points.back().fpr == f && points.back().tpr == t) continue;
        points.push_back({threshold, f, t});
    }
    return points;
}

} // namespace aufuse::testing
