#include "aufuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace aufuse {

Confusion& Confusion::operator+=(const Confusion& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    tn += other.tn;
    return *this;
}

Confusion confusion(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> pred) {
    if (truth.size() != pred.size()) {
        throw std::invalid_argument("truth and prediction series differ in length");
    }
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1) {
            pred[i] == 1 ? ++c.tp : ++c.fn;
        } else {
            pred[i] == 1 ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

double f1(const Confusion& c) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    return denom > 0.0 ? 2.0 * static_cast<double>(c.tp) / denom : 0.0;
}

double tpr(const Confusion& c) {
    const double denom = static_cast<double>(c.tp + c.fn);
    return denom > 0.0 ? static_cast<double>(c.tp) / denom : 0.0;
}

double fpr(const Confusion& c) {
    const double denom = static_cast<double>(c.fp + c.tn);
    return denom > 0.0 ? static_cast<double>(c.fp) / denom : 0.0;
}

double mcc(const Confusion& c) {
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double tn = static_cast<double>(c.tn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom <= 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

std::vector<RocPoint> roc(std::span<const std::uint8_t> truth, std::span<const double> scores) {
    if (truth.size() != scores.size()) {
        throw std::invalid_argument("truth and score series differ in length");
    }
    for (const double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) throw std::out_of_range("scores must lie in [0, 1]");
    }
    long long positives = 0;
    for (const auto t : truth) positives += t == 1 ? 1 : 0;
    const long long negatives = static_cast<long long>(truth.size()) - positives;

    std::vector<std::size_t> order(truth.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    });

    const auto rate = [](long long n, long long d) {
        return d > 0 ? static_cast<double>(n) / static_cast<double>(d) : 0.0;
    };

    std::vector<RocPoint> points;
    const auto push = [&](double threshold, long long tp, long long fp) {
        const double f = rate(fp, negatives);
        const double t = rate(tp, positives);
        if (!points.empty() && points.back().fpr == f && points.back().tpr == t) return;
        points.push_back({threshold, f, t});
    };

    push(std::numeric_limits<double>::infinity(), 0, 0);
    long long tp = 0;
    long long fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double value = scores[order[i]];
        // Threshold at a score value predicts strictly greater scores only,
        // so the point for this value excludes its whole tie group.
        push(value, tp, fp);
        while (i < order.size() && scores[order[i]] == value) {
            truth[order[i]] == 1 ? ++tp : ++fp;
            ++i;
        }
    }
    push(-std::numeric_limits<double>::infinity(),
         static_cast<long long>(positives), static_cast<long long>(negatives));
    return points;
}

} // namespace aufuse
