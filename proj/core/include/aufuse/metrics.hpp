#ifndef AUFUSE_METRICS_HPP
#define AUFUSE_METRICS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace aufuse {

struct Confusion {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    long long total() const { return tp + fp + fn + tn; }
    Confusion& operator+=(const Confusion& other);
};

/// Exact counts over aligned binary series; throws on length mismatch.
Confusion confusion(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> pred);

// Rates with the 0/0 -> 0 convention, so reports stay total.
double f1(const Confusion& c);
double tpr(const Confusion& c);
double fpr(const Confusion& c);

/// Matthews correlation coefficient in [-1, 1]; any zero factor under the
/// root gives 0. Computed in floating point, immune to count overflow.
double mcc(const Confusion& c);

struct RocPoint {
    double threshold = 0.0;  // predictions are score > threshold
    double fpr = 0.0;
    double tpr = 0.0;
};

/// One point per distinct threshold: every distinct score value plus the
/// +/- infinity sentinels, deduplicated, in ascending-FPR order.
std::vector<RocPoint> roc(std::span<const std::uint8_t> truth, std::span<const double> scores);

} // namespace aufuse

#endif // AUFUSE_METRICS_HPP
