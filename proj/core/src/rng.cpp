#include "aufuse/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aufuse {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = base;
    std::uint64_t out = splitmix64(state);
    for (auto p : path) {
        state ^= p + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
        out = splitmix64(state);
    }
    return out;
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("bernoulli probability out of [0,1]");
    return uniform01() < p;
}

int Rng::uniform_int(int n) {
    if (n < 1) throw std::invalid_argument("uniform_int needs n >= 1");
    int v = static_cast<int>(uniform01() * n);
    return v >= n ? n - 1 : v;
}

int Rng::categorical(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical over empty support");
    const double u = uniform01();
    double cum = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (p < 0.0) throw std::invalid_argument("categorical probability < 0");
        if (p > 0.0) last_positive = static_cast<int>(i);
        cum += p;
        if (u < cum) return static_cast<int>(i);
    }
    if (last_positive < 0) throw std::invalid_argument("categorical with all-zero mass");
    return last_positive;
}

double Rng::normal() {
    const double u1 = uniform_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
    if (shape < 1.0) {
        // Boost to shape+1 and scale back.
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = uniform_open();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

void Rng::dirichlet(std::span<const double> alpha, std::span<double> out) {
    if (alpha.size() != out.size()) throw std::invalid_argument("dirichlet size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] < 0.0) throw std::invalid_argument("dirichlet alpha < 0");
        out[i] = alpha[i] > 0.0 ? gamma(alpha[i]) : 0.0;
        total += out[i];
    }
    if (total <= 0.0) {
        // All-zero alphas (or pathological underflow): leave a copy of alpha.
        for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = alpha[i];
        return;
    }
    for (auto& v : out) v /= total;
}

} // namespace aufuse
