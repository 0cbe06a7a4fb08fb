#ifndef AUFUSE_RNG_HPP
#define AUFUSE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace aufuse {

/// One splitmix64 step; the standard seed-mixing primitive.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent stream seed from a base seed and an index path
/// (e.g. {subject, sequence}). Identical inputs give identical seeds on any
/// platform, which keeps parallel generation reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Seeded random source with portable output. The engine is std::mt19937_64,
/// whose raw stream is pinned by the standard; every distribution below is
/// built directly on that stream instead of std::*_distribution (whose
/// algorithms vary across standard libraries).
class Rng {
  public:
    static constexpr std::string_view algorithm_id = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();       // [0, 1)
    double uniform_open();    // (0, 1)
    bool bernoulli(double p);
    int uniform_int(int n);   // {0, ..., n-1}, n >= 1

    /// Inverse-CDF draw; probs need not be normalized exactly but must be
    /// non-negative. Returns the last index with positive mass on spillover.
    int categorical(std::span<const double> probs);

    double normal();              // Box-Muller, one draw per call
    double gamma(double shape);   // Marsaglia-Tsang; shape > 0

    /// Dirichlet draw into out (same length as alpha). Zero alphas stay
    /// exactly zero, so point-mass rows are preserved.
    void dirichlet(std::span<const double> alpha, std::span<double> out);

  private:
    std::mt19937_64 engine_;
};

} // namespace aufuse

#endif // AUFUSE_RNG_HPP
