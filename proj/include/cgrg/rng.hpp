#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cgrg {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream (a, b) of a master seed. Replica seeds are derived this
/// way so results do not depend on which worker ran which replica.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(mix64(master) ^ a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// 64-bit engine plus the few draws the samplers need. Draws are defined in
/// terms of raw engine output only, so streams are identical across
/// standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_left() { return 1.0 - uniform(); }

    /// Index i with probability proportional to the i-th increment of `cdf`;
    /// cdf must be nondecreasing with a positive last entry.
    std::size_t categorical(std::span<const double> cdf);

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

/// Cumulative sums of `weights` divided by their total, last entry exactly 1.
std::vector<double> normalised_cdf(std::span<const double> weights);

}  // namespace cgrg
