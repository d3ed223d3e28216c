#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace hisparse {

using Complex = std::complex<double>;

// Seed derivation: every random object is driven by its own std::mt19937_64
// whose seed is a pure function of (master seed, stream ids). Mixing uses the
// SplitMix64 finalizer, applied once per stream id:
//
//     h = mix(master); for id in ids: h = mix(h ^ mix(id + golden))
//
// so a seed never depends on how many draws another stream consumed.

inline std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream) noexcept {
    std::uint64_t h = splitmix64(master);
    for (auto id : stream) {
        h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// Stream tags used by the library; kept distinct so operator and signal draws
/// for the same trial never share a generator.
enum class Stream : std::uint64_t {
    channel_gains = 1,
    block_matrix = 2,
    signal = 3,
    noise = 4,
    probe = 5,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream tag, std::uint64_t index = 0) noexcept {
    return derive_seed(master, {static_cast<std::uint64_t>(tag), index});
}

using Rng = std::mt19937_64;

/// Standard circularly-symmetric complex Gaussian, E|z|^2 = variance.
inline Complex complex_gaussian(Rng& rng, double variance = 1.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

} // namespace hisparse
