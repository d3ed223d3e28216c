#pragma once

// Planted signals, measurement noise and the error/detection metrics used by
// the Monte Carlo experiments.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "block_model.hpp"
#include "errors.hpp"
#include "measurement_ops.hpp"
#include "random.hpp"

namespace hisparse {

/// Where the non-zeros of an active block may sit. Blocks flagged in
/// `front_loaded` draw their positions from the first `front_width`
/// coordinates; all others draw from the whole block.
struct Placement {
    Index front_width = 0;
    std::vector<bool> front_loaded;

    static Placement uniform() { return {}; }

    bool is_front_loaded(Index block) const {
        return front_width > 0 && block < front_loaded.size() && front_loaded[block];
    }
};

namespace detail {

/// Uniform k-subset of `pool` (partial Fisher-Yates), returned sorted.
inline std::vector<Index> sample_subset(std::vector<Index> pool, Index k, Rng& rng) {
    k = std::min(k, static_cast<Index>(pool.size()));
    for (Index q = 0; q < k; ++q) {
        std::uniform_int_distribution<Index> pick(q, pool.size() - 1);
        std::swap(pool[q], pool[pick(rng)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

inline std::vector<Index> iota_vector(Index n) {
    std::vector<Index> v(n);
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

} // namespace detail

/// Random (s, sigma)-sparse signal: s active blocks chosen uniformly among
/// those with sigma_i > 0, sigma_i positions per active block, i.i.d.
/// standard complex Gaussian values.
inline BlockVector generate_signal(const BlockStructure& structure, const HiSparsity& k, std::uint64_t seed,
                                   const Placement& placement = Placement::uniform()) {
    k.validate(structure);
    for (Index i = 0; i < structure.num_blocks(); ++i) {
        if (placement.is_front_loaded(i)) {
            detail::require_valid(placement.front_width >= k.sigma[i] && placement.front_width <= structure.block_size(i),
                                  "generate_signal: front-load width must lie in [sigma_i, n_i]");
        }
    }
    Rng rng(seed);
    std::vector<Index> eligible;
    for (Index i = 0; i < structure.num_blocks(); ++i) {
        if (k.sigma[i] > 0) eligible.push_back(i);
    }
    BlockVector x(structure);
    for (Index i : detail::sample_subset(eligible, k.s, rng)) {
        const Index span = placement.is_front_loaded(i) ? placement.front_width : structure.block_size(i);
        for (Index j : detail::sample_subset(detail::iota_vector(span), k.sigma[i], rng)) {
            x(i, j) = complex_gaussian(rng);
        }
    }
    return x;
}

/// Sentinel for noiseless measurements.
inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

/// Per-entry complex noise variance giving ||y||^2 / E||eta||^2 = 10^(snr/10).
inline double noise_variance(const Vector& y, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return y.squaredNorm() / (static_cast<double>(y.size()) * std::pow(10.0, snr_db / 10.0));
}

inline Vector add_noise(const Vector& y, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return y;
    detail::require_valid(std::isfinite(snr_db), "add_noise: SNR must be finite or +inf");
    detail::require_valid(y.squaredNorm() > 0.0, "add_noise: zero signal has no finite SNR");
    const double variance = noise_variance(y, snr_db);
    Rng rng(seed);
    Vector out = y;
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] += complex_gaussian(rng, variance);
    return out;
}

/// (1/n) sum_k |x_k - xhat_k|^2.
inline double mse(const BlockVector& x, const BlockVector& xhat) {
    detail::require_dims(x.structure() == xhat.structure(), "mse: structure mismatch");
    return (x.coeffs() - xhat.coeffs()).squaredNorm() / static_cast<double>(x.size());
}

/// Indices of blocks with any non-zero entry.
inline std::set<Index> active_blocks(const BlockVector& x) {
    std::set<Index> out;
    for (Index i = 0; i < x.num_blocks(); ++i) {
        if (!x.block(i).isZero(0.0)) out.insert(i);
    }
    return out;
}

/// Fraction of truly active blocks that the estimate also marks active.
/// An all-zero truth counts as fully detected.
inline double detection_rate(const std::set<Index>& truth, const std::set<Index>& estimate) {
    if (truth.empty()) return 1.0;
    Index hits = 0;
    for (Index i : truth) hits += estimate.count(i);
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

} // namespace hisparse
