#pragma once

// Block-partitioned complex signals and the hierarchical (s, sigma) sparsity
// model: at most s non-zero blocks, each non-zero block i at most sigma_i-sparse.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "random.hpp"

namespace hisparse {

using Vector = Eigen::VectorXcd;
using Index = std::size_t;

/// Partition of the signal dimension into N contiguous blocks of sizes n_1..n_N.
class BlockStructure {
public:
    BlockStructure() = default;

    explicit BlockStructure(std::vector<Index> block_sizes) : sizes_(std::move(block_sizes)) {
        detail::require_valid(!sizes_.empty(), "BlockStructure: at least one block is required");
        offsets_.resize(sizes_.size() + 1, 0);
        for (Index i = 0; i < sizes_.size(); ++i) {
            detail::require_valid(sizes_[i] >= 1, "BlockStructure: block sizes must be >= 1");
            offsets_[i + 1] = offsets_[i] + sizes_[i];
        }
    }

    static BlockStructure uniform(Index blocks, Index size) {
        return BlockStructure(std::vector<Index>(blocks, size));
    }

    Index num_blocks() const noexcept { return sizes_.size(); }
    Index total_dim() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
    Index block_size(Index i) const { return sizes_.at(i); }
    Index offset(Index i) const { return offsets_.at(i); }
    const std::vector<Index>& block_sizes() const noexcept { return sizes_; }

    /// Block index owning flat coordinate `flat`.
    Index block_of(Index flat) const {
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
        return static_cast<Index>(it - offsets_.begin()) - 1;
    }

    friend bool operator==(const BlockStructure& a, const BlockStructure& b) noexcept {
        return a.sizes_ == b.sizes_;
    }

private:
    std::vector<Index> sizes_;
    std::vector<Index> offsets_;
};

/// Sparsity budget (s, sigma): s non-zero blocks, sigma_i entries inside block i.
/// sigma_i = 0 marks block i as excluded.
struct HiSparsity {
    Index s = 1;
    std::vector<Index> sigma;

    static HiSparsity uniform(Index s, Index blocks, Index sigma) {
        return {s, std::vector<Index>(blocks, sigma)};
    }

    void validate(const BlockStructure& structure) const {
        detail::require_dims(sigma.size() == structure.num_blocks(),
                             "HiSparsity: sigma has " + std::to_string(sigma.size()) + " entries, structure has " +
                                 std::to_string(structure.num_blocks()) + " blocks");
        detail::require_valid(s >= 1 && s <= structure.num_blocks(), "HiSparsity: need 1 <= s <= N");
        for (Index i = 0; i < sigma.size(); ++i) {
            detail::require_valid(sigma[i] <= structure.block_size(i),
                                  "HiSparsity: sigma_" + std::to_string(i) + " exceeds block size");
        }
    }

    Index max_sigma() const { return sigma.empty() ? 0 : *std::max_element(sigma.begin(), sigma.end()); }
};

/// Complex coefficient vector together with its block partition. Blocks are
/// views into one flat buffer.
class BlockVector {
public:
    BlockVector() = default;

    explicit BlockVector(BlockStructure structure)
        : structure_(std::move(structure)), coeffs_(Vector::Zero(static_cast<Eigen::Index>(structure_.total_dim()))) {}

    BlockVector(BlockStructure structure, Vector coeffs) : structure_(std::move(structure)), coeffs_(std::move(coeffs)) {
        detail::require_dims(static_cast<Index>(coeffs_.size()) == structure_.total_dim(),
                             "BlockVector: coefficient length does not match block structure");
    }

    const BlockStructure& structure() const noexcept { return structure_; }
    Index num_blocks() const noexcept { return structure_.num_blocks(); }
    Index size() const noexcept { return static_cast<Index>(coeffs_.size()); }

    const Vector& coeffs() const noexcept { return coeffs_; }
    Vector& coeffs() noexcept { return coeffs_; }

    auto block(Index i) {
        return coeffs_.segment(static_cast<Eigen::Index>(structure_.offset(i)),
                               static_cast<Eigen::Index>(structure_.block_size(i)));
    }
    auto block(Index i) const {
        return coeffs_.segment(static_cast<Eigen::Index>(structure_.offset(i)),
                               static_cast<Eigen::Index>(structure_.block_size(i)));
    }

    Complex& operator()(Index i, Index k) { return coeffs_[static_cast<Eigen::Index>(structure_.offset(i) + k)]; }
    Complex operator()(Index i, Index k) const { return coeffs_[static_cast<Eigen::Index>(structure_.offset(i) + k)]; }

    double norm() const { return coeffs_.norm(); }

private:
    BlockStructure structure_;
    Vector coeffs_;
};

/// Hierarchical support: for every active block, the sorted within-block
/// coordinates that are kept. A block is active iff it has a key.
class HiSupport {
public:
    using Entries = std::map<Index, std::vector<Index>>;

    HiSupport() = default;
    explicit HiSupport(Entries entries) : entries_(std::move(entries)) {
        for (auto& [block, coords] : entries_) {
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        }
    }

    /// Every coordinate of every block.
    static HiSupport full(const BlockStructure& structure) {
        Entries e;
        for (Index i = 0; i < structure.num_blocks(); ++i) {
            std::vector<Index> all(structure.block_size(i));
            std::iota(all.begin(), all.end(), Index{0});
            e.emplace(i, std::move(all));
        }
        return HiSupport(std::move(e));
    }

    const Entries& entries() const noexcept { return entries_; }

    std::vector<Index> active_blocks() const {
        std::vector<Index> out;
        out.reserve(entries_.size());
        for (const auto& kv : entries_) out.push_back(kv.first);
        return out;
    }

    Index num_active_blocks() const noexcept { return entries_.size(); }

    Index cardinality() const noexcept {
        Index n = 0;
        for (const auto& kv : entries_) n += kv.second.size();
        return n;
    }

    bool contains(Index block, Index coord) const {
        auto it = entries_.find(block);
        return it != entries_.end() && std::binary_search(it->second.begin(), it->second.end(), coord);
    }

    /// Flat coordinates (block offset + within-block index) in ascending order.
    std::vector<Index> flat_indices(const BlockStructure& structure) const {
        std::vector<Index> out;
        out.reserve(cardinality());
        for (const auto& [block, coords] : entries_) {
            for (Index k : coords) out.push_back(structure.offset(block) + k);
        }
        return out;
    }

    void validate(const BlockStructure& structure) const {
        for (const auto& [block, coords] : entries_) {
            detail::require_valid(block < structure.num_blocks(),
                                  "HiSupport: block index " + std::to_string(block) + " out of range");
            for (Index k : coords) {
                detail::require_valid(k < structure.block_size(block),
                                      "HiSupport: coordinate " + std::to_string(k) + " out of range in block " +
                                          std::to_string(block));
            }
        }
    }

    friend bool operator==(const HiSupport& a, const HiSupport& b) noexcept { return a.entries_ == b.entries_; }

private:
    Entries entries_;
};

struct ThresholdResult {
    BlockVector vector;
    HiSupport support;
};

namespace detail {

/// Indices of the `count` largest values, descending, ties to the lower index.
template <class Values>
std::vector<Index> top_indices(const Values& values, Index n, Index count) {
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    count = std::min(count, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                      [&](Index a, Index b) {
                          if (values[a] != values[b]) return values[a] > values[b];
                          return a < b;
                      });
    order.resize(count);
    return order;
}

} // namespace detail

/// Best (s, sigma)-sparse approximation in the 2-norm.
///
/// Each block keeps its sigma_i largest-magnitude entries; blocks are ranked by
/// the energy of what they kept and the s best survive. Ties go to the lower
/// index at both levels. Blocks with sigma_i = 0 are never selected. The
/// returned support lists every kept coordinate, including exact zeros.
inline ThresholdResult hi_threshold(const BlockVector& x, const HiSparsity& k) {
    const auto& structure = x.structure();
    k.validate(structure);

    const Index n_blocks = structure.num_blocks();
    std::vector<std::vector<Index>> kept(n_blocks);
    std::vector<double> score(n_blocks, -1.0);
    std::vector<double> magnitude;

    for (Index i = 0; i < n_blocks; ++i) {
        if (k.sigma[i] == 0) continue;
        const auto blk = x.block(i);
        const Index n = structure.block_size(i);
        magnitude.resize(n);
        for (Index j = 0; j < n; ++j) magnitude[j] = std::norm(blk[static_cast<Eigen::Index>(j)]);
        kept[i] = detail::top_indices(magnitude, n, k.sigma[i]);
        double e = 0.0;
        for (Index j : kept[i]) e += magnitude[j];
        score[i] = e;
    }

    Index eligible = 0;
    for (Index i = 0; i < n_blocks; ++i) eligible += k.sigma[i] > 0 ? 1 : 0;
    const auto winners = detail::top_indices(score, n_blocks, std::min(k.s, eligible));

    BlockVector out(structure);
    HiSupport::Entries entries;
    for (Index i : winners) {
        for (Index j : kept[i]) out(i, j) = x(i, j);
        entries.emplace(i, kept[i]);
    }
    return {std::move(out), HiSupport(std::move(entries))};
}

/// True iff at most s blocks are non-zero and each non-zero block i has at most
/// sigma_i non-zero entries.
inline bool is_hi_sparse(const BlockVector& x, const HiSparsity& k) {
    detail::require_dims(k.sigma.size() == x.num_blocks(), "is_hi_sparse: sparsity/structure block count mismatch");
    Index nonzero_blocks = 0;
    for (Index i = 0; i < x.num_blocks(); ++i) {
        const auto blk = x.block(i);
        Index nnz = 0;
        for (Eigen::Index j = 0; j < blk.size(); ++j) nnz += blk[j] != Complex(0.0, 0.0) ? 1 : 0;
        if (nnz == 0) continue;
        ++nonzero_blocks;
        if (nnz > k.sigma[i]) return false;
    }
    return nonzero_blocks <= k.s;
}

/// Copy of x with every coordinate outside S zeroed.
inline BlockVector restrict(const BlockVector& x, const HiSupport& support) {
    support.validate(x.structure());
    BlockVector out(x.structure());
    for (const auto& [block, coords] : support.entries()) {
        for (Index j : coords) out(block, j) = x(block, j);
    }
    return out;
}

inline std::vector<double> block_norms(const BlockVector& x) {
    std::vector<double> out(x.num_blocks());
    for (Index i = 0; i < x.num_blocks(); ++i) out[i] = x.block(i).norm();
    return out;
}

/// Support of the non-zero entries of x.
inline HiSupport nonzero_support(const BlockVector& x) {
    HiSupport::Entries entries;
    for (Index i = 0; i < x.num_blocks(); ++i) {
        const auto blk = x.block(i);
        std::vector<Index> coords;
        for (Eigen::Index j = 0; j < blk.size(); ++j) {
            if (blk[j] != Complex(0.0, 0.0)) coords.push_back(static_cast<Index>(j));
        }
        if (!coords.empty()) entries.emplace(i, std::move(coords));
    }
    return HiSupport(std::move(entries));
}

/// i.i.d. standard complex Gaussian entries.
inline BlockVector random_block_vector(const BlockStructure& structure, std::uint64_t seed) {
    Rng rng(seed);
    BlockVector x(structure);
    for (Eigen::Index j = 0; j < x.coeffs().size(); ++j) x.coeffs()[j] = complex_gaussian(rng);
    return x;
}

} // namespace hisparse
