#pragma once

// Hierarchical measurement operators H(x) = sum_i a_i (x) (B_i x_i) and the
// random ensembles that populate them.
//
// Measurement layout: antenna j is the outer index, so y holds M contiguous
// slices of length m and y[j*m + r] = sum_i A(j,i) * (B_i x_i)[r].

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "block_model.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace hisparse {

using Matrix = Eigen::MatrixXcd;

/// Default cap on the number of entries of an assembled dense operator (1 GiB).
inline constexpr Index kDefaultDenseBudget = Index{1} << 26;

class HierarchicalOperator {
public:
    HierarchicalOperator() = default;

    HierarchicalOperator(Matrix A, std::vector<Matrix> Bs) : A_(std::move(A)), Bs_(std::move(Bs)) {
        detail::require_dims(A_.rows() >= 1 && A_.cols() >= 1, "HierarchicalOperator: A must be non-empty");
        detail::require_dims(static_cast<Index>(A_.cols()) == Bs_.size(),
                             "HierarchicalOperator: need one B_i per column of A (A has " +
                                 std::to_string(A_.cols()) + " columns, got " + std::to_string(Bs_.size()) + ")");
        std::vector<Index> sizes;
        sizes.reserve(Bs_.size());
        for (const auto& B : Bs_) {
            detail::require_dims(B.rows() == Bs_.front().rows(), "HierarchicalOperator: all B_i must share a row count");
            detail::require_dims(B.rows() >= 1 && B.cols() >= 1, "HierarchicalOperator: B_i must be non-empty");
            sizes.push_back(static_cast<Index>(B.cols()));
        }
        structure_ = BlockStructure(std::move(sizes));
    }

    const Matrix& A() const noexcept { return A_; }
    const Matrix& B(Index i) const { return Bs_.at(i); }
    const std::vector<Matrix>& Bs() const noexcept { return Bs_; }

    Index antennas() const noexcept { return static_cast<Index>(A_.rows()); }           // M
    Index num_blocks() const noexcept { return static_cast<Index>(A_.cols()); }         // N
    Index rows_per_antenna() const noexcept { return static_cast<Index>(Bs_.front().rows()); }  // m
    Index output_dim() const noexcept { return antennas() * rows_per_antenna(); }
    const BlockStructure& input_structure() const noexcept { return structure_; }

    Vector apply(const BlockVector& x) const {
        detail::require_dims(x.structure() == structure_, "apply: signal structure does not match operator");
        const auto m = static_cast<Eigen::Index>(rows_per_antenna());
        Matrix W = Matrix::Zero(m, A_.cols());
        for (Index i = 0; i < Bs_.size(); ++i) {
            const auto xi = x.block(i);
            if (xi.isZero(0.0)) continue;
            W.col(static_cast<Eigen::Index>(i)).noalias() = Bs_[i] * xi;
        }
        Vector y(static_cast<Eigen::Index>(output_dim()));
        Eigen::Map<Matrix> Y(y.data(), m, A_.rows());
        Y.noalias() = W * A_.transpose();
        return y;
    }

    /// Block i of the result is sum_j conj(A(j,i)) * B_i^* y_j.
    BlockVector adjoint_apply(const Vector& y) const {
        detail::require_dims(static_cast<Index>(y.size()) == output_dim(),
                             "adjoint_apply: measurement length " + std::to_string(y.size()) + " != M*m = " +
                                 std::to_string(output_dim()));
        const auto m = static_cast<Eigen::Index>(rows_per_antenna());
        Eigen::Map<const Matrix> Y(y.data(), m, A_.rows());
        const Matrix Z = Y * A_.conjugate();
        BlockVector out(structure_);
        for (Index i = 0; i < Bs_.size(); ++i) {
            out.block(i).noalias() = Bs_[i].adjoint() * Z.col(static_cast<Eigen::Index>(i));
        }
        return out;
    }

    /// Column of the dense operator for flat coordinate `flat`: a_i (x) B_i e_k.
    Vector column(Index flat) const {
        const Index i = structure_.block_of(flat);
        const Index k = flat - structure_.offset(i);
        const auto m = static_cast<Eigen::Index>(rows_per_antenna());
        Vector col(static_cast<Eigen::Index>(output_dim()));
        const auto bcol = Bs_[i].col(static_cast<Eigen::Index>(k));
        for (Eigen::Index j = 0; j < A_.rows(); ++j) {
            col.segment(j * m, m) = A_(j, static_cast<Eigen::Index>(i)) * bcol;
        }
        return col;
    }

    /// Dense columns for the given flat coordinates, in the given order.
    Matrix columns(const std::vector<Index>& flat) const {
        Matrix out(static_cast<Eigen::Index>(output_dim()), static_cast<Eigen::Index>(flat.size()));
        for (Index c = 0; c < flat.size(); ++c) {
            detail::require_valid(flat[c] < structure_.total_dim(), "columns: coordinate out of range");
            out.col(static_cast<Eigen::Index>(c)) = column(flat[c]);
        }
        return out;
    }

    /// (M*m) x total_dim matrix with the same action as apply().
    Matrix assemble_dense(Index budget = kDefaultDenseBudget) const {
        const Index entries = output_dim() * structure_.total_dim();
        if (entries > budget) {
            throw BudgetExceeded("assemble_dense: " + std::to_string(entries) + " entries exceed budget of " +
                                 std::to_string(budget));
        }
        std::vector<Index> all(structure_.total_dim());
        std::iota(all.begin(), all.end(), Index{0});
        return columns(all);
    }

private:
    Matrix A_;
    std::vector<Matrix> Bs_;
    BlockStructure structure_;
};

/// A (x) B as a hierarchical operator: every block uses the same B.
inline HierarchicalOperator kronecker_operator(const Matrix& A, const Matrix& B) {
    return HierarchicalOperator(A, std::vector<Matrix>(static_cast<Index>(A.cols()), B));
}

/// M = N = 1, A = [1], B = I_n.
inline HierarchicalOperator identity_operator(Index n) {
    return HierarchicalOperator(Matrix::Identity(1, 1), {Matrix::Identity(static_cast<Eigen::Index>(n),
                                                                           static_cast<Eigen::Index>(n))});
}

/// i.i.d. complex Gaussian entries, then every column scaled to unit 2-norm.
inline Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
    detail::require_valid(rows >= 1 && cols >= 1, "gaussian_matrix: rows and cols must be >= 1");
    Rng rng(seed);
    Matrix G(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < G.cols(); ++c) {
        for (Eigen::Index r = 0; r < G.rows(); ++r) G(r, c) = complex_gaussian(rng);
        G.col(c) /= G.col(c).norm();
    }
    return G;
}

/// m distinct rows of the n-point DFT chosen uniformly without replacement,
/// kept in ascending row order, scaled by 1/sqrt(m) so columns have unit norm.
inline Matrix subsampled_dft(Index m, Index n, std::uint64_t seed) {
    detail::require_valid(m >= 1 && m <= n, "subsampled_dft: need 1 <= m <= n");
    Rng rng(seed);
    std::vector<Index> rows(n);
    std::iota(rows.begin(), rows.end(), Index{0});
    // Partial Fisher-Yates: the first m slots are a uniform m-subset.
    for (Index r = 0; r < m; ++r) {
        std::uniform_int_distribution<Index> pick(r, n - 1);
        std::swap(rows[r], rows[pick(rng)]);
    }
    rows.resize(m);
    std::sort(rows.begin(), rows.end());

    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Matrix F(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (Index r = 0; r < m; ++r) {
        for (Index k = 0; k < n; ++k) {
            // Reduce the phase index mod n before scaling to keep the angle small.
            const auto phase = static_cast<double>((rows[r] * k) % n);
            const double angle = -2.0 * std::numbers::pi * phase / static_cast<double>(n);
            F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                scale * Complex(std::cos(angle), std::sin(angle));
        }
    }
    return F;
}

/// Kept columns of B in ascending index order.
inline Matrix restrict_columns(const Matrix& B, std::vector<Index> keep) {
    std::sort(keep.begin(), keep.end());
    detail::require_valid(std::adjacent_find(keep.begin(), keep.end()) == keep.end(),
                          "restrict_columns: duplicate column index");
    Matrix out(B.rows(), static_cast<Eigen::Index>(keep.size()));
    for (Index c = 0; c < keep.size(); ++c) {
        detail::require_valid(keep[c] < static_cast<Index>(B.cols()),
                              "restrict_columns: column index " + std::to_string(keep[c]) + " out of range");
        out.col(static_cast<Eigen::Index>(c)) = B.col(static_cast<Eigen::Index>(keep[c]));
    }
    return out;
}

/// First `count` columns of B (short delay spreads).
inline Matrix leading_columns(const Matrix& B, Index count) {
    std::vector<Index> keep(count);
    std::iota(keep.begin(), keep.end(), Index{0});
    return restrict_columns(B, std::move(keep));
}

/// Gaussian A (M x N) with independently subsampled DFT blocks B_i (m x n_i).
/// A uses stream (seed, channel_gains); B_i uses (seed, block_matrix, i).
inline HierarchicalOperator gaussian_dft_operator(Index M, Index m, const BlockStructure& structure,
                                                  std::uint64_t seed) {
    Matrix A = gaussian_matrix(M, structure.num_blocks(), derive_seed(seed, Stream::channel_gains));
    std::vector<Matrix> Bs;
    Bs.reserve(structure.num_blocks());
    for (Index i = 0; i < structure.num_blocks(); ++i) {
        Bs.push_back(subsampled_dft(m, structure.block_size(i), derive_seed(seed, Stream::block_matrix, i)));
    }
    return HierarchicalOperator(std::move(A), std::move(Bs));
}

} // namespace hisparse
