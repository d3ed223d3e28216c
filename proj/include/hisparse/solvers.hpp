#pragma once

// Hard thresholding pursuit for hierarchically sparse signals (HiHTP) and its
// unstructured counterpart. Each iteration takes a unit gradient step, projects
// onto the sparsity model to pick a support, then refits by least squares on
// that support.

#include <algorithm>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "block_model.hpp"
#include "errors.hpp"
#include "measurement_ops.hpp"

namespace hisparse {

struct SolverConfig {
    int max_iters = 50;
    bool support_stall_stop = true;
    double residual_tol = 1e-7;
    double ls_tol = 1e-10;
    int ls_max_iters = 1000;
    /// Restricted systems with at most this many columns are solved by a
    /// column-pivoted QR; larger ones by CGLS on the normal equations.
    Index direct_solve_threshold = 256;

    void validate() const {
        detail::require_valid(max_iters >= 1 && ls_max_iters >= 1, "SolverConfig: iteration caps must be >= 1");
        detail::require_valid(residual_tol >= 0.0 && ls_tol >= 0.0, "SolverConfig: tolerances must be >= 0");
    }
};

enum class StopReason { support_repeat, residual, max_iters, ls_failure };

inline std::string_view to_string(StopReason r) {
    switch (r) {
    case StopReason::support_repeat: return "support-repeat";
    case StopReason::residual: return "residual";
    case StopReason::max_iters: return "max-iters";
    case StopReason::ls_failure: return "ls-failure";
    }
    return "unknown";
}

struct SolverResult {
    BlockVector estimate;
    HiSupport support;
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
    StopReason stop_reason = StopReason::max_iters;
};

struct LeastSquaresResult {
    BlockVector estimate;
    bool converged = true;
    bool rank_deficient = false;
    int iterations = 0;

    bool ok() const noexcept { return converged && !rank_deficient; }
};

/// Snapshot handed to an iteration observer after every refit.
struct IterationState {
    int iteration;
    const BlockVector& gradient_point;  // x^k + H^*(y - H x^k)
    const HiSupport& support;
    const BlockVector& estimate;        // x^{k+1}
    double residual_norm;
};

using IterationObserver = std::function<void(const IterationState&)>;

namespace detail {

inline LeastSquaresResult cgls_on_support(const HierarchicalOperator& H, const Vector& y, const HiSupport& S,
                                          const SolverConfig& cfg) {
    const auto& structure = H.input_structure();
    LeastSquaresResult out{BlockVector(structure)};
    BlockVector& x = out.estimate;

    Vector r = y;
    BlockVector s = restrict(H.adjoint_apply(r), S);
    BlockVector p = s;
    double gamma = s.coeffs().squaredNorm();
    const double target = cfg.ls_tol * std::sqrt(gamma);
    if (gamma == 0.0) return out;

    out.converged = false;
    for (int it = 1; it <= cfg.ls_max_iters; ++it) {
        out.iterations = it;
        const Vector q = H.apply(p);
        const double qq = q.squaredNorm();
        if (qq == 0.0) {
            out.rank_deficient = true;
            return out;
        }
        const double alpha = gamma / qq;
        x.coeffs() += alpha * p.coeffs();
        r -= alpha * q;
        s = restrict(H.adjoint_apply(r), S);
        const double gamma_next = s.coeffs().squaredNorm();
        if (std::sqrt(gamma_next) <= target) {
            out.converged = true;
            return out;
        }
        p.coeffs() = s.coeffs() + (gamma_next / gamma) * p.coeffs();
        gamma = gamma_next;
    }
    return out;
}

} // namespace detail

/// Minimizer of ||y - H z|| over z supported in S. Small systems go through a
/// rank-revealing QR; rank deficiency and CGLS non-convergence are flagged and
/// the best available iterate is returned.
inline LeastSquaresResult least_squares_on_support(const HierarchicalOperator& H, const Vector& y, const HiSupport& S,
                                                   const SolverConfig& cfg = {}) {
    const auto& structure = H.input_structure();
    detail::require_dims(static_cast<Index>(y.size()) == H.output_dim(), "least_squares_on_support: bad y length");
    S.validate(structure);
    const auto flat = S.flat_indices(structure);
    detail::require_valid(flat.size() <= H.output_dim(),
                          "least_squares_on_support: support larger than the number of measurements");

    if (flat.empty()) return {BlockVector(structure)};
    if (flat.size() > cfg.direct_solve_threshold) return detail::cgls_on_support(H, y, S, cfg);

    const Matrix Hs = H.columns(flat);
    Eigen::ColPivHouseholderQR<Matrix> qr(Hs);
    const Vector z = qr.solve(y);
    LeastSquaresResult out{BlockVector(structure)};
    out.rank_deficient = qr.rank() < Hs.cols();
    for (Index c = 0; c < flat.size(); ++c) out.estimate.coeffs()[static_cast<Eigen::Index>(flat[c])] = z[static_cast<Eigen::Index>(c)];
    return out;
}

/// Support of the K largest-magnitude coordinates over the whole vector
/// (ties to the lower flat index), grouped by block.
inline HiSupport top_k_support(const BlockVector& x, Index K) {
    const auto& c = x.coeffs();
    std::vector<double> magnitude(static_cast<Index>(c.size()));
    for (Eigen::Index j = 0; j < c.size(); ++j) magnitude[static_cast<Index>(j)] = std::norm(c[j]);
    const auto keep = detail::top_indices(magnitude, magnitude.size(), K);
    HiSupport::Entries entries;
    for (Index flat : keep) {
        const Index i = x.structure().block_of(flat);
        entries[i].push_back(flat - x.structure().offset(i));
    }
    return HiSupport(std::move(entries));
}

namespace detail {

template <class Project>
SolverResult htp_loop(const HierarchicalOperator& H, const Vector& y, const SolverConfig& cfg, Project&& project,
                      const IterationObserver& observer) {
    cfg.validate();
    detail::require_dims(static_cast<Index>(y.size()) == H.output_dim(),
                         "htp: measurement length does not match operator");
    const auto& structure = H.input_structure();
    const double y_norm = y.norm();

    SolverResult result{BlockVector(structure), HiSupport{}};
    Vector residual = y;
    result.residual_norm = y_norm;
    std::optional<HiSupport> previous;

    for (int it = 1; it <= cfg.max_iters; ++it) {
        BlockVector u = H.adjoint_apply(residual);
        u.coeffs() += result.estimate.coeffs();
        HiSupport support = project(u);

        if (cfg.support_stall_stop && previous && support == *previous) {
            result.converged = true;
            result.stop_reason = StopReason::support_repeat;
            return result;
        }

        auto ls = least_squares_on_support(H, y, support, cfg);
        result.estimate = std::move(ls.estimate);
        result.support = std::move(support);
        result.iterations = it;
        residual = y - H.apply(result.estimate);
        result.residual_norm = residual.norm();

        if (observer) observer({it, u, result.support, result.estimate, result.residual_norm});

        if (!ls.ok()) {
            result.converged = false;
            result.stop_reason = StopReason::ls_failure;
            return result;
        }
        if (result.residual_norm <= cfg.residual_tol * y_norm) {
            result.converged = true;
            result.stop_reason = StopReason::residual;
            return result;
        }
        previous = result.support;
    }
    result.converged = false;
    result.stop_reason = StopReason::max_iters;
    return result;
}

} // namespace detail

/// Hierarchical hard thresholding pursuit, started from x = 0.
inline SolverResult hihtp(const HierarchicalOperator& H, const Vector& y, const HiSparsity& k,
                          const SolverConfig& cfg = {}, const IterationObserver& observer = {}) {
    k.validate(H.input_structure());
    return detail::htp_loop(
        H, y, cfg, [&](const BlockVector& u) { return hi_threshold(u, k).support; }, observer);
}

/// Default flat budget matching an (s, sigma) model: s * max_i sigma_i.
inline Index flat_budget(const HiSparsity& k) { return k.s * k.max_sigma(); }

/// Standard hard thresholding pursuit keeping the K_total largest entries.
inline SolverResult htp_flat(const HierarchicalOperator& H, const Vector& y, Index K_total,
                             const SolverConfig& cfg = {}, const IterationObserver& observer = {}) {
    detail::require_valid(K_total >= 1 && K_total <= H.input_structure().total_dim(),
                          "htp_flat: K_total must lie in [1, total_dim]");
    return detail::htp_loop(
        H, y, cfg, [&](const BlockVector& u) { return top_k_support(u, K_total); }, observer);
}

} // namespace hisparse
