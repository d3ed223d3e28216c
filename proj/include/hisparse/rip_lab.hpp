#pragma once

// Exact restricted isometry constants by exhaustive support enumeration, and
// numeric checks of the HiRIP composition bound and its companion
// inequalities. Desk-scale only: every routine enumerates supports under an
// explicit budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "block_model.hpp"
#include "errors.hpp"
#include "measurement_ops.hpp"
#include "random.hpp"

namespace hisparse::rip {

inline constexpr Index kDefaultEnumerationBudget = 2'000'000;

enum class Mode { exact_enumeration, randomized_lower_bound };

inline std::string_view to_string(Mode m) {
    return m == Mode::exact_enumeration ? "exact-enumeration" : "randomized-lower-bound";
}

struct RipEstimate {
    double delta = 0.0;
    Mode mode = Mode::exact_enumeration;
    Index supports_examined = 0;
    std::vector<Index> argmax_support;  // flat column indices
};

struct EnumerationOptions {
    Index budget = kDefaultEnumerationBudget;
    unsigned threads = 1;
};

/// C(n, k), saturating at the largest Index.
inline Index binomial(Index n, Index k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    Index r = 1;
    for (Index i = 1; i <= k; ++i) {
        const Index num = n - k + i;
        if (r > std::numeric_limits<Index>::max() / num) return std::numeric_limits<Index>::max();
        r = r * num / i;  // exact: r * num is divisible by i at every step
    }
    return r;
}

inline Index saturating_mul(Index a, Index b) {
    if (a != 0 && b > std::numeric_limits<Index>::max() / a) return std::numeric_limits<Index>::max();
    return a * b;
}

/// Spectral norm of (G_T - I) for the principal submatrix of the Gram matrix G on T.
inline double restricted_deviation(const Matrix& gram, const std::vector<Index>& T) {
    if (T.empty()) return 0.0;
    if (T.size() == 1) {
        const auto t = static_cast<Eigen::Index>(T[0]);
        return std::abs(gram(t, t).real() - 1.0);
    }
    const auto n = static_cast<Eigen::Index>(T.size());
    Matrix sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = gram(static_cast<Eigen::Index>(T[a]), static_cast<Eigen::Index>(T[b]));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    return std::max(std::abs(ev.maxCoeff() - 1.0), std::abs(1.0 - ev.minCoeff()));
}

namespace detail {

/// Advance `c` (strictly increasing, values < n) to the next k-combination in
/// lexicographic order. Returns false after the last one.
inline bool next_combination(std::vector<Index>& c, Index n) {
    const Index k = c.size();
    for (Index pos = k; pos-- > 0;) {
        if (c[pos] < n - k + pos) {
            ++c[pos];
            for (Index q = pos + 1; q < k; ++q) c[q] = c[q - 1] + 1;
            return true;
        }
    }
    return false;
}

inline std::vector<Index> first_combination(Index k) {
    std::vector<Index> c(k);
    for (Index q = 0; q < k; ++q) c[q] = q;
    return c;
}

/// Calls visit(ordinal, support) for every k-subset of [0, n) in lexicographic order.
template <class Visit>
void for_each_combination(Index n, Index k, Visit&& visit) {
    auto c = first_combination(k);
    Index ordinal = 0;
    do {
        visit(ordinal++, c);
    } while (k > 0 && next_combination(c, n));
}

struct Best {
    double delta = -1.0;
    Index ordinal = 0;
    std::vector<Index> support;

    void offer(double d, Index ord, const std::vector<Index>& s) {
        if (d > delta || (d == delta && ord < ordinal)) {
            delta = d;
            ordinal = ord;
            support = s;
        }
    }
};

/// Runs `enumerate(visit)` on `threads` workers; worker t evaluates only the
/// ordinals congruent to t. The reduction keeps the largest deviation and, on
/// ties, the lexicographically first support, so the answer does not depend on
/// the thread count.
template <class Enumerate>
Best parallel_max_deviation(const Matrix& gram, unsigned threads, Enumerate&& enumerate) {
    threads = std::max(1u, threads);
    std::vector<Best> partial(threads);
    auto work = [&](unsigned t) {
        enumerate([&](Index ordinal, const std::vector<Index>& support) {
            if (ordinal % threads != t) return;
            partial[t].offer(restricted_deviation(gram, support), ordinal, support);
        });
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    Best best;
    for (const auto& p : partial) {
        if (p.delta >= 0.0) best.offer(p.delta, p.ordinal, p.support);
    }
    return best;
}

} // namespace detail

/// Smallest delta with | ||Bx||^2 - ||x||^2 | <= delta ||x||^2 for all S-sparse x.
inline RipEstimate rip_constant_exact(const Matrix& B, Index S, const EnumerationOptions& opts = {}) {
    const auto cols = static_cast<Index>(B.cols());
    hisparse::detail::require_valid(S <= cols, "rip_constant_exact: sparsity exceeds column count");
    const Index count = binomial(cols, S);
    if (count > opts.budget) {
        throw BudgetExceeded("rip_constant_exact: " + std::to_string(count) + " supports exceed the budget of " +
                             std::to_string(opts.budget) + "; use rip_constant_randomized");
    }
    const Matrix gram = B.adjoint() * B;
    auto best = detail::parallel_max_deviation(gram, opts.threads, [&](auto&& visit) {
        detail::for_each_combination(cols, S, visit);
    });
    return {best.delta, Mode::exact_enumeration, count, std::move(best.support)};
}

/// Lower bound on the S-RIP constant from `trials` uniformly drawn supports.
/// The t-th draw depends only on (seed, t), so fewer trials give a prefix of
/// the same running maximum.
inline RipEstimate rip_constant_randomized(const Matrix& B, Index S, Index trials, std::uint64_t seed) {
    const auto cols = static_cast<Index>(B.cols());
    hisparse::detail::require_valid(trials >= 1, "rip_constant_randomized: trials must be >= 1");
    hisparse::detail::require_valid(S <= cols, "rip_constant_randomized: sparsity exceeds column count");
    const Matrix gram = B.adjoint() * B;
    Rng rng(seed);
    std::vector<Index> pool(cols);
    RipEstimate est{0.0, Mode::randomized_lower_bound, 0, {}};
    for (Index t = 0; t < trials; ++t) {
        for (Index q = 0; q < cols; ++q) pool[q] = q;
        for (Index q = 0; q < S; ++q) {
            std::uniform_int_distribution<Index> pick(q, cols - 1);
            std::swap(pool[q], pool[pick(rng)]);
        }
        std::vector<Index> support(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(S));
        std::sort(support.begin(), support.end());
        const double d = restricted_deviation(gram, support);
        if (d > est.delta || est.supports_examined == 0) {
            est.delta = d;
            est.argmax_support = std::move(support);
        }
        ++est.supports_examined;
    }
    return est;
}

namespace detail {

/// Blocks eligible to be active (sigma_i > 0) and the number chosen per support.
inline std::pair<std::vector<Index>, Index> eligible_blocks(const HiSparsity& k) {
    std::vector<Index> eligible;
    for (Index i = 0; i < k.sigma.size(); ++i) {
        if (k.sigma[i] > 0) eligible.push_back(i);
    }
    return {eligible, std::min(k.s, static_cast<Index>(eligible.size()))};
}

/// Number of maximal (s, sigma) supports.
inline Index count_hi_supports(const BlockStructure& structure, const HiSparsity& k) {
    const auto [eligible, chosen] = eligible_blocks(k);
    const Index block_choices = binomial(eligible.size(), chosen);
    if (block_choices > kDefaultEnumerationBudget) return block_choices;
    Index total = 0;
    for_each_combination(eligible.size(), chosen, [&](Index, const std::vector<Index>& pick) {
        Index prod = 1;
        for (Index p : pick) {
            const Index i = eligible[p];
            prod = saturating_mul(prod, binomial(structure.block_size(i), k.sigma[i]));
        }
        total = total > std::numeric_limits<Index>::max() - prod ? std::numeric_limits<Index>::max() : total + prod;
    });
    return total;
}

/// Calls visit(ordinal, flat_support) for every maximal (s, sigma) support:
/// exactly min(s, #eligible) blocks, exactly sigma_i coordinates in each.
/// Smaller supports need not be visited since principal-submatrix deviations
/// only grow with the support (eigenvalue interlacing).
template <class Visit>
void for_each_hi_support(const BlockStructure& structure, const HiSparsity& k, Visit&& visit) {
    const auto [eligible, chosen] = eligible_blocks(k);
    Index ordinal = 0;
    std::vector<Index> flat;
    for_each_combination(eligible.size(), chosen, [&](Index, const std::vector<Index>& pick) {
        std::vector<std::vector<Index>> inner;
        inner.reserve(pick.size());
        for (Index p : pick) inner.push_back(first_combination(k.sigma[eligible[p]]));
        while (true) {
            flat.clear();
            for (Index q = 0; q < pick.size(); ++q) {
                const Index off = structure.offset(eligible[pick[q]]);
                for (Index c : inner[q]) flat.push_back(off + c);
            }
            visit(ordinal++, flat);
            // Odometer over the per-block combinations, last block fastest.
            Index q = pick.size();
            while (q-- > 0) {
                const Index i = eligible[pick[q]];
                if (next_combination(inner[q], structure.block_size(i))) break;
                inner[q] = first_combination(k.sigma[i]);
            }
            if (q == static_cast<Index>(-1)) break;
        }
    });
}

} // namespace detail

/// Exact (s, sigma)-HiRIP constant of H by enumeration of all hierarchical supports.
inline RipEstimate hirip_constant_exact(const HierarchicalOperator& H, const HiSparsity& k,
                                        const EnumerationOptions& opts = {}) {
    const auto& structure = H.input_structure();
    k.validate(structure);
    const Index count = detail::count_hi_supports(structure, k);
    if (count > opts.budget) {
        throw BudgetExceeded("hirip_constant_exact: " + std::to_string(count) +
                             " hierarchical supports exceed the budget of " + std::to_string(opts.budget));
    }
    const Matrix D = H.assemble_dense();
    const Matrix gram = D.adjoint() * D;
    auto best = detail::parallel_max_deviation(gram, opts.threads, [&](auto&& visit) {
        detail::for_each_hi_support(structure, k, visit);
    });
    return {std::max(best.delta, 0.0), Mode::exact_enumeration, count, std::move(best.support)};
}

/// delta_A + max_i delta_Bi + delta_A * max_i delta_Bi.
inline double hirip_bound(double delta_A, const std::vector<double>& delta_Bs) {
    hisparse::detail::require_valid(delta_A >= 0.0, "hirip_bound: delta_A must be >= 0");
    double sup_B = 0.0;
    for (double d : delta_Bs) {
        hisparse::detail::require_valid(d >= 0.0, "hirip_bound: block constants must be >= 0");
        sup_B = std::max(sup_B, d);
    }
    return delta_A + sup_B + delta_A * sup_B;
}

// ---------------------------------------------------------------------------
// Composition bound

struct TheoremReport {
    double delta_H = 0.0;
    double delta_A = 0.0;
    std::vector<double> delta_Bs;  // 0 for blocks with sigma_i = 0
    double bound = 0.0;
    double slack = 0.0;            // bound - delta_H
    bool passed = false;
};

inline TheoremReport theorem_check(const HierarchicalOperator& H, const HiSparsity& k, double tol = 1e-10,
                                   const EnumerationOptions& opts = {}) {
    TheoremReport r;
    r.delta_H = hirip_constant_exact(H, k, opts).delta;
    r.delta_A = rip_constant_exact(H.A(), k.s, opts).delta;
    for (Index i = 0; i < H.num_blocks(); ++i) {
        r.delta_Bs.push_back(k.sigma[i] == 0 ? 0.0 : rip_constant_exact(H.B(i), k.sigma[i], opts).delta);
    }
    r.bound = hirip_bound(r.delta_A, r.delta_Bs);
    r.slack = r.bound - r.delta_H;
    r.passed = r.slack >= -tol;
    return r;
}

// ---------------------------------------------------------------------------
// Column necessity: every ||a_i|| B_i must be sigma_i-RIP with constant <= delta_H.

struct ColumnNecessityReport {
    double delta_H = 0.0;
    std::vector<double> weighted_deltas;  // delta_{sigma_i}(||a_i|| B_i), 0 if sigma_i = 0
    double worst_slack = 0.0;             // delta_H - max_i weighted_deltas[i]
    bool passed = false;
};

inline ColumnNecessityReport column_necessity_check(const HierarchicalOperator& H, const HiSparsity& k,
                                                    double tol = 1e-10, const EnumerationOptions& opts = {}) {
    ColumnNecessityReport r;
    r.delta_H = hirip_constant_exact(H, k, opts).delta;
    double worst = 0.0;
    for (Index i = 0; i < H.num_blocks(); ++i) {
        double d = 0.0;
        if (k.sigma[i] > 0) {
            const double a_norm = H.A().col(static_cast<Eigen::Index>(i)).norm();
            d = rip_constant_exact(a_norm * H.B(i), k.sigma[i], opts).delta;
        }
        r.weighted_deltas.push_back(d);
        worst = std::max(worst, d);
    }
    r.worst_slack = r.delta_H - worst;
    r.passed = r.worst_slack >= -tol;
    return r;
}

// ---------------------------------------------------------------------------
// Necessity of the RIP of A when the B_i cannot separate some block collection.

struct Prop1Report {
    double epsilon = 0.0;      // max_{i,j in S} ||B_i g_i - B_j g_j||
    double delta_H = 0.0;
    double delta_B = 0.0;      // max_i delta_{sigma_i}(B_i)
    double delta_A = 0.0;      // delta_s(A)
    double denominator = 0.0;  // 1 - delta_B - epsilon
    double bound = 0.0;        // delta_H / denominator^2 (infinite when vacuous)
    bool vacuous = false;
    bool passed = false;
    double slack = 0.0;        // bound - delta_A
};

inline Prop1Report prop1_check(const HierarchicalOperator& H, const HiSparsity& k, const std::vector<Index>& S,
                               const std::map<Index, Vector>& g, double tol = 1e-9,
                               const EnumerationOptions& opts = {}) {
    const auto& structure = H.input_structure();
    k.validate(structure);
    hisparse::detail::require_valid(S.size() == k.s, "prop1_check: |S| must equal s");
    for (Index i : S) {
        hisparse::detail::require_valid(i < H.num_blocks(), "prop1_check: block index out of range");
        auto it = g.find(i);
        hisparse::detail::require_valid(it != g.end(), "prop1_check: missing g_i for a block of S");
        const Vector& gi = it->second;
        hisparse::detail::require_dims(static_cast<Index>(gi.size()) == structure.block_size(i),
                                       "prop1_check: g_i has the wrong length");
        hisparse::detail::require_valid(std::abs(gi.norm() - 1.0) <= 1e-12, "prop1_check: g_i must be unit-norm");
        Index nnz = 0;
        for (Eigen::Index q = 0; q < gi.size(); ++q) nnz += gi[q] != Complex(0.0, 0.0) ? 1 : 0;
        hisparse::detail::require_valid(nnz <= k.sigma[i], "prop1_check: g_i is not sigma_i-sparse");
    }

    Prop1Report r;
    std::vector<Vector> images;
    for (Index i : S) images.push_back(H.B(i) * g.at(i));
    for (Index a = 0; a < images.size(); ++a) {
        for (Index b = a + 1; b < images.size(); ++b) r.epsilon = std::max(r.epsilon, (images[a] - images[b]).norm());
    }
    r.delta_H = hirip_constant_exact(H, k, opts).delta;
    for (Index i = 0; i < H.num_blocks(); ++i) {
        if (k.sigma[i] > 0) r.delta_B = std::max(r.delta_B, rip_constant_exact(H.B(i), k.sigma[i], opts).delta);
    }
    r.delta_A = rip_constant_exact(H.A(), k.s, opts).delta;
    r.denominator = 1.0 - r.delta_B - r.epsilon;
    if (r.denominator <= 0.0) {
        r.vacuous = true;
        r.bound = std::numeric_limits<double>::infinity();
        r.slack = std::numeric_limits<double>::infinity();
        r.passed = true;
        return r;
    }
    r.bound = r.delta_H / (r.denominator * r.denominator);
    r.slack = r.bound - r.delta_A;
    r.passed = r.slack >= -tol;
    return r;
}

// ---------------------------------------------------------------------------
// Trace inequality for Hermitian matrices supported on an s x s pattern.

/// Sum of absolute eigenvalues of a Hermitian matrix.
inline double nuclear_norm_hermitian(const Matrix& X) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(X, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().sum();
}

/// <P, X> = tr(P^* X), real for Hermitian P and X.
inline double frobenius_inner_real(const Matrix& P, const Matrix& X) {
    return (P.adjoint() * X).trace().real();
}

/// G_ij = <B_i g_i, B_j g_j> (linear in the first argument), so that
/// <A^*A, G> = ||H x||^2 and tr(G) = sum_i ||B_i g_i||^2.
inline Matrix gram_matrix(const HierarchicalOperator& H, const BlockVector& x) {
    hisparse::detail::require_dims(x.structure() == H.input_structure(), "gram_matrix: structure mismatch");
    const auto N = static_cast<Eigen::Index>(H.num_blocks());
    Matrix W(static_cast<Eigen::Index>(H.rows_per_antenna()), N);
    for (Eigen::Index i = 0; i < N; ++i) W.col(i) = H.B(static_cast<Index>(i)) * x.block(static_cast<Index>(i));
    return (W.adjoint() * W).transpose();
}

struct Lemma1Report {
    double inner = 0.0;      // <A^*A, X>
    double nuclear = 0.0;    // ||X||_*
    double deviation = 0.0;  // |inner - nuclear|
    double delta_s = 0.0;
    double rhs = 0.0;        // delta_s * nuclear
    double slack = 0.0;      // rhs - deviation
    bool passed = false;
};

inline Lemma1Report lemma1_check(const Matrix& A, const Matrix& X, Index s, double tol = 1e-9,
                                 const EnumerationOptions& opts = {}) {
    hisparse::detail::require_dims(X.rows() == A.cols() && X.cols() == A.cols(),
                                   "lemma1_check: X must be N x N for A with N columns");
    hisparse::detail::require_valid((X - X.adjoint()).cwiseAbs().maxCoeff() <= 1e-12,
                                    "lemma1_check: X is not Hermitian");
    Index pattern = 0;
    for (Eigen::Index r = 0; r < X.rows(); ++r) pattern += X.row(r).isZero(0.0) ? 0 : 1;
    hisparse::detail::require_valid(pattern <= s, "lemma1_check: X has more than s non-zero rows");

    Lemma1Report r;
    r.inner = frobenius_inner_real(A.adjoint() * A, X);
    r.nuclear = nuclear_norm_hermitian(X);
    r.deviation = std::abs(r.inner - r.nuclear);
    r.delta_s = rip_constant_exact(A, s, opts).delta;
    r.rhs = r.delta_s * r.nuclear;
    r.slack = r.rhs - r.deviation;
    r.passed = r.slack >= -tol;
    return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace json_detail {
inline nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
} // namespace json_detail

inline nlohmann::json to_json(const RipEstimate& e) {
    return {{"delta", e.delta},
            {"mode", std::string(to_string(e.mode))},
            {"supports_examined", e.supports_examined},
            {"argmax_support", e.argmax_support}};
}

inline nlohmann::json to_json(const TheoremReport& r) {
    return {{"delta_H", r.delta_H}, {"delta_A", r.delta_A}, {"delta_B", r.delta_Bs},
            {"bound", r.bound},     {"slack", r.slack},     {"passed", r.passed}};
}

inline nlohmann::json to_json(const ColumnNecessityReport& r) {
    return {{"delta_H", r.delta_H},
            {"weighted_delta_B", r.weighted_deltas},
            {"worst_slack", r.worst_slack},
            {"passed", r.passed}};
}

inline nlohmann::json to_json(const Prop1Report& r) {
    return {{"epsilon", r.epsilon},
            {"delta_H", r.delta_H},
            {"delta_B", r.delta_B},
            {"delta_A", r.delta_A},
            {"denominator", r.denominator},
            {"bound", json_detail::finite_or_null(r.bound)},
            {"vacuous", r.vacuous},
            {"slack", json_detail::finite_or_null(r.slack)},
            {"passed", r.passed}};
}

inline nlohmann::json to_json(const Lemma1Report& r) {
    return {{"inner", r.inner},     {"nuclear", r.nuclear}, {"deviation", r.deviation}, {"delta_s", r.delta_s},
            {"rhs", r.rhs},         {"slack", r.slack},     {"passed", r.passed}};
}

} // namespace hisparse::rip
