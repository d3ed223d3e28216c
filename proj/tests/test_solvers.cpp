#include <gtest/gtest.h>

#include "hisparse/rip_lab.hpp"
#include "hisparse/signals.hpp"
#include "hisparse/solvers.hpp"
#include "oracles.hpp"

using namespace hisparse;

namespace {

double relative_error(const BlockVector& truth, const BlockVector& est) {
    return (truth.coeffs() - est.coeffs()).norm() / truth.norm();
}

struct DeskInstance {
    HierarchicalOperator H;
    HiSparsity k;
    BlockVector x;
    Vector y;
};

DeskInstance desk_instance(std::uint64_t seed) {
    const auto st = BlockStructure::uniform(16, 32);
    auto H = gaussian_dft_operator(12, 16, st, seed);
    auto k = HiSparsity::uniform(2, 16, 3);
    auto x = generate_signal(st, k, derive_seed(seed, Stream::signal));
    Vector y = H.apply(x);
    return {std::move(H), std::move(k), std::move(x), std::move(y)};
}

} // namespace

TEST(Hihtp, IdentityRecoversInOneIteration) {
    const auto H = identity_operator(6);
    const HiSparsity k{1, {2}};
    BlockVector x(H.input_structure());
    x(0, 1) = {2.0, -1.0};
    x(0, 4) = {0.5, 0.5};
    const auto r = hihtp(H, H.apply(x), k);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.stop_reason, StopReason::residual);
    EXPECT_LE(relative_error(x, r.estimate), 1e-15);
}

TEST(Hihtp, ZeroMeasurementGivesZero) {
    const auto d = desk_instance(1);
    const auto r = hihtp(d.H, Vector::Zero(static_cast<Eigen::Index>(d.H.output_dim())), d.k);
    EXPECT_TRUE(r.estimate.coeffs().isZero(0.0));
    EXPECT_EQ(r.iterations, 1);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.residual_norm, 0.0);
}

TEST(Hihtp, DimensionErrors) {
    const auto d = desk_instance(2);
    EXPECT_THROW(hihtp(d.H, Vector::Zero(3), d.k), DimensionError);
    EXPECT_THROW(hihtp(d.H, d.y, HiSparsity::uniform(2, 15, 3)), DimensionError);
}

TEST(Hihtp, DeskScaleNoiselessRecovery) {
    int successes = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto d = desk_instance(seed);
        const auto r = hihtp(d.H, d.y, d.k);
        ASSERT_TRUE(is_hi_sparse(r.estimate, d.k));
        EXPECT_NEAR(r.residual_norm, (d.y - d.H.apply(r.estimate)).norm(), 1e-12);
        successes += relative_error(d.x, r.estimate) <= 1e-6 ? 1 : 0;
    }
    EXPECT_GE(successes, 95);
}

TEST(Hihtp, RefitNeverWorseThanThresholdedGradient) {
    const SolverConfig cfg{};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = desk_instance(seed);
        Vector y = add_noise(d.y, 5.0, seed);
        const double y_norm = y.norm();
        int observed = 0;
        hihtp(d.H, y, d.k, cfg, [&](const IterationState& st) {
            const double thresholded = (y - d.H.apply(restrict(st.gradient_point, st.support))).norm();
            EXPECT_LE(st.residual_norm, thresholded + cfg.ls_tol * y_norm);
            // The estimate lives inside the support.
            EXPECT_EQ(restrict(st.estimate, st.support).coeffs(), st.estimate.coeffs());
            ++observed;
        });
        EXPECT_GE(observed, 1);
    }
}

TEST(Hihtp, IterationCapAndDeterminism) {
    const auto d = desk_instance(7);
    const Vector y = add_noise(d.y, 0.0, 3);
    SolverConfig cfg;
    cfg.max_iters = 1;
    cfg.support_stall_stop = false;
    const auto r = hihtp(d.H, y, d.k, cfg);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(r.stop_reason, StopReason::max_iters);
    EXPECT_FALSE(r.converged);

    const auto a = hihtp(d.H, y, d.k);
    const auto b = hihtp(d.H, y, d.k);
    EXPECT_EQ(a.estimate.coeffs(), b.estimate.coeffs());
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.support, b.support);
}

TEST(Hihtp, ExactRecoveryUnderSmallHiRip) {
    // delta_{3s, 3 sigma} below 0.29 on an enumerable instance => exact recovery
    // of every planted (s, sigma)-sparse signal.
    const auto st = BlockStructure::uniform(4, 4);
    const HiSparsity k{1, {1, 1, 1, 1}};
    const HiSparsity k3{3, {3, 3, 3, 3}};
    int certified = 0;
    for (std::uint64_t seed = 0; seed < 40 && certified < 3; ++seed) {
        Matrix A = gaussian_matrix(24, 4, derive_seed(seed, Stream::channel_gains));
        std::vector<Matrix> Bs;
        for (Index i = 0; i < 4; ++i) Bs.push_back(gaussian_matrix(128, 4, derive_seed(seed, Stream::block_matrix, i)));
        const HierarchicalOperator H(std::move(A), std::move(Bs));
        if (rip::hirip_constant_exact(H, k3).delta >= 0.29) continue;
        ++certified;
        for (std::uint64_t t = 0; t < 50; ++t) {
            const auto x = generate_signal(st, k, derive_seed(seed, {t}));
            const auto r = hihtp(H, H.apply(x), k);
            EXPECT_LE(relative_error(x, r.estimate), 1e-8) << "seed " << seed << " trial " << t;
        }
    }
    EXPECT_GE(certified, 1) << "no instance met the HiRIP premise";
}

TEST(HtpFlat, IdentityAndZero) {
    const auto H = identity_operator(8);
    BlockVector x(H.input_structure());
    x(0, 2) = 1.0;
    x(0, 6) = {0.0, -3.0};
    const auto r = htp_flat(H, H.apply(x), 3);
    EXPECT_LE(relative_error(x, r.estimate), 1e-15);

    const auto z = htp_flat(H, Vector::Zero(8), 2);
    EXPECT_TRUE(z.estimate.coeffs().isZero(0.0));
    EXPECT_THROW(htp_flat(H, Vector::Zero(8), 0), ValidationError);
}

TEST(HtpFlat, RespectsFlatBudget) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto d = desk_instance(seed);
        const Index K = flat_budget(d.k);
        EXPECT_EQ(K, 6u);
        const auto r = htp_flat(d.H, add_noise(d.y, 10.0, seed), K);
        EXPECT_LE(nonzero_support(r.estimate).cardinality(), K);
    }
}

TEST(TopKSupport, TiesToLowerIndex) {
    BlockVector x(BlockStructure({2, 2}));
    x.coeffs().setConstant(1.0);
    const auto S = top_k_support(x, 3);
    EXPECT_EQ(S, HiSupport(HiSupport::Entries{{0, {0, 1}}, {1, {0}}}));
}

TEST(LeastSquares, SquareInvertibleFullSupport) {
    const Matrix A = gaussian_matrix(2, 2, 5);
    const Matrix B = gaussian_matrix(3, 3, 6);
    const auto H = kronecker_operator(A, B);
    const Vector y = H.assemble_dense() * random_block_vector(H.input_structure(), 1).coeffs();
    const auto ls = least_squares_on_support(H, y, HiSupport::full(H.input_structure()));
    EXPECT_TRUE(ls.ok());
    const Vector expected = H.assemble_dense().fullPivLu().solve(y);
    EXPECT_LE((ls.estimate.coeffs() - expected).norm(), 1e-10 * expected.norm());
}

TEST(LeastSquares, ExactInterpolationOnSuperset) {
    const auto d = desk_instance(3);
    auto entries = nonzero_support(d.x).entries();
    entries[5].push_back(7);  // a superset of the true support
    const auto ls = least_squares_on_support(d.H, d.y, HiSupport(entries));
    EXPECT_TRUE(ls.ok());
    EXPECT_LE((ls.estimate.coeffs() - d.x.coeffs()).norm(), 1e-10 * d.x.norm());
}

TEST(LeastSquares, DirectAndIterativeMatchQrOracle) {
    // 40 x 12 restricted system: M = 4, m = 10, three blocks of 4 columns.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix A = gaussian_matrix(4, 3, seed);
        std::vector<Matrix> Bs;
        for (Index i = 0; i < 3; ++i) Bs.push_back(gaussian_matrix(10, 6, derive_seed(seed, Stream::block_matrix, i)));
        const HierarchicalOperator H(A, Bs);
        Rng rng(seed);
        Vector y(40);
        for (auto& v : y) v = complex_gaussian(rng);
        const HiSupport S({{0, {0, 1, 2, 3}}, {1, {1, 2, 4, 5}}, {2, {0, 2, 3, 5}}});
        ASSERT_EQ(S.cardinality(), 12u);
        const Vector expected = oracle::qr_solution(oracle::dense(H), S.flat_indices(H.input_structure()), y);

        const auto direct = least_squares_on_support(H, y, S);
        EXPECT_TRUE(direct.ok());
        EXPECT_LE((direct.estimate.coeffs() - expected).norm(), 1e-8 * expected.norm());

        SolverConfig iterative;
        iterative.direct_solve_threshold = 0;
        const auto cgls = least_squares_on_support(H, y, S, iterative);
        EXPECT_TRUE(cgls.ok());
        EXPECT_GT(cgls.iterations, 0);
        EXPECT_LE((cgls.estimate.coeffs() - expected).norm(), 1e-8 * expected.norm());
    }
}

TEST(LeastSquares, FlagsRankDeficiencyAndNonConvergence) {
    const Matrix B = Matrix::Ones(4, 2);  // identical columns
    const auto H = kronecker_operator(Matrix::Ones(1, 1), B);
    const Vector y = Vector::Ones(4);
    const auto ls = least_squares_on_support(H, y, HiSupport::full(H.input_structure()));
    EXPECT_TRUE(ls.rank_deficient);
    EXPECT_FALSE(ls.ok());
    // Best iterate still fits the data.
    EXPECT_LE((H.apply(ls.estimate) - y).norm(), 1e-12);

    const auto d = desk_instance(4);
    SolverConfig starved;
    starved.direct_solve_threshold = 0;
    starved.ls_max_iters = 1;
    const auto partial = least_squares_on_support(d.H, d.y, nonzero_support(d.x), starved);
    EXPECT_FALSE(partial.converged);
    EXPECT_EQ(partial.iterations, 1);
}

TEST(LeastSquares, SolverReportsFailureInsteadOfThrowing) {
    const auto H = kronecker_operator(Matrix::Ones(1, 1), Matrix::Ones(4, 2));
    const auto r = hihtp(H, Vector::Ones(4), HiSparsity{1, {2}});
    EXPECT_EQ(r.stop_reason, StopReason::ls_failure);
    EXPECT_FALSE(r.converged);
}

TEST(LeastSquares, EmptySupportAndBadInputs) {
    const auto d = desk_instance(5);
    EXPECT_TRUE(least_squares_on_support(d.H, d.y, HiSupport{}).estimate.coeffs().isZero(0.0));
    EXPECT_THROW(least_squares_on_support(d.H, Vector::Zero(2), HiSupport{}), DimensionError);
    EXPECT_THROW(least_squares_on_support(d.H, d.y, HiSupport(HiSupport::Entries{{16, {0}}})), ValidationError);
}
