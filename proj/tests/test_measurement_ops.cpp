#include <gtest/gtest.h>

#include "hisparse/block_model.hpp"
#include "hisparse/measurement_ops.hpp"
#include "oracles.hpp"

using namespace hisparse;

namespace {

HierarchicalOperator random_operator(Index M, Index m, std::vector<Index> sizes, std::uint64_t seed) {
    Matrix A = gaussian_matrix(M, sizes.size(), derive_seed(seed, Stream::channel_gains));
    std::vector<Matrix> Bs;
    for (Index i = 0; i < sizes.size(); ++i) Bs.push_back(gaussian_matrix(m, sizes[i], derive_seed(seed, Stream::block_matrix, i)));
    return HierarchicalOperator(std::move(A), std::move(Bs));
}

Vector random_vector(Index n, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& c : v) c = complex_gaussian(rng);
    return v;
}

} // namespace

TEST(HierarchicalOperator, ShapeValidation) {
    EXPECT_THROW(HierarchicalOperator(Matrix::Ones(2, 2), {Matrix::Ones(3, 1)}), DimensionError);
    EXPECT_THROW(HierarchicalOperator(Matrix::Ones(2, 2), {Matrix::Ones(3, 1), Matrix::Ones(2, 1)}), DimensionError);
    const HierarchicalOperator H(Matrix::Ones(2, 2), {Matrix::Ones(3, 1), Matrix::Ones(3, 4)});
    EXPECT_EQ(H.output_dim(), 6u);
    EXPECT_EQ(H.input_structure().total_dim(), 5u);
}

TEST(Apply, IdentityCase) {
    const auto H = identity_operator(2);
    BlockVector x(BlockStructure({2}));
    x(0, 0) = {1.5, -2.0};
    x(0, 1) = {0.25, 3.0};
    EXPECT_EQ(H.apply(x), x.coeffs());
    EXPECT_EQ(H.adjoint_apply(x.coeffs()).coeffs(), x.coeffs());
    EXPECT_EQ(H.assemble_dense(), Matrix::Identity(2, 2));
}

TEST(Apply, ScalarSum) {
    Matrix A(1, 2);
    A << 1, 1;
    const HierarchicalOperator H(A, {Matrix::Ones(1, 1), Matrix::Ones(1, 1)});
    BlockVector x(BlockStructure({1, 1}));
    x(0, 0) = 2.0;
    x(1, 0) = 3.0;
    const Vector y = H.apply(x);
    ASSERT_EQ(y.size(), 1);
    EXPECT_EQ(y[0], Complex(5.0));
}

TEST(Apply, MatchesDenseAssemblyOracle) {
    const auto H = random_operator(3, 4, {2, 3}, 5);
    const Matrix D = oracle::dense(H);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto x = random_block_vector(H.input_structure(), seed);
        EXPECT_LE((H.apply(x) - D * x.coeffs()).norm(), 1e-12 * D.norm() * x.norm());
    }
    EXPECT_LE((H.assemble_dense() - D).norm(), 1e-14);
}

TEST(Apply, StructureMismatch) {
    const auto H = random_operator(2, 3, {2, 2}, 1);
    EXPECT_THROW(H.apply(BlockVector(BlockStructure({2, 3}))), DimensionError);
    EXPECT_THROW(H.adjoint_apply(Vector::Zero(5)), DimensionError);
}

TEST(AdjointApply, ZeroInput) {
    const auto H = random_operator(3, 2, {4, 1, 2}, 3);
    EXPECT_TRUE(H.adjoint_apply(Vector::Zero(6)).coeffs().isZero(0.0));
}

TEST(AdjointApply, InnerProductIdentity) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::uniform_int_distribution<Index> dim(1, 6);
        std::vector<Index> sizes(dim(rng));
        for (auto& n : sizes) n = dim(rng);
        const auto H = random_operator(dim(rng), dim(rng), sizes, seed);
        const auto x = random_block_vector(H.input_structure(), seed + 1000);
        const Vector y = random_vector(H.output_dim(), seed + 2000);
        const Complex lhs = y.dot(H.apply(x));                     // <Hx, y> = y^* H x
        const Complex rhs = H.adjoint_apply(y).coeffs().dot(x.coeffs());  // <x, H^* y>
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * x.norm() * y.norm()) << "seed " << seed;
    }
}

TEST(AssembleDense, BudgetGuard) {
    const auto H = random_operator(4, 4, {4, 4}, 2);
    EXPECT_THROW(H.assemble_dense(10), BudgetExceeded);
    EXPECT_NO_THROW(H.assemble_dense(128));
}

TEST(Kronecker, ScalarAIsB) {
    const Matrix B = gaussian_matrix(3, 4, 8);
    const auto H = kronecker_operator(Matrix::Ones(1, 1), B);
    EXPECT_EQ(H.assemble_dense(), B);
}

TEST(Kronecker, IdentityTimesIdentity) {
    const auto H = kronecker_operator(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    EXPECT_EQ(H.assemble_dense(), Matrix::Identity(4, 4));
}

TEST(Kronecker, MatchesTextbookFormula) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix A = gaussian_matrix(3, 4, seed);
        const Matrix B = subsampled_dft(3, 5, seed + 10);
        EXPECT_LE((kronecker_operator(A, B).assemble_dense() - oracle::kron(A, B)).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(GaussianMatrix, UnitColumnsAndDeterminism) {
    const Matrix G = gaussian_matrix(7, 5, 123);
    for (Eigen::Index c = 0; c < G.cols(); ++c) EXPECT_NEAR(G.col(c).norm(), 1.0, 1e-12);
    EXPECT_EQ(G, gaussian_matrix(7, 5, 123));
    EXPECT_NE(G, gaussian_matrix(7, 5, 124));
    EXPECT_THROW(gaussian_matrix(0, 3, 1), ValidationError);
}

TEST(GaussianMatrix, TallMatricesAreNearIsometriesOnPairs) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix G = gaussian_matrix(200, 20, seed);
        double delta1 = 0.0;
        for (Eigen::Index c = 0; c < G.cols(); ++c) delta1 = std::max(delta1, std::abs(G.col(c).squaredNorm() - 1.0));
        EXPECT_LE(delta1, 1e-12);
        EXPECT_LT(oracle::rip2(G), 0.5) << "seed " << seed;
    }
}

TEST(SubsampledDft, FullDftIsUnitary) {
    const Matrix F = subsampled_dft(8, 8, 4);
    EXPECT_LE((F.adjoint() * F - Matrix::Identity(8, 8)).norm(), 1e-12);
}

TEST(SubsampledDft, UnitColumnsAndDeterminism) {
    for (Index m : {1u, 3u, 7u}) {
        const Matrix F = subsampled_dft(m, 9, 17);
        for (Eigen::Index c = 0; c < F.cols(); ++c) EXPECT_NEAR(F.col(c).norm(), 1.0, 1e-12);
        EXPECT_EQ(F, subsampled_dft(m, 9, 17));
    }
    EXPECT_THROW(subsampled_dft(5, 4, 0), ValidationError);
    EXPECT_THROW(subsampled_dft(0, 4, 0), ValidationError);
}

TEST(SubsampledDft, RowsAreDistinctDftRows) {
    const Index m = 5, n = 12;
    const Matrix F = subsampled_dft(m, n, 31);
    std::vector<Index> rows;
    for (Eigen::Index r = 0; r < F.rows(); ++r) {
        // Column 1 holds exp(-2 pi i row / n) / sqrt(m).
        const double angle = -std::arg(F(r, 1) * std::sqrt(double(m)));
        const auto row = static_cast<Index>(std::lround(angle / (2 * std::numbers::pi) * double(n) + double(n))) % n;
        rows.push_back(row);
        for (Index k = 0; k < n; ++k) {
            const double a = -2.0 * std::numbers::pi * double(row * k) / double(n);
            EXPECT_NEAR(std::abs(F(r, Eigen::Index(k)) - Complex(std::cos(a), std::sin(a)) / std::sqrt(double(m))), 0.0,
                        1e-12);
        }
    }
    EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
    EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
}

TEST(RestrictColumns, Examples) {
    const Matrix B = gaussian_matrix(4, 5, 3);
    EXPECT_EQ(restrict_columns(B, {0, 1, 2, 3, 4}), B);
    EXPECT_EQ(restrict_columns(B, {0}), B.col(0));
    EXPECT_EQ(restrict_columns(B, {3, 1}).col(0), B.col(1));
    EXPECT_THROW(restrict_columns(B, {5}), ValidationError);
    EXPECT_THROW(restrict_columns(B, {1, 1}), ValidationError);

    const Matrix F = subsampled_dft(50, 200, 77);
    const Matrix short_block = leading_columns(F, 10);
    EXPECT_EQ(short_block.rows(), 50);
    EXPECT_EQ(short_block.cols(), 10);
    EXPECT_EQ(short_block, F.leftCols(10));
}
