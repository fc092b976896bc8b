#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace tanbal;

namespace {

Matrix lyap_residual(const Matrix& a, const Matrix& p, const Matrix& g) { return a * p + p * a.transpose() + g; }

}  // namespace

TEST(Lyapunov, ScalarClosedForm) {
    const Matrix p = solve_lyapunov_dense(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0));
    EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
}

TEST(Lyapunov, ModalExampleDiagonalEntry) {
    const StateSpaceModel m = illustrative4();
    const Matrix p = solve_lyapunov_dense(m.dense_a(), m.b() * m.b().transpose());
    EXPECT_NEAR(p(2, 2), 5e5, 5e5 * 1e-12);
}

TEST(Lyapunov, MatchesKroneckerOracleN12) {
    std::mt19937_64 g(12);
    const Matrix a = oracle::random_hurwitz(g, 12);
    const Matrix f = oracle::randn(g, 12, 12);
    const Matrix gsym = f * f.transpose();
    const Matrix p = solve_lyapunov_dense(a, gsym);
    EXPECT_LE(oracle::rel(p, oracle::kron_lyapunov(a, gsym)), 1e-8);
}

TEST(Lyapunov, ResidualAndSymmetryAcrossSizes) {
    for (Index n : {1, 2, 3, 5, 8, 17, 30, 64, 150}) {
        std::mt19937_64 g(static_cast<std::uint64_t>(1000 + n));
        const Matrix a = oracle::random_hurwitz(g, n);
        const Matrix b = oracle::randn(g, n, 2);
        const Matrix gg = b * b.transpose();
        const Matrix p = solve_lyapunov_dense(a, gg);
        EXPECT_LE(lyap_residual(a, p, gg).norm(), 1e-10 * std::max(1.0, gg.norm())) << "n = " << n;
        EXPECT_EQ((p - p.transpose()).norm(), 0.0) << "n = " << n;
    }
}

TEST(Lyapunov, ComplexSpectrumHandled) {
    Matrix a(4, 4);
    a << -1, 5, 0, 0, -5, -1, 0, 0, 0, 0, -0.5, 20, 0, 0, -20, -0.5;
    const Matrix gg = Matrix::Identity(4, 4);
    const Matrix p = solve_lyapunov_dense(a, gg);
    EXPECT_LE(oracle::rel(p, oracle::kron_lyapunov(a, gg)), 1e-12);
}

TEST(Lyapunov, RejectsNonHurwitz) {
    Matrix a(2, 2);
    a << 0.1, 0, 0, -1;
    try {
        solve_lyapunov_dense(a, Matrix::Identity(2, 2));
        FAIL() << "expected NonHurwitz";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonHurwitz);
    }
    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    EXPECT_THROW(solve_lyapunov_dense(rot, Matrix::Identity(2, 2)), Error);
}

TEST(Lyapunov, ReportsSingularSeparation) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = -1e-20;
    a(1, 1) = -1.0;
    try {
        solve_lyapunov_dense(a, Matrix::Identity(2, 2));
        FAIL() << "expected SingularSeparation";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularSeparation);
    }
}

TEST(SylvesterDense, MatchesKroneckerOracle) {
    std::mt19937_64 g(77);
    const Matrix a = oracle::random_hurwitz(g, 9);
    const Matrix m = oracle::random_hurwitz(g, 4);
    const Matrix f = oracle::randn(g, 9, 4);
    EXPECT_LE(oracle::rel(solve_sylvester_dense(a, m, f), oracle::kron_sylvester(a, m, f)), 1e-10);
}

TEST(SylvesterSkinny, ScalarClosedForm) {
    DenseOperator a(Matrix::Constant(1, 1, -2.0));
    const Matrix x = solve_sylvester_skinny(a, Matrix::Constant(1, 1, -3.0), Matrix::Constant(1, 1, 10.0));
    EXPECT_NEAR(x(0, 0), 2.0, 1e-14);
}

TEST(SylvesterSkinny, DiagonalDecouples) {
    const Vector ad = (Vector(4) << -1, -2.5, -7, -0.3).finished();
    const Vector md = (Vector(3) << -0.5, -4, -11).finished();
    std::mt19937_64 g(3);
    const Matrix f = oracle::randn(g, 4, 3);
    DenseOperator a(Matrix(ad.asDiagonal()));
    const Matrix x = solve_sylvester_skinny(a, Matrix(md.asDiagonal()), f);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 3; ++j) EXPECT_NEAR(x(i, j), -f(i, j) / (ad(i) + md(j)), 1e-13);
}

TEST(SylvesterSkinny, MatchesKroneckerOracleN20R4) {
    std::mt19937_64 g(20);
    const Matrix a = oracle::random_hurwitz(g, 20);
    const Matrix m = oracle::random_hurwitz(g, 4);
    const Matrix f = oracle::randn(g, 20, 4);
    const Matrix x = solve_sylvester_skinny(DenseOperator(a), m, f);
    EXPECT_LE(oracle::rel(x, oracle::kron_sylvester(a, m, f)), 1e-8);
    EXPECT_LE((a * x + x * m.transpose() + f).norm(), 1e-8 * std::max(1.0, f.norm()));
}

TEST(SylvesterSkinny, ComplexPairsGiveRealSolution) {
    std::mt19937_64 g(5);
    const Matrix a = oracle::random_hurwitz(g, 15);
    Matrix m(5, 5);
    m << -1, 3, 0, 0, 0, -3, -1, 0, 0, 0, 0, 0, -2, 0.5, 0, 0, 0, -8, -2, 0, 0, 0, 0, 0, -4;
    const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::randn(g, 5, 5)).householderQ();
    m = q * m * q.transpose();
    const Matrix f = oracle::randn(g, 15, 5);
    SylvesterReport rep;
    const Matrix x = solve_sylvester_skinny(DenseOperator(a), m, f, &rep);
    EXPECT_EQ(rep.complex_shifts, 2);
    EXPECT_EQ(rep.real_shifts, 1);
    EXPECT_LE(rep.max_imag_ratio, 1e-12);
    EXPECT_LE(oracle::rel(x, oracle::kron_sylvester(a, m, f)), 1e-8);
}

TEST(SylvesterSkinny, NonDiagonalizableM) {
    std::mt19937_64 g(8);
    const Matrix a = oracle::random_hurwitz(g, 10);
    Matrix m(3, 3);
    m << -2, 1, 0, 0, -2, 1, 0, 0, -2;  // single Jordan block
    const Matrix f = oracle::randn(g, 10, 3);
    const Matrix x = solve_sylvester_skinny(DenseOperator(a), m, f);
    EXPECT_LE(oracle::rel(x, oracle::kron_sylvester(a, m, f)), 1e-8);
}

TEST(SylvesterSkinny, SpectrumOverlapDetected) {
    const Matrix a = (Vector(2) << -1.0, -2.0).finished().asDiagonal();
    try {
        solve_sylvester_skinny(DenseOperator(a), Matrix::Constant(1, 1, 1.0), Matrix::Ones(2, 1));
        FAIL() << "expected SpectrumOverlap";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SpectrumOverlap);
    }
}

TEST(SylvesterSkinny, TridiagonalOperatorAgreesWithDense) {
    const StateSpaceModel rod = heat_rod(40);
    std::mt19937_64 g(9);
    Matrix m = oracle::random_hurwitz(g, 4) * 100.0;
    const Matrix f = oracle::randn(g, 40, 4);
    const Matrix xt = solve_sylvester_skinny(rod.a(), m, f);
    const Matrix xd = solve_sylvester_skinny(DenseOperator(rod.dense_a()), m, f);
    EXPECT_LE(oracle::rel(xt, xd), 1e-10);
}

TEST(Operators, TridiagonalMatchesDense) {
    std::mt19937_64 g(1);
    const Index n = 30;
    const Vector sub = oracle::randn(g, n - 1, 1), diag = oracle::randn(g, n, 1), super = oracle::randn(g, n - 1, 1);
    const TridiagonalOperator t(sub, diag, super);
    const Matrix d = t.to_dense();
    EXPECT_EQ(d(3, 2), sub(2));
    EXPECT_EQ(d(2, 3), super(2));
    const Matrix x = oracle::randn(g, n, 3);
    EXPECT_LE((t.apply(x) - d * x).norm(), 1e-12 * (d * x).norm());
    EXPECT_LE((t.apply_transpose(x) - d.transpose() * x).norm(), 1e-12 * (d * x).norm());
    const Matrix y = t.shifted_solve(0.7, x);
    Matrix shifted = d;
    shifted.diagonal().array() -= 0.7;
    EXPECT_LE((shifted * y - x).norm(), 1e-12 * x.norm() * shifted.norm() * y.norm() / x.norm());
    EXPECT_LE(oracle::rel(y, shifted.fullPivLu().solve(x)), 1e-10);
    const Complex s(-0.3, 2.0);
    const CMatrix yc = t.shifted_solve(s, CMatrix(x.cast<Complex>()));
    CMatrix sc = d.cast<Complex>();
    sc.diagonal().array() -= s;
    EXPECT_LE((sc * yc - x.cast<Complex>()).norm() / x.norm(), 1e-12);
    EXPECT_LE((t.transposed()->to_dense() - d.transpose()).norm(), 0.0);
}

TEST(Operators, TridiagonalSingularShiftThrows) {
    const TridiagonalOperator t(Vector::Zero(2), Vector::Constant(3, -1.0), Vector::Zero(2));
    try {
        t.shifted_solve(-1.0, Matrix::Ones(3, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShiftSolveFailure);
    }
}

TEST(Operators, StructuralHurwitzCertificate) {
    EXPECT_EQ(heat_rod(100).a().structural_hurwitz(), std::optional<bool>(true));
    const TridiagonalOperator unstable(Vector::Constant(2, 1.0), Vector::Constant(3, 1.0), Vector::Constant(2, 1.0));
    EXPECT_EQ(unstable.structural_hurwitz(), std::optional<bool>(false));
    const TridiagonalOperator skew(Vector::Constant(2, -1.0), Vector::Constant(3, -1.0), Vector::Constant(2, 1.0));
    EXPECT_FALSE(skew.structural_hurwitz().has_value());
}

TEST(Operators, SparseMatchesDense) {
    std::mt19937_64 g(2);
    const Matrix d = oracle::random_hurwitz(g, 12);
    const SparseOperator s(d.sparseView());
    const Matrix x = oracle::randn(g, 12, 2);
    EXPECT_LE(oracle::rel(s.apply(x), d * x), 1e-12);
    Matrix shifted = d;
    shifted.diagonal().array() -= 0.25;
    EXPECT_LE(oracle::rel(s.shifted_solve(0.25, x), shifted.partialPivLu().solve(x)), 1e-12);
    const Complex z(0.1, 3.0);
    CMatrix sc = d.cast<Complex>();
    sc.diagonal().array() -= z;
    const CMatrix xc = x.cast<Complex>();
    EXPECT_LE((s.shifted_solve(z, xc) - sc.partialPivLu().solve(xc)).norm() / sc.partialPivLu().solve(xc).norm(), 1e-12);
}

TEST(Orthonormalize, IdentityStaysFullRank) {
    const Matrix q = orthonormalize(Matrix::Identity(3, 3));
    EXPECT_EQ(q.cols(), 3);
    EXPECT_LE((q.transpose() * q - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(Orthonormalize, DropsDependentColumn) {
    std::mt19937_64 g(4);
    Vector v = oracle::randn(g, 6, 1);
    v.normalize();
    Matrix m(6, 2);
    m << v, 2 * v;
    EXPECT_EQ(orthonormalize(m).cols(), 1);
}

TEST(Orthonormalize, ProjectorReproducesRange) {
    std::mt19937_64 g(50);
    const Matrix m = oracle::randn(g, 50, 10);
    const Matrix q = orthonormalize(m);
    EXPECT_EQ(q.cols(), 10);
    EXPECT_LE((q.transpose() * q - Matrix::Identity(10, 10)).norm(), 1e-12);
    EXPECT_LE((q * q.transpose() * m - m).norm(), 1e-10 * m.norm());
}

TEST(Orthonormalize, IdempotentSubspace) {
    std::mt19937_64 g(51);
    Matrix m = oracle::randn(g, 40, 6);
    m.col(5) = m.col(0) - 3 * m.col(2);
    const Matrix q1 = orthonormalize(m);
    const Matrix q2 = orthonormalize(q1);
    EXPECT_EQ(q1.cols(), 5);
    EXPECT_EQ(q2.cols(), 5);
    EXPECT_LE(max_principal_angle(q1, q2), 1e-10);
    EXPECT_LE(max_principal_angle(q2, q1), 1e-10);
}

TEST(Orthonormalize, ZeroAndEmptyInputs) {
    EXPECT_EQ(orthonormalize(Matrix::Zero(5, 3)).cols(), 0);
    try {
        orthonormalize(Matrix(0, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
    }
}

TEST(ExpandBasis, ContainsNewColumnsAndStaysOrthonormal) {
    std::mt19937_64 g(52);
    const Matrix q = orthonormalize(oracle::randn(g, 30, 4));
    const Matrix x = oracle::randn(g, 30, 3) * 1e6;
    Matrix x2 = x;
    x2.col(2) = q.col(1) * 5.0;  // already in span(q)
    const Matrix e = expand_basis(q, x2);
    EXPECT_EQ(e.cols(), 6);
    EXPECT_LE((e.transpose() * e - Matrix::Identity(6, 6)).norm(), 1e-12);
    EXPECT_LE(max_principal_angle(x2, e), 1e-10);
    EXPECT_EQ(e.leftCols(4), q);
}

TEST(PsdFactor, IdentityAndRankDeficient) {
    const SpdFactor z = psd_factor(Matrix::Identity(2, 2));
    EXPECT_LE((z.z * z.z.transpose() - Matrix::Identity(2, 2)).norm(), 1e-15);
    const SpdFactor d = psd_factor((Vector(2) << 4.0, 0.0).finished().asDiagonal());
    ASSERT_EQ(d.rank(), 1);
    EXPECT_NEAR(std::abs(d.z(0, 0)), 2.0, 1e-15);
    EXPECT_EQ(d.z(1, 0), 0.0);
}

TEST(PsdFactor, ReconstructsIllustrativeGramian) {
    const StateSpaceModel m = illustrative4();
    const Matrix p = solve_lyapunov_dense(m.dense_a(), m.b() * m.b().transpose());
    const SpdFactor z = psd_factor(p);
    EXPECT_LE((z.z * z.z.transpose() - p).norm() / p.norm(), 1e-12);
}

TEST(PsdFactor, ClipsRoundoffNegativesAndNeverRaisesRank) {
    std::mt19937_64 g(53);
    const Matrix f = oracle::randn(g, 8, 3);
    Matrix p = f * f.transpose();
    p(0, 0) -= 1e-15;
    const SpdFactor z = psd_factor(p);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p);
    const double top = eig.eigenvalues().maxCoeff();
    const Index rank = (eig.eigenvalues().array() > 1e-14 * top).count();
    EXPECT_LE(z.rank(), rank);
    EXPECT_EQ(z.rank(), 3);
}

TEST(PsdFactor, RejectsAsymmetric) {
    Matrix p(2, 2);
    p << 1, 0.5, 0, 1;
    try {
        psd_factor(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotSymmetric);
    }
}

TEST(OrderedSvd, SortsDiagonal) {
    const Svd s = ordered_svd((Vector(3) << 1.0, 3.0, 2.0).finished().asDiagonal());
    EXPECT_EQ(s.s, (Vector(3) << 3.0, 2.0, 1.0).finished());
}

TEST(OrderedSvd, ZeroMatrix) {
    const Svd s = ordered_svd(Matrix::Zero(2, 2));
    EXPECT_EQ(s.s, Vector::Zero(2));
}

TEST(OrderedSvd, DefiningIdentityAndReconstruction) {
    std::mt19937_64 g(85);
    for (auto [r, c] : {std::pair<Index, Index>{8, 5}, {5, 8}, {60, 40}}) {
        const Matrix m = oracle::randn(g, r, c);
        const Svd s = ordered_svd(m);
        for (Index i = 0; i + 1 < s.s.size(); ++i) EXPECT_GE(s.s(i), s.s(i + 1));
        for (Index i = 0; i < s.s.size(); ++i) EXPECT_LE((m * s.v.col(i) - s.s(i) * s.u.col(i)).norm(), 1e-12 * m.norm());
        EXPECT_LE((s.u * s.s.asDiagonal() * s.v.transpose() - m).norm(), 1e-12 * m.norm());
    }
}
