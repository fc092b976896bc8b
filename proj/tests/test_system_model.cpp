#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace tanbal;

namespace {

StateSpaceModel scalar_model() {
    return StateSpaceModel::dense(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0),
                                  Matrix::Constant(1, 1, 1.0));
}

StateSpaceModel seeded_model(std::uint64_t seed, Index n, Index m, Index p) {
    std::mt19937_64 g(seed);
    const Matrix a = oracle::random_hurwitz(g, n);
    const Matrix b = oracle::randn(g, n, m);
    const Matrix c = oracle::randn(g, p, n);
    return StateSpaceModel::dense(a, b, c);
}

std::vector<Complex> ten_points(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> re(-0.5, 2.0), im(-20.0, 20.0);
    std::vector<Complex> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(re(g), im(g));
    return pts;
}

}  // namespace

TEST(Model, RejectsInconsistentShapes) {
    EXPECT_THROW(StateSpaceModel::dense(Matrix::Identity(2, 2), Matrix::Ones(3, 1), Matrix::Ones(1, 2)), Error);
    EXPECT_THROW(StateSpaceModel::dense(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 3)), Error);
    EXPECT_THROW(StateSpaceModel::dense(Matrix::Identity(2, 2), Matrix(2, 0), Matrix::Ones(1, 2)), Error);
}

TEST(Transfer, ScalarAtZero) {
    EXPECT_NEAR(eval_transfer(scalar_model(), 0.0)(0, 0).real(), 1.0, 1e-15);
}

TEST(Transfer, ModalExampleDcGain) {
    const CMatrix h = eval_transfer(illustrative4(), 0.0);
    EXPECT_NEAR(h(0, 0).real(), 165.0, 165.0 * 1e-13);
    EXPECT_NEAR(h(0, 0).imag(), 0.0, 1e-12);
}

TEST(Transfer, SingularShiftReported) {
    try {
        eval_transfer(scalar_model(), -1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShiftSolveFailure);
    }
}

TEST(Transfer, DerivativeMatchesCentralDifference) {
    const StateSpaceModel m = seeded_model(4, 8, 2, 3);
    const Complex s(0.3, 1.1);
    const double h = 1e-5;
    const CMatrix fd = (eval_transfer(m, s + h) - eval_transfer(m, s - h)) / (2 * h);
    const CMatrix d = eval_transfer_derivative(m, s);
    EXPECT_LE((fd - d).norm() / d.norm(), 1e-7);
}

TEST(PoleResidue, Scalar) {
    const PoleResidue pr = pole_residue(scalar_model());
    ASSERT_EQ(pr.poles.size(), 1);
    EXPECT_NEAR(pr.poles(0).real(), -1.0, 1e-15);
    EXPECT_NEAR(std::abs((pr.left.col(0) * pr.right.row(0))(0, 0) - 1.0), 0.0, 1e-14);
}

TEST(PoleResidue, ModalExample) {
    const PoleResidue pr = pole_residue(illustrative4());
    std::vector<std::pair<double, double>> got;
    for (Index i = 0; i < 4; ++i) {
        EXPECT_NEAR(pr.poles(i).imag(), 0.0, 1e-12);
        const Complex prod = (pr.left.col(i) * pr.right.row(i))(0, 0);
        got.emplace_back(pr.poles(i).real(), prod.real());
    }
    std::sort(got.begin(), got.end());
    const double poles[] = {-200, -100, -0.2, -0.1};
    const double res[] = {1e4, 1e4, 1, 1};
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(got[i].first, poles[i], 1e-12 * std::abs(poles[i]));
        EXPECT_NEAR(got[i].second, res[i], 1e-10 * res[i]);
    }
}

TEST(PoleResidue, ReconstructsTransferOnRandomModels) {
    for (std::uint64_t seed : {6u, 7u, 8u}) {
        const StateSpaceModel m = seeded_model(seed, 6, 2, 2);
        const PoleResidue pr = pole_residue(m);
        for (auto s : ten_points(seed)) {
            const CMatrix h = eval_transfer(m, s);
            EXPECT_LE((pr.eval(s) - h).norm() / h.norm(), 1e-8) << "seed " << seed;
        }
        // conjugate closure: every complex pole has its conjugate with conjugate factors
        for (Index i = 0; i < pr.poles.size(); ++i) {
            if (std::abs(pr.poles(i).imag()) < 1e-12) continue;
            bool found = false;
            for (Index j = 0; j < pr.poles.size() && !found; ++j)
                found = std::abs(pr.poles(j) - std::conj(pr.poles(i))) < 1e-10 &&
                        (pr.left.col(j) * pr.right.row(j) - (pr.left.col(i) * pr.right.row(i)).conjugate()).norm() <
                            1e-8 * (pr.left.col(i) * pr.right.row(i)).norm();
            EXPECT_TRUE(found);
        }
    }
}

TEST(PoleResidue, RepeatedPolesDetected) {
    Matrix a(2, 2);
    a << -1, 1, 0, -1;
    try {
        pole_residue(StateSpaceModel::dense(a, Matrix::Ones(2, 1), Matrix::Ones(1, 2)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RepeatedPoles);
    }
}

TEST(Gramians, Scalar) {
    const GramianPair g = gramians_dense(scalar_model());
    EXPECT_NEAR(g.p(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(g.q(0, 0), 0.5, 1e-15);
}

TEST(Gramians, ModalExampleSingularValues) {
    const GramianPair g = gramians_dense(illustrative4());
    const Vector sp = gramian_singular_values(g.p).values;
    const Vector sq = gramian_singular_values(g.q).values;
    // printed figures are truncated; compare to within one unit of the last printed digit
    const double p_ref[] = {5e5, 7.2713, 0.1887, 0.0002};
    const double p_unit[] = {1e5, 1e-4, 1e-4, 1e-4};
    const double q_ref[] = {2.5e5, 7.2906, 0.18936, 0.0005};
    const double q_unit[] = {1e4, 1e-4, 1e-5, 1e-4};
    for (int i = 0; i < 4; ++i) {
        EXPECT_LT(std::abs(sp(i) - p_ref[i]), p_unit[i]) << i;
        EXPECT_LT(std::abs(sq(i) - q_ref[i]), q_unit[i]) << i;
    }
}

TEST(Gramians, ResidualBoundAndSemidefinite) {
    for (Index n : {5, 20, 60, 200}) {
        const StateSpaceModel m = seeded_model(static_cast<std::uint64_t>(n), n, 2, 3);
        const GramianPair g = gramians_dense(m);
        const Matrix a = m.dense_a();
        const Matrix bb = m.b() * m.b().transpose();
        const Matrix cc = m.c().transpose() * m.c();
        EXPECT_LE((a * g.p + g.p * a.transpose() + bb).norm(), 1e-9 * std::max(1.0, bb.norm()));
        EXPECT_LE((a.transpose() * g.q + g.q * a + cc).norm(), 1e-9 * std::max(1.0, cc.norm()));
        Eigen::SelfAdjointEigenSolver<Matrix> ep(g.p), eq(g.q);
        EXPECT_GE(ep.eigenvalues().minCoeff(), -1e-10 * ep.eigenvalues().cwiseAbs().maxCoeff());
        EXPECT_GE(eq.eigenvalues().minCoeff(), -1e-10 * eq.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST(Gramians, NonHurwitzRejected) {
    EXPECT_THROW(gramians_dense(StateSpaceModel::dense(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1),
                                                       Matrix::Ones(1, 1))),
                 Error);
}

TEST(Hsv, Scalar) { EXPECT_NEAR(hankel_singular_values(scalar_model()).values(0), 0.5, 1e-15); }

TEST(Hsv, ModalExample) {
    const SvReport r = hankel_singular_values(illustrative4());
    EXPECT_EQ(r.kind, SvKind::Hankel);
    const double ref[] = {73.1370, 7.2831, 1.8919, 0.1880};
    for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(r.values(i) - ref[i]), 1e-4) << i;
}

TEST(Hsv, SymmetricSystemMatchesGramian) {
    std::mt19937_64 g(31);
    const Matrix f = oracle::randn(g, 10, 10);
    Matrix a = -(f * f.transpose()) - Matrix::Identity(10, 10);
    const Matrix b = oracle::randn(g, 10, 2);
    const StateSpaceModel m = StateSpaceModel::dense(a, b, b.transpose());
    const Vector h = hankel_singular_values(m).values;
    const Vector s = gramian_singular_values(gramians_dense(m).p).values;
    EXPECT_LE((h - s).norm(), 1e-10 * s(0));
}

TEST(Hsv, InvariantUnderSimilarity) {
    std::mt19937_64 g(32);
    const StateSpaceModel m = seeded_model(33, 12, 2, 2);
    Matrix t = oracle::randn(g, 12, 12);
    t.diagonal().array() += 4.0;
    const Vector h0 = hankel_singular_values(m).values;
    const Vector h1 = hankel_singular_values(m.similarity(t)).values;
    for (Index i = 0; i < 12; ++i)
        if (h0(i) > 1e-8 * h0(0)) EXPECT_LE(std::abs(h1(i) - h0(i)), 1e-8 * h0(i)) << i;
}

TEST(Hsv, DualityExact) {
    const StateSpaceModel m = seeded_model(34, 15, 3, 2);
    const Vector h0 = hankel_singular_values(m).values;
    const Vector h1 = hankel_singular_values(m.dual()).values;
    for (Index i = 0; i < 15; ++i)
        if (h0(i) > 1e-6 * h0(0)) EXPECT_LE(std::abs(h1(i) - h0(i)), 1e-10 * h0(i)) << i;
}

TEST(Hsv, NonIncreasingAndPadded) {
    const StateSpaceModel m = seeded_model(35, 20, 1, 1);
    const SvReport r = hankel_singular_values(m);
    ASSERT_EQ(r.values.size(), 20);
    for (Index i = 0; i + 1 < 20; ++i) EXPECT_GE(r.values(i), r.values(i + 1));
    EXPECT_TRUE(r.values.allFinite());
}

TEST(Hurwitz, Examples) {
    auto one = [](double a) {
        return StateSpaceModel::dense(Matrix::Constant(1, 1, a), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    };
    EXPECT_TRUE(is_hurwitz(one(-1.0)));
    EXPECT_FALSE(is_hurwitz(one(0.0)));
    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    EXPECT_FALSE(is_hurwitz(StateSpaceModel::dense(rot, Matrix::Ones(2, 1), Matrix::Ones(1, 2))));
    EXPECT_TRUE(is_hurwitz(heat_rod(2'000'000)));
}

TEST(Model, DenseCapEnforced) {
    try {
        heat_rod(kDenseCap + 1).dense_a();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DenseInfeasible);
    }
}
