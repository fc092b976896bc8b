#pragma once

// Independent reference computations used by the test suites. Nothing here
// shares code paths with the library's solvers beyond Eigen itself.

#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "tanbal/tanbal.hpp"

namespace oracle {

using tanbal::Index;
using tanbal::Matrix;
using tanbal::Vector;

inline Matrix randn(std::mt19937_64& g, Index r, Index c) {
    std::normal_distribution<double> d;
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = d(g);
    return m;
}

inline Matrix random_hurwitz(std::mt19937_64& g, Index n) {
    Matrix m = randn(g, n, n);
    Eigen::JacobiSVD<Matrix> svd(m);
    m.diagonal().array() -= svd.singularValues()(0) + 0.5;
    return m;
}

/// Solves A X + X Mᵀ + F = 0 through (I ⊗ A + M ⊗ I) vec X = −vec F.
inline Matrix kron_sylvester(const Matrix& a, const Matrix& m, const Matrix& f) {
    const Index n = a.rows(), r = m.rows();
    const Matrix k = Eigen::kroneckerProduct(Matrix::Identity(r, r), a) + Eigen::kroneckerProduct(m, Matrix::Identity(n, n));
    const Vector rhs = -Eigen::Map<const Vector>(f.data(), n * r);
    const Vector x = k.fullPivLu().solve(rhs);
    return Eigen::Map<const Matrix>(x.data(), n, r);
}

inline Matrix kron_lyapunov(const Matrix& a, const Matrix& g) { return kron_sylvester(a, a, g); }

inline double rel(const Matrix& x, const Matrix& ref) { return (x - ref).norm() / ref.norm(); }

/// max over the points of ‖H₁(s) − H₂(s)‖_F / ‖H₁(s)‖_F
inline double transfer_gap(const tanbal::StateSpaceModel& h1, const tanbal::StateSpaceModel& h2,
                           const std::vector<tanbal::Complex>& pts) {
    double worst = 0.0;
    for (auto s : pts) {
        const tanbal::CMatrix a = tanbal::eval_transfer(h1, s);
        const tanbal::CMatrix b = tanbal::eval_transfer(h2, s);
        worst = std::max(worst, (a - b).norm() / a.norm());
    }
    return worst;
}

inline std::vector<tanbal::Complex> test_points() {
    return {{0.0, 0.3}, {0.0, 1.7}, {0.5, 4.0}, {2.0, 0.0}, {0.1, -9.0}};
}

}  // namespace oracle
