#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tanbal/errors.hpp"
#include "tanbal/linear_operator.hpp"

namespace tanbal {

/// Z with Z Zᵀ approximating a symmetric positive semidefinite matrix.
struct SpdFactor {
    Matrix z;
    Index rank() const { return z.cols(); }
};

/// P̃ = basis · core · basisᵀ with an orthonormal basis.
struct LowRankGramian {
    Matrix basis;
    Matrix core;

    Index rank() const { return basis.cols(); }
    Matrix dense() const { return basis * core * basis.transpose(); }
};

struct Svd {
    Matrix u;
    Vector s;  // non-increasing
    Matrix v;
};

namespace detail {

// Start index of each diagonal block of a real Schur factor (1×1 or 2×2).
inline std::vector<Index> schur_blocks(const Matrix& t) {
    std::vector<Index> starts;
    const Index n = t.rows();
    for (Index i = 0; i < n;) {
        starts.push_back(i);
        i += (i + 1 < n && t(i + 1, i) != 0.0) ? 2 : 1;
    }
    starts.push_back(n);
    return starts;
}

inline CVector schur_eigenvalues(const Matrix& t) {
    const auto blocks = schur_blocks(t);
    CVector ev(t.rows());
    for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
        const Index i = blocks[b];
        if (blocks[b + 1] - i == 1) {
            ev(i) = t(i, i);
        } else {
            const double mid = 0.5 * (t(i, i) + t(i + 1, i + 1));
            const double half = 0.5 * (t(i, i) - t(i + 1, i + 1));
            const double disc = half * half + t(i, i + 1) * t(i + 1, i);
            const double im = std::sqrt(std::max(0.0, -disc));
            ev(i) = Complex(mid, im);
            ev(i + 1) = Complex(mid, -im);
        }
    }
    return ev;
}

inline void require_hurwitz_schur(const Matrix& t, const char* what) {
    const CVector ev = schur_eigenvalues(t);
    for (Index i = 0; i < ev.size(); ++i) {
        if (!(ev(i).real() < 0.0))
            throw Error(ErrorKind::NonHurwitz, std::string(what) + ": eigenvalue with real part " +
                                                   std::to_string(ev(i).real()) + " >= 0");
    }
}

// Solves S Y + Y T = C for upper quasi-triangular S (a×a) and T (b×b), both
// in real Schur form. Column blocks of T are swept forward, row blocks of S
// backward; each block pair is a Sylvester system of order at most 4.
inline Matrix solve_quasi_triangular_sylvester(const Matrix& s, const Matrix& t, const Matrix& c,
                                               ErrorKind on_singular) {
    const Index a = s.rows();
    const Index b = t.rows();
    const auto sb = schur_blocks(s);
    const auto tb = schur_blocks(t);
    const double scale = std::max(s.cwiseAbs().maxCoeff(), t.cwiseAbs().maxCoeff());

    Matrix y = Matrix::Zero(a, b);
    for (std::size_t jb = 0; jb + 1 < tb.size(); ++jb) {
        const Index j0 = tb[jb];
        const Index bj = tb[jb + 1] - j0;
        Matrix rhs = c.middleCols(j0, bj);
        if (j0 > 0) rhs.noalias() -= y.leftCols(j0) * t.block(0, j0, j0, bj);

        for (std::size_t ib = sb.size() - 1; ib-- > 0;) {
            const Index i0 = sb[ib];
            const Index bi = sb[ib + 1] - i0;
            Matrix r = rhs.middleRows(i0, bi);
            const Index tail = a - (i0 + bi);
            if (tail > 0) r.noalias() -= s.block(i0, i0 + bi, bi, tail) * y.block(i0 + bi, j0, tail, bj);

            const Matrix sii = s.block(i0, i0, bi, bi);
            const Matrix tjj = t.block(j0, j0, bj, bj);
            const Index k = bi * bj;
            Matrix kron = Matrix::Zero(k, k);
            for (Index q = 0; q < bj; ++q) kron.block(q * bi, q * bi, bi, bi) += sii;
            for (Index q = 0; q < bj; ++q)
                for (Index p = 0; p < bj; ++p)
                    kron.block(q * bi, p * bi, bi, bi).diagonal().array() += tjj(p, q);

            Eigen::JacobiSVD<Matrix> sv(kron);
            if (!(sv.singularValues()(k - 1) > 1e-12 * scale))
                throw Error(on_singular, "eigenvalues of the two coefficients nearly cancel (separation " +
                                             std::to_string(sv.singularValues()(k - 1)) + ")");
            const Vector x = kron.fullPivLu().solve(Eigen::Map<const Vector>(r.data(), k));
            y.block(i0, j0, bi, bj) = Eigen::Map<const Matrix>(x.data(), bi, bj);
        }
    }
    return y;
}

}  // namespace detail

/// Solves A X + X Mᵀ + F = 0 for dense A (n×n), M (r×r).
inline Matrix solve_sylvester_dense(const Matrix& a, const Matrix& m, const Matrix& f) {
    if (a.rows() != a.cols() || m.rows() != m.cols() || f.rows() != a.rows() || f.cols() != m.rows())
        throw Error(ErrorKind::DimensionMismatch, "solve_sylvester_dense: incompatible shapes");
    Eigen::RealSchur<Matrix> sa(a);
    Eigen::RealSchur<Matrix> sm(Matrix(m.transpose()));
    const Matrix& ua = sa.matrixU();
    const Matrix& um = sm.matrixU();
    const Matrix c = -(ua.transpose() * f * um);
    const Matrix y = detail::solve_quasi_triangular_sylvester(sa.matrixT(), sm.matrixT(), c,
                                                              ErrorKind::SpectrumOverlap);
    return ua * y * um.transpose();
}

/// Bartels–Stewart solve of A P + P Aᵀ + G = 0 with one real Schur
/// factorization of A. The result is symmetrized.
inline Matrix solve_lyapunov_dense(const Matrix& a, const Matrix& g) {
    const Index n = a.rows();
    if (a.cols() != n || g.rows() != n || g.cols() != n || n == 0)
        throw Error(ErrorKind::DimensionMismatch, "solve_lyapunov_dense: incompatible shapes");
    Eigen::RealSchur<Matrix> schur(a);
    const Matrix& t = schur.matrixT();
    const Matrix& u = schur.matrixU();
    detail::require_hurwitz_schur(t, "solve_lyapunov_dense");

    // T P̃ + P̃ Tᵀ = -Uᵀ G U. With the reversal J, J Tᵀ J is again upper
    // quasi-triangular, so Z = P̃ J solves T Z + Z (J Tᵀ J) = -Uᵀ G U J.
    const Matrix rev = t.transpose().reverse();
    const Matrix c = -(u.transpose() * g * u).rowwise().reverse();
    const Matrix z = detail::solve_quasi_triangular_sylvester(t, rev, c, ErrorKind::SingularSeparation);
    const Matrix p = u * z.rowwise().reverse() * u.transpose();
    return 0.5 * (p + p.transpose());
}

/// Diagnostics from the skinny Sylvester solver.
struct SylvesterReport {
    double max_imag_ratio = 0.0;  // largest discarded imaginary part / ‖X‖_F
    Index real_shifts = 0;
    Index complex_shifts = 0;
};

/// Solves A X + X Mᵀ + F = 0 where A is a (possibly huge) operator and M is
/// small. Mᵀ is brought to real Schur form; every 1×1 block costs one real
/// shifted solve with A and every 2×2 block one complex shifted solve.
inline Matrix solve_sylvester_skinny(const LinearOperator& a, const Matrix& m, const Matrix& f,
                                     SylvesterReport* report = nullptr) {
    const Index n = a.size();
    const Index r = m.rows();
    if (m.cols() != r || f.rows() != n || f.cols() != r)
        throw Error(ErrorKind::DimensionMismatch, "solve_sylvester_skinny: incompatible shapes");
    if (r == 0) return Matrix(n, 0);

    Eigen::RealSchur<Matrix> schur(Matrix(m.transpose()));
    const Matrix& t = schur.matrixT();
    const Matrix& v = schur.matrixU();
    const Matrix g = f * v;
    const auto blocks = detail::schur_blocks(t);

    SylvesterReport local;
    double max_imag = 0.0;
    Matrix y(n, r);
    try {
        for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
            const Index j = blocks[b];
            const Index bj = blocks[b + 1] - j;
            Matrix rhs = -g.middleCols(j, bj);
            if (j > 0) rhs.noalias() -= y.leftCols(j) * t.block(0, j, j, bj);

            if (bj == 1) {
                // (A + t_jj I) y_j = rhs
                y.col(j) = a.shifted_solve(-t(j, j), rhs);
                ++local.real_shifts;
            } else {
                const Matrix blk = t.block(j, j, 2, 2);
                const Complex lambda = detail::schur_eigenvalues(blk)(0);
                // eigenvector of the block for lambda; b12 != 0 for a complex pair
                CVector z(2);
                z << Complex(blk(0, 1), 0.0), lambda - blk(0, 0);
                const CMatrix w = a.shifted_solve(-lambda, CMatrix(rhs.cast<Complex>() * z));
                CMatrix lhs(n, 2), basis(2, 2);
                lhs << w, w.conjugate();
                basis << z, z.conjugate();
                const CMatrix yb = lhs * basis.inverse();
                max_imag = std::max(max_imag, yb.imag().cwiseAbs().maxCoeff());
                y.middleCols(j, 2) = yb.real();
                ++local.complex_shifts;
            }
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ShiftSolveFailure && std::string(e.what()).find("singular") != std::string::npos)
            throw Error(ErrorKind::SpectrumOverlap,
                        std::string("solve_sylvester_skinny: an eigenvalue of A cancels one of M (") + e.what() + ")");
        throw;
    }

    Matrix x = y * v.transpose();
    if (!x.allFinite()) throw Error(ErrorKind::ShiftSolveFailure, "solve_sylvester_skinny: non-finite solution");
    const double xn = x.norm();
    local.max_imag_ratio = xn > 0 ? max_imag / xn : max_imag;
    if (report) *report = local;
    return x;
}

/// Orthonormal basis for the numerical range of M. Modified Gram–Schmidt
/// with one reorthogonalization pass; a column is dropped when its residual
/// falls to 1e-12 of the largest input column norm.
inline Matrix orthonormalize(const Matrix& m) {
    const Index n = m.rows();
    if (n == 0) throw Error(ErrorKind::EmptyInput, "orthonormalize: matrix has no rows");
    if (m.cols() == 0) return Matrix(n, 0);
    const double largest = m.colwise().norm().maxCoeff();
    if (!(largest > 0)) return Matrix(n, 0);
    const double drop = 1e-12 * largest;

    Matrix q(n, m.cols());
    Index kept = 0;
    for (Index j = 0; j < m.cols(); ++j) {
        Vector w = m.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (Index i = 0; i < kept; ++i) w -= q.col(i).dot(w) * q.col(i);
        const double nw = w.norm();
        if (nw <= drop) continue;
        q.col(kept++) = w / nw;
    }
    return q.leftCols(kept);
}

/// Orthonormal basis for span([Q, X]) given an orthonormal Q. New columns are
/// normalized before projection, so the drop threshold is relative per
/// column; block Gram–Schmidt twice against Q keeps the cost at O(n·k·r).
inline Matrix expand_basis(const Matrix& q, const Matrix& x) {
    if (q.cols() > 0 && q.rows() != x.rows())
        throw Error(ErrorKind::DimensionMismatch, "expand_basis: row counts differ");
    const Index n = x.rows();
    Matrix w = x;
    for (Index j = 0; j < w.cols(); ++j) {
        const double nj = w.col(j).norm();
        if (nj > 0) w.col(j) /= nj;
    }
    if (q.cols() > 0) {
        for (int pass = 0; pass < 2; ++pass) w -= q * (q.transpose() * w);
    }
    Matrix out(n, q.cols() + w.cols());
    out.leftCols(q.cols()) = q;
    Index kept = q.cols();
    for (Index j = 0; j < w.cols(); ++j) {
        Vector c = w.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = q.cols(); i < kept; ++i) c -= out.col(i).dot(c) * out.col(i);
            if (q.cols() > 0) c -= q * (q.transpose() * c);
        }
        const double nc = c.norm();
        if (nc <= 1e-12) continue;
        out.col(kept++) = c / nc;
    }
    return out.leftCols(kept);
}

/// Z with Z Zᵀ = P⁺, where P⁺ zeroes eigenvalues below 1e-14 · λ_max.
/// Columns are ordered by decreasing eigenvalue.
inline SpdFactor psd_factor(const Matrix& p) {
    if (p.rows() != p.cols()) throw Error(ErrorKind::DimensionMismatch, "psd_factor: matrix not square");
    const Index k = p.rows();
    if (k == 0) return {Matrix(0, 0)};
    const double pn = p.norm();
    if ((p - p.transpose()).norm() > 1e-10 * pn)
        throw Error(ErrorKind::NotSymmetric, "psd_factor: input is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (p + p.transpose()));
    const Vector& ev = eig.eigenvalues();  // ascending
    const double top = ev(k - 1);
    if (!(top > 0)) return {Matrix(k, 0)};
    const double clip = 1e-14 * top;
    Index kept = 0;
    for (Index i = k - 1; i >= 0 && ev(i) > clip; --i) ++kept;
    Matrix z(k, kept);
    for (Index c = 0; c < kept; ++c) z.col(c) = eig.eigenvectors().col(k - 1 - c) * std::sqrt(ev(k - 1 - c));
    return {z};
}

/// Thin SVD with singular values in non-increasing order (ties keep the
/// decomposition's order).
inline Svd ordered_svd(const Matrix& m) {
    const Index k = std::min(m.rows(), m.cols());
    if (k == 0) return {Matrix(m.rows(), 0), Vector(0), Matrix(m.cols(), 0)};
    Matrix u, v;
    Vector s;
    if (k > 32) {
        Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = svd.matrixU();
        v = svd.matrixV();
        s = svd.singularValues();
    } else {
        Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = svd.matrixU();
        v = svd.matrixV();
        s = svd.singularValues();
    }
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return s(a) > s(b); });
    Svd out{Matrix(m.rows(), k), Vector(k), Matrix(m.cols(), k)};
    for (Index i = 0; i < k; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        out.u.col(i) = u.col(src);
        out.s(i) = s(src);
        out.v.col(i) = v.col(src);
    }
    return out;
}

/// Spectral norm of a symmetric matrix.
inline double symmetric_norm2(const Matrix& s) {
    if (s.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

/// Spectral norm of a general matrix.
inline double norm2(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return ordered_svd(m).s(0);
}

/// Largest principal angle (radians) between span(x) and span(y); x's span is
/// expected to be contained in y's for a zero angle.
inline double max_principal_angle(const Matrix& x, const Matrix& y) {
    const Matrix qx = orthonormalize(x);
    const Matrix qy = orthonormalize(y);
    if (qx.cols() == 0) return 0.0;
    // residual of projecting span(x) onto span(y)
    const Matrix res = qx - qy * (qy.transpose() * qx);
    const double s = std::min(1.0, norm2(res));
    return std::asin(s);
}

}  // namespace tanbal
