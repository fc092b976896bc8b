#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "tanbal/errors.hpp"

namespace tanbal {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Square state matrix behind a model. Implementations expose products with
/// A and Aᵀ and solves with the shifted matrix (A − sI); nothing else in the
/// large-scale algorithms touches A directly.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual Index size() const = 0;
    virtual std::string kind() const = 0;

    virtual Matrix apply(const Matrix& x) const = 0;
    virtual Matrix apply_transpose(const Matrix& x) const = 0;

    /// Solves (A − sI) X = rhs. Throws ShiftSolveFailure when (A − sI) is
    /// numerically singular or the solution is not finite.
    virtual Matrix shifted_solve(double s, const Matrix& rhs) const = 0;
    virtual CMatrix shifted_solve(Complex s, const CMatrix& rhs) const = 0;

    virtual std::shared_ptr<const LinearOperator> transposed() const = 0;

    /// Materializes A. Callers are responsible for checking the size first.
    virtual Matrix to_dense() const = 0;

    /// Upper bound on the spectral radius (induced 1-norm).
    virtual double norm_bound() const = 0;

    /// Cheap structural Hurwitz certificate, when the representation admits
    /// one. std::nullopt means "unknown, ask a dense eigensolver".
    virtual std::optional<bool> structural_hurwitz() const { return std::nullopt; }
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

namespace detail {

inline Error shift_failure(const std::string& kind, Complex s, const std::string& why) {
    return Error(ErrorKind::ShiftSolveFailure,
                 kind + " operator: (A - sI) solve failed at s = (" + std::to_string(s.real()) +
                     ", " + std::to_string(s.imag()) + "): " + why);
}

}  // namespace detail

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Matrix a) : a_(std::move(a)) {
        if (a_.rows() != a_.cols() || a_.rows() == 0)
            throw Error(ErrorKind::DimensionMismatch, "dense operator must be square and non-empty");
        if (!a_.allFinite()) throw Error(ErrorKind::InvalidArgument, "dense operator has non-finite entries");
    }

    Index size() const override { return a_.rows(); }
    std::string kind() const override { return "dense"; }
    const Matrix& matrix() const { return a_; }

    Matrix apply(const Matrix& x) const override { return a_ * x; }
    Matrix apply_transpose(const Matrix& x) const override { return a_.transpose() * x; }

    Matrix shifted_solve(double s, const Matrix& rhs) const override {
        return solve_impl<double>(s, rhs, s);
    }
    CMatrix shifted_solve(Complex s, const CMatrix& rhs) const override {
        return solve_impl<Complex>(s, rhs, s);
    }

    OperatorPtr transposed() const override {
        return std::make_shared<DenseOperator>(Matrix(a_.transpose()));
    }
    Matrix to_dense() const override { return a_; }
    double norm_bound() const override { return a_.cwiseAbs().colwise().sum().maxCoeff(); }

private:
    template <class T, class Rhs>
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> solve_impl(T s, const Rhs& rhs,
                                                                 Complex shift) const {
        using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
        if (rhs.rows() != a_.rows())
            throw Error(ErrorKind::DimensionMismatch, "shifted_solve right-hand side has wrong row count");
        M shifted = a_.template cast<T>();
        shifted.diagonal().array() -= s;
        Eigen::PartialPivLU<M> lu(shifted);
        if (!(lu.rcond() > 1e-14)) throw detail::shift_failure(kind(), shift, "matrix is numerically singular");
        M x = lu.solve(rhs);
        if (!x.allFinite()) throw detail::shift_failure(kind(), shift, "non-finite solution");
        return x;
    }

    Matrix a_;
};

/// Tridiagonal A with O(n) storage and O(n) shifted solves (LU with partial
/// pivoting, the same elimination order as LAPACK gtsv).
class TridiagonalOperator final : public LinearOperator {
public:
    TridiagonalOperator(Vector sub, Vector diag, Vector super)
        : sub_(std::move(sub)), diag_(std::move(diag)), super_(std::move(super)) {
        const Index n = diag_.size();
        if (n == 0) throw Error(ErrorKind::DimensionMismatch, "tridiagonal operator must be non-empty");
        if (sub_.size() != n - 1 || super_.size() != n - 1)
            throw Error(ErrorKind::DimensionMismatch, "tridiagonal bands must have n-1 entries");
        if (!sub_.allFinite() || !diag_.allFinite() || !super_.allFinite())
            throw Error(ErrorKind::InvalidArgument, "tridiagonal operator has non-finite entries");
    }

    Index size() const override { return diag_.size(); }
    std::string kind() const override { return "tridiagonal"; }

    const Vector& sub() const { return sub_; }
    const Vector& diag() const { return diag_; }
    const Vector& super() const { return super_; }

    Matrix apply(const Matrix& x) const override { return band_product(sub_, super_, x); }
    Matrix apply_transpose(const Matrix& x) const override { return band_product(super_, sub_, x); }

    Matrix shifted_solve(double s, const Matrix& rhs) const override { return solve_impl<double>(s, rhs, s); }
    CMatrix shifted_solve(Complex s, const CMatrix& rhs) const override {
        return solve_impl<Complex>(s, rhs, s);
    }

    OperatorPtr transposed() const override {
        return std::make_shared<TridiagonalOperator>(super_, diag_, sub_);
    }

    Matrix to_dense() const override {
        const Index n = size();
        Matrix a = Matrix::Zero(n, n);
        a.diagonal() = diag_;
        if (n > 1) {
            a.diagonal(-1) = sub_;
            a.diagonal(1) = super_;
        }
        return a;
    }

    double norm_bound() const override {
        Vector col = diag_.cwiseAbs();
        const Index n = size();
        if (n > 1) {
            col.head(n - 1) += sub_.cwiseAbs();
            col.tail(n - 1) += super_.cwiseAbs();
        }
        return col.maxCoeff();
    }

    // When every product sub_i * super_i is positive the matrix is similar to
    // a symmetric one with off-diagonals sqrt(sub_i * super_i); Hurwitz then
    // means -A is positive definite, which an LDLᵀ sweep decides exactly.
    std::optional<bool> structural_hurwitz() const override {
        const Index n = size();
        for (Index i = 0; i + 1 < n; ++i) {
            const double prod = sub_(i) * super_(i);
            if (prod < 0 || (prod == 0 && (sub_(i) != 0 || super_(i) != 0))) return std::nullopt;
        }
        double pivot = -diag_(0);
        if (!(pivot > 0)) return false;
        for (Index i = 1; i < n; ++i) {
            pivot = -diag_(i) - sub_(i - 1) * super_(i - 1) / pivot;
            if (!(pivot > 0)) return false;
        }
        return true;
    }

private:
    Matrix band_product(const Vector& lower, const Vector& upper, const Matrix& x) const {
        const Index n = size();
        if (x.rows() != n) throw Error(ErrorKind::DimensionMismatch, "operator applied to wrong row count");
        Matrix y = x.array().colwise() * diag_.array();
        if (n > 1) {
            y.topRows(n - 1).array() += x.bottomRows(n - 1).array().colwise() * upper.array();
            y.bottomRows(n - 1).array() += x.topRows(n - 1).array().colwise() * lower.array();
        }
        return y;
    }

    template <class T, class Rhs>
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> solve_impl(T s, const Rhs& rhs, Complex shift) const {
        using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
        using V = Eigen::Matrix<T, Eigen::Dynamic, 1>;
        const Index n = size();
        if (rhs.rows() != n)
            throw Error(ErrorKind::DimensionMismatch, "shifted_solve right-hand side has wrong row count");

        V d = diag_.template cast<T>();
        d.array() -= s;
        V dl = sub_.template cast<T>();
        V du = super_.template cast<T>();
        M b = rhs;

        const double scale = norm_bound() + std::abs(shift);
        const double tiny = std::numeric_limits<double>::epsilon() * scale;
        auto singular = [&]() { return detail::shift_failure(kind(), shift, "zero pivot"); };

        for (Index i = 0; i + 1 < n; ++i) {
            if (std::abs(d(i)) >= std::abs(dl(i))) {
                if (std::abs(d(i)) <= tiny) throw singular();
                const T fact = dl(i) / d(i);
                d(i + 1) -= fact * du(i);
                b.row(i + 1) -= fact * b.row(i);
                dl(i) = T(0);  // dl now holds the second superdiagonal fill
            } else {
                const T fact = d(i) / dl(i);
                d(i) = dl(i);
                const T temp = d(i + 1);
                d(i + 1) = du(i) - fact * temp;
                if (i + 2 < n) {
                    dl(i) = du(i + 1);
                    du(i + 1) = -fact * dl(i);
                } else {
                    dl(i) = T(0);
                }
                du(i) = temp;
                b.row(i).swap(b.row(i + 1));
                b.row(i + 1) -= fact * b.row(i);
            }
        }
        if (std::abs(d(n - 1)) <= tiny) throw singular();

        b.row(n - 1) /= d(n - 1);
        if (n > 1) b.row(n - 2) = (b.row(n - 2) - du(n - 2) * b.row(n - 1)) / d(n - 2);
        for (Index i = n - 3; i >= 0; --i)
            b.row(i) = (b.row(i) - du(i) * b.row(i + 1) - dl(i) * b.row(i + 2)) / d(i);

        if (!b.allFinite()) throw detail::shift_failure(kind(), shift, "non-finite solution");
        return b;
    }

    Vector sub_;    // A(i+1, i)
    Vector diag_;   // A(i, i)
    Vector super_;  // A(i, i+1)
};

/// General sparse A, factorized per shift with SparseLU.
class SparseOperator final : public LinearOperator {
public:
    explicit SparseOperator(SparseMatrix a) : a_(std::move(a)) {
        if (a_.rows() != a_.cols() || a_.rows() == 0)
            throw Error(ErrorKind::DimensionMismatch, "sparse operator must be square and non-empty");
        a_.makeCompressed();
    }

    Index size() const override { return a_.rows(); }
    std::string kind() const override { return "sparse"; }
    const SparseMatrix& matrix() const { return a_; }

    Matrix apply(const Matrix& x) const override { return a_ * x; }
    Matrix apply_transpose(const Matrix& x) const override { return a_.transpose() * x; }

    Matrix shifted_solve(double s, const Matrix& rhs) const override { return solve_impl<double>(s, rhs, s); }
    CMatrix shifted_solve(Complex s, const CMatrix& rhs) const override {
        return solve_impl<Complex>(s, rhs, s);
    }

    OperatorPtr transposed() const override {
        return std::make_shared<SparseOperator>(SparseMatrix(a_.transpose()));
    }
    Matrix to_dense() const override { return Matrix(a_); }
    double norm_bound() const override {
        Vector col = Vector::Zero(a_.cols());
        for (Index k = 0; k < a_.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(a_, k); it; ++it) col(it.col()) += std::abs(it.value());
        return col.maxCoeff();
    }

private:
    template <class T, class Rhs>
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> solve_impl(T s, const Rhs& rhs, Complex shift) const {
        using SM = Eigen::SparseMatrix<T>;
        using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
        if (rhs.rows() != size())
            throw Error(ErrorKind::DimensionMismatch, "shifted_solve right-hand side has wrong row count");
        SM shifted = a_.template cast<T>();
        SM eye(size(), size());
        eye.setIdentity();
        shifted -= s * eye;
        shifted.makeCompressed();
        Eigen::SparseLU<SM, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(shifted);
        if (lu.info() != Eigen::Success) throw detail::shift_failure(kind(), shift, lu.lastErrorMessage());
        M x = lu.solve(M(rhs));
        if (lu.info() != Eigen::Success || !x.allFinite())
            throw detail::shift_failure(kind(), shift, "solve failed");
        const double res = (M(shifted * x) - M(rhs)).norm();
        if (res > 1e-6 * (M(rhs).norm() + 1e-300))
            throw detail::shift_failure(kind(), shift, "numerically singular (residual check)");
        return x;
    }

    SparseMatrix a_;
};

}  // namespace tanbal
