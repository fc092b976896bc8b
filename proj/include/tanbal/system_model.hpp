#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tanbal/errors.hpp"
#include "tanbal/linalg.hpp"
#include "tanbal/linear_operator.hpp"
#include "tanbal/parallel.hpp"

namespace tanbal {

/// Largest state dimension for which dense n×n work (Gramians, eigenvalues)
/// is attempted.
inline constexpr Index kDenseCap = 5000;

/// x' = A x + B u, y = C x.
class StateSpaceModel {
public:
    StateSpaceModel(OperatorPtr a, Matrix b, Matrix c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
        if (!a_) throw Error(ErrorKind::InvalidArgument, "state-space model needs an A operator");
        const Index n = a_->size();
        if (b_.rows() != n || c_.cols() != n)
            throw Error(ErrorKind::DimensionMismatch, "B must have n rows and C n columns (n = " +
                                                          std::to_string(n) + ")");
        if (b_.cols() < 1 || c_.rows() < 1)
            throw Error(ErrorKind::DimensionMismatch, "model needs at least one input and one output");
        if (!b_.allFinite() || !c_.allFinite())
            throw Error(ErrorKind::InvalidArgument, "B or C has non-finite entries");
    }

    static StateSpaceModel dense(Matrix a, Matrix b, Matrix c) {
        return StateSpaceModel(std::make_shared<DenseOperator>(std::move(a)), std::move(b), std::move(c));
    }

    const LinearOperator& a() const { return *a_; }
    const OperatorPtr& a_ptr() const { return a_; }
    const Matrix& b() const { return b_; }
    const Matrix& c() const { return c_; }
    Index n() const { return a_->size(); }
    Index m() const { return b_.cols(); }
    Index p() const { return c_.rows(); }

    /// Dense copy of A; refuses above the dense cap.
    Matrix dense_a(Index cap = kDenseCap) const {
        if (n() > cap)
            throw Error(ErrorKind::DenseInfeasible,
                        "n = " + std::to_string(n()) + " exceeds the dense cap " + std::to_string(cap));
        return a_->to_dense();
    }

    /// (Aᵀ, Cᵀ, Bᵀ)
    StateSpaceModel dual() const { return StateSpaceModel(a_->transposed(), c_.transpose(), b_.transpose()); }

    /// (T⁻¹ A T, T⁻¹ B, C T)
    StateSpaceModel similarity(const Matrix& t) const {
        if (t.rows() != n() || t.cols() != n())
            throw Error(ErrorKind::DimensionMismatch, "similarity transform must be n×n");
        Eigen::PartialPivLU<Matrix> lu(t);
        if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::InvalidArgument, "similarity transform is singular");
        return dense(lu.solve(dense_a() * t), lu.solve(b_), c_ * t);
    }

private:
    OperatorPtr a_;
    Matrix b_;
    Matrix c_;
};

struct GramianPair {
    Matrix p;  // controllability
    Matrix q;  // observability
};

/// H(s) = Σᵢ lᵢ rᵢ* / (s − λᵢ)
struct PoleResidue {
    CVector poles;
    CMatrix left;   // p × n, column i is lᵢ
    CMatrix right;  // n × m, row i is rᵢ*

    CMatrix eval(Complex s) const {
        CMatrix h = CMatrix::Zero(left.rows(), right.cols());
        for (Index i = 0; i < poles.size(); ++i) h += left.col(i) * right.row(i) / (s - poles(i));
        return h;
    }
};

enum class SvKind { GramianSingular, Hankel };

struct SvReport {
    Vector values;  // non-increasing
    SvKind kind = SvKind::Hankel;
    std::vector<Vector> history;
};

/// H(s) = C (sI − A)⁻¹ B through one shifted solve.
inline CMatrix eval_transfer(const StateSpaceModel& model, Complex s) {
    const CMatrix x = model.a().shifted_solve(s, CMatrix(model.b().cast<Complex>()));
    return -(model.c().cast<Complex>() * x);
}

/// H'(s) = −C (sI − A)⁻² B through two shifted solves.
inline CMatrix eval_transfer_derivative(const StateSpaceModel& model, Complex s) {
    const CMatrix x1 = model.a().shifted_solve(s, CMatrix(model.b().cast<Complex>()));
    const CMatrix x2 = model.a().shifted_solve(s, x1);
    return -(model.c().cast<Complex>() * x2);
}

inline PoleResidue pole_residue(const StateSpaceModel& model) {
    const Matrix a = model.dense_a();
    Eigen::EigenSolver<Matrix> eig(a);
    if (eig.info() != Eigen::Success) throw Error(ErrorKind::RepeatedPoles, "eigendecomposition failed");
    const CVector lambda = eig.eigenvalues();
    const Index n = lambda.size();
    const double radius = lambda.cwiseAbs().maxCoeff();
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (std::abs(lambda(i) - lambda(j)) <= 1e-10 * radius)
                throw Error(ErrorKind::RepeatedPoles, "poles " + std::to_string(i) + " and " + std::to_string(j) +
                                                          " coincide; the model is not simple-pole");
    const CMatrix x = eig.eigenvectors();
    Eigen::PartialPivLU<CMatrix> lu(x);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::RepeatedPoles, "eigenvector matrix is numerically singular");
    PoleResidue pr;
    pr.poles = lambda;
    pr.left = model.c().cast<Complex>() * x;
    pr.right = lu.solve(CMatrix(model.b().cast<Complex>()));
    return pr;
}

inline GramianPair gramians_dense(const StateSpaceModel& model) {
    const Matrix a = model.dense_a();
    GramianPair g;
    parallel_invoke([&] { g.p = solve_lyapunov_dense(a, model.b() * model.b().transpose()); },
                    [&] { g.q = solve_lyapunov_dense(a.transpose(), model.c().transpose() * model.c()); });
    return g;
}

/// σᵢ from the SVD of L_qᵀ L_p; padded with zeros to length n when the
/// Gramians are numerically rank deficient.
inline SvReport hankel_singular_values(const GramianPair& g) {
    const Matrix lp = psd_factor(g.p).z;
    const Matrix lq = psd_factor(g.q).z;
    const Index n = g.p.rows();
    SvReport rep;
    rep.kind = SvKind::Hankel;
    rep.values = Vector::Zero(n);
    if (lp.cols() > 0 && lq.cols() > 0) {
        const Vector s = ordered_svd(lq.transpose() * lp).s;
        rep.values.head(s.size()) = s;
    }
    return rep;
}

inline SvReport hankel_singular_values(const StateSpaceModel& model) {
    return hankel_singular_values(gramians_dense(model));
}

/// Singular values of a symmetric PSD Gramian, descending.
inline SvReport gramian_singular_values(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    SvReport rep;
    rep.kind = SvKind::GramianSingular;
    rep.values = eig.eigenvalues().cwiseAbs();
    std::sort(rep.values.data(), rep.values.data() + rep.values.size(), std::greater<>());
    return rep;
}

/// True iff every eigenvalue of A has negative real part. Operators that can
/// certify stability structurally skip the dense eigensolve; above the dense
/// cap an operator without such a certificate is reported as not Hurwitz.
inline bool is_hurwitz(const LinearOperator& a) {
    if (const auto structural = a.structural_hurwitz(); structural.has_value()) return *structural;
    if (a.size() > kDenseCap) return false;
    Eigen::EigenSolver<Matrix> eig(a.to_dense(), false);
    if (eig.info() != Eigen::Success) return false;
    return (eig.eigenvalues().real().array() < 0.0).all();
}

inline bool is_hurwitz(const StateSpaceModel& model) { return is_hurwitz(model.a()); }

inline void require_hurwitz(const StateSpaceModel& model, const char* who) {
    if (!is_hurwitz(model)) throw Error(ErrorKind::NonHurwitz, std::string(who) + ": A is not Hurwitz");
}

}  // namespace tanbal
