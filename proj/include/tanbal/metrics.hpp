#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tanbal/errors.hpp"
#include "tanbal/linalg.hpp"
#include "tanbal/parallel.hpp"
#include "tanbal/reducers.hpp"
#include "tanbal/system_model.hpp"

namespace tanbal {

/// Log-spaced frequencies (rad/s), ascending.
struct FreqGrid {
    Vector points;
    double refine_rel = 1e-3;  // golden-section stops below this relative width

    static FreqGrid log_spaced(double lo, double hi, Index count) {
        if (!(lo > 0) || !(hi > lo) || count < 2)
            throw Error(ErrorKind::InvalidArgument, "frequency grid needs 0 < lo < hi and >= 2 points");
        FreqGrid g;
        g.points = Vector::LinSpaced(count, std::log10(lo), std::log10(hi));
        for (Index i = 0; i < count; ++i) g.points(i) = std::pow(10.0, g.points(i));
        return g;
    }

    /// 400 points over [1e-3 |λ|min, 1e3 |λ|max]. The spectrum comes from a
    /// dense eigensolve when n is within the cap; otherwise from the ROM poles
    /// (if given) bounded above by the operator norm.
    static FreqGrid for_model(const StateSpaceModel& model, const StateSpaceModel* rom = nullptr,
                              Index count = 400, Index dense_cap = kDenseCap) {
        double lo = 0, hi = 0;
        auto absorb = [&](const CVector& ev) {
            for (Index i = 0; i < ev.size(); ++i) {
                const double a = std::abs(ev(i));
                if (!(a > 0)) continue;
                lo = lo > 0 ? std::min(lo, a) : a;
                hi = std::max(hi, a);
            }
        };
        if (model.n() <= dense_cap) {
            absorb(Eigen::EigenSolver<Matrix>(model.dense_a(dense_cap), false).eigenvalues());
        } else {
            if (rom) absorb(Eigen::EigenSolver<Matrix>(rom->dense_a(), false).eigenvalues());
            hi = std::max(hi, model.a().norm_bound());
            if (!(lo > 0)) lo = hi * 1e-6;
        }
        if (!(hi > 0)) throw Error(ErrorKind::InvalidArgument, "cannot size a frequency grid for a zero spectrum");
        return log_spaced(1e-3 * lo, 1e3 * hi, count);
    }
};

inline double complex_norm2(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

/// ‖P − V Pr Vᵀ‖₂ / ‖P‖₂
inline double gramian_rel_error(const Matrix& p_exact, const LowRankGramian& g) {
    if (g.basis.rows() != p_exact.rows() || p_exact.rows() != p_exact.cols() || g.core.rows() != g.basis.cols())
        throw Error(ErrorKind::DimensionMismatch, "gramian_rel_error: shapes disagree");
    return symmetric_norm2(p_exact - g.dense()) / symmetric_norm2(p_exact);
}

/// ‖PQ − Vr Pr Vrᵀ Wr Qr Wrᵀ‖₂ / ‖PQ‖₂ with Pr, Qr the ROM Gramians.
inline double pq_rel_error(const GramianPair& g, const ReducedModel& red) {
    const Matrix pr = solve_lyapunov_dense(red.ar(), red.br() * red.br().transpose());
    const Matrix qr = solve_lyapunov_dense(red.ar().transpose(), red.cr().transpose() * red.cr());
    const Matrix pq = g.p * g.q;
    const Matrix approx = (red.vr * pr * red.vr.transpose()) * (red.wr * qr * red.wr.transpose());
    return norm2(pq - approx) / norm2(pq);
}

inline double pq_rel_error(const StateSpaceModel& model, const ReducedModel& red, Index dense_cap = kDenseCap) {
    if (model.n() > dense_cap)
        throw Error(ErrorKind::DenseInfeasible, "pq_rel_error: n exceeds the dense cap");
    return pq_rel_error(gramians_dense(model), red);
}

/// Repeated evaluation of H(jω). Dense A is reduced once to Hessenberg
/// form A = U H Uᵀ so each frequency costs O(n²) instead of an O(n³) LU;
/// other operators use their own shifted solve.
class FrequencyResponse {
public:
    explicit FrequencyResponse(const StateSpaceModel& model) : model_(model) {
        const auto* dense = dynamic_cast<const DenseOperator*>(&model.a());
        if (dense && model.n() > 16) {
            Eigen::HessenbergDecomposition<Matrix> hd(dense->matrix());
            h_ = hd.matrixH();
            const Matrix u = hd.matrixQ();
            ub_ = u.transpose() * model.b();
            cu_ = model.c() * u;
            hessenberg_ = true;
        }
    }

    CMatrix operator()(Complex s) const {
        if (!hessenberg_) return eval_transfer(model_, s);
        return cu_.cast<Complex>() * solve_shifted_hessenberg(s);
    }

private:
    // (sI − H) X = UᵀB by elimination with adjacent-row pivoting.
    CMatrix solve_shifted_hessenberg(Complex s) const {
        const Index n = h_.rows();
        CMatrix m = -h_.cast<Complex>();
        m.diagonal().array() += s;
        CMatrix x = ub_.cast<Complex>();
        for (Index k = 0; k + 1 < n; ++k) {
            if (std::abs(m(k + 1, k)) > std::abs(m(k, k))) {
                m.row(k).tail(n - k).swap(m.row(k + 1).tail(n - k));
                x.row(k).swap(x.row(k + 1));
            }
            if (m(k, k) == Complex(0.0))
                throw Error(ErrorKind::ShiftSolveFailure, "sI − A is singular at the requested frequency");
            const Complex f = m(k + 1, k) / m(k, k);
            if (f != Complex(0.0)) {
                m.row(k + 1).tail(n - k) -= f * m.row(k).tail(n - k);
                x.row(k + 1) -= f * x.row(k);
            }
        }
        if (m(n - 1, n - 1) == Complex(0.0))
            throw Error(ErrorKind::ShiftSolveFailure, "sI − A is singular at the requested frequency");
        m.triangularView<Eigen::Upper>().solveInPlace(x);
        if (!x.allFinite()) throw Error(ErrorKind::ShiftSolveFailure, "non-finite frequency response");
        return x;
    }

    const StateSpaceModel& model_;
    bool hessenberg_ = false;
    Matrix h_, ub_, cu_;
};

namespace detail {

// Maximizes f over log ω in [lo, hi] by golden-section search.
template <class F>
double golden_max(F&& f, double lo, double hi, double rel, double best) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(lo), b = std::log(hi);
    const double stop = std::log1p(rel);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
    best = std::max({best, f1, f2});
    while (b - a > stop) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(std::exp(x1));
            best = std::max(best, f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(std::exp(x2));
            best = std::max(best, f2);
        }
    }
    return best;
}

// Grid maximum of f refined around its argmax.
template <class F>
double refined_peak(F&& f, const FreqGrid& grid) {
    const Index count = grid.points.size();
    std::vector<double> vals(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) { vals[i] = f(grid.points(Index(i))); });
    const auto it = std::max_element(vals.begin(), vals.end());
    const Index arg = it - vals.begin();
    const double lo = grid.points(std::max<Index>(arg - 1, 0));
    const double hi = grid.points(std::min<Index>(arg + 1, count - 1));
    return golden_max(f, lo, hi, grid.refine_rel, *it);
}

}  // namespace detail

/// Sampled H∞ ratio ‖H − H_r‖ / ‖H‖ on the grid with local refinement. This
/// is a lower bound on the exact ratio's numerator peak.
inline double hinf_rel_error(const StateSpaceModel& model, const StateSpaceModel& rom, const FreqGrid& grid) {
    if (model.m() != rom.m() || model.p() != rom.p())
        throw Error(ErrorKind::DimensionMismatch, "hinf_rel_error: input/output counts differ");
    const FrequencyResponse h(model), hr(rom);
    auto err = [&](double w) {
        const Complex s(0.0, w);
        return complex_norm2(h(s) - hr(s));
    };
    auto full = [&](double w) { return complex_norm2(h(Complex(0.0, w))); };
    return detail::refined_peak(err, grid) / detail::refined_peak(full, grid);
}

struct SigmaPoint {
    double omega = 0.0;
    double sigma = 0.0;
};

/// Largest singular value of H(jω) at each grid point, in grid order.
inline std::vector<SigmaPoint> sigma_sweep(const StateSpaceModel& model, const FreqGrid& grid) {
    std::vector<SigmaPoint> out(static_cast<std::size_t>(grid.points.size()));
    const FrequencyResponse h(model);
    parallel_for(out.size(), [&](std::size_t i) {
        const double w = grid.points(Index(i));
        out[i] = {w, complex_norm2(h(Complex(0.0, w)))};
    });
    return out;
}

}  // namespace tanbal
