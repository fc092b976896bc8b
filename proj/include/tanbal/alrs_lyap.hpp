#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/QR>

#include "tanbal/errors.hpp"
#include "tanbal/linalg.hpp"
#include "tanbal/random.hpp"
#include "tanbal/reducers.hpp"
#include "tanbal/system_model.hpp"

namespace tanbal {

struct AlrsConfig {
    Index r0 = 2;
    Index dr = 2;
    double tol = 1e-6;
    Index i_max = 5;
    Index k_max = 35;
    std::uint64_t seed = 1;
    std::optional<double> stage_tol;  // defaults to tol

    double effective_stage_tol() const { return stage_tol.value_or(tol); }

    void validate() const {
        auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
        if (r0 < 1) bad("r0 must be >= 1");
        if (dr < 1) bad("dr must be >= 1");
        if (!(tol > 0 && tol < 1)) bad("tol must lie in (0, 1)");
        if (i_max < 1) bad("i_max must be >= 1");
        if (k_max < 1) bad("k_max must be >= 1");
        if (stage_tol && !(*stage_tol > 0 && *stage_tol < 1)) bad("stage_tol must lie in (0, 1)");
    }
};

/// One pass of the adaptive loop.
struct IterationRecord {
    Index k = 0;             // global iteration, 1-based
    Index i = 0;             // iteration within the current rank stage, 1-based
    Index r = 0;             // target rank after the stage test
    Vector values;           // leading singular-value estimates used for the projection
    Index basis_cols = 0;    // columns of the expanded basis (V_k)
    double stage_change = 0;  // relative change driving the stage test
    bool stage_advanced = false;
};

struct AlrsResult {
    LowRankGramian factor;
    std::vector<IterationRecord> history;
    Index iterations_used = 0;
    bool converged = false;
    double residual = 0.0;  // ‖A P̃ + P̃ Aᵀ + B Bᵀ‖₂ / ‖B Bᵀ‖₂

    SvReport singular_values() const {
        SvReport rep;
        rep.kind = SvKind::GramianSingular;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(factor.core, Eigen::EigenvaluesOnly);
        rep.values = eig.eigenvalues().reverse().cwiseMax(0.0);
        for (const auto& h : history) rep.history.push_back(h.values);
        return rep;
    }
};

/// Called after every basis expansion with the record, the expanded basis and
/// the latest P̂.
using AlrsObserver = std::function<void(const IterationRecord&, const Matrix& vk, const Matrix& phat)>;

namespace detail {

inline double padded_relative_change(const Vector& now, const Vector& before) {
    const Index len = std::max(now.size(), before.size());
    Vector a = Vector::Zero(len), b = Vector::Zero(len);
    a.head(now.size()) = now;
    b.head(before.size()) = before;
    const double an = a.norm();
    return an > 0 ? (a - b).norm() / an : (b.norm() > 0 ? 1.0 : 0.0);
}

/// ‖A V Pr Vᵀ + V Pr Vᵀ Aᵀ + B Bᵀ‖₂ without forming n×n matrices: with
/// F = [AV, V, B] = Q R the residual is Q (R K Rᵀ) Qᵀ for a small K.
inline double lowrank_lyapunov_residual(const LinearOperator& a, const Matrix& b, const LowRankGramian& g) {
    const Index r = g.rank();
    const Index m = b.cols();
    const Index n = b.rows();
    Matrix f(n, 2 * r + m);
    f.leftCols(r) = a.apply(g.basis);
    f.middleCols(r, r) = g.basis;
    f.rightCols(m) = b;
    Eigen::HouseholderQR<Matrix> qr(f);
    const Index kk = std::min<Index>(n, f.cols());
    const Matrix rf = qr.matrixQR().topRows(kk).triangularView<Eigen::Upper>();
    Matrix k = Matrix::Zero(2 * r + m, 2 * r + m);
    k.block(0, r, r, r) = g.core;
    k.block(r, 0, r, r) = g.core;
    k.bottomRightCorner(m, m).setIdentity();
    const double bb = norm2(b);
    return symmetric_norm2(rf * k * rf.transpose()) / (bb * bb);
}

}  // namespace detail

/// Adaptive low-rank solution of A P + P Aᵀ + B Bᵀ = 0.
inline AlrsResult alrs_lyap(const LinearOperator& a, const Matrix& b, const AlrsConfig& cfg,
                            const AlrsObserver& observer = {}) {
    cfg.validate();
    const Index n = a.size();
    const Index m = b.cols();
    if (b.rows() != n || m < 1) throw Error(ErrorKind::DimensionMismatch, "alrs_lyap: B must be n×m with m >= 1");
    if (!is_hurwitz(a)) throw Error(ErrorKind::NonHurwitz, "alrs_lyap: A is not Hurwitz");
    const double stage_tol = cfg.effective_stage_tol();

    auto gen_a = substream(cfg.seed, kStreamA);
    auto gen_b = substream(cfg.seed, kStreamB);
    Matrix ar = shift_to_stable(gaussian_matrix(gen_a, cfg.r0, cfg.r0));
    Matrix br = gaussian_matrix(gen_b, cfg.r0, m);

    Index r = cfg.r0;
    Matrix vk(n, 0);
    Matrix vr;
    Vector s;
    Vector s_prev;
    bool have_s = false;
    Index k = 1;
    Index i = 1;
    AlrsResult res;

    while (true) {
        if (have_s) {
            const Index rr = std::min<Index>(r, s.size());
            if (s(rr - 1) / s(0) < cfg.tol) {
                res.converged = true;
                break;
            }
        }
        if (k > cfg.k_max) break;

        const Matrix phat = solve_sylvester_skinny(a, ar, b * br.transpose());
        const Index before = vk.cols();
        vk = expand_basis(vk, phat);
        const bool grew = vk.cols() > before;

        const Matrix bk = vk.transpose() * b;
        const Matrix pk = solve_lyapunov_dense(vk.transpose() * a.apply(vk), bk * bk.transpose());
        const Matrix zp = psd_factor(pk).z;
        if (zp.cols() == 0) throw Error(ErrorKind::EmptyInput, "alrs_lyap: projected Gramian is zero (B = 0?)");
        const Svd sv = ordered_svd(zp.transpose() * zp);
        s = sv.s;
        if (!grew && s.size() < r) {
            // no new direction: the missing values are genuinely zero
            Vector padded = Vector::Zero(r);
            padded.head(s.size()) = s;
            s = padded;
        }
        have_s = true;

        Index rr = std::min<Index>(r, s.size());
        const Vector sr = s.head(rr);
        const double change = detail::padded_relative_change(sr, s_prev);
        const bool advance = change <= stage_tol || i >= cfg.i_max;
        if (advance) r += cfg.dr;

        rr = std::min<Index>(r, zp.cols());
        vr = vk * zp * sv.u.leftCols(rr) * sv.s.head(rr).cwiseSqrt().cwiseInverse().asDiagonal();

        IterationRecord rec{k, i, r, sr, vk.cols(), change, advance};
        if (observer) observer(rec, vk, phat);

        if (advance) {
            vk = orthonormalize(phat);
            s_prev.resize(0);
            i = 0;
        } else {
            s_prev = sr;
        }
        ar = reflect_unstable(vr.transpose() * a.apply(vr));
        br = vr.transpose() * b;
        res.history.push_back(std::move(rec));
        ++i;
        ++k;
    }

    const Matrix ar_final = vr.transpose() * a.apply(vr);
    const Matrix br_final = vr.transpose() * b;
    res.factor.basis = vr;
    res.factor.core = solve_lyapunov_dense(ar_final, br_final * br_final.transpose());
    res.iterations_used = k - 1;
    res.residual = detail::lowrank_lyapunov_residual(a, b, res.factor);
    return res;
}

}  // namespace tanbal
