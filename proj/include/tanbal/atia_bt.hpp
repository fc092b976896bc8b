#pragma once

#include <vector>

#include "tanbal/alrs_lyap.hpp"
#include "tanbal/errors.hpp"
#include "tanbal/linalg.hpp"
#include "tanbal/random.hpp"
#include "tanbal/reducers.hpp"
#include "tanbal/system_model.hpp"

namespace tanbal {

using AtiaConfig = AlrsConfig;

struct AtiaRecord : IterationRecord {
    Index left_basis_cols = 0;  // columns of W_k
    bool rebiorthogonalized = false;
};

struct AtiaResult {
    ReducedModel rom;
    SvReport hankel_estimates;
    std::vector<AtiaRecord> history;
    Index iterations_used = 0;
    bool converged = false;
};

/// Called after every basis expansion with the record, both expanded bases
/// and the latest P̂, Q̂.
using AtiaObserver = std::function<void(const AtiaRecord&, const Matrix& vk, const Matrix& wk, const Matrix& phat,
                                        const Matrix& qhat)>;

/// Adaptive tangential interpolation toward the balanced truncation of the
/// model: each pass interpolates at the mirror images of the current ROM
/// poles, grows both bases, and re-balances on them.
inline AtiaResult atia_bt(const StateSpaceModel& model, const AtiaConfig& cfg, const AtiaObserver& observer = {}) {
    cfg.validate();
    require_hurwitz(model, "atia_bt");
    const Index n = model.n();
    const double stage_tol = cfg.effective_stage_tol();
    const OperatorPtr at = model.a().transposed();

    auto gen_a = substream(cfg.seed, kStreamA);
    auto gen_b = substream(cfg.seed, kStreamB);
    auto gen_c = substream(cfg.seed, kStreamC);
    Matrix ar = shift_to_stable(gaussian_matrix(gen_a, cfg.r0, cfg.r0));
    Matrix br = gaussian_matrix(gen_b, cfg.r0, model.m());
    Matrix cr = gaussian_matrix(gen_c, model.p(), cfg.r0);
    Matrix ar_raw = ar;

    Index r = cfg.r0;
    Matrix vk(n, 0), wk(n, 0);
    Matrix vr, wr;
    Vector s, s_prev;
    bool have_s = false;
    Index k = 1;
    Index i = 1;
    std::vector<AtiaRecord> history;
    bool converged = false;

    while (true) {
        if (have_s) {
            const Index rr = std::min<Index>(r, s.size());
            if (s(rr - 1) / s(0) < cfg.tol) {
                converged = true;
                break;
            }
        }
        if (k > cfg.k_max) break;

        const SylvesterPair sp = sylvester_pair(model, *at, ar, br, cr);
        vk = expand_basis(vk, sp.phat);
        wk = expand_basis(wk, sp.qhat);

        bool rebiorth = false;
        {
            const Svd e = ordered_svd(wk.transpose() * vk);
            const double smax = e.s(0);
            if (!(e.s(e.s.size() - 1) > 1e-12 * smax)) {
                Index keep = 0;
                while (keep < e.s.size() && e.s(keep) > 1e-12 * smax) ++keep;
                vk = Matrix(vk * e.v.leftCols(keep));
                wk = Matrix(wk * e.u.leftCols(keep));
                rebiorth = true;
            }
        }

        Matrix pk, qk;
        parallel_invoke(
            [&] {
                const Matrix bk = vk.transpose() * model.b();
                pk = solve_lyapunov_dense(vk.transpose() * model.a().apply(vk), bk * bk.transpose());
            },
            [&] {
                const Matrix ck = model.c() * wk;
                qk = solve_lyapunov_dense(wk.transpose() * at->apply(wk), ck.transpose() * ck);
            });
        const Matrix zp = psd_factor(pk).z;
        const Matrix zq = psd_factor(qk).z;
        if (zp.cols() == 0 || zq.cols() == 0)
            throw Error(ErrorKind::EmptyInput, "atia_bt: a projected Gramian vanished (B = 0 or C = 0?)");
        const Svd sv = ordered_svd(zq.transpose() * (wk.transpose() * vk) * zp);
        s = sv.s;
        have_s = true;

        Index rr = std::min<Index>(r, s.size());
        const Vector sr = s.head(rr);
        const double change = detail::padded_relative_change(sr, s_prev);
        const bool advance = change <= stage_tol || i >= cfg.i_max;
        if (advance) r += cfg.dr;

        // trailing values at round-off level would blow up S^{-1/2}
        rr = std::min<Index>(r, s.size());
        while (rr > 1 && !(s(rr - 1) > 1e-14 * s(0))) --rr;
        const auto scale = s.head(rr).cwiseSqrt().cwiseInverse().asDiagonal();
        vr = vk * zp * sv.v.leftCols(rr) * scale;
        wr = wk * zq * sv.u.leftCols(rr) * scale;

        AtiaRecord rec;
        static_cast<IterationRecord&>(rec) = IterationRecord{k, i, r, sr, vk.cols(), change, advance};
        rec.left_basis_cols = wk.cols();
        rec.rebiorthogonalized = rebiorth;
        if (observer) observer(rec, vk, wk, sp.phat, sp.qhat);

        if (advance) {
            vk = orthonormalize(sp.phat);
            wk = orthonormalize(sp.qhat);
            s_prev.resize(0);
            i = 0;
        } else {
            s_prev = sr;
        }
        ar_raw = wr.transpose() * model.a().apply(vr);
        ar = reflect_unstable(ar_raw);
        br = wr.transpose() * model.b();
        cr = model.c() * vr;
        history.push_back(std::move(rec));
        ++i;
        ++k;
    }

    SvReport estimates{s.head(vr.cols()), SvKind::Hankel, {}};
    for (const auto& h : history) estimates.history.push_back(h.values);
    ReducedModel rom{StateSpaceModel::dense(ar_raw, br, cr), vr, wr, estimates};
    return {std::move(rom), std::move(estimates), std::move(history), k - 1, converged};
}

struct HsvComparisonRow {
    Index index = 0;  // 1-based
    double estimate = 0.0;
    double dense = 0.0;
    double rel_diff = 0.0;
};

/// Estimated against dense Hankel singular values, one row per retained value.
inline std::vector<HsvComparisonRow> atia_hsv_compare(const Vector& estimates, const StateSpaceModel& model,
                                                      Index dense_cap = kDenseCap) {
    if (model.n() > dense_cap)
        throw Error(ErrorKind::DenseInfeasible, "atia_hsv_compare: n = " + std::to_string(model.n()) +
                                                    " exceeds the dense cap " + std::to_string(dense_cap));
    const Vector dense = hankel_singular_values(model).values;
    std::vector<HsvComparisonRow> rows;
    for (Index j = 0; j < estimates.size() && j < dense.size(); ++j)
        rows.push_back({j + 1, estimates(j), dense(j), std::abs(estimates(j) - dense(j)) / dense(j)});
    return rows;
}

inline std::vector<HsvComparisonRow> atia_hsv_compare(const AtiaResult& result, const StateSpaceModel& model,
                                                      Index dense_cap = kDenseCap) {
    return atia_hsv_compare(result.hankel_estimates.values, model, dense_cap);
}

}  // namespace tanbal
