#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "tanbal/errors.hpp"
#include "tanbal/linalg.hpp"
#include "tanbal/parallel.hpp"
#include "tanbal/system_model.hpp"

namespace tanbal {

struct ReducedModel {
    StateSpaceModel rom;
    Matrix vr;
    Matrix wr;
    std::optional<SvReport> retained_sv;

    Index order() const { return rom.n(); }
    const Matrix& ar() const { return static_cast<const DenseOperator&>(rom.a()).matrix(); }
    const Matrix& br() const { return rom.b(); }
    const Matrix& cr() const { return rom.c(); }
};

/// Right data (S_b, L_b) and left data (S_c, L_c) with
///   A V − V S_b + B L_b = 0,   Aᵀ W − W S_c + Cᵀ L_c = 0.
struct InterpolationData {
    Matrix sb, lb, sc, lc;

    Index order() const { return sb.rows(); }

    /// Interpolation at the mirror images of a ROM's poles along its residue
    /// directions: S_b = −A_rᵀ, L_b = B_rᵀ, S_c = −A_r, L_c = C_r.
    static InterpolationData mirror_of(const Matrix& ar, const Matrix& br, const Matrix& cr) {
        return {-ar.transpose(), br.transpose(), -ar, cr};
    }

    /// Builds real data from complex points and directions. Points must be
    /// closed under conjugation with conjugate directions; each conjugate pair
    /// becomes one 2×2 rotation block.
    static InterpolationData from_points(const CVector& nu, const CMatrix& b_dirs, const CVector& mu,
                                         const CMatrix& c_dirs) {
        InterpolationData d;
        realify(nu, b_dirs, d.sb, d.lb);
        realify(mu, c_dirs, d.sc, d.lc);
        if (d.sb.rows() != d.sc.rows())
            throw Error(ErrorKind::DimensionMismatch, "left and right interpolation data differ in count");
        return d;
    }

private:
    static void realify(const CVector& pts, const CMatrix& dirs, Matrix& s, Matrix& l) {
        const Index r = pts.size();
        if (r == 0) throw Error(ErrorKind::EmptyInput, "no interpolation points");
        if (dirs.cols() != r) throw Error(ErrorKind::DimensionMismatch, "one direction per interpolation point");
        s = Matrix::Zero(r, r);
        l = Matrix::Zero(dirs.rows(), r);
        std::vector<bool> used(static_cast<std::size_t>(r), false);
        Index col = 0;
        for (Index i = 0; i < r; ++i) {
            if (used[static_cast<std::size_t>(i)]) continue;
            used[static_cast<std::size_t>(i)] = true;
            const Complex z = pts(i);
            const double tol = 1e-12 * std::max(1.0, std::abs(z));
            if (std::abs(z.imag()) <= tol) {
                s(col, col) = z.real();
                l.col(col) = dirs.col(i).real();
                ++col;
                continue;
            }
            Index partner = -1;
            for (Index j = i + 1; j < r && partner < 0; ++j)
                if (!used[static_cast<std::size_t>(j)] && std::abs(pts(j) - std::conj(z)) <= tol &&
                    (dirs.col(j) - dirs.col(i).conjugate()).norm() <= 1e-12 * std::max(1.0, dirs.col(i).norm()))
                    partner = j;
            if (partner < 0)
                throw Error(ErrorKind::InvalidArgument,
                            "interpolation data is not closed under conjugation (point " + std::to_string(i) + ")");
            used[static_cast<std::size_t>(partner)] = true;
            s(col, col) = z.real();
            s(col, col + 1) = z.imag();
            s(col + 1, col) = -z.imag();
            s(col + 1, col + 1) = z.real();
            l.col(col) = dirs.col(i).real();
            l.col(col + 1) = dirs.col(i).imag();
            col += 2;
        }
    }
};

/// Petrov–Galerkin projection. W is rescaled to W (WᵀV)⁻ᵀ so that WᵀV = I;
/// the transfer function does not depend on that choice.
inline ReducedModel project(const StateSpaceModel& model, const Matrix& v, const Matrix& w) {
    if (v.rows() != model.n() || w.rows() != model.n() || v.cols() != w.cols() || v.cols() == 0)
        throw Error(ErrorKind::DimensionMismatch, "project: V and W must both be n×r with r >= 1");
    const Matrix e = w.transpose() * v;
    const Svd sv = ordered_svd(e);
    const double smin = sv.s(sv.s.size() - 1);
    if (!(smin > 0) || sv.s(0) / smin > 1e12)
        throw Error(ErrorKind::SingularProjection, "WᵀV is numerically singular (cond > 1e12)");
    const Matrix wn = w * e.transpose().partialPivLu().inverse();
    Matrix ar = wn.transpose() * model.a().apply(v);
    Matrix br = wn.transpose() * model.b();
    Matrix cr = model.c() * v;
    return {StateSpaceModel::dense(std::move(ar), std::move(br), std::move(cr)), v, wn, std::nullopt};
}

/// Square-root balancing from Gramian factors P ≈ L_p L_pᵀ, Q ≈ L_q L_qᵀ.
inline ReducedModel bt_from_factors(const StateSpaceModel& model, const Matrix& lp, const Matrix& lq, Index r) {
    if (r < 1) throw Error(ErrorKind::InvalidArgument, "reduced order must be >= 1");
    const Svd sv = ordered_svd(lq.transpose() * lp);
    const Index avail = sv.s.size();
    if (r > avail || !(sv.s(r - 1) > 0))
        throw Error(ErrorKind::SingularProjection, "requested order " + std::to_string(r) +
                                                       " exceeds the numerical rank of the Gramian factors");
    if (r < avail && sv.s(r - 1) - sv.s(r) <= 1e-12 * sv.s(0))
        throw Error(ErrorKind::SingularValueTie, "sigma_r equals sigma_{r+1}; truncation at r = " +
                                                     std::to_string(r) + " is ill-defined");
    const Vector scale = sv.s.head(r).cwiseSqrt().cwiseInverse();
    const Matrix v = lp * sv.v.leftCols(r) * scale.asDiagonal();
    const Matrix w = lq * sv.u.leftCols(r) * scale.asDiagonal();
    ReducedModel red = project(model, v, w);
    red.retained_sv = SvReport{sv.s.head(r), SvKind::Hankel, {}};
    return red;
}

inline ReducedModel bt_square_root(const StateSpaceModel& model, const GramianPair& g, Index r) {
    if (r < 1 || r > model.n()) throw Error(ErrorKind::InvalidArgument, "reduced order must lie in [1, n]");
    Matrix lp, lq;
    parallel_invoke([&] { lp = psd_factor(g.p).z; }, [&] { lq = psd_factor(g.q).z; });
    return bt_from_factors(model, lp, lq, r);
}

inline ReducedModel bt_square_root(const StateSpaceModel& model, Index r) {
    require_hurwitz(model, "bt_square_root");
    return bt_square_root(model, gramians_dense(model), r);
}

namespace detail {

// Galerkin truncation onto the r dominant eigenvectors of a Gramian.
inline ReducedModel dominant_eigenspace(const StateSpaceModel& model, const Matrix& g, Index r) {
    if (r < 1 || r > model.n()) throw Error(ErrorKind::InvalidArgument, "reduced order must lie in [1, n]");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (g + g.transpose()));
    const Index n = g.rows();
    const Vector lam = eig.eigenvalues().reverse();
    const Matrix t = eig.eigenvectors().rowwise().reverse();
    if (r < n && lam(r - 1) - lam(r) <= 1e-12 * lam(0))
        throw Error(ErrorKind::SingularValueTie, "Gramian eigenvalues tie at the truncation index");
    const Matrix v = t.leftCols(r);
    ReducedModel red = project(model, v, v);
    red.retained_sv = SvReport{lam.head(r), SvKind::GramianSingular, {}};
    return red;
}

}  // namespace detail

/// Truncated controllable realization: Galerkin projection onto the r
/// dominant eigenvectors of P.
inline ReducedModel tcr(const StateSpaceModel& model, Index r) {
    require_hurwitz(model, "tcr");
    const Matrix a = model.dense_a();
    return detail::dominant_eigenspace(model, solve_lyapunov_dense(a, model.b() * model.b().transpose()), r);
}

/// Truncated observable realization: the same with Q.
inline ReducedModel tor(const StateSpaceModel& model, Index r) {
    require_hurwitz(model, "tor");
    const Matrix a = model.dense_a();
    return detail::dominant_eigenspace(
        model, solve_lyapunov_dense(a.transpose(), model.c().transpose() * model.c()), r);
}

/// Solves both interpolation Sylvester equations with the skinny solver and
/// projects.
inline ReducedModel tangential_interpolate(const StateSpaceModel& model, const InterpolationData& d) {
    const Index r = d.order();
    if (d.sb.cols() != r || d.sc.rows() != r || d.sc.cols() != r || d.lb.rows() != model.m() ||
        d.lb.cols() != r || d.lc.rows() != model.p() || d.lc.cols() != r)
        throw Error(ErrorKind::DimensionMismatch, "interpolation data does not match the model");
    const OperatorPtr at = model.a().transposed();
    Matrix v, w;
    parallel_invoke([&] { v = solve_sylvester_skinny(model.a(), -d.sb.transpose(), model.b() * d.lb); },
                    [&] { w = solve_sylvester_skinny(*at, -d.sc.transpose(), model.c().transpose() * d.lc); });
    return project(model, v, w);
}

/// Moves eigenvalues with real part >= −1e-12 into the open left half plane
/// (Re ← −|Re| − 1e-8), leaving the rest of the spectrum and the invariant
/// subspaces untouched. Returns the input unchanged when already stable.
inline Matrix reflect_unstable(const Matrix& ar, Index* reflected = nullptr) {
    Eigen::RealSchur<Matrix> schur(ar);
    Matrix t = schur.matrixT();
    const auto blocks = detail::schur_blocks(t);
    Index count = 0;
    for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
        const Index i = blocks[b];
        const Index bi = blocks[b + 1] - i;
        const double re = bi == 1 ? t(i, i) : 0.5 * (t(i, i) + t(i + 1, i + 1));
        if (re < -1e-12) continue;
        const double shift = (-std::abs(re) - 1e-8) - re;
        for (Index k = 0; k < bi; ++k) t(i + k, i + k) += shift;
        count += bi;
    }
    if (reflected) *reflected = count;
    if (count == 0) return ar;
    const Matrix& u = schur.matrixU();
    return u * t * u.transpose();
}

/// P̂ and Q̂ of a ROM:
///   A P̂ + P̂ A_rᵀ + B B_rᵀ = 0,   Aᵀ Q̂ + Q̂ A_r + Cᵀ C_r = 0.
struct SylvesterPair {
    Matrix phat;
    Matrix qhat;
};

inline SylvesterPair sylvester_pair(const StateSpaceModel& model, const LinearOperator& at, const Matrix& ar,
                                    const Matrix& br, const Matrix& cr) {
    SylvesterPair sp;
    parallel_invoke([&] { sp.phat = solve_sylvester_skinny(model.a(), ar, model.b() * br.transpose()); },
                    [&] { sp.qhat = solve_sylvester_skinny(at, ar.transpose(), model.c().transpose() * cr); });
    return sp;
}

inline SylvesterPair sylvester_pair(const StateSpaceModel& model, const ReducedModel& red) {
    return sylvester_pair(model, *model.a().transposed(), red.ar(), red.br(), red.cr());
}

/// Relative defects of the three first-order H2 optimality conditions:
///   C P̂ − C_r P_r,   Q̂ᵀ B − Q_r B_r,   Q̂ᵀ P̂ − Q_r P_r   (Frobenius).
struct WilsonResiduals {
    double output = 0.0;
    double input = 0.0;
    double cross = 0.0;
    double max() const { return std::max({output, input, cross}); }
};

inline WilsonResiduals wilson_residuals(const StateSpaceModel& model, const ReducedModel& red) {
    const SylvesterPair sp = sylvester_pair(model, red);
    const Matrix pr = solve_lyapunov_dense(red.ar(), red.br() * red.br().transpose());
    const Matrix qr = solve_lyapunov_dense(red.ar().transpose(), red.cr().transpose() * red.cr());
    auto rel = [](const Matrix& x, const Matrix& ref) { return (x - ref).norm() / ref.norm(); };
    return {rel(model.c() * sp.phat, red.cr() * pr), rel(sp.qhat.transpose() * model.b(), qr * red.br()),
            rel(sp.qhat.transpose() * sp.phat, qr * pr)};
}

/// Largest relative defect over the ROM poles of the bitangential Hermite
/// conditions at the mirror images −λ̃ᵢ along the ROM residue directions.
struct HermiteDefects {
    double right = 0.0;
    double left = 0.0;
    double derivative = 0.0;
    double max() const { return std::max({right, left, derivative}); }
};

inline HermiteDefects hermite_defects(const StateSpaceModel& model, const ReducedModel& red) {
    const PoleResidue pr = pole_residue(red.rom);
    HermiteDefects d;
    for (Index i = 0; i < pr.poles.size(); ++i) {
        const Complex s = -pr.poles(i);
        const CVector rdir = pr.right.row(i).adjoint();
        const CVector ldir = pr.left.col(i);
        const CMatrix h = eval_transfer(model, s);
        const CMatrix hr = eval_transfer(red.rom, s);
        const CMatrix dh = eval_transfer_derivative(model, s);
        const CMatrix dhr = eval_transfer_derivative(red.rom, s);
        d.right = std::max(d.right, ((h - hr) * rdir).norm() / (h * rdir).norm());
        d.left = std::max(d.left, (ldir.adjoint() * (h - hr)).norm() / (ldir.adjoint() * h).norm());
        const Complex ref = (ldir.adjoint() * dh * rdir)(0, 0);
        const Complex got = (ldir.adjoint() * dhr * rdir)(0, 0);
        d.derivative = std::max(d.derivative, std::abs(ref - got) / std::abs(ref));
    }
    return d;
}

namespace detail {

inline CVector sorted_poles(const Matrix& ar) {
    Eigen::EigenSolver<Matrix> eig(ar, false);
    CVector ev = eig.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return ev;
}

}  // namespace detail

struct TsiaResult {
    ReducedModel rom;
    Index iterations = 0;
    bool converged = false;
    Index reflections = 0;  // eigenvalues moved by reflect_unstable over the run
};

/// Two-sided iteration: V = P̂, W = Q̂ from the current ROM, project, repeat
/// until the sorted ROM poles change by at most conv_tol (relative).
inline TsiaResult tsia(const StateSpaceModel& model, const ReducedModel& init, Index max_iter = 200,
                       double conv_tol = 1e-8) {
    if (max_iter < 1 || !(conv_tol > 0)) throw Error(ErrorKind::InvalidArgument, "tsia: bad iteration controls");
    require_hurwitz(model, "tsia");
    if (!is_hurwitz(init.rom)) throw Error(ErrorKind::NonHurwitz, "tsia: initial ROM is not Hurwitz");
    const OperatorPtr at = model.a().transposed();

    TsiaResult res{init, 0, false, 0};
    CVector poles = detail::sorted_poles(init.ar());
    for (Index it = 1; it <= max_iter; ++it) {
        Index moved = 0;
        const Matrix ar = reflect_unstable(res.rom.ar(), &moved);
        res.reflections += moved;
        const SylvesterPair sp = sylvester_pair(model, *at, ar, res.rom.br(), res.rom.cr());
        res.rom = project(model, sp.phat, sp.qhat);
        res.iterations = it;
        const CVector next = detail::sorted_poles(res.rom.ar());
        const double change = (next - poles).norm() / next.norm();
        poles = next;
        if (change <= conv_tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// Low-rank balanced truncation from two projection bases: Galerkin
/// Gramians on span(V_k) and span(W_k), their factors, and the SVD of
/// Z_qᵀ W_kᵀ V_k Z_p.
inline ReducedModel two_step_lowrank_bt(const StateSpaceModel& model, const Matrix& v_in, const Matrix& w_in,
                                        Index r) {
    if (v_in.rows() != model.n() || w_in.rows() != model.n())
        throw Error(ErrorKind::DimensionMismatch, "two_step_lowrank_bt: bases must have n rows");
    if (v_in.cols() < r || w_in.cols() < r) throw Error(ErrorKind::InvalidArgument, "two_step_lowrank_bt: k < r");
    // Galerkin Gramians depend only on the spans, so work with orthonormal bases.
    const Matrix vk = orthonormalize(v_in);
    const Matrix wk = orthonormalize(w_in);
    if (vk.cols() < v_in.cols() || wk.cols() < w_in.cols())
        throw Error(ErrorKind::SingularProjection, "two_step_lowrank_bt: basis is rank deficient");
    Matrix pk, qk;
    parallel_invoke(
        [&] {
            const Matrix bk = vk.transpose() * model.b();
            pk = solve_lyapunov_dense(vk.transpose() * model.a().apply(vk), bk * bk.transpose());
        },
        [&] {
            const Matrix ck = model.c() * wk;
            qk = solve_lyapunov_dense(wk.transpose() * model.a().apply_transpose(wk), ck.transpose() * ck);
        });
    return bt_from_factors(model, vk * psd_factor(pk).z, wk * psd_factor(qk).z, r);
}

}  // namespace tanbal
