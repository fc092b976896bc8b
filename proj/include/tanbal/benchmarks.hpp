#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "tanbal/errors.hpp"
#include "tanbal/matrix_market.hpp"
#include "tanbal/random.hpp"
#include "tanbal/system_model.hpp"

namespace tanbal {

/// 1-D heat equation on (0, 1) with Dirichlet ends, n interior nodes and
/// centred differences: A = (n+1)² tridiag(1, −2, 1). Input
/// B = (n+1) e_j at j = round(n/3), output C = e_kᵀ at k = round(2n/3)
/// (1-based node numbers).
inline StateSpaceModel heat_rod(Index n) {
    if (n < 3) throw Error(ErrorKind::InvalidArgument, "heat_rod needs n >= 3");
    const double h2 = static_cast<double>(n + 1) * static_cast<double>(n + 1);
    auto a = std::make_shared<TridiagonalOperator>(Vector::Constant(n - 1, h2), Vector::Constant(n, -2.0 * h2),
                                                   Vector::Constant(n - 1, h2));
    const auto j = static_cast<Index>(std::llround(static_cast<double>(n) / 3.0));
    const auto k = static_cast<Index>(std::llround(2.0 * static_cast<double>(n) / 3.0));
    Matrix b = Matrix::Zero(n, 1);
    Matrix c = Matrix::Zero(1, n);
    b(j - 1, 0) = static_cast<double>(n + 1);
    c(0, k - 1) = 1.0;
    return StateSpaceModel(std::move(a), std::move(b), std::move(c));
}

/// Dense Gaussian model shifted to be Hurwitz; A, B and C come from separate
/// streams of the seed.
inline StateSpaceModel random_stable(Index n, Index m, Index p, std::uint64_t seed) {
    if (n < 1 || m < 1 || p < 1) throw Error(ErrorKind::InvalidArgument, "random_stable needs n, m, p >= 1");
    auto ga = substream(seed, 100 + kStreamA);
    auto gb = substream(seed, 100 + kStreamB);
    auto gc = substream(seed, 100 + kStreamC);
    Matrix a = shift_to_stable(gaussian_matrix(ga, n, n));
    Matrix b = gaussian_matrix(gb, n, m);
    Matrix c = gaussian_matrix(gc, p, n);
    return StateSpaceModel::dense(std::move(a), std::move(b), std::move(c));
}

/// Fourth-order modal example whose strongly controllable mode is weakly
/// observable and vice versa.
inline StateSpaceModel illustrative4() {
    Matrix a = Vector((Vector(4) << -0.1, -0.2, -100.0, -200.0).finished()).asDiagonal();
    Matrix b(4, 1), c(1, 4);
    b << 1.0, 1.0, 1e4, 1.0;
    c << 1.0, 1.0, 1.0, 1e4;
    return StateSpaceModel::dense(std::move(a), std::move(b), std::move(c));
}

/// (A, B, C) from three Matrix Market files.
inline StateSpaceModel load_matrix_market(const std::string& a_path, const std::string& b_path,
                                          const std::string& c_path) {
    const MmMatrix a = read_matrix_market(a_path);
    const MmMatrix b = read_matrix_market(b_path);
    const MmMatrix c = read_matrix_market(c_path);
    if (a.rows != a.cols) throw Error(ErrorKind::DimensionMismatch, a_path + ": A must be square");
    if (b.rows != a.rows)
        throw Error(ErrorKind::DimensionMismatch, b_path + ": B has " + std::to_string(b.rows) + " rows, A has " +
                                                      std::to_string(a.rows));
    if (c.cols != a.rows)
        throw Error(ErrorKind::DimensionMismatch, c_path + ": C has " + std::to_string(c.cols) +
                                                      " columns, A has " + std::to_string(a.rows));
    return StateSpaceModel(operator_from_market(a, a_path), b.to_dense(), c.to_dense());
}

enum class ModelKind { HeatRod, RandomStable, Illustrative4, MatrixMarket };

struct ModelSpec {
    ModelKind kind = ModelKind::Illustrative4;
    Index n = 0;
    Index m = 1;
    Index p = 1;
    std::uint64_t seed = 1;
    std::string a_path, b_path, c_path;

    void validate() const {
        auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
        switch (kind) {
            case ModelKind::HeatRod:
                if (n < 3) bad("heat_rod needs n >= 3");
                break;
            case ModelKind::RandomStable:
                if (n < 1 || m < 1 || p < 1) bad("random_stable needs n, m, p >= 1");
                break;
            case ModelKind::Illustrative4: break;
            case ModelKind::MatrixMarket:
                if (a_path.empty() || b_path.empty() || c_path.empty()) bad("matrix_market needs a, b and c paths");
                break;
        }
    }

    StateSpaceModel build() const {
        validate();
        switch (kind) {
            case ModelKind::HeatRod: return heat_rod(n);
            case ModelKind::RandomStable: return random_stable(n, m, p, seed);
            case ModelKind::Illustrative4: return illustrative4();
            case ModelKind::MatrixMarket: return load_matrix_market(a_path, b_path, c_path);
        }
        throw Error(ErrorKind::InvalidArgument, "unknown model kind");
    }
};

}  // namespace tanbal
