#pragma once

#include <cstdint>
#include <random>

#include "tanbal/linalg.hpp"

namespace tanbal {

/// Independent generator for (seed, stream); streams never share state, so
/// adding a draw to one stream leaves the others unchanged.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

/// Standard normal entries, filled column by column.
inline Matrix gaussian_matrix(std::mt19937_64& gen, Index rows, Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = normal(gen);
    return m;
}

/// M − (‖M‖₂ + 1) I. Every eigenvalue λ of M has |λ| ≤ ‖M‖₂, so the result
/// has spectrum in Re < −1.
inline Matrix shift_to_stable(const Matrix& m) {
    Matrix a = m;
    a.diagonal().array() -= norm2(m) + 1.0;
    return a;
}

enum RandomStream : std::uint64_t { kStreamA = 0, kStreamB = 1, kStreamC = 2 };

}  // namespace tanbal
