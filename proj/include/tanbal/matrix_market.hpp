#pragma once

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "tanbal/errors.hpp"
#include "tanbal/linear_operator.hpp"

namespace tanbal {

enum class MmFormat { Array, Coordinate };
enum class MmSymmetry { General, Symmetric };

/// A Matrix Market file as read: either dense entries or a triplet list.
struct MmMatrix {
    Index rows = 0;
    Index cols = 0;
    MmFormat format = MmFormat::Array;
    MmSymmetry symmetry = MmSymmetry::General;
    Matrix dense;                                 // Array files
    std::vector<Eigen::Triplet<double>> entries;  // Coordinate files, symmetric part expanded

    Matrix to_dense() const {
        if (format == MmFormat::Array) return dense;
        Matrix m = Matrix::Zero(rows, cols);
        for (const auto& t : entries) m(t.row(), t.col()) += t.value();
        return m;
    }

    SparseMatrix to_sparse() const {
        if (format == MmFormat::Array) return dense.sparseView();
        SparseMatrix s(rows, cols);
        s.setFromTriplets(entries.begin(), entries.end());
        return s;
    }
};

namespace detail {

inline std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

inline double parse_real(const std::string& tok, const std::string& path, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(path, line, "expected a real number, got '" + tok + "'");
    return v;
}

inline Index parse_index(const std::string& tok, const std::string& path, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE || v < 0)
        throw ParseError(path, line, "expected a non-negative integer, got '" + tok + "'");
    return static_cast<Index>(v);
}

inline std::vector<std::string> split(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

}  // namespace detail

/// Reads "%%MatrixMarket matrix {coordinate|array} {real|integer}
/// {general|symmetric}". Indices are 1-based; for symmetric files only the
/// lower triangle is stored and is mirrored on load.
inline MmMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::string text;
    std::size_t line_no = 0;
    auto next_line = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            if (!out.empty() && out.back() == '\r') out.pop_back();
            return true;
        }
        return false;
    };

    if (!next_line(text)) throw ParseError(path, 1, "empty file");
    const auto header = detail::split(detail::lower(text));
    if (header.size() != 5 || header[0] != "%%matrixmarket" || header[1] != "matrix")
        throw ParseError(path, line_no, "missing '%%MatrixMarket matrix <format> <field> <symmetry>' header");
    MmMatrix mm;
    if (header[2] == "array")
        mm.format = MmFormat::Array;
    else if (header[2] == "coordinate")
        mm.format = MmFormat::Coordinate;
    else
        throw ParseError(path, line_no, "unsupported format '" + header[2] + "'");
    if (header[3] != "real" && header[3] != "integer" && header[3] != "double")
        throw ParseError(path, line_no, "unsupported field '" + header[3] + "' (real or integer only)");
    if (header[4] == "general")
        mm.symmetry = MmSymmetry::General;
    else if (header[4] == "symmetric")
        mm.symmetry = MmSymmetry::Symmetric;
    else
        throw ParseError(path, line_no, "unsupported symmetry '" + header[4] + "'");

    // skip comments and blank lines up to the size line
    std::vector<std::string> tok;
    while (true) {
        if (!next_line(text)) throw ParseError(path, line_no, "missing size line");
        if (text.empty() || text[0] == '%') continue;
        tok = detail::split(text);
        if (!tok.empty()) break;
    }
    const std::size_t expected = mm.format == MmFormat::Array ? 2 : 3;
    if (tok.size() != expected)
        throw ParseError(path, line_no, "size line needs " + std::to_string(expected) + " integers");
    mm.rows = detail::parse_index(tok[0], path, line_no);
    mm.cols = detail::parse_index(tok[1], path, line_no);
    if (mm.rows == 0 || mm.cols == 0) throw ParseError(path, line_no, "matrix dimensions must be positive");
    if (mm.symmetry == MmSymmetry::Symmetric && mm.rows != mm.cols)
        throw ParseError(path, line_no, "symmetric matrix must be square");

    auto data_line = [&](std::vector<std::string>& out) {
        while (next_line(text)) {
            if (text.empty() || text[0] == '%') continue;
            out = detail::split(text);
            if (!out.empty()) return true;
        }
        return false;
    };

    if (mm.format == MmFormat::Array) {
        mm.dense = Matrix::Zero(mm.rows, mm.cols);
        // column-major; symmetric files list the lower triangle only
        for (Index j = 0; j < mm.cols; ++j) {
            for (Index i = mm.symmetry == MmSymmetry::Symmetric ? j : 0; i < mm.rows; ++i) {
                if (!data_line(tok)) throw ParseError(path, line_no, "file ends before all entries were read");
                if (tok.size() != 1) throw ParseError(path, line_no, "array entries need one value per line");
                const double v = detail::parse_real(tok[0], path, line_no);
                mm.dense(i, j) = v;
                if (mm.symmetry == MmSymmetry::Symmetric) mm.dense(j, i) = v;
            }
        }
    } else {
        const Index nnz = detail::parse_index(tok[2], path, line_no);
        mm.entries.reserve(static_cast<std::size_t>(mm.symmetry == MmSymmetry::Symmetric ? 2 * nnz : nnz));
        for (Index e = 0; e < nnz; ++e) {
            if (!data_line(tok)) throw ParseError(path, line_no, "file ends before all entries were read");
            if (tok.size() != 3) throw ParseError(path, line_no, "coordinate entries need 'row col value'");
            const Index i = detail::parse_index(tok[0], path, line_no);
            const Index j = detail::parse_index(tok[1], path, line_no);
            if (i < 1 || i > mm.rows || j < 1 || j > mm.cols)
                throw ParseError(path, line_no, "index out of range");
            const double v = detail::parse_real(tok[2], path, line_no);
            if (mm.symmetry == MmSymmetry::Symmetric && j > i)
                throw ParseError(path, line_no, "symmetric file stores an upper-triangle entry");
            mm.entries.emplace_back(i - 1, j - 1, v);
            if (mm.symmetry == MmSymmetry::Symmetric && i != j) mm.entries.emplace_back(j - 1, i - 1, v);
        }
    }
    if (data_line(tok)) throw ParseError(path, line_no, "unexpected data after the last entry");
    return mm;
}

/// Writes a dense matrix in array format with round-trip precision.
inline void write_matrix_market(const std::string& path, const Matrix& m) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "' for writing");
    std::fprintf(f, "%%%%MatrixMarket matrix array real general\n%lld %lld\n", static_cast<long long>(m.rows()),
                 static_cast<long long>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) std::fprintf(f, "%.17g\n", m(i, j));
    const bool ok = std::fclose(f) == 0;
    if (!ok) throw Error(ErrorKind::InvalidArgument, "failed writing '" + path + "'");
}

/// Operator for a loaded A: coordinate files become tridiagonal when every
/// entry satisfies |i − j| <= 1, sparse otherwise; array files stay dense.
inline OperatorPtr operator_from_market(const MmMatrix& mm, const std::string& path) {
    if (mm.rows != mm.cols) throw Error(ErrorKind::DimensionMismatch, path + ": A must be square");
    if (mm.format == MmFormat::Array) return std::make_shared<DenseOperator>(mm.dense);
    bool banded = true;
    for (const auto& t : mm.entries) banded = banded && std::abs(t.row() - t.col()) <= 1;
    if (banded && mm.rows > 1) {
        const Index n = mm.rows;
        Vector sub = Vector::Zero(n - 1), diag = Vector::Zero(n), super = Vector::Zero(n - 1);
        for (const auto& t : mm.entries) {
            if (t.row() == t.col())
                diag(t.row()) += t.value();
            else if (t.row() == t.col() + 1)
                sub(t.col()) += t.value();
            else
                super(t.row()) += t.value();
        }
        return std::make_shared<TridiagonalOperator>(sub, diag, super);
    }
    return std::make_shared<SparseOperator>(mm.to_sparse());
}

}  // namespace tanbal
