#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tanbal {

enum class ErrorKind {
    NonHurwitz,
    SingularSeparation,
    SpectrumOverlap,
    ShiftSolveFailure,
    EmptyInput,
    NotSymmetric,
    RepeatedPoles,
    SingularProjection,
    SingularValueTie,
    DimensionMismatch,
    DenseInfeasible,
    ParseError,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonHurwitz: return "NonHurwitz";
        case ErrorKind::SingularSeparation: return "SingularSeparation";
        case ErrorKind::SpectrumOverlap: return "SpectrumOverlap";
        case ErrorKind::ShiftSolveFailure: return "ShiftSolveFailure";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::RepeatedPoles: return "RepeatedPoles";
        case ErrorKind::SingularProjection: return "SingularProjection";
        case ErrorKind::SingularValueTie: return "SingularValueTie";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::DenseInfeasible: return "DenseInfeasible";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind so callers can branch
/// on it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Input-file failure with the offending location (1-based line, 0 if unknown).
class ParseError : public Error {
public:
    ParseError(std::string path, std::size_t line, const std::string& what)
        : Error(ErrorKind::ParseError,
                path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
          path_(std::move(path)),
          line_(line) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

}  // namespace tanbal
