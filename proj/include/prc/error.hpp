#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prc {

/// Failure kinds raised by the library. Each maps onto one of three
/// categories that the CLI turns into exit codes.
enum class ErrorKind {
    // numerical
    NonFinite,
    RangeExceeded,
    SingularSystem,
    ZeroMeanTarget,
    // data
    NonPositiveResistance,
    RateMismatch,
    EmptySelection,
    DimensionMismatch,
    InsufficientFrames,
    MissingCondition,
    EmptyWindow,
    IncompleteBank,
    SchemaError,
    IoError,
    // configuration / usage
    ParseError,
    ValidationError,
};

enum class ErrorCategory { Usage, Data, Numerical };

constexpr std::string_view to_string(ErrorKind k) noexcept
{
    switch (k) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::RangeExceeded: return "RangeExceeded";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::ZeroMeanTarget: return "ZeroMeanTarget";
    case ErrorKind::NonPositiveResistance: return "NonPositiveResistance";
    case ErrorKind::RateMismatch: return "RateMismatch";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InsufficientFrames: return "InsufficientFrames";
    case ErrorKind::MissingCondition: return "MissingCondition";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::IncompleteBank: return "IncompleteBank";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

constexpr ErrorCategory category(ErrorKind k) noexcept
{
    switch (k) {
    case ErrorKind::NonFinite:
    case ErrorKind::RangeExceeded:
    case ErrorKind::SingularSystem:
    case ErrorKind::ZeroMeanTarget:
        return ErrorCategory::Numerical;
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
        return ErrorCategory::Usage;
    default:
        return ErrorCategory::Data;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }
    ErrorCategory category() const noexcept { return prc::category(kind_); }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace prc
