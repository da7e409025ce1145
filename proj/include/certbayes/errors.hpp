#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace certbayes {

enum class ErrorCode {
    DimensionMismatch,
    NonFiniteEntry,
    Empty,
    NotPositiveDefinite,
    DomainViolation,
    CgfRangeViolation,
    PreconditionViolated,
    BudgetMismatch,
    DivergentTrajectory,
    NonFiniteDensity,
    ParseError,
    NonNumericColumn,
    MissingTarget,
    ZeroVarianceColumn,
    TooFewRows,
    InvalidArgument,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::DomainViolation: return "DomainViolation";
        case ErrorCode::CgfRangeViolation: return "CgfRangeViolation";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::BudgetMismatch: return "BudgetMismatch";
        case ErrorCode::DivergentTrajectory: return "DivergentTrajectory";
        case ErrorCode::NonFiniteDensity: return "NonFiniteDensity";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::NonNumericColumn: return "NonNumericColumn";
        case ErrorCode::MissingTarget: return "MissingTarget";
        case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) throw Error(code, what);
}

} // namespace detail
} // namespace certbayes
