#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vinecast {

enum class ErrorCode {
    InvalidArgument,
    SingularRealizedCov,
    NotPositiveDefinite,
    CorrelationAtBoundary,
    DegenerateConditioner,
    SingularMatrix,
    InvalidStructure,
    RankDeficientDesign,
    OptimizerDiverged,
    NonStationary,
    BoundaryD,
    DegenerateSample,
    InfeasibleTarget,
    ConfigError,
    IoError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to a structured message and exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SingularRealizedCov: return "SingularRealizedCov";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::CorrelationAtBoundary: return "CorrelationAtBoundary";
        case ErrorCode::DegenerateConditioner: return "DegenerateConditioner";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::InvalidStructure: return "InvalidStructure";
        case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
        case ErrorCode::OptimizerDiverged: return "OptimizerDiverged";
        case ErrorCode::NonStationary: return "NonStationary";
        case ErrorCode::BoundaryD: return "BoundaryD";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace vinecast
