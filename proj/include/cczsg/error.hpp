#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cczsg {

enum class ErrorCode {
    DimensionMismatch,
    ZeroVector,
    InconsistentMoments,
    POutOfRange,
    NotPSD,
    OddDimension,
    EmptyStrategySet,
    SlaterViolated,
    GapTooLarge,
    SolverFailure,
    MalformedProgram,
    SamplerStarvation,
    UnsampleableModel,
    ModulusViolation,
    LengthMismatch,
    Schema,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cczsg
