#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrep {

enum class ErrorCode {
    NonRefining,
    MeyerOutOfBand,
    BadWeights,
    ShapeMismatch,
    NotAStoppingTime,
    TooLarge,
    EmptyWindow,
    BadWindow,
    InvalidInput,
    ClassificationInconsistent,
    InvalidDividedTime,
    BracketFailure,
    NotStrictlyLater,
    InvalidSignal,
    BadConfig,
    DegenerateSensor,
    NonMonotoneControl,
    ParseError,
    SolveFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every module; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mrep
