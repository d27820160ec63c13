#include "mrep/errors.hpp"

namespace mrep {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonRefining: return "NonRefining";
        case ErrorCode::MeyerOutOfBand: return "MeyerOutOfBand";
        case ErrorCode::BadWeights: return "BadWeights";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NotAStoppingTime: return "NotAStoppingTime";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::BadWindow: return "BadWindow";
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::ClassificationInconsistent: return "ClassificationInconsistent";
        case ErrorCode::InvalidDividedTime: return "InvalidDividedTime";
        case ErrorCode::BracketFailure: return "BracketFailure";
        case ErrorCode::NotStrictlyLater: return "NotStrictlyLater";
        case ErrorCode::InvalidSignal: return "InvalidSignal";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::DegenerateSensor: return "DegenerateSensor";
        case ErrorCode::NonMonotoneControl: return "NonMonotoneControl";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SolveFailure: return "SolveFailure";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace mrep
