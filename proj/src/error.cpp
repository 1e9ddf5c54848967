#include "affine/error.hpp"

namespace affine {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::GammaOutOfRange: return "GammaOutOfRange";
    case Errc::NegativeFriction: return "NegativeFriction";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NonPositiveG1: return "NonPositiveG1";
    case Errc::NonZeroCoriolis: return "NonZeroCoriolis";
    case Errc::InvalidState: return "InvalidState";
    case Errc::DegenerateMoments: return "DegenerateMoments";
    case Errc::NotAxisymmetric: return "NotAxisymmetric";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::StepBudgetExceeded: return "StepBudgetExceeded";
    case Errc::NegativeRadicand: return "NegativeRadicand";
    case Errc::BranchCrossing: return "BranchCrossing";
    case Errc::RegimeMismatch: return "RegimeMismatch";
    case Errc::SignChange: return "SignChange";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::ExponentTooSmall: return "ExponentTooSmall";
    case Errc::TruncationTooTight: return "TruncationTooTight";
    case Errc::NegativePressure: return "NegativePressure";
    case Errc::SingularA: return "SingularA";
    case Errc::BadDelta: return "BadDelta";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace affine
