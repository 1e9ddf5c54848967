#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affine {

enum class Errc {
  GammaOutOfRange,
  NegativeFriction,
  NonFinite,
  NonPositiveG1,
  NonZeroCoriolis,
  InvalidState,
  DegenerateMoments,
  NotAxisymmetric,
  OutOfRange,
  StepBudgetExceeded,
  NegativeRadicand,
  BranchCrossing,
  RegimeMismatch,
  SignChange,
  TooFewSamples,
  ExponentTooSmall,
  TruncationTooTight,
  NegativePressure,
  SingularA,
  BadDelta,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace affine
