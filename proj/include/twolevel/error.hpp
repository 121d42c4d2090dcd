#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twolevel {

enum class ErrorCode {
  // configuration
  ParseError,
  SchemaError,
  UnknownRateForm,
  // model validation
  EnvelopeViolated,
  BadMatrix,
  EllipticityViolated,
  NegativeRate,
  // simulation
  Extinct,
  EventBudgetExceeded,
  RejectionStall,
  // numerics
  StepFailure,
  PicardDiverged,
  CFLViolation,
  NegativeDensity,
  DegenerateSeries,
  TierMismatch,
  InvalidArgument,
};

std::string_view error_name(ErrorCode code) noexcept;

/// True for errors that come from a bad experiment description rather than
/// from the numerics (the CLI maps these to exit code 2).
bool is_config_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twolevel
