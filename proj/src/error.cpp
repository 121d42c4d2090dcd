#include "twolevel/error.hpp"

namespace twolevel {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownRateForm: return "UnknownRateForm";
    case ErrorCode::EnvelopeViolated: return "EnvelopeViolated";
    case ErrorCode::BadMatrix: return "BadMatrix";
    case ErrorCode::EllipticityViolated: return "EllipticityViolated";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::Extinct: return "Extinct";
    case ErrorCode::EventBudgetExceeded: return "EventBudgetExceeded";
    case ErrorCode::RejectionStall: return "RejectionStall";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::PicardDiverged: return "PicardDiverged";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::TierMismatch: return "TierMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_config_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::UnknownRateForm:
    case ErrorCode::EnvelopeViolated:
    case ErrorCode::BadMatrix:
    case ErrorCode::EllipticityViolated:
    case ErrorCode::TierMismatch:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

}  // namespace twolevel
