#include "pulsatio/error.hpp"

namespace pulsatio {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::InvalidCutoff: return "InvalidCutoff";
    case ErrorCode::NoPeakInBand: return "NoPeakInBand";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::NoBeatsFound: return "NoBeatsFound";
    case ErrorCode::NoCompleteBeats: return "NoCompleteBeats";
    case ErrorCode::AllBeatsRejected: return "AllBeatsRejected";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoEligibleBeats: return "NoEligibleBeats";
    case ErrorCode::TooManyLevels: return "TooManyLevels";
    case ErrorCode::InconsistentPyramid: return "InconsistentPyramid";
    case ErrorCode::TooFewLevels: return "TooFewLevels";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::InsufficientScales: return "InsufficientScales";
    case ErrorCode::NonPositiveStructureFunction: return "NonPositiveStructureFunction";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::EmptyData: return "EmptyData";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += stage + ": ";
  out += to_string(code);
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(compose(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

}  // namespace pulsatio
