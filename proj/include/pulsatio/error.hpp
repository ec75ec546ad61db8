#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pulsatio {

enum class ErrorCode {
  // signal-core
  MissingFile,
  ParseError,
  EmptySignal,
  InvalidParameter,
  IoError,
  RaggedRows,
  // filtering / spectral
  SignalTooShort,
  InvalidCutoff,
  NoPeakInBand,
  WindowTooShort,
  EmptyBand,
  // beats
  NoBeatsFound,
  NoCompleteBeats,
  AllBeatsRejected,
  LengthMismatch,
  NoEligibleBeats,
  // wavelets
  TooManyLevels,
  InconsistentPyramid,
  // multifractal
  TooFewLevels,
  DegenerateScale,
  InsufficientScales,
  NonPositiveStructureFunction,
  IllConditionedFit,
  DegenerateSpectrum,
  // features / quality
  DegenerateInput,
  OrderTooHigh,
  ConstantInput,
  // cli
  EmptyData,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure in the library is reported as an Error. `stage` is empty for
// plain operations; composite pipelines fill it with the failing step
// (feature category, CLI stage).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same code and detail, tagged with `stage`.
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

}  // namespace pulsatio
