#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pulsatio/signal.hpp"

namespace pulsatio::quality {

struct QualityReport {
  std::size_t window_index = 0;
  double template_correlation_sqi = 0.0;  // [-1, 1]
  double kurtosis_sqi = 0.0;              // excess kurtosis
  double spectral_entropy_sqi = 0.0;      // [0, 1]
  double composite = 0.0;                 // [0, 1]
};

// Pearson correlation of a beat against the template. Throws LengthMismatch
// and ConstantInput.
double template_correlation_sqi(std::span<const double> beat, std::span<const double> template_beat);

// Fourth standardized (population) moment minus 3. Throws ConstantInput and
// SignalTooShort (fewer than 4 samples).
double kurtosis_sqi(std::span<const double> window);

// Shannon entropy of the normalized Welch PSD (Hann, 256-sample segments or
// the whole window if shorter, 50% overlap) over ln(bins). Throws
// SignalTooShort below 64 samples and ConstantInput for a flat PSD.
double spectral_entropy_sqi(std::span<const double> window, double sample_rate_hz);

// mean(max(corr, 0), clamp01(1 - spectral_entropy), clamp01(kurtosis / 10)).
double composite_sqi(double template_correlation, double spectral_entropy, double excess_kurtosis);

struct WindowQuality {
  QualityReport report;
  double start_s = 0.0;
  std::size_t n_beats = 0;
};

// Splits the filtered signal into consecutive windows (a trailing remainder
// shorter than 64 samples is dropped). The correlation index of a window is
// the median over beats whose fiducial falls inside it, each beat cut as
// [anchor - pre_s, anchor - pre_s + template length); 0 when no beat lands.
// A flat window scores corr 0, entropy 1, kurtosis 0.
std::vector<WindowQuality> assess_windows(const Signal& filtered, std::span<const double> template_beat,
                                          double pre_s, double window_s = 5.0);

}  // namespace pulsatio::quality
