#pragma once

#include <array>
#include <utility>
#include <vector>

#include "pulsatio/signal.hpp"

namespace pulsatio::filtering {

enum class FilterKind { Lowpass, Bandpass };

// Butterworth specification. `order` is the order of the lowpass prototype:
// a lowpass has `order` poles, a bandpass 2 * order.
struct FilterSpec {
  FilterKind kind = FilterKind::Bandpass;
  double low_hz = 1.0;   // unused for lowpass
  double high_hz = 40.0; // lowpass cutoff
  int order = 4;

  static FilterSpec lowpass(double cutoff_hz, int order = 4) { return {FilterKind::Lowpass, 0.0, cutoff_hz, order}; }
  static FilterSpec bandpass(double low_hz, double high_hz, int order = 4) {
    return {FilterKind::Bandpass, low_hz, high_hz, order};
  }

  int pole_count() const { return kind == FilterKind::Bandpass ? 2 * order : order; }
};

// One biquad in direct form II transposed: b0 b1 b2 / 1 a1 a2.
struct Biquad {
  std::array<double, 3> b{1.0, 0.0, 0.0};
  std::array<double, 2> a{0.0, 0.0};
};

// Bilinear-transform Butterworth design with unit gain at DC (lowpass) or at
// the geometric band centre (bandpass). Throws InvalidCutoff.
std::vector<Biquad> design_butterworth(const FilterSpec& spec, double sample_rate_hz);

// Magnitude response at `freq_hz`.
double magnitude_response(const std::vector<Biquad>& sections, double freq_hz, double sample_rate_hz);

// Forward-backward filtering with odd reflection padding of 3 * poles samples
// and steady-state initial conditions.
Signal zero_phase_filter(const Signal& signal, const FilterSpec& spec);

// Zero-phase 4th-order lowpass of the raw signal (respiration/posture band).
Signal gross_acceleration(const Signal& signal, double cutoff_hz = 3.0);

struct RespirationEstimate {
  double breaths_per_min = 0.0;
  double peak_hz = 0.0;
  double concentration = 0.0;  // fraction of in-band power within the peak's main lobe
};

inline constexpr double kMinRespirationConcentration = 0.6;

// 60 x dominant spectral frequency of the gross channel inside `band_hz`.
// Throws SignalTooShort below 30 s and NoPeakInBand when the peak's main lobe
// holds less than kMinRespirationConcentration of the in-band power.
RespirationEstimate estimate_respiration(const Signal& gross, std::pair<double, double> band_hz = {0.1, 0.5});
double respiration_rate(const Signal& gross, std::pair<double, double> band_hz = {0.1, 0.5});

// RMS of each full non-overlapping window; a trailing partial window is dropped.
std::vector<double> activity_index(const Signal& gross, double window_s);

}  // namespace pulsatio::filtering
