#pragma once

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pulsatio/signal.hpp"

namespace pulsatio::spectral {

struct PowerSpectrum {
  std::vector<double> freqs_hz;
  std::vector<double> power;  // one-sided density, units^2 / Hz
  double resolution_hz = 0.0;
  std::string window_name = "hann";
};

// Time-frequency power. power(f, t): rows are frequency bins, columns frames.
struct Spectrogram {
  std::vector<double> freqs_hz;
  std::vector<double> times_s;  // frame centres
  Matrix power;
};

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Forward real FFT of length input.size(); returns the n/2 + 1 non-negative bins.
std::vector<std::complex<double>> real_fft(std::span<const double> input);

// Averaged Hann periodogram with per-segment mean removal and density
// scaling, so the integral of the one-sided spectrum equals the variance.
// `nfft` (rounded up to even, at least the segment length) zero-pads each
// segment; 0 uses the segment length.
PowerSpectrum welch_psd(const Signal& signal, double segment_s, double overlap_fraction = 0.5,
                        std::size_t nfft = 0);

// Column count is floor((N - window) / hop) + 1.
Spectrogram spectrogram(const Signal& signal, double window_s, double hop_s);

// Frequency of maximum power inside [lo, hi]; ties go to the lower frequency.
double dominant_frequency(const PowerSpectrum& ps, std::pair<double, double> band_hz);

// Sum of power * resolution: the variance estimate carried by the spectrum.
double integrated_power(const PowerSpectrum& ps);

}  // namespace pulsatio::spectral
