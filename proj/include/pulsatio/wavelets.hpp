#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pulsatio/signal.hpp"

namespace pulsatio::wavelets {

// Orthonormal scaling filter h (sum = sqrt(2)); the wavelet filter is the
// alternating flip g[n] = (-1)^n h[L-1-n].
struct WaveletFilter {
  std::string name;
  std::span<const double> scaling;

  std::size_t length() const { return scaling.size(); }
  std::vector<double> wavelet() const;
};

// "db2" ... "db10", "fk18". Throws InvalidParameter for anything else.
WaveletFilter wavelet_filter(std::string_view name);
std::vector<std::string> available_wavelets();

// details[0] is level 1 (finest). Level lengths follow the ceil(n / 2) chain
// of periodized transforms (odd-length levels are extended by repeating their
// last sample).
struct DwtPyramid {
  std::vector<std::vector<double>> details;
  std::vector<double> approximation;
  std::string wavelet_name;
  std::size_t original_length = 0;

  int levels() const { return static_cast<int>(details.size()); }
};

int max_dwt_levels(std::size_t length);

// Periodic-boundary DWT. Requires length >= filter length and
// 1 <= levels <= floor(log2(length)) - 2.
DwtPyramid dwt(std::span<const double> x, std::string_view wavelet, int levels);
DwtPyramid dwt(const Signal& signal, std::string_view wavelet, int levels);

// Inverse of dwt; throws InconsistentPyramid on a malformed pyramid.
std::vector<double> idwt(const DwtPyramid& pyramid);

// Non-decimated wavelet packet table at level L; node n is the natural
// (Paley) index: child 2n is the lowpass branch of node n, 2n + 1 the highpass.
struct PacketTable {
  std::vector<std::vector<double>> nodes;
  int level_L = 0;
  std::string wavelet_name;
};

// Maximal-overlap wavelet packet transform with filters scaled by 1/sqrt(2)
// and upsampled by 2^(l-1) at level l, circular boundary.
PacketTable modwpt(std::span<const double> x, std::string_view wavelet = "fk18", int level_L = 4);
PacketTable modwpt(const Signal& signal, std::string_view wavelet = "fk18", int level_L = 4);

// Nominal frequency band [lo, hi) in Hz of a natural-order node.
std::pair<double, double> node_frequency_band(std::size_t node, int level_L, double sample_rate_hz);

// Natural-order node that covers frequency-ordered band `band`.
std::size_t node_for_band(std::size_t band, int level_L);

std::vector<std::vector<double>> node_energy_series(const PacketTable& table);

}  // namespace pulsatio::wavelets
