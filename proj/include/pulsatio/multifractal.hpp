#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pulsatio/signal.hpp"
#include "pulsatio/wavelets.hpp"

namespace pulsatio::multifractal {

// Wavelet leaders T_x(2^j, k) for scales j = first_scale, first_scale + 1, ...
// Leaders only exist from one level above the finest DWT level.
struct LeaderPyramid {
  std::vector<std::vector<double>> leaders;
  // n_a: leaders per scale entering the structure functions. Leaders past
  // this count depend on samples wrapped around by the periodic transform.
  std::vector<std::size_t> counts;
  int first_scale = 2;
  std::string source_wavelet;

  int scale_of(std::size_t i) const { return first_scale + static_cast<int>(i); }
};

// Leaders from coefficient magnitudes; mags[0] is the finest level. Needs at
// least two levels. Every count equals the full scale length.
LeaderPyramid leaders_from_magnitudes(const std::vector<std::vector<double>>& magnitudes);

// Leaders of |d_x(j, k)| taken as stored in the pyramid (>= 3 levels). counts
// exclude boundary-affected positions.
LeaderPyramid compute_leaders(const wavelets::DwtPyramid& pyramid);

// Copy with details rescaled to L1 normalization, d(j, k) * 2^(-j/2), so that
// leaders of a signal with Hoelder exponent h scale as 2^(j h).
wavelets::DwtPyramid l1_normalized(const wavelets::DwtPyramid& pyramid);

// Number of leaders at scale j (from the left edge) whose dyadic
// neighbourhood and descendants stay clear of the periodic wrap.
std::size_t boundary_free_leaders(int scale, std::size_t signal_length, std::size_t filter_length,
                                  std::size_t available);

// S(q, j) = (1/n_a) sum_k T(2^j, k)^q.
struct StructureFunctions {
  std::vector<double> q_grid;
  std::vector<int> scales;  // retained scales, ascending
  Matrix values;            // rows: q, columns: scales
  std::vector<std::size_t> counts;  // n_a per retained scale (positive leaders)
};

// Zero leaders are left out (n_a reduced); scales with no positive leader are
// dropped. Throws DegenerateScale when nothing is left.
StructureFunctions structure_functions(const LeaderPyramid& leaders, std::span<const double> q_grid);

struct ScalingExponents {
  std::vector<double> zeta;
  std::vector<double> r2;
  std::vector<int> scales_used;
};

// zeta(q) = least-squares slope of log2 S(q, j) against j over j_min..j_max.
ScalingExponents scaling_exponents(const StructureFunctions& s, std::pair<int, int> scale_range);

struct Cumulants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

// Least-squares fit of zeta to {q, q^2/2, q^3/6}, no intercept.
Cumulants cumulants(std::span<const double> zeta, std::span<const double> q_grid);

struct SpectrumPoint {
  double q = 0.0;
  double h = 0.0;
  double D = 0.0;
};

struct SingularitySpectrum {
  std::vector<SpectrumPoint> points;
  std::vector<double> excluded_q;  // q values dropped as locally convex
};

// Legendre transform: h = d zeta / dq (second-order differences on the
// possibly non-uniform grid), D(h) = q h - zeta + 1. Points where zeta bends
// upwards are excluded. Throws DegenerateSpectrum with fewer than 3 points left.
SingularitySpectrum singularity_spectrum(std::span<const double> zeta, std::span<const double> q_grid);

struct MultifractalSummary {
  std::vector<double> q_grid;
  std::vector<double> zeta;
  Cumulants cumulants;
  std::vector<double> regression_r2_per_q;
  SingularitySpectrum spectrum;
  double spread_delta_h = 0.0;
  std::vector<int> scales_used;
  std::string wavelet;
  int dwt_levels = 0;
};

// max h - min h over spectrum points with D(h) >= 0.
double multifractality_spread(const SingularitySpectrum& spectrum);
double multifractality_spread(const MultifractalSummary& summary);

struct AnalysisOptions {
  std::string wavelet = "db3";
  int levels = 0;  // 0: max_dwt_levels(length)
  std::vector<double> q_grid = AnalysisConfig::default_q_grid();
  std::optional<std::pair<int, int>> scale_range;  // unset: default_scale_range(levels)
  bool exclude_boundary_leaders = true;
};

// [3, J-2] when that spans at least three scales, otherwise [2, J-1].
std::pair<int, int> default_scale_range(int levels);
// Range used for single beats.
std::pair<int, int> beat_scale_range(int levels);

// dwt -> L1 normalization -> leaders -> structure functions -> zeta ->
// cumulants -> spectrum -> spread.
MultifractalSummary analyze(std::span<const double> x, const AnalysisOptions& options = {});

}  // namespace pulsatio::multifractal
