#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pulsatio/multifractal.hpp"
#include "pulsatio/signal.hpp"

namespace pulsatio::features {

// Burg lattice recursion on real data. Each step trims the forward error's
// first sample and the backward error's last sample, then
//   k_i = -2 b.f / (f.f + b.b),  f <- f + k_i b,  b <- b + k_i f.
// Throws OrderTooHigh (m >= N) and DegenerateInput (zero denominator).
std::vector<double> burg_reflection(std::span<const double> x, int m);

// -sum p ln p over p_t = e_t / sum e (0 ln 0 = 0); 0 for an all-zero node.
// `log_base` 0 selects the natural logarithm.
double shannon_entropy(std::span<const double> coefficients, double log_base = 0.0);

// Entropy of every terminal node of the level-L packet table.
std::vector<double> modwpt_shannon_entropy(std::span<const double> beat, std::string_view wavelet = "fk18",
                                           int level_L = 4, double log_base = 0.0);

struct DetailStat {
  double variance = 0.0;
  double mean_abs = 0.0;
};

// Per DWT level j = 1..J: population variance and mean |d| of details[j].
std::vector<DetailStat> detail_statistics(std::span<const double> beat, std::string_view wavelet, int levels);

struct FeatureConfig {
  int ar_order_m = 4;
  std::string detail_wavelet = "db4";
  int dwt_levels = 5;
  std::string packet_wavelet = "fk18";
  int modwpt_level_L = 4;
  double entropy_log_base = 0.0;
  std::string leader_wavelet = "db3";
  std::vector<double> q_grid = AnalysisConfig::default_q_grid();
  std::optional<std::pair<int, int>> scale_range;  // unset: [2, J-1]

  static FeatureConfig from(const AnalysisConfig& config);
};

struct FeatureVector {
  std::size_t beat_index = 0;
  std::vector<double> ar_reflection;
  std::vector<DetailStat> detail_stats;
  std::vector<double> entropy;
  multifractal::Cumulants cumulants;
  double spread_delta_h = 0.0;
  // diagnostics, not part of the flattened vector
  std::vector<double> regression_r2_per_q;

  std::vector<double> flatten() const;
};

// Column names matching FeatureVector::flatten, prefixed by beat_index.
std::vector<std::string> feature_names(const FeatureConfig& config);

// All five categories for one beat. Sub-operation failures are rethrown with
// the category ("ar", "detail", "entropy", "multifractal") as the stage.
FeatureVector beat_features(std::span<const double> beat, const FeatureConfig& config, std::size_t beat_index = 0);

}  // namespace pulsatio::features
