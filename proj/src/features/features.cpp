#include "pulsatio/features.hpp"

#include <cmath>

#include "pulsatio/error.hpp"
#include "pulsatio/wavelets.hpp"

namespace pulsatio::features {

std::vector<double> burg_reflection(std::span<const double> x, int m) {
  if (m < 1) throw Error(ErrorCode::InvalidParameter, "reflection order must be positive");
  if (x.size() < static_cast<std::size_t>(m) + 1)
    throw Error(ErrorCode::OrderTooHigh, "order " + std::to_string(m) + " needs at least " +
                                             std::to_string(m + 1) + " samples");
  std::vector<double> f(x.begin(), x.end());
  std::vector<double> b(x.begin(), x.end());
  std::vector<double> k(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    f.erase(f.begin());
    b.pop_back();
    double bf = 0.0, ff = 0.0, bb = 0.0;
    for (std::size_t t = 0; t < f.size(); ++t) {
      bf += b[t] * f[t];
      ff += f[t] * f[t];
      bb += b[t] * b[t];
    }
    const double denom = ff + bb;
    if (!(denom > 0.0))
      throw Error(ErrorCode::DegenerateInput, "zero prediction-error energy at stage " + std::to_string(i));
    const double ki = -2.0 * bf / denom;
    k[static_cast<std::size_t>(i)] = ki;
    for (std::size_t t = 0; t < f.size(); ++t) {
      const double f_old = f[t];
      f[t] = f_old + ki * b[t];
      b[t] = b[t] + ki * f_old;
    }
  }
  return k;
}

double shannon_entropy(std::span<const double> coefficients, double log_base) {
  double total = 0.0;
  for (double c : coefficients) total += c * c;
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double c : coefficients) {
    const double p = c * c / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (log_base > 0.0) h /= std::log(log_base);
  return std::max(h, 0.0);
}

std::vector<double> modwpt_shannon_entropy(std::span<const double> beat, std::string_view wavelet, int level_L,
                                           double log_base) {
  const auto table = wavelets::modwpt(beat, wavelet, level_L);
  std::vector<double> out;
  out.reserve(table.nodes.size());
  for (const auto& node : table.nodes) out.push_back(shannon_entropy(node, log_base));
  return out;
}

std::vector<DetailStat> detail_statistics(std::span<const double> beat, std::string_view wavelet, int levels) {
  const auto pyramid = wavelets::dwt(beat, wavelet, levels);
  std::vector<DetailStat> out;
  for (const auto& d : pyramid.details) {
    const auto n = static_cast<double>(d.size());
    double mean = 0.0, mean_abs = 0.0;
    for (double v : d) {
      mean += v;
      mean_abs += std::abs(v);
    }
    mean /= n;
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    out.push_back({var / n, mean_abs / n});
  }
  return out;
}

FeatureConfig FeatureConfig::from(const AnalysisConfig& config) {
  FeatureConfig f;
  f.ar_order_m = config.ar_order_m;
  f.detail_wavelet = config.detail_wavelet;
  f.dwt_levels = config.dwt_levels;
  f.packet_wavelet = config.packet_wavelet;
  f.modwpt_level_L = config.modwpt_level_L;
  f.entropy_log_base = config.entropy_log_base;
  f.leader_wavelet = config.leader_wavelet;
  f.q_grid = config.q_grid;
  f.scale_range = config.scale_range;
  return f;
}

std::vector<double> FeatureVector::flatten() const {
  std::vector<double> out(ar_reflection);
  for (const auto& s : detail_stats) {
    out.push_back(s.variance);
    out.push_back(s.mean_abs);
  }
  out.insert(out.end(), entropy.begin(), entropy.end());
  out.push_back(cumulants.c1);
  out.push_back(cumulants.c2);
  out.push_back(cumulants.c3);
  out.push_back(spread_delta_h);
  return out;
}

std::vector<std::string> feature_names(const FeatureConfig& config) {
  std::vector<std::string> names{"beat_index"};
  for (int i = 0; i < config.ar_order_m; ++i) names.push_back("ar_k" + std::to_string(i));
  for (int j = 1; j <= config.dwt_levels; ++j) {
    names.push_back("d" + std::to_string(j) + "_var");
    names.push_back("d" + std::to_string(j) + "_mean_abs");
  }
  for (int n = 0; n < (1 << config.modwpt_level_L); ++n) names.push_back("entropy_node" + std::to_string(n));
  names.insert(names.end(), {"mf_c1", "mf_c2", "mf_c3", "mf_spread_h"});
  return names;
}

FeatureVector beat_features(std::span<const double> beat, const FeatureConfig& config, std::size_t beat_index) {
  auto in_category = [](const char* category, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw e.with_stage(category);
    }
  };

  FeatureVector v;
  v.beat_index = beat_index;
  v.ar_reflection = in_category("ar", [&] { return burg_reflection(beat, config.ar_order_m); });
  v.detail_stats =
      in_category("detail", [&] { return detail_statistics(beat, config.detail_wavelet, config.dwt_levels); });
  v.entropy = in_category("entropy", [&] {
    return modwpt_shannon_entropy(beat, config.packet_wavelet, config.modwpt_level_L, config.entropy_log_base);
  });
  in_category("multifractal", [&] {
    multifractal::AnalysisOptions options;
    options.wavelet = config.leader_wavelet;
    options.levels = wavelets::max_dwt_levels(beat.size());
    options.q_grid = config.q_grid;
    options.scale_range = config.scale_range.value_or(multifractal::beat_scale_range(options.levels));
    const auto summary = multifractal::analyze(beat, options);
    v.cumulants = summary.cumulants;
    v.spread_delta_h = summary.spread_delta_h;
    v.regression_r2_per_q = summary.regression_r2_per_q;
    return 0;
  });
  return v;
}

}  // namespace pulsatio::features
