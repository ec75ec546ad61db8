#include "pulsatio/multifractal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "pulsatio/error.hpp"

namespace pulsatio::multifractal {

LeaderPyramid leaders_from_magnitudes(const std::vector<std::vector<double>>& magnitudes) {
  if (magnitudes.size() < 2) throw Error(ErrorCode::TooFewLevels, "leaders need at least two levels");

  // running[k] = max |d| over the dyadic interval of position k at the
  // current scale and every finer scale beneath it.
  std::vector<double> running(magnitudes.front().size());
  std::transform(magnitudes.front().begin(), magnitudes.front().end(), running.begin(),
                 [](double v) { return std::abs(v); });

  LeaderPyramid out;
  out.first_scale = 2;
  for (std::size_t level = 1; level < magnitudes.size(); ++level) {
    const auto& coarse = magnitudes[level];
    std::vector<double> next(coarse.size());
    for (std::size_t k = 0; k < coarse.size(); ++k) {
      double m = std::abs(coarse[k]);
      if (2 * k < running.size()) m = std::max(m, running[2 * k]);
      if (2 * k + 1 < running.size()) m = std::max(m, running[2 * k + 1]);
      next[k] = m;
    }
    running.swap(next);

    // leader: max over the 3-neighbourhood {k-1, k, k+1}, truncated at the edges
    std::vector<double> leaders(running.size());
    for (std::size_t k = 0; k < running.size(); ++k) {
      double m = running[k];
      if (k > 0) m = std::max(m, running[k - 1]);
      if (k + 1 < running.size()) m = std::max(m, running[k + 1]);
      leaders[k] = m;
    }
    out.counts.push_back(leaders.size());
    out.leaders.push_back(std::move(leaders));
  }
  return out;
}

std::size_t boundary_free_leaders(int scale, std::size_t signal_length, std::size_t filter_length,
                                  std::size_t available) {
  // Leader (j, k) reads samples up to 2^j (k + 1) + (2^j - 1)(L - 1).
  const double span = std::ldexp(1.0, scale);
  const double reach = static_cast<double>(signal_length) - 1.0 - (span - 1.0) * static_cast<double>(filter_length - 1);
  if (reach < span) return 0;
  const auto count = static_cast<std::size_t>(std::floor(reach / span));
  return std::min(count, available);
}

LeaderPyramid compute_leaders(const wavelets::DwtPyramid& pyramid) {
  if (pyramid.levels() < 3) throw Error(ErrorCode::TooFewLevels, "leaders need a pyramid of at least 3 levels");
  auto out = leaders_from_magnitudes(pyramid.details);
  out.source_wavelet = pyramid.wavelet_name;
  const auto filter_length = wavelets::wavelet_filter(pyramid.wavelet_name).length();
  for (std::size_t i = 0; i < out.leaders.size(); ++i)
    out.counts[i] = boundary_free_leaders(out.scale_of(i), pyramid.original_length, filter_length, out.leaders[i].size());
  return out;
}

wavelets::DwtPyramid l1_normalized(const wavelets::DwtPyramid& pyramid) {
  auto out = pyramid;
  for (std::size_t j = 0; j < out.details.size(); ++j) {
    const double scale = std::pow(2.0, -0.5 * static_cast<double>(j + 1));
    for (auto& v : out.details[j]) v *= scale;
  }
  return out;
}

StructureFunctions structure_functions(const LeaderPyramid& leaders, std::span<const double> q_grid) {
  StructureFunctions out;
  out.q_grid.assign(q_grid.begin(), q_grid.end());
  std::vector<std::vector<double>> columns;
  for (std::size_t i = 0; i < leaders.leaders.size(); ++i) {
    const auto& scale = leaders.leaders[i];
    const std::size_t used = std::min(leaders.counts[i], scale.size());
    std::vector<double> positive;
    for (std::size_t k = 0; k < used; ++k)
      if (scale[k] > 0.0) positive.push_back(scale[k]);
    if (positive.empty()) continue;

    std::vector<double> column(q_grid.size());
    for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
      const double q = q_grid[qi];
      if (q == 0.0) {
        column[qi] = 1.0;
        continue;
      }
      double acc = 0.0;
      for (double t : positive) acc += std::pow(t, q);
      column[qi] = acc / static_cast<double>(positive.size());
    }
    out.scales.push_back(leaders.scale_of(i));
    out.counts.push_back(positive.size());
    columns.push_back(std::move(column));
  }
  if (columns.empty()) throw Error(ErrorCode::DegenerateScale, "every leader is zero at every scale");

  out.values = Matrix(q_grid.size(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (std::size_t r = 0; r < q_grid.size(); ++r) out.values(r, c) = columns[c][r];
  return out;
}

ScalingExponents scaling_exponents(const StructureFunctions& s, std::pair<int, int> scale_range) {
  const auto [j_min, j_max] = scale_range;
  if (j_max - j_min < 2) throw Error(ErrorCode::InsufficientScales, "scale range must span at least 3 scales");
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < s.scales.size(); ++c)
    if (s.scales[c] >= j_min && s.scales[c] <= j_max) cols.push_back(c);
  if (cols.size() < 3)
    throw Error(ErrorCode::InsufficientScales, std::to_string(cols.size()) + " usable scales in [" +
                                                   std::to_string(j_min) + ", " + std::to_string(j_max) + "]");

  ScalingExponents out;
  double x_mean = 0.0;
  for (auto c : cols) {
    out.scales_used.push_back(s.scales[c]);
    x_mean += s.scales[c];
  }
  x_mean /= static_cast<double>(cols.size());
  double sxx = 0.0;
  for (auto c : cols) sxx += (s.scales[c] - x_mean) * (s.scales[c] - x_mean);

  std::vector<double> y(cols.size());
  for (std::size_t qi = 0; qi < s.q_grid.size(); ++qi) {
    double y_mean = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const double v = s.values(qi, cols[i]);
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::NonPositiveStructureFunction,
                    "S(q=" + format_number(s.q_grid[qi]) + ", j=" + std::to_string(s.scales[cols[i]]) + ")");
      y[i] = std::log2(v);
      y_mean += y[i];
    }
    y_mean /= static_cast<double>(cols.size());
    double sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      sxy += (s.scales[cols[i]] - x_mean) * (y[i] - y_mean);
      syy += (y[i] - y_mean) * (y[i] - y_mean);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const double r = y[i] - y_mean - slope * (s.scales[cols[i]] - x_mean);
      ss_res += r * r;
    }
    out.zeta.push_back(slope);
    out.r2.push_back(syy > 0.0 ? 1.0 - ss_res / syy : 1.0);
  }
  return out;
}

Cumulants cumulants(std::span<const double> zeta, std::span<const double> q_grid) {
  if (zeta.size() != q_grid.size()) throw Error(ErrorCode::LengthMismatch, "zeta and q grid differ in length");
  const std::set<double> distinct(q_grid.begin(), q_grid.end());
  if (distinct.size() < 4) throw Error(ErrorCode::IllConditionedFit, "cumulant fit needs at least 4 distinct q values");
  Eigen::MatrixXd basis(q_grid.size(), 3);
  Eigen::VectorXd target(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const double q = q_grid[i];
    basis(static_cast<Eigen::Index>(i), 0) = q;
    basis(static_cast<Eigen::Index>(i), 1) = q * q / 2.0;
    basis(static_cast<Eigen::Index>(i), 2) = q * q * q / 6.0;
    target(static_cast<Eigen::Index>(i)) = zeta[i];
  }
  const Eigen::Vector3d c = basis.colPivHouseholderQr().solve(target);
  return {c(0), c(1), c(2)};
}

SingularitySpectrum singularity_spectrum(std::span<const double> zeta, std::span<const double> q_grid) {
  const std::size_t n = q_grid.size();
  if (zeta.size() != n) throw Error(ErrorCode::LengthMismatch, "zeta and q grid differ in length");
  if (n < 3) throw Error(ErrorCode::DegenerateSpectrum, "spectrum needs at least 3 q values");

  std::vector<double> h(n), curvature(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dl = q_grid[i] - q_grid[i - 1];
    const double dr = q_grid[i + 1] - q_grid[i];
    h[i] = -dr / (dl * (dl + dr)) * zeta[i - 1] + (dr - dl) / (dl * dr) * zeta[i] + dl / (dr * (dl + dr)) * zeta[i + 1];
    curvature[i] = 2.0 * ((zeta[i + 1] - zeta[i]) / dr - (zeta[i] - zeta[i - 1]) / dl) / (dl + dr);
  }
  {
    const double d1 = q_grid[1] - q_grid[0];
    const double d2 = q_grid[2] - q_grid[1];
    h[0] = -(2.0 * d1 + d2) / (d1 * (d1 + d2)) * zeta[0] + (d1 + d2) / (d1 * d2) * zeta[1] -
           d1 / (d2 * (d1 + d2)) * zeta[2];
    curvature[0] = curvature[1];
  }
  {
    const double d1 = q_grid[n - 1] - q_grid[n - 2];
    const double d2 = q_grid[n - 2] - q_grid[n - 3];
    h[n - 1] = (2.0 * d1 + d2) / (d1 * (d1 + d2)) * zeta[n - 1] - (d1 + d2) / (d1 * d2) * zeta[n - 2] +
               d1 / (d2 * (d1 + d2)) * zeta[n - 3];
    curvature[n - 1] = curvature[n - 2];
  }

  double zeta_scale = 1.0;
  for (double z : zeta) zeta_scale = std::max(zeta_scale, std::abs(z));
  const double tolerance = 1e-8 * zeta_scale;

  SingularitySpectrum out;
  for (std::size_t i = 0; i < n; ++i) {
    if (curvature[i] > tolerance) {
      out.excluded_q.push_back(q_grid[i]);
      continue;
    }
    out.points.push_back({q_grid[i], h[i], q_grid[i] * h[i] - zeta[i] + 1.0});
  }
  if (out.points.size() < 3)
    throw Error(ErrorCode::DegenerateSpectrum, std::to_string(out.points.size()) + " concave points left");
  return out;
}

double multifractality_spread(const SingularitySpectrum& spectrum) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& p : spectrum.points) {
    if (!(p.D >= 0.0)) continue;
    lo = any ? std::min(lo, p.h) : p.h;
    hi = any ? std::max(hi, p.h) : p.h;
    any = true;
  }
  if (!any) throw Error(ErrorCode::DegenerateSpectrum, "no spectrum point with D(h) >= 0");
  return hi - lo;
}

double multifractality_spread(const MultifractalSummary& summary) {
  return multifractality_spread(summary.spectrum);
}

std::pair<int, int> default_scale_range(int levels) {
  if (levels - 2 - 3 >= 2) return {3, levels - 2};
  return beat_scale_range(levels);
}

std::pair<int, int> beat_scale_range(int levels) { return {2, levels - 1}; }

MultifractalSummary analyze(std::span<const double> x, const AnalysisOptions& options) {
  const int levels = options.levels > 0 ? options.levels : wavelets::max_dwt_levels(x.size());
  const auto pyramid = l1_normalized(wavelets::dwt(x, options.wavelet, levels));
  auto leaders = compute_leaders(pyramid);
  if (!options.exclude_boundary_leaders)
    for (std::size_t i = 0; i < leaders.leaders.size(); ++i) leaders.counts[i] = leaders.leaders[i].size();

  const auto s = structure_functions(leaders, options.q_grid);
  const auto range = options.scale_range.value_or(default_scale_range(levels));
  const auto exponents = scaling_exponents(s, range);

  MultifractalSummary summary;
  summary.q_grid = options.q_grid;
  summary.zeta = exponents.zeta;
  summary.regression_r2_per_q = exponents.r2;
  summary.scales_used = exponents.scales_used;
  summary.cumulants = cumulants(summary.zeta, summary.q_grid);
  summary.spectrum = singularity_spectrum(summary.zeta, summary.q_grid);
  summary.spread_delta_h = multifractality_spread(summary.spectrum);
  summary.wavelet = pyramid.wavelet_name;
  summary.dwt_levels = levels;
  return summary;
}

}  // namespace pulsatio::multifractal
