#include "pulsatio/beats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulsatio/error.hpp"

namespace pulsatio::beats {

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

std::vector<std::size_t> eligible_rows(const BeatMatrix& beats, bool accepted_only) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < beats.count(); ++r)
    if (!accepted_only || beats.accepted[r]) rows.push_back(r);
  return rows;
}

// Column means as running means over the column's values in sorted order:
// the result does not depend on row order, and k copies of a row average to
// that row exactly.
std::vector<double> running_mean(const Matrix& m, const std::vector<std::size_t>& rows) {
  std::vector<double> mean(m.cols(), 0.0);
  std::vector<double> column(rows.size());
  for (std::size_t c = 0; c < mean.size(); ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = m(rows[i], c);
    std::sort(column.begin(), column.end());
    double acc = 0.0, k = 0.0;
    for (double v : column) {
      k += 1.0;
      acc += (v - acc) / k;
    }
    mean[c] = acc;
  }
  return mean;
}

}  // namespace

std::size_t BeatMatrix::accepted_count() const {
  return static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), true));
}

std::vector<double> envelope(const Signal& filtered, double window_s) {
  const auto x = filtered.view();
  const auto n = x.size();
  const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s * filtered.sample_rate_hz())));
  const std::size_t half = width / 2;
  // prefix sums of |x|
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + std::abs(x[i]);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, lo + width);
    env[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return env;
}

FiducialSeries detect_fiducials(const Signal& filtered, const DetectorOptions& options) {
  const auto env = envelope(filtered, options.envelope_window_s);
  const auto n = env.size();
  // MAD in the MATLAB sense: mean absolute deviation about the mean. The
  // median-based spread collapses onto the noise floor whenever the quiet
  // part of the cycle exceeds half of it.
  const auto nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : env) mean += v;
  mean /= nd;
  double mad = 0.0;
  for (double v : env) mad += std::abs(v - mean);
  mad /= nd;
  const double threshold = median_of(env) + options.mad_multiplier * mad;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // strict rise, non-strict fall: the first sample of a plateau counts
    if (env[i] > env[i - 1] && env[i] >= env[i + 1] && env[i] > threshold) candidates.push_back(i);
  }

  // Greedy thinning by height; earlier index wins ties.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return env[candidates[a]] > env[candidates[b]]; });
  const auto refractory =
      static_cast<std::size_t>(std::llround(options.refractory_s * filtered.sample_rate_hz()));
  std::vector<bool> suppressed(candidates.size(), false);
  std::vector<std::size_t> kept;
  for (auto idx : order) {
    if (suppressed[idx]) continue;
    kept.push_back(candidates[idx]);
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const auto gap = candidates[j] > candidates[idx] ? candidates[j] - candidates[idx] : candidates[idx] - candidates[j];
      if (gap < refractory) suppressed[j] = true;
    }
  }
  if (kept.empty()) throw Error(ErrorCode::NoBeatsFound, "no envelope peaks above the adaptive threshold");
  std::sort(kept.begin(), kept.end());
  return {std::move(kept), AnchorKind::InternalEnvelope};
}

FiducialSeries load_fiducials(const std::filesystem::path& path, std::size_t signal_length) {
  const auto column = load_signal(path, 1.0);
  FiducialSeries out;
  out.anchor_kind = AnchorKind::External;
  for (double v : column.samples()) {
    if (v < 0.0 || v != std::floor(v) || v >= static_cast<double>(signal_length))
      throw Error(ErrorCode::InvalidParameter, "fiducial index " + format_number(v) + " outside the signal");
    const auto idx = static_cast<std::size_t>(v);
    if (!out.indices.empty() && idx <= out.indices.back())
      throw Error(ErrorCode::InvalidParameter, "fiducial indices must be strictly increasing");
    out.indices.push_back(idx);
  }
  return out;
}

BeatMatrix segment_beats(const Signal& signal, const FiducialSeries& fiducials, double pre_s, double post_s) {
  if (pre_s < 0.0 || post_s < 0.0 || !(pre_s + post_s > 0.0))
    throw Error(ErrorCode::InvalidParameter, "beat window needs pre, post >= 0 and pre + post > 0");
  const double fs = signal.sample_rate_hz();
  const auto pre = static_cast<long>(std::llround(pre_s * fs));
  const auto length = static_cast<long>(std::llround((pre_s + post_s) * fs));
  if (length < 1) throw Error(ErrorCode::InvalidParameter, "beat window shorter than one sample");

  BeatMatrix out;
  out.fs = fs;
  out.pre_s = pre_s;
  out.post_s = post_s;
  const auto x = signal.view();
  const auto n = static_cast<long>(x.size());
  for (auto anchor : fiducials.indices) {
    const long start = static_cast<long>(anchor) - pre;
    if (start < 0 || start + length > n) continue;
    out.beats.push_row(x.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(length)));
    out.anchor_indices.push_back(anchor);
    out.accepted.push_back(true);
  }
  if (out.beats.empty()) throw Error(ErrorCode::NoCompleteBeats, "every beat window leaves the signal");
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "correlation inputs differ in length");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double rms_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "residual inputs differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

TemplateReport make_template(const BeatMatrix& beats, double threshold) {
  const auto rows = eligible_rows(beats, true);
  if (rows.empty()) throw Error(ErrorCode::NoEligibleBeats, "template needs at least one accepted beat");
  const auto provisional = running_mean(beats.beats, rows);

  std::vector<std::size_t> keep;
  for (auto r : rows)
    if (pearson(beats.beats.row(r), provisional) >= threshold) keep.push_back(r);
  if (keep.empty()) throw Error(ErrorCode::AllBeatsRejected, "no beat reaches the correlation threshold");

  TemplateReport report;
  report.template_beat = running_mean(beats.beats, keep);
  for (std::size_t r = 0; r < beats.count(); ++r) {
    report.per_beat_correlation.push_back(pearson(beats.beats.row(r), report.template_beat));
    report.per_beat_rms_residual.push_back(rms_difference(beats.beats.row(r), report.template_beat));
  }
  return report;
}

BeatMatrix reject_noisy(const BeatMatrix& beats, std::span<const double> template_beat, double threshold) {
  if (template_beat.size() != beats.beats.cols())
    throw Error(ErrorCode::LengthMismatch, "template length differs from beat length");
  BeatMatrix out = beats;
  for (std::size_t r = 0; r < out.count(); ++r) out.accepted[r] = pearson(out.beats.row(r), template_beat) >= threshold;
  return out;
}

std::vector<double> ensemble_average(const BeatMatrix& beats, bool use_accepted_only) {
  const auto rows = eligible_rows(beats, use_accepted_only);
  if (rows.empty()) throw Error(ErrorCode::NoEligibleBeats, "no beats eligible for averaging");
  return running_mean(beats.beats, rows);
}

Matrix waterfall(const BeatMatrix& beats) {
  Matrix out = beats.beats;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double peak = 0.0;
    for (double v : row) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
      for (auto& v : row) v /= peak;
  }
  return out;
}

}  // namespace pulsatio::beats
