#include "pulsatio/quality.hpp"

#include <algorithm>
#include <cmath>

#include "pulsatio/beats.hpp"
#include "pulsatio/error.hpp"
#include "pulsatio/spectral.hpp"

namespace pulsatio::quality {

namespace {

bool is_constant(std::span<const double> x) {
  return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double template_correlation_sqi(std::span<const double> beat, std::span<const double> template_beat) {
  if (beat.size() != template_beat.size())
    throw Error(ErrorCode::LengthMismatch, "beat and template differ in length");
  if (is_constant(beat) || is_constant(template_beat))
    throw Error(ErrorCode::ConstantInput, "correlation of a constant sequence is undefined");
  const auto n = static_cast<double>(beat.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < beat.size(); ++i) {
    ma += beat[i];
    mb += template_beat[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < beat.size(); ++i) {
    const double a = beat[i] - ma, b = template_beat[i] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw Error(ErrorCode::ConstantInput, "zero variance after centring");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double kurtosis_sqi(std::span<const double> window) {
  if (window.size() < 4) throw Error(ErrorCode::SignalTooShort, "kurtosis needs at least 4 samples");
  if (is_constant(window)) throw Error(ErrorCode::ConstantInput, "kurtosis of a constant window");
  const auto n = static_cast<double>(window.size());
  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : window) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw Error(ErrorCode::ConstantInput, "zero variance");
  return m4 / (m2 * m2) - 3.0;
}

double spectral_entropy_sqi(std::span<const double> window, double sample_rate_hz) {
  if (window.size() < 64) throw Error(ErrorCode::SignalTooShort, "spectral entropy needs at least 64 samples");
  const std::size_t segment = std::min<std::size_t>(256, window.size());
  const Signal sig(std::vector<double>(window.begin(), window.end()), sample_rate_hz);
  const auto ps = spectral::welch_psd(sig, static_cast<double>(segment) / sample_rate_hz, 0.5);

  double total = 0.0;
  for (double p : ps.power) total += p;
  if (!(total > 0.0)) throw Error(ErrorCode::ConstantInput, "power spectrum is identically zero");
  double h = 0.0;
  for (double p : ps.power) {
    const double prob = p / total;
    if (prob > 0.0) h -= prob * std::log(prob);
  }
  return clamp01(h / std::log(static_cast<double>(ps.power.size())));
}

double composite_sqi(double template_correlation, double spectral_entropy, double excess_kurtosis) {
  return (std::max(template_correlation, 0.0) + clamp01(1.0 - spectral_entropy) + clamp01(excess_kurtosis / 10.0)) /
         3.0;
}

std::vector<WindowQuality> assess_windows(const Signal& filtered, std::span<const double> template_beat,
                                          double pre_s, double window_s) {
  if (template_beat.empty()) throw Error(ErrorCode::EmptySignal, "template is empty");
  if (!(window_s > 0.0) || pre_s < 0.0) throw Error(ErrorCode::InvalidParameter, "window and pre offset");
  const double fs = filtered.sample_rate_hz();
  const auto x = filtered.view();
  const auto window = static_cast<std::size_t>(std::llround(window_s * fs));
  if (window < 64) throw Error(ErrorCode::WindowTooShort, "quality window below 64 samples");

  std::vector<std::size_t> anchors;
  try {
    anchors = beats::detect_fiducials(filtered).indices;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoBeatsFound) throw;
  }
  const auto pre = static_cast<std::size_t>(std::llround(pre_s * fs));
  const std::size_t length = template_beat.size();

  std::vector<WindowQuality> out;
  for (std::size_t start = 0, w = 0; start + 64 <= x.size(); start += window, ++w) {
    const auto span = x.subspan(start, std::min(window, x.size() - start));
    WindowQuality wq;
    wq.start_s = static_cast<double>(start) / fs;
    wq.report.window_index = w;

    std::vector<double> corr;
    for (auto a : anchors) {
      if (a < start || a >= start + span.size() || a < pre || a - pre + length > x.size()) continue;
      const auto beat = x.subspan(a - pre, length);
      try {
        corr.push_back(template_correlation_sqi(beat, template_beat));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ConstantInput) throw;
        corr.push_back(0.0);
      }
    }
    wq.n_beats = corr.size();
    if (!corr.empty()) {
      std::sort(corr.begin(), corr.end());
      const std::size_t m = corr.size() / 2;
      wq.report.template_correlation_sqi = corr.size() % 2 ? corr[m] : 0.5 * (corr[m - 1] + corr[m]);
    }

    if (is_constant(span)) {
      wq.report.spectral_entropy_sqi = 1.0;
    } else {
      wq.report.kurtosis_sqi = kurtosis_sqi(span);
      wq.report.spectral_entropy_sqi = spectral_entropy_sqi(span, fs);
    }
    wq.report.composite = composite_sqi(wq.report.template_correlation_sqi, wq.report.spectral_entropy_sqi,
                                        wq.report.kurtosis_sqi);
    out.push_back(wq);
  }
  return out;
}

}  // namespace pulsatio::quality
