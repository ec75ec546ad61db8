#include "pulsatio/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "pulsatio/error.hpp"
#include "pulsatio/spectral.hpp"

namespace pulsatio::filtering {

namespace {

using cplx = std::complex<double>;

void check_cutoff(double f, double nyquist) {
  if (!(f > 0.0 && f < nyquist))
    throw Error(ErrorCode::InvalidCutoff, "cutoff " + std::to_string(f) + " Hz outside (0, " +
                                              std::to_string(nyquist) + ") Hz");
}

// Groups roots into conjugate pairs (complex) and then pairs of reals.
std::vector<std::array<cplx, 2>> pair_roots(std::vector<cplx> roots) {
  constexpr double tol = 1e-12;
  std::vector<cplx> upper, reals;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) <= tol * std::max(1.0, std::abs(r)))
      reals.emplace_back(r.real(), 0.0);
    else if (r.imag() > 0.0)
      upper.push_back(r);
  }
  std::vector<std::array<cplx, 2>> pairs;
  for (const auto& r : upper) pairs.push_back({r, std::conj(r)});
  std::sort(reals.begin(), reals.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i < reals.size(); i += 2) {
    if (i + 1 < reals.size())
      pairs.push_back({reals[i], reals[i + 1]});
    else
      pairs.push_back({reals[i], cplx(std::nan(""), 0.0)});
  }
  return pairs;
}

cplx evaluate(const std::vector<Biquad>& sections, cplx z) {
  const cplx zi = 1.0 / z;
  cplx h = 1.0;
  for (const auto& s : sections)
    h *= (s.b[0] + s.b[1] * zi + s.b[2] * zi * zi) / (1.0 + s.a[0] * zi + s.a[1] * zi * zi);
  return h;
}

// Steady-state DF-II-transposed state for a unit step at the section input.
std::array<double, 2> step_state(const Biquad& s) {
  const double gain = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[0] + s.a[1]);
  return {s.b[1] + s.b[2] - (s.a[0] + s.a[1]) * gain, s.b[2] - s.a[1] * gain};
}

void run_sections(const std::vector<Biquad>& sections, std::vector<double>& x) {
  // Initial conditions scale with the first sample seen by each section.
  double level = x.front();
  for (const auto& s : sections) {
    auto [z1, z2] = step_state(s);
    z1 *= level;
    z2 *= level;
    for (auto& v : x) {
      const double in = v;
      const double out = s.b[0] * in + z1;
      z1 = s.b[1] * in - s.a[0] * out + z2;
      z2 = s.b[2] * in - s.a[1] * out;
      v = out;
    }
    level *= (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[0] + s.a[1]);
  }
}

}  // namespace

std::vector<Biquad> design_butterworth(const FilterSpec& spec, double fs) {
  if (spec.order < 1) throw Error(ErrorCode::InvalidParameter, "filter order must be positive");
  const double nyquist = fs / 2.0;
  check_cutoff(spec.high_hz, nyquist);
  if (spec.kind == FilterKind::Bandpass) {
    check_cutoff(spec.low_hz, nyquist);
    if (!(spec.low_hz < spec.high_hz)) throw Error(ErrorCode::InvalidCutoff, "bandpass needs low < high");
  }

  const int n = spec.order;
  const double k = 2.0 * fs;
  auto prewarp = [&](double f) { return k * std::tan(std::numbers::pi * f / fs); };

  std::vector<cplx> prototype;
  for (int i = 0; i < n; ++i)
    prototype.push_back(std::polar(1.0, std::numbers::pi * (2.0 * i + n + 1) / (2.0 * n)));

  std::vector<cplx> analog_poles;
  std::vector<cplx> zeros;
  double reference_hz = 0.0;
  if (spec.kind == FilterKind::Lowpass) {
    const double wc = prewarp(spec.high_hz);
    for (const auto& p : prototype) analog_poles.push_back(wc * p);
    zeros.assign(static_cast<std::size_t>(n), cplx(-1.0, 0.0));
  } else {
    const double w1 = prewarp(spec.low_hz);
    const double w2 = prewarp(spec.high_hz);
    const double w0 = std::sqrt(w1 * w2);
    const double bw = w2 - w1;
    for (const auto& p : prototype) {
      const cplx half = p * bw / 2.0;
      const cplx root = std::sqrt(half * half - w0 * w0);
      analog_poles.push_back(half + root);
      analog_poles.push_back(half - root);
    }
    for (int i = 0; i < n; ++i) {
      zeros.emplace_back(1.0, 0.0);
      zeros.emplace_back(-1.0, 0.0);
    }
    reference_hz = std::atan(w0 / k) * fs / std::numbers::pi;
  }

  std::vector<cplx> poles;
  for (const auto& s : analog_poles) poles.push_back((k + s) / (k - s));

  // Zeros are all real (+1 / -1); interleave them so every section of a
  // bandpass gets one of each.
  std::vector<cplx> zero_order;
  {
    std::vector<cplx> plus, minus;
    for (const auto& z : zeros) (z.real() > 0 ? plus : minus).push_back(z);
    while (!plus.empty() || !minus.empty()) {
      if (!plus.empty()) { zero_order.push_back(plus.back()); plus.pop_back(); }
      if (!minus.empty()) { zero_order.push_back(minus.back()); minus.pop_back(); }
    }
  }

  const auto pole_pairs = pair_roots(poles);
  std::vector<Biquad> sections;
  std::size_t zi = 0;
  for (const auto& pair : pole_pairs) {
    Biquad s;
    if (std::isnan(pair[1].real())) {
      s.a = {-pair[0].real(), 0.0};
      const double z0 = zero_order[zi++].real();
      s.b = {1.0, -z0, 0.0};
    } else {
      s.a = {-(pair[0] + pair[1]).real(), (pair[0] * pair[1]).real()};
      const double z0 = zero_order[zi++].real();
      const double z1 = zero_order[zi++].real();
      s.b = {1.0, -(z0 + z1), z0 * z1};
    }
    sections.push_back(s);
  }

  const double gain = std::abs(evaluate(sections, std::polar(1.0, 2.0 * std::numbers::pi * reference_hz / fs)));
  for (auto& b : sections.front().b) b /= gain;
  return sections;
}

double magnitude_response(const std::vector<Biquad>& sections, double freq_hz, double fs) {
  return std::abs(evaluate(sections, std::polar(1.0, 2.0 * std::numbers::pi * freq_hz / fs)));
}

Signal zero_phase_filter(const Signal& signal, const FilterSpec& spec) {
  const auto sections = design_butterworth(spec, signal.sample_rate_hz());
  const auto& x = signal.samples();
  const std::size_t n = x.size();
  if (n <= static_cast<std::size_t>(3 * spec.order))
    throw Error(ErrorCode::SignalTooShort, "zero-phase filtering needs more than 3 * order samples");
  const std::size_t pad = std::min<std::size_t>(static_cast<std::size_t>(3 * spec.pole_count()), n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  run_sections(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_sections(sections, ext);
  std::reverse(ext.begin(), ext.end());

  return signal.with_samples(std::vector<double>(ext.begin() + static_cast<long>(pad),
                                                 ext.begin() + static_cast<long>(pad + n)));
}

Signal gross_acceleration(const Signal& signal, double cutoff_hz) {
  return zero_phase_filter(signal, FilterSpec::lowpass(cutoff_hz, 4));
}

RespirationEstimate estimate_respiration(const Signal& gross, std::pair<double, double> band_hz) {
  if (gross.duration_s() < 30.0 - 1e-9)
    throw Error(ErrorCode::SignalTooShort, "respiration rate needs at least 30 s");
  const auto [lo, hi] = band_hz;
  if (!(lo > 0.0 && lo < hi)) throw Error(ErrorCode::InvalidParameter, "respiration band needs 0 < low < high");

  // One Hann periodogram over the whole record, zero-padded 8x for peak interpolation.
  const double duration = gross.duration_s();
  const std::size_t nfft = 8 * gross.size();
  const auto ps = spectral::welch_psd(gross, duration, 0.0, nfft);

  std::size_t peak = ps.freqs_hz.size();
  double band_power = 0.0;
  for (std::size_t k = 0; k < ps.freqs_hz.size(); ++k) {
    if (ps.freqs_hz[k] < lo || ps.freqs_hz[k] > hi) continue;
    band_power += ps.power[k];
    if (peak == ps.freqs_hz.size() || ps.power[k] > ps.power[peak]) peak = k;
  }
  if (peak == ps.freqs_hz.size() || !(band_power > 0.0))
    throw Error(ErrorCode::NoPeakInBand, "no spectral power inside the respiration band");

  double peak_hz = ps.freqs_hz[peak];
  if (peak > 0 && peak + 1 < ps.power.size()) {
    const double left = ps.power[peak - 1], mid = ps.power[peak], right = ps.power[peak + 1];
    const double denom = left - 2.0 * mid + right;
    if (denom < 0.0) peak_hz += 0.5 * (left - right) / denom * ps.resolution_hz;
  }

  // Hann main lobe: +/- 2 raw bins of width 1 / duration.
  const double lobe = 2.0 / duration;
  double lobe_power = 0.0;
  for (std::size_t k = 0; k < ps.freqs_hz.size(); ++k) {
    const double f = ps.freqs_hz[k];
    if (f >= lo && f <= hi && std::abs(f - ps.freqs_hz[peak]) <= lobe) lobe_power += ps.power[k];
  }

  RespirationEstimate est;
  est.peak_hz = peak_hz;
  est.breaths_per_min = 60.0 * peak_hz;
  est.concentration = lobe_power / band_power;
  if (est.concentration < kMinRespirationConcentration)
    throw Error(ErrorCode::NoPeakInBand, "respiration peak not prominent (concentration " +
                                             std::to_string(est.concentration) + ")");
  return est;
}

double respiration_rate(const Signal& gross, std::pair<double, double> band_hz) {
  return estimate_respiration(gross, band_hz).breaths_per_min;
}

std::vector<double> activity_index(const Signal& gross, double window_s) {
  const auto window = static_cast<std::size_t>(std::llround(window_s * gross.sample_rate_hz()));
  if (window < 2) throw Error(ErrorCode::WindowTooShort, "activity window must span at least two samples");
  const auto x = gross.view();
  std::vector<double> rms;
  for (std::size_t start = 0; start + window <= x.size(); start += window) {
    double acc = 0.0;
    for (std::size_t i = start; i < start + window; ++i) acc += x[i] * x[i];
    rms.push_back(std::sqrt(acc / static_cast<double>(window)));
  }
  return rms;
}

}  // namespace pulsatio::filtering
