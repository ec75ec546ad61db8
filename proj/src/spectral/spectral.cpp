#include "pulsatio/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "pulsatio/error.hpp"

namespace pulsatio::spectral {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFftPlan {
 public:
  explicit RealFftPlan(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFftPlan(const RealFftPlan&) = delete;
  RealFftPlan& operator=(const RealFftPlan&) = delete;

  std::span<double> input() { return {in_, n_}; }

  void execute_into(std::vector<std::complex<double>>& bins) {
    fftw_execute(plan_);
    bins.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = {out_[k][0], out_[k][1]};
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

// Accumulates one-sided density periodograms of mean-removed Hann-windowed
// segments.
class SegmentPeriodogram {
 public:
  SegmentPeriodogram(std::size_t segment, std::size_t nfft, double fs)
      : segment_(segment), nfft_(nfft), fs_(fs), window_(hann_window(segment)), plan_(nfft) {
    for (double w : window_) window_power_ += w * w;
  }

  std::size_t bins() const { return nfft_ / 2 + 1; }

  // Adds the periodogram of x[start, start + segment) into `acc`.
  void accumulate(std::span<const double> x, std::vector<double>& acc) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    auto in = plan_.input();
    std::fill(in.begin(), in.end(), 0.0);
    for (std::size_t i = 0; i < segment_; ++i) in[i] = (x[i] - mean) * window_[i];
    plan_.execute_into(bins_);
    const double scale = 1.0 / (fs_ * window_power_);
    acc.resize(bins(), 0.0);
    for (std::size_t k = 0; k < bins_.size(); ++k) {
      double p = std::norm(bins_[k]) * scale;
      const bool edge = k == 0 || (nfft_ % 2 == 0 && k == nfft_ / 2);
      if (!edge) p *= 2.0;
      acc[k] += p;
    }
  }

  std::vector<double> freqs() const {
    std::vector<double> f(bins());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>(k) * fs_ / static_cast<double>(nfft_);
    return f;
  }

 private:
  std::size_t segment_;
  std::size_t nfft_;
  double fs_;
  std::vector<double> window_;
  double window_power_ = 0.0;
  RealFftPlan plan_;
  std::vector<std::complex<double>> bins_;
};

std::size_t even_ceil(std::size_t n) { return n + (n % 2); }

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

std::vector<std::complex<double>> real_fft(std::span<const double> input) {
  RealFftPlan plan(input.size());
  std::copy(input.begin(), input.end(), plan.input().begin());
  std::vector<std::complex<double>> out;
  plan.execute_into(out);
  return out;
}

PowerSpectrum welch_psd(const Signal& signal, double segment_s, double overlap_fraction, std::size_t nfft) {
  const double fs = signal.sample_rate_hz();
  const auto segment = static_cast<std::size_t>(std::llround(segment_s * fs));
  if (segment < 16) throw Error(ErrorCode::SignalTooShort, "Welch segment must span at least 16 samples");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw Error(ErrorCode::InvalidParameter, "overlap fraction must lie in [0, 1)");
  if (signal.size() < segment)
    throw Error(ErrorCode::SignalTooShort, "signal shorter than one Welch segment");

  const std::size_t fft_len = even_ceil(std::max(nfft, segment));
  const auto overlap = static_cast<std::size_t>(std::llround(overlap_fraction * static_cast<double>(segment)));
  const std::size_t step = std::max<std::size_t>(1, segment - std::min(overlap, segment - 1));

  SegmentPeriodogram periodogram(segment, fft_len, fs);
  std::vector<double> acc;
  std::size_t count = 0;
  const auto x = signal.view();
  for (std::size_t start = 0; start + segment <= x.size(); start += step, ++count)
    periodogram.accumulate(x.subspan(start, segment), acc);
  for (auto& p : acc) p /= static_cast<double>(count);

  PowerSpectrum ps;
  ps.freqs_hz = periodogram.freqs();
  ps.power = std::move(acc);
  ps.resolution_hz = fs / static_cast<double>(fft_len);
  return ps;
}

Spectrogram spectrogram(const Signal& signal, double window_s, double hop_s) {
  const double fs = signal.sample_rate_hz();
  if (!(hop_s > 0.0) || window_s < hop_s)
    throw Error(ErrorCode::InvalidParameter, "spectrogram needs window_s >= hop_s > 0");
  const auto window = static_cast<std::size_t>(std::llround(window_s * fs));
  const auto hop = static_cast<std::size_t>(std::llround(hop_s * fs));
  if (window < 2 || hop < 1) throw Error(ErrorCode::SignalTooShort, "spectrogram window below two samples");
  if (signal.size() < window) throw Error(ErrorCode::SignalTooShort, "signal shorter than one window");

  const std::size_t frames = (signal.size() - window) / hop + 1;
  const std::size_t fft_len = even_ceil(window);
  SegmentPeriodogram periodogram(window, fft_len, fs);

  Spectrogram out;
  out.freqs_hz = periodogram.freqs();
  out.power = Matrix(periodogram.bins(), frames);
  std::vector<double> column;
  const auto x = signal.view();
  for (std::size_t t = 0; t < frames; ++t) {
    column.assign(periodogram.bins(), 0.0);
    periodogram.accumulate(x.subspan(t * hop, window), column);
    for (std::size_t f = 0; f < column.size(); ++f) out.power(f, t) = column[f];
    out.times_s.push_back(signal.start_time_s() +
                          (static_cast<double>(t * hop) + 0.5 * static_cast<double>(window)) / fs);
  }
  return out;
}

double dominant_frequency(const PowerSpectrum& ps, std::pair<double, double> band_hz) {
  const auto [lo, hi] = band_hz;
  std::size_t best = ps.freqs_hz.size();
  for (std::size_t k = 0; k < ps.freqs_hz.size(); ++k) {
    const double f = ps.freqs_hz[k];
    if (f < lo || f > hi) continue;
    if (best == ps.freqs_hz.size() || ps.power[k] > ps.power[best]) best = k;
  }
  if (best == ps.freqs_hz.size())
    throw Error(ErrorCode::EmptyBand, "no spectral bins inside the requested band");
  return ps.freqs_hz[best];
}

double integrated_power(const PowerSpectrum& ps) {
  double total = 0.0;
  for (double p : ps.power) total += p;
  return total * ps.resolution_hz;
}

}  // namespace pulsatio::spectral
