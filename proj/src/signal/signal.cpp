#include "pulsatio/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "pulsatio/error.hpp"

namespace pulsatio {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix out;
  for (const auto& r : rows) out.push_row(r);
  return out;
}

void Matrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw Error(ErrorCode::RaggedRows, "row " + std::to_string(rows_) + " has " +
                                           std::to_string(values.size()) + " values, expected " +
                                           std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Signal::Signal(std::vector<double> samples, double sample_rate_hz, double start_time_s, std::string label)
    : samples_(std::move(samples)),
      sample_rate_hz_(sample_rate_hz),
      start_time_s_(start_time_s),
      label_(std::move(label)) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
    throw Error(ErrorCode::InvalidParameter, "sample rate must be positive");
  if (samples_.empty()) throw Error(ErrorCode::EmptySignal, "signal has no samples");
  auto bad = std::find_if(samples_.begin(), samples_.end(), [](double v) { return !std::isfinite(v); });
  if (bad != samples_.end())
    throw Error(ErrorCode::InvalidParameter,
                "non-finite sample at index " + std::to_string(bad - samples_.begin()));
}

Signal Signal::with_samples(std::vector<double> samples) const {
  return Signal(std::move(samples), sample_rate_hz_, start_time_s_, label_);
}

std::vector<double> AnalysisConfig::default_q_grid() { return make_q_grid(-5.0, 5.0, 0.5); }

std::vector<double> AnalysisConfig::make_q_grid(double q_min, double q_max, double step) {
  if (!(step > 0.0) || !(q_max >= q_min))
    throw Error(ErrorCode::InvalidParameter, "q grid needs q_min <= q_max and a positive step");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((q_max - q_min) / step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    double q = q_min + static_cast<double>(i) * step;
    if (std::abs(q) < step * 1e-9) q = 0.0;
    grid.push_back(q);
  }
  return grid;
}

void AnalysisConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParameter, what); };
  if (!(sample_rate_hz > 0.0)) fail("sample_rate_hz must be positive");
  const auto [lo, hi] = scg_band_hz;
  if (!(lo > 0.0 && lo < hi && hi < sample_rate_hz / 2.0))
    fail("scg_band_hz must satisfy 0 < low < high < fs/2");
  if (filter_order < 1) fail("filter_order must be positive");
  if (!(acc_cutoff_hz > 0.0 && acc_cutoff_hz < sample_rate_hz / 2.0))
    fail("acc_cutoff_hz must lie in (0, fs/2)");
  if (beat_window_s.first < 0.0 || beat_window_s.second < 0.0 ||
      !(beat_window_s.first + beat_window_s.second > 0.0))
    fail("beat_window_s needs non-negative pre/post with a positive sum");
  if (!(rejection_threshold >= -1.0 && rejection_threshold <= 1.0))
    fail("rejection_threshold must lie in [-1, 1]");
  if (ar_order_m < 1) fail("ar_order_m must be positive");
  if (dwt_levels < 1) fail("dwt_levels must be positive");
  if (modwpt_level_L < 1) fail("modwpt_level_L must be positive");
  if (entropy_log_base < 0.0 || entropy_log_base == 1.0) fail("entropy_log_base must be 0 (ln) or a positive base != 1");
  if (std::find(q_grid.begin(), q_grid.end(), 0.0) == q_grid.end()) fail("q_grid must contain 0");
  if (std::adjacent_find(q_grid.begin(), q_grid.end(), std::greater_equal<>()) != q_grid.end())
    fail("q_grid must be strictly increasing");
  if (scale_range) {
    if (scale_range->first < 2) fail("scale_range j_min must be >= 2");
    if (scale_range->second <= scale_range->first) fail("scale_range needs j_max > j_min");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::MissingFile, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  // trailing blank lines are not rows
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Signal load_signal(const std::filesystem::path& path, double sample_rate_hz) {
  const auto lines = read_lines(path);
  std::vector<double> samples;
  samples.reserve(lines.size());
  std::string label;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto value = parse_number(lines[i]);
    if (value) {
      samples.push_back(*value);
      continue;
    }
    if (i == 0) {
      label = std::string(trim(lines[i]));
      continue;
    }
    throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 1) + " of " + path.string());
  }
  if (samples.empty()) throw Error(ErrorCode::EmptySignal, path.string());
  return Signal(std::move(samples), sample_rate_hz, 0.0, label);
}

std::vector<double> synthetic_beat_times(const SyntheticScgParams& p) {
  const double rr = 60.0 / p.heart_rate_bpm;
  std::vector<double> times;
  for (long k = 0;; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * rr;
    if (t >= p.duration_s) break;
    times.push_back(t);
  }
  return times;
}

Signal synthesize_scg(const SyntheticScgParams& p) {
  if (!(p.duration_s > 0.0) || !(p.heart_rate_bpm > 0.0) || !(p.resp_rate_bpm > 0.0) ||
      !(p.sample_rate_hz > 0.0) || p.noise_std < 0.0)
    throw Error(ErrorCode::InvalidParameter, "synthesize_scg needs positive duration, rates and sample rate");

  const double fs = p.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(p.duration_s * fs));
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "duration shorter than one sample");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double resp_hz = p.resp_rate_bpm / 60.0;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = p.resp_drift_amplitude * std::sin(two_pi * resp_hz * t);
  }

  // Bursts are truncated at 5 widths so the floor between beats is exactly the drift.
  auto add_burst = [&](double centre, double freq, double amplitude, double width) {
    const double half = 5.0 * width;
    const auto first = static_cast<long>(std::ceil((centre - half) * fs));
    const auto last = static_cast<long>(std::floor((centre + half) * fs));
    for (long i = std::max(first, 0L); i <= last && i < static_cast<long>(n); ++i) {
      const double t = static_cast<double>(i) / fs;
      const double u = t - centre;
      x[static_cast<std::size_t>(i)] +=
          amplitude * std::exp(-0.5 * u * u / (width * width)) * std::cos(two_pi * freq * u);
    }
  };

  const double rr = 60.0 / p.heart_rate_bpm;
  const double diastolic_delay = std::min(p.diastolic_delay_s, 0.4 * rr);
  for (double t : synthetic_beat_times(p)) {
    const double gain = 1.0 + p.resp_modulation_depth * std::sin(two_pi * resp_hz * t);
    add_burst(t, p.systolic_hz, gain * p.systolic_amplitude, p.systolic_width_s);
    add_burst(t + diastolic_delay, p.diastolic_hz, gain * p.diastolic_amplitude, p.diastolic_width_s);
  }

  if (p.noise_std > 0.0) {
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> noise(0.0, p.noise_std);
    for (auto& v : x) v += noise(rng);
  }
  return Signal(std::move(x), fs, 0.0, "synthetic_scg");
}

Signal synthesize_scg(double duration_s, double heart_rate_bpm, double resp_rate_bpm, double noise_std,
                      std::uint64_t seed, double sample_rate_hz) {
  SyntheticScgParams p;
  p.duration_s = duration_s;
  p.heart_rate_bpm = heart_rate_bpm;
  p.resp_rate_bpm = resp_rate_bpm;
  p.noise_std = noise_std;
  p.seed = seed;
  p.sample_rate_hz = sample_rate_hz;
  return synthesize_scg(p);
}

Signal detrend(const Signal& signal, DetrendMode mode) {
  const auto& x = signal.samples();
  const auto n = x.size();
  std::vector<double> out(x);
  if (mode == DetrendMode::Mean) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    for (auto& v : out) v -= mean;
    return signal.with_samples(std::move(out));
  }
  if (n < 2) throw Error(ErrorCode::EmptySignal, "linear detrend needs at least two samples");
  // Centred abscissa keeps the normal equations diagonal.
  const double centre = 0.5 * static_cast<double>(n - 1);
  double sum_y = 0.0, sum_ty = 0.0, sum_tt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - centre;
    sum_y += x[i];
    sum_ty += t * x[i];
    sum_tt += t * t;
  }
  const double intercept = sum_y / static_cast<double>(n);
  const double slope = sum_ty / sum_tt;
  for (std::size_t i = 0; i < n; ++i) out[i] -= intercept + slope * (static_cast<double>(i) - centre);
  return signal.with_samples(std::move(out));
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_table(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows,
                 const std::vector<std::string>& column_labels) {
  write_table(path, Matrix::from_rows(rows), column_labels);
}

void write_table(const std::filesystem::path& path, const Matrix& matrix,
                 const std::vector<std::string>& column_labels) {
  if (matrix.empty()) throw Error(ErrorCode::InvalidParameter, "table has no rows");
  if (column_labels.size() != matrix.cols())
    throw Error(ErrorCode::InvalidParameter, "expected " + std::to_string(matrix.cols()) + " column labels");
  std::ostringstream out;
  for (std::size_t c = 0; c < column_labels.size(); ++c) out << (c ? "," : "") << column_labels[c];
  out << '\n';
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) out << (c ? "," : "") << format_number(matrix(r, c));
    out << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  file << out.str();
  if (!file) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Table read_table(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::EmptySignal, path.string());
  Table table;
  for (auto label : split_commas(lines.front())) table.column_labels.emplace_back(trim(label));
  std::vector<double> row;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    row.clear();
    for (auto cell : split_commas(lines[i])) {
      const auto value = parse_number(cell);
      if (!value) throw Error(ErrorCode::ParseError, "row " + std::to_string(i + 1) + " of " + path.string());
      row.push_back(*value);
    }
    table.values.push_row(row);
  }
  return table;
}

}  // namespace pulsatio
