#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pulsatio {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Every row must have the same length; throws RaggedRows otherwise.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // Appends a row; the first row fixes the column count.
  void push_row(std::span<const double> values);

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Uniformly sampled real waveform. Construction enforces a positive sample
// rate, at least one sample, and finite samples.
class Signal {
 public:
  Signal(std::vector<double> samples, double sample_rate_hz, double start_time_s = 0.0,
         std::string label = {});

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::span<const double> view() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  double start_time_s() const noexcept { return start_time_s_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_hz_; }
  double nyquist_hz() const noexcept { return sample_rate_hz_ / 2.0; }

  // Same timing metadata, new samples (length may differ).
  Signal with_samples(std::vector<double> samples) const;

 private:
  std::vector<double> samples_;
  double sample_rate_hz_;
  double start_time_s_;
  std::string label_;
};

struct AnalysisConfig {
  double sample_rate_hz = 500.0;
  std::pair<double, double> scg_band_hz{1.0, 40.0};
  int filter_order = 4;
  double acc_cutoff_hz = 3.0;
  std::pair<double, double> beat_window_s{0.1, 0.5};
  double rejection_threshold = 0.5;
  int ar_order_m = 4;
  int dwt_levels = 5;
  std::string detail_wavelet = "db4";
  int modwpt_level_L = 4;
  std::string packet_wavelet = "fk18";
  double entropy_log_base = 0.0;  // 0 selects the natural logarithm
  std::string leader_wavelet = "db3";
  std::vector<double> q_grid = default_q_grid();
  // Unset: [3, J-2] for whole signals and [2, J-1] for single beats.
  std::optional<std::pair<int, int>> scale_range;
  std::uint64_t rng_seed = 1;

  static std::vector<double> default_q_grid();
  // Evenly spaced grid from q_min to q_max (inclusive) with the given step.
  static std::vector<double> make_q_grid(double q_min, double q_max, double step = 0.5);

  // Throws InvalidParameter when an invariant does not hold. The band check
  // against Nyquist uses sample_rate_hz.
  void validate() const;
};

// Single-column CSV, optional non-numeric header on the first row, LF or CRLF.
Signal load_signal(const std::filesystem::path& path, double sample_rate_hz);

struct SyntheticScgParams {
  double duration_s = 30.0;
  double heart_rate_bpm = 60.0;
  double resp_rate_bpm = 15.0;
  double noise_std = 0.05;
  std::uint64_t seed = 1;
  double sample_rate_hz = 500.0;

  // Beat morphology: systolic and diastolic Gaussian-windowed tone bursts.
  double systolic_hz = 25.0;
  double systolic_amplitude = 1.0;
  double systolic_width_s = 0.02;
  double diastolic_hz = 15.0;
  double diastolic_amplitude = 0.5;
  double diastolic_width_s = 0.025;
  double diastolic_delay_s = 0.2;
  double resp_modulation_depth = 0.2;
  double resp_drift_amplitude = 0.3;
};

// Deterministic synthetic SCG: one burst pair per beat, beats centred at
// (k + 1/2) * RR for every k with onset before duration_s.
Signal synthesize_scg(const SyntheticScgParams& params);
Signal synthesize_scg(double duration_s, double heart_rate_bpm, double resp_rate_bpm, double noise_std,
                      std::uint64_t seed, double sample_rate_hz);

// Systolic burst centres, in seconds, used by synthesize_scg.
std::vector<double> synthetic_beat_times(const SyntheticScgParams& params);

enum class DetrendMode { Mean, Linear };

Signal detrend(const Signal& signal, DetrendMode mode);

// CSV with a header row. Numbers use the shortest round-trip representation.
void write_table(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows,
                 const std::vector<std::string>& column_labels);
void write_table(const std::filesystem::path& path, const Matrix& matrix,
                 const std::vector<std::string>& column_labels);

struct Table {
  std::vector<std::string> column_labels;
  Matrix values;
};

// Reads a CSV written by write_table (header row required).
Table read_table(const std::filesystem::path& path);

std::string format_number(double value);

}  // namespace pulsatio
