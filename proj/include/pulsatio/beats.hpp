#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "pulsatio/signal.hpp"

namespace pulsatio::beats {

enum class AnchorKind { InternalEnvelope, External };

struct FiducialSeries {
  std::vector<std::size_t> indices;  // strictly increasing sample indices
  AnchorKind anchor_kind = AnchorKind::InternalEnvelope;
};

struct DetectorOptions {
  double envelope_window_s = 0.1;
  double mad_multiplier = 1.5;
  double refractory_s = 0.3;
};

// Aligned beat segments; rows are beats in time order.
struct BeatMatrix {
  Matrix beats;
  double fs = 0.0;
  double pre_s = 0.0;
  double post_s = 0.0;
  std::vector<std::size_t> anchor_indices;
  std::vector<bool> accepted;

  std::size_t count() const { return beats.rows(); }
  std::size_t accepted_count() const;
};

struct TemplateReport {
  std::vector<double> template_beat;
  std::vector<double> per_beat_correlation;
  std::vector<double> per_beat_rms_residual;
};

// Rectified signal smoothed by a centred moving average.
std::vector<double> envelope(const Signal& filtered, double window_s);

// Envelope local maxima above median + k * MAD (mean absolute deviation about
// the mean, as MATLAB's mad), thinned greedily by height
// with a refractory gap. Throws NoBeatsFound.
FiducialSeries detect_fiducials(const Signal& filtered, const DetectorOptions& options = {});

// External anchors: single-column CSV of sample indices.
FiducialSeries load_fiducials(const std::filesystem::path& path, std::size_t signal_length);

// Windows that would leave the signal are dropped. Throws NoCompleteBeats.
BeatMatrix segment_beats(const Signal& signal, const FiducialSeries& fiducials, double pre_s, double post_s);

// Pearson correlation; 0 when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

double rms_difference(std::span<const double> a, std::span<const double> b);

// Provisional template = mean of accepted rows; final template = mean of the
// accepted rows correlating >= threshold with it. Correlations and residuals
// are reported for every row against the final template.
TemplateReport make_template(const BeatMatrix& beats, double threshold);

// accepted[i] = pearson(row i, template) >= threshold.
BeatMatrix reject_noisy(const BeatMatrix& beats, std::span<const double> template_beat, double threshold);

// Column-wise mean; independent of row order, and k copies of a row average
// to that row exactly.
std::vector<double> ensemble_average(const BeatMatrix& beats, bool use_accepted_only);

// Each row scaled to max |row| = 1; zero rows stay zero.
Matrix waterfall(const BeatMatrix& beats);

}  // namespace pulsatio::beats
