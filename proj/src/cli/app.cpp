#include "pulsatio/cli/app.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "pulsatio/beats.hpp"
#include "pulsatio/cli/figures.hpp"
#include "pulsatio/error.hpp"
#include "pulsatio/features.hpp"
#include "pulsatio/filtering.hpp"
#include "pulsatio/multifractal.hpp"
#include "pulsatio/quality.hpp"
#include "pulsatio/spectral.hpp"
#include "pulsatio/wavelets.hpp"

namespace pulsatio::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Welch and spectrogram settings of the spectral subcommand.
constexpr double kPsdSegmentS = 2.0;
constexpr double kSpectrogramWindowS = 1.0;
constexpr double kSpectrogramHopS = 0.5;
constexpr double kQualityWindowS = 5.0;

// Bookkeeping for one command: stage statuses, artifacts and the manifest
// written at the end no matter how far the pipeline got.
class Run {
 public:
  Run(const RunOptions& options, std::string command) : options_(options) {
    manifest_["command"] = std::move(command);
    manifest_["output_dir"] = options.output_dir.generic_string();
    manifest_["stages"] = json::array();
    manifest_["artifacts"] = json::array();
    manifest_["failed_stage"] = nullptr;
    manifest_["config"] = config_to_json(config);
  }

  AnalysisConfig config;
  json& manifest() { return manifest_; }

  // Runs one stage; on failure records it and returns false. Later stages are
  // skipped by the caller.
  template <class F>
  bool stage(const std::string& name, F&& body) {
    if (failed_) {
      manifest_["stages"].push_back({{"stage", name}, {"status", "skipped"}});
      return false;
    }
    try {
      body();
      manifest_["stages"].push_back({{"stage", name}, {"status", "ok"}});
      return true;
    } catch (const Error& e) {
      fail(name, std::string(to_string(e.code())), e.detail(), e.stage());
    } catch (const std::exception& e) {
      fail(name, "Internal", e.what(), {});
    }
    return false;
  }

  fs::path artifact(const std::string& file) {
    manifest_["artifacts"].push_back(file);
    return options_.output_dir / file;
  }

  // Config from file and flags; the manifest records the resolved values.
  bool resolve_config() {
    return stage("config", [&] {
      if (options_.config_path) config = load_config(*options_.config_path);
      if (options_.sample_rate_hz) config.sample_rate_hz = *options_.sample_rate_hz;
      if (options_.band_low) config.scg_band_hz.first = *options_.band_low;
      if (options_.band_high) config.scg_band_hz.second = *options_.band_high;
      if (options_.ar_order) config.ar_order_m = *options_.ar_order;
      if (options_.seed) config.rng_seed = *options_.seed;
      if (options_.q_min || options_.q_max)
        config.q_grid = AnalysisConfig::make_q_grid(options_.q_min.value_or(-5.0), options_.q_max.value_or(5.0));
      config.validate();
      manifest_["config"] = config_to_json(config);
      manifest_["seed"] = config.rng_seed;
    });
  }

  int finish() {
    std::error_code ec;
    fs::create_directories(options_.output_dir, ec);
    const fs::path path = options_.output_dir / "manifest.json";
    manifest_["artifacts"].push_back("manifest.json");
    std::ofstream out(path, std::ios::binary);
    out << manifest_.dump(2) << '\n';
    if (!out) {
      std::cerr << "pulsatio: cannot write " << path.string() << '\n';
      return kExitStageFailure;
    }
    return failed_ ? kExitStageFailure : kExitOk;
  }

 private:
  void fail(const std::string& name, const std::string& code, const std::string& message,
            const std::string& sub_stage) {
    failed_ = true;
    manifest_["stages"].push_back({{"stage", name}, {"status", "failed"}});
    manifest_["failed_stage"] = name;
    json err{{"stage", name}, {"code", code}, {"message", message}};
    if (!sub_stage.empty()) err["sub_stage"] = sub_stage;
    manifest_["error"] = err;
    std::cerr << "pulsatio: stage '" << name << "' failed";
    if (!sub_stage.empty()) std::cerr << " (" << sub_stage << ")";
    std::cerr << ": " << code << ": " << message << '\n';
  }

  const RunOptions& options_;
  json manifest_;
  bool failed_ = false;
};

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string() + ": " + ec.message());
}

std::vector<std::string> sample_labels(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
  return labels;
}

json summary_to_json(const multifractal::MultifractalSummary& s) {
  json spectrum = json::array();
  for (const auto& p : s.spectrum.points) spectrum.push_back({{"q", p.q}, {"h", p.h}, {"D", p.D}});
  return {
      {"wavelet", s.wavelet},
      {"dwt_levels", s.dwt_levels},
      {"scales_used", s.scales_used},
      {"q_grid", s.q_grid},
      {"zeta", s.zeta},
      {"regression_r2", s.regression_r2_per_q},
      {"cumulants", {{"c1", s.cumulants.c1}, {"c2", s.cumulants.c2}, {"c3", s.cumulants.c3}}},
      {"spectrum", spectrum},
      {"excluded_q", s.spectrum.excluded_q},
      {"spread_delta_h", s.spread_delta_h},
  };
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

multifractal::AnalysisOptions mf_options(const AnalysisConfig& config) {
  multifractal::AnalysisOptions o;
  o.wavelet = config.leader_wavelet;
  o.q_grid = config.q_grid;
  o.scale_range = config.scale_range;
  return o;
}

void emit_mf_figures(Run& run, const multifractal::MultifractalSummary& s) {
  Series poly{"c1 q + c2 q^2/2 + c3 q^3/6", s.q_grid, {}};
  for (double q : s.q_grid)
    poly.y.push_back(s.cumulants.c1 * q + s.cumulants.c2 * q * q / 2.0 + s.cumulants.c3 * q * q * q / 6.0);
  emit_figure({"Scaling exponents", "q", "zeta(q)", {{"zeta(q)", s.q_grid, s.zeta}, poly}}, FigureKind::Line,
              run.artifact("zeta_vs_q.svg"));
  Series dh{"D(h)", {}, {}};
  for (const auto& p : s.spectrum.points) {
    dh.x.push_back(p.h);
    dh.y.push_back(p.D);
  }
  emit_figure({"Singularity spectrum", "h", "D(h)", {dh}}, FigureKind::Scatter, run.artifact("spectrum_D_of_h.svg"));
}

}  // namespace

int cmd_demo(const RunOptions& options) {
  Run run(options, "demo");
  if (!run.resolve_config()) return run.finish();
  const AnalysisConfig& cfg = run.config;

  std::optional<Signal> raw, filtered;
  std::optional<beats::FiducialSeries> fiducials;
  std::optional<beats::BeatMatrix> beat_matrix;
  beats::TemplateReport tmpl;
  std::vector<double> average;
  json counts;

  run.stage("load", [&] {
    ensure_output_dir(options.output_dir);
    if (options.synthetic) {
      SyntheticScgParams p;
      p.seed = cfg.rng_seed;
      p.sample_rate_hz = cfg.sample_rate_hz;
      run.manifest()["input"] = {{"synthetic",
                                  {{"duration_s", p.duration_s},
                                   {"heart_rate_bpm", p.heart_rate_bpm},
                                   {"resp_rate_bpm", p.resp_rate_bpm},
                                   {"noise_std", p.noise_std},
                                   {"sample_rate_hz", p.sample_rate_hz},
                                   {"seed", p.seed}}}};
      raw = synthesize_scg(p);
    } else {
      run.manifest()["input"] = {{"path", options.input->generic_string()}};
      raw = load_signal(*options.input, cfg.sample_rate_hz);
    }
  });
  run.stage("filter", [&] {
    const auto spec = filtering::FilterSpec::bandpass(cfg.scg_band_hz.first, cfg.scg_band_hz.second, cfg.filter_order);
    filtered = filtering::zero_phase_filter(*raw, spec);
    Matrix column(filtered->size(), 1);
    for (std::size_t i = 0; i < filtered->size(); ++i) column(i, 0) = filtered->samples()[i];
    write_table(run.artifact("filtered.csv"), column, {"filtered"});
  });
  run.stage("detect", [&] {
    fiducials = beats::detect_fiducials(*filtered);
    counts["detected"] = fiducials->indices.size();
  });
  run.stage("segment", [&] {
    beat_matrix = beats::segment_beats(*filtered, *fiducials, cfg.beat_window_s.first, cfg.beat_window_s.second);
    counts["segmented"] = beat_matrix->count();
    write_table(run.artifact("beats.csv"), beat_matrix->beats, sample_labels(beat_matrix->beats.cols()));
  });
  run.stage("template", [&] {
    tmpl = beats::make_template(*beat_matrix, cfg.rejection_threshold);
    Matrix column(tmpl.template_beat.size(), 1);
    for (std::size_t i = 0; i < tmpl.template_beat.size(); ++i) column(i, 0) = tmpl.template_beat[i];
    write_table(run.artifact("template.csv"), column, {"template"});
  });
  run.stage("residuals", [&] {
    *beat_matrix = beats::reject_noisy(*beat_matrix, tmpl.template_beat, cfg.rejection_threshold);
    counts["accepted"] = beat_matrix->accepted_count();
    const double fs = beat_matrix->fs;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < beat_matrix->count(); ++i) {
      const auto anchor = static_cast<double>(beat_matrix->anchor_indices[i]);
      rows.push_back({static_cast<double>(i), anchor, anchor / fs, tmpl.per_beat_correlation[i],
                      tmpl.per_beat_rms_residual[i], beat_matrix->accepted[i] ? 1.0 : 0.0});
    }
    write_table(run.artifact("residuals.csv"), rows,
                {"beat_index", "anchor_index", "anchor_time_s", "correlation", "rms_residual", "accepted"});
    average = beats::ensemble_average(*beat_matrix, true);
  });
  run.stage("waterfall", [&] {
    const Matrix wf = beats::waterfall(*beat_matrix);
    write_table(run.artifact("waterfall.csv"), wf, sample_labels(wf.cols()));
  });
  run.stage("features", [&] {
    const auto fc = features::FeatureConfig::from(cfg);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < beat_matrix->count(); ++i) {
      if (!beat_matrix->accepted[i]) continue;
      const auto v = features::beat_features(beat_matrix->beats.row(i), fc, i);
      std::vector<double> row{static_cast<double>(i)};
      const auto flat = v.flatten();
      row.insert(row.end(), flat.begin(), flat.end());
      rows.push_back(std::move(row));
    }
    write_table(run.artifact("features.csv"), rows, features::feature_names(fc));
  });
  std::optional<multifractal::MultifractalSummary> mf;
  run.stage("multifractal", [&] {
    auto o = mf_options(cfg);
    o.levels = wavelets::max_dwt_levels(average.size());
    if (!o.scale_range) o.scale_range = multifractal::beat_scale_range(o.levels);
    mf = multifractal::analyze(average, o);
    json j = summary_to_json(*mf);
    j["source"] = "ensemble_average";
    write_json(run.artifact("multifractal.json"), j);
  });
  run.stage("figures", [&] {
    const double fs = beat_matrix->fs;
    const auto pre = static_cast<double>(std::llround(beat_matrix->pre_s * fs));
    Series avg{"ensemble average", {}, average};
    for (std::size_t i = 0; i < average.size(); ++i) avg.x.push_back((static_cast<double>(i) - pre) / fs);
    emit_figure({"Ensemble-averaged beat", "time from fiducial (s)", "amplitude", {avg}}, FigureKind::Line,
                run.artifact("average_beat.svg"));

    const Matrix wf = beats::waterfall(*beat_matrix);
    FigureData ridges{"Beat waterfall", "time from fiducial (s)", "beat", {}};
    for (std::size_t r = 0; r < wf.rows(); ++r) {
      const auto row = wf.row(r);
      ridges.series.push_back({"beat " + std::to_string(r), avg.x, {row.begin(), row.end()}});
    }
    emit_figure(ridges, FigureKind::WaterfallRidges, run.artifact("waterfall.svg"));
    emit_mf_figures(run, *mf);
  });
  run.manifest()["counts"] = counts;
  return run.finish();
}

int cmd_features(const RunOptions& options) {
  Run run(options, "features");
  if (!run.resolve_config()) return run.finish();
  std::optional<Table> table;
  run.manifest()["input"] = {{"path", options.input->generic_string()}};
  run.stage("load", [&] {
    ensure_output_dir(options.output_dir);
    table = read_table(*options.input);
    if (table->values.empty()) throw Error(ErrorCode::EmptySignal, "beat matrix has no rows");
  });
  run.stage("features", [&] {
    const auto fc = features::FeatureConfig::from(run.config);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < table->values.rows(); ++i) {
      const auto v = features::beat_features(table->values.row(i), fc, i);
      std::vector<double> row{static_cast<double>(i)};
      const auto flat = v.flatten();
      row.insert(row.end(), flat.begin(), flat.end());
      rows.push_back(std::move(row));
    }
    write_table(run.artifact("features.csv"), rows, features::feature_names(fc));
  });
  return run.finish();
}

int cmd_mf(const RunOptions& options) {
  Run run(options, "mf");
  if (!run.resolve_config()) return run.finish();
  std::optional<Signal> sig;
  run.manifest()["input"] = {{"path", options.input->generic_string()}};
  run.stage("load", [&] {
    ensure_output_dir(options.output_dir);
    sig = load_signal(*options.input, run.config.sample_rate_hz);
  });
  std::optional<multifractal::MultifractalSummary> mf;
  run.stage("multifractal", [&] {
    mf = multifractal::analyze(sig->view(), mf_options(run.config));
    json j = summary_to_json(*mf);
    j["source"] = "input";
    write_json(run.artifact("multifractal.json"), j);
  });
  run.stage("figures", [&] { emit_mf_figures(run, *mf); });
  return run.finish();
}

int cmd_quality(const RunOptions& options) {
  Run run(options, "quality");
  if (!run.resolve_config()) return run.finish();
  std::optional<Signal> sig;
  std::vector<double> tmpl;
  run.manifest()["input"] = {{"path", options.input->generic_string()},
                             {"template", options.template_path->generic_string()}};
  run.stage("load", [&] {
    ensure_output_dir(options.output_dir);
    sig = load_signal(*options.input, run.config.sample_rate_hz);
    tmpl = load_signal(*options.template_path, run.config.sample_rate_hz).samples();
  });
  run.stage("quality", [&] {
    const auto windows = quality::assess_windows(*sig, tmpl, run.config.beat_window_s.first, kQualityWindowS);
    std::vector<std::vector<double>> rows;
    for (const auto& w : windows)
      rows.push_back({static_cast<double>(w.report.window_index), w.start_s, static_cast<double>(w.n_beats),
                      w.report.template_correlation_sqi, w.report.kurtosis_sqi, w.report.spectral_entropy_sqi,
                      w.report.composite});
    write_table(run.artifact("quality.csv"), rows,
                {"window_index", "start_s", "n_beats", "template_correlation_sqi", "kurtosis_sqi",
                 "spectral_entropy_sqi", "composite"});
  });
  return run.finish();
}

int cmd_spectral(const RunOptions& options) {
  Run run(options, "spectral");
  if (!run.resolve_config()) return run.finish();
  std::optional<Signal> sig;
  run.manifest()["input"] = {{"path", options.input->generic_string()}};
  run.stage("load", [&] {
    ensure_output_dir(options.output_dir);
    sig = load_signal(*options.input, run.config.sample_rate_hz);
  });
  run.stage("spectral", [&] {
    const auto psd = spectral::welch_psd(*sig, std::min(kPsdSegmentS, sig->duration_s()), 0.5);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < psd.freqs_hz.size(); ++i) rows.push_back({psd.freqs_hz[i], psd.power[i]});
    write_table(run.artifact("psd.csv"), rows, {"freq_hz", "power"});

    const double window = std::min(kSpectrogramWindowS, sig->duration_s());
    const auto sg = spectral::spectrogram(*sig, window, std::min(kSpectrogramHopS, window));
    std::vector<std::string> labels{"freq_hz"};
    for (double t : sg.times_s) labels.push_back("t" + format_number(t));
    std::vector<std::vector<double>> grid;
    for (std::size_t f = 0; f < sg.freqs_hz.size(); ++f) {
      std::vector<double> row{sg.freqs_hz[f]};
      const auto p = sg.power.row(f);
      row.insert(row.end(), p.begin(), p.end());
      grid.push_back(std::move(row));
    }
    write_table(run.artifact("spectrogram.csv"), grid, labels);
  });
  return run.finish();
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Seismocardiography analysis: filtering, beats, wavelet features, multifractal analysis."};
  app.name(args.empty() ? "pulsatio" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  RunOptions o;
  std::string input, template_path, config_path, output;
  const char* env_out = std::getenv("PULSATIO_OUTPUT_DIR");
  output = env_out && *env_out ? env_out : "pulsatio_out";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file with AnalysisConfig fields (flags override it)");
    sub->add_option("-o,--output", output, "Output directory (default: $PULSATIO_OUTPUT_DIR or pulsatio_out)");
    sub->add_option("--fs", o.sample_rate_hz, "Sample rate of --input in Hz (default 500)");
  };
  auto q_flags = [&](CLI::App* sub) {
    sub->add_option("--q-min", o.q_min, "Lowest moment order (default -5, step 0.5)");
    sub->add_option("--q-max", o.q_max, "Highest moment order (default 5)");
  };

  auto* demo = app.add_subcommand("demo", "Full pipeline: filter, beats, template, features, multifractal, figures");
  common(demo);
  q_flags(demo);
  auto* demo_in = demo->add_option("--input", input, "Single-column CSV signal");
  auto* demo_syn = demo->add_flag("--synthetic", o.synthetic, "Use the built-in 30 s, 60 bpm synthetic SCG");
  demo_in->excludes(demo_syn);
  demo->add_option("--seed", o.seed, "Seed for the synthetic generator (default 1)");
  demo->add_option("--band-low", o.band_low, "SCG band-pass low edge in Hz (default 1)");
  demo->add_option("--band-high", o.band_high, "SCG band-pass high edge in Hz (default 40)");
  demo->add_option("--ar-order", o.ar_order, "Burg reflection order (default 4)");

  auto* feat = app.add_subcommand("features", "Per-beat features from a beat matrix CSV (as beats.csv)");
  common(feat);
  q_flags(feat);
  feat->add_option("--input", input, "Beat matrix CSV, one beat per row, header row")->required();
  feat->add_option("--ar-order", o.ar_order, "Burg reflection order (default 4)");

  auto* mf = app.add_subcommand("mf", "Wavelet-leader multifractal analysis of a single-column signal");
  common(mf);
  q_flags(mf);
  mf->add_option("--input", input, "Single-column CSV signal")->required();

  auto* qual = app.add_subcommand("quality", "Per-window quality indices of a filtered signal, 5 s windows");
  common(qual);
  qual->add_option("--input", input, "Single-column CSV filtered signal")->required();
  qual->add_option("--template", template_path, "Single-column CSV template beat")->required();

  auto* spec = app.add_subcommand("spectral", "Welch PSD (2 s Hann segments) and spectrogram (1 s, 0.5 s hop)");
  common(spec);
  spec->add_option("--input", input, "Single-column CSV signal")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (demo->parsed() && input.empty() && !o.synthetic)
      throw CLI::ValidationError("demo", "one of --input or --synthetic is required");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (!input.empty()) o.input = input;
  if (!template_path.empty()) o.template_path = template_path;
  if (!config_path.empty()) o.config_path = config_path;
  o.output_dir = output;

  if (demo->parsed()) return cmd_demo(o);
  if (feat->parsed()) return cmd_features(o);
  if (mf->parsed()) return cmd_mf(o);
  if (qual->parsed()) return cmd_quality(o);
  return cmd_spectral(o);
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace pulsatio::cli
