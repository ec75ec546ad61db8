#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulsatio/signal.hpp"

namespace pulsatio::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitStageFailure = 3;

// Every AnalysisConfig field under its own name; pairs are two-element arrays
// and an unset scale_range is null.
nlohmann::json config_to_json(const AnalysisConfig& config);

// Starts from the defaults and overrides the keys present. Unknown keys and
// wrongly typed values throw InvalidParameter; the result is validated.
AnalysisConfig config_from_json(const nlohmann::json& j);
AnalysisConfig load_config(const std::filesystem::path& path);

// Flags shared by the subcommands. Unset optionals leave the config alone.
struct RunOptions {
  std::string command;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> template_path;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path output_dir;
  bool synthetic = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> q_min, q_max;
  std::optional<double> band_low, band_high;
  std::optional<int> ar_order;
  std::optional<double> sample_rate_hz;
};

// Stage pipelines. Each writes manifest.json into output_dir whatever happens
// and returns kExitOk or kExitStageFailure.
int cmd_demo(const RunOptions& options);
int cmd_features(const RunOptions& options);
int cmd_mf(const RunOptions& options);
int cmd_quality(const RunOptions& options);
int cmd_spectral(const RunOptions& options);

// Parses `args` (args[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace pulsatio::cli
