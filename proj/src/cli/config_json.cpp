#include <fstream>
#include <set>

#include "pulsatio/cli/app.hpp"
#include "pulsatio/error.hpp"

namespace pulsatio::cli {

using nlohmann::json;

json config_to_json(const AnalysisConfig& c) {
  json j;
  j["sample_rate_hz"] = c.sample_rate_hz;
  j["scg_band_hz"] = {c.scg_band_hz.first, c.scg_band_hz.second};
  j["filter_order"] = c.filter_order;
  j["acc_cutoff_hz"] = c.acc_cutoff_hz;
  j["beat_window_s"] = {c.beat_window_s.first, c.beat_window_s.second};
  j["rejection_threshold"] = c.rejection_threshold;
  j["ar_order_m"] = c.ar_order_m;
  j["dwt_levels"] = c.dwt_levels;
  j["detail_wavelet"] = c.detail_wavelet;
  j["modwpt_level_L"] = c.modwpt_level_L;
  j["packet_wavelet"] = c.packet_wavelet;
  j["entropy_log_base"] = c.entropy_log_base;
  j["leader_wavelet"] = c.leader_wavelet;
  j["q_grid"] = c.q_grid;
  j["scale_range"] = c.scale_range ? json{c.scale_range->first, c.scale_range->second} : json(nullptr);
  j["rng_seed"] = c.rng_seed;
  return j;
}

AnalysisConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidParameter, "config must be a JSON object");
  static const std::set<std::string> known{
      "sample_rate_hz", "scg_band_hz",    "filter_order",     "acc_cutoff_hz",  "beat_window_s",
      "rejection_threshold", "ar_order_m", "dwt_levels",      "detail_wavelet", "modwpt_level_L",
      "packet_wavelet", "entropy_log_base", "leader_wavelet", "q_grid",         "scale_range",
      "rng_seed"};
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw Error(ErrorCode::InvalidParameter, "unknown config key '" + key + "'");

  AnalysisConfig c;
  auto pair_of = [](const json& v) {
    if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::InvalidParameter, "expected a two-element array");
    return v.get<std::pair<double, double>>();
  };
  try {
    if (j.contains("sample_rate_hz")) c.sample_rate_hz = j["sample_rate_hz"].get<double>();
    if (j.contains("scg_band_hz")) c.scg_band_hz = pair_of(j["scg_band_hz"]);
    if (j.contains("filter_order")) c.filter_order = j["filter_order"].get<int>();
    if (j.contains("acc_cutoff_hz")) c.acc_cutoff_hz = j["acc_cutoff_hz"].get<double>();
    if (j.contains("beat_window_s")) c.beat_window_s = pair_of(j["beat_window_s"]);
    if (j.contains("rejection_threshold")) c.rejection_threshold = j["rejection_threshold"].get<double>();
    if (j.contains("ar_order_m")) c.ar_order_m = j["ar_order_m"].get<int>();
    if (j.contains("dwt_levels")) c.dwt_levels = j["dwt_levels"].get<int>();
    if (j.contains("detail_wavelet")) c.detail_wavelet = j["detail_wavelet"].get<std::string>();
    if (j.contains("modwpt_level_L")) c.modwpt_level_L = j["modwpt_level_L"].get<int>();
    if (j.contains("packet_wavelet")) c.packet_wavelet = j["packet_wavelet"].get<std::string>();
    if (j.contains("entropy_log_base")) c.entropy_log_base = j["entropy_log_base"].get<double>();
    if (j.contains("leader_wavelet")) c.leader_wavelet = j["leader_wavelet"].get<std::string>();
    if (j.contains("q_grid")) c.q_grid = j["q_grid"].get<std::vector<double>>();
    if (j.contains("scale_range") && !j["scale_range"].is_null()) {
      const auto r = pair_of(j["scale_range"]);
      c.scale_range = std::pair<int, int>{static_cast<int>(r.first), static_cast<int>(r.second)};
    }
    if (j.contains("rng_seed")) c.rng_seed = j["rng_seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParameter, std::string("config value has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace pulsatio::cli
