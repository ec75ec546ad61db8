#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "pulsatio/cli/app.hpp"
#include "pulsatio/cli/figures.hpp"
#include "pulsatio/error.hpp"
#include "pulsatio/signal.hpp"

using namespace pulsatio;
using namespace pulsatio::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "pulsatio_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

std::size_t data_rows(const fs::path& csv) {
  const auto text = slurp(csv);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

const std::vector<std::string> kDemoArtifacts{
    "filtered.csv",   "beats.csv",        "template.csv",      "residuals.csv",    "waterfall.csv",
    "features.csv",   "multifractal.json", "manifest.json",    "average_beat.svg", "waterfall.svg",
    "zeta_vs_q.svg", "spectrum_D_of_h.svg"};

// One demo run shared by the tests that only read its outputs.
const fs::path& demo_dir() {
  static const fs::path dir = [] {
    const auto d = scratch("demo");
    REQUIRE(run({"pulsatio", "demo", "--synthetic", "--seed", "1", "-o", d.string()}) == kExitOk);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("emit_figure: structure per kind") {
  const auto dir = scratch("figures");
  FigureData line{"flat", "t", "x", {{"flat", {0, 1, 2, 3}, {0, 0, 0, 0}}}};
  emit_figure(line, FigureKind::Line, dir / "line.svg");
  const auto svg = slurp(dir / "line.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count_of(svg, "<polyline") == 1);
  CHECK(svg.find("href") == std::string::npos);

  FigureData ridges{"waterfall", "t", "beat", {}};
  for (int r = 0; r < 10; ++r) ridges.series.push_back({"b" + std::to_string(r), {0, 1, 2}, {0, 1, 0}});
  emit_figure(ridges, FigureKind::WaterfallRidges, dir / "ridges.svg");
  const auto rs = slurp(dir / "ridges.svg");
  CHECK(count_of(rs, "<polyline") == 10);
  // earliest beat lowest: the vertical offsets decrease down the file
  std::regex offset(R"(translate\(0,([-0-9.]+)\))");
  std::vector<double> ys;
  for (auto it = std::sregex_iterator(rs.begin(), rs.end(), offset); it != std::sregex_iterator(); ++it)
    ys.push_back(std::stod((*it)[1].str()));
  REQUIRE(ys.size() == 10);
  for (std::size_t i = 1; i < ys.size(); ++i) CHECK(ys[i] < ys[i - 1]);

  FigureData overlay{"zeta", "q", "zeta", {{"zeta", {-1, 0, 1}, {-1, 0, 1}}, {"fit", {-1, 0, 1}, {-1, 0, 1}}}};
  emit_figure(overlay, FigureKind::Line, dir / "overlay.svg");
  CHECK(count_of(slurp(dir / "overlay.svg"), "<polyline") == 2);

  emit_figure(overlay, FigureKind::Scatter, dir / "scatter.svg");
  CHECK(count_of(slurp(dir / "scatter.svg"), "<circle") == 6);

  auto code = [&](const FigureData& d, const fs::path& p) {
    try {
      emit_figure(d, FigureKind::Line, p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidParameter;
  };
  CHECK(code(FigureData{}, dir / "empty.svg") == ErrorCode::EmptyData);
  CHECK(code(FigureData{"", "", "", {{"bad", {0, 1}, {0}}}}, dir / "bad.svg") == ErrorCode::EmptyData);
  CHECK(code(line, "/nonexistent/dir/x.svg") == ErrorCode::IoError);
}

TEST_CASE("demo --synthetic writes every artifact") {
  const auto& dir = demo_dir();
  for (const auto& name : kDemoArtifacts) CHECK_MESSAGE(fs::exists(dir / name), name);
  const auto m = manifest(dir);
  CHECK(m["failed_stage"].is_null());
  CHECK(m["seed"] == 1);
  CHECK(std::abs(m["counts"]["detected"].get<int>() - 30) <= 1);
  CHECK(data_rows(dir / "features.csv") == m["counts"]["accepted"].get<std::size_t>());
  for (const auto& s : m["stages"]) CHECK(s["status"] == "ok");
  CHECK(m["artifacts"].size() == kDemoArtifacts.size());
  CHECK(m["config"] == config_to_json(AnalysisConfig{}));

  const auto mf = nlohmann::json::parse(slurp(dir / "multifractal.json"));
  const auto q = mf["q_grid"].get<std::vector<double>>();
  const auto zero = std::find(q.begin(), q.end(), 0.0) - q.begin();
  CHECK(mf["zeta"][static_cast<std::size_t>(zero)] == 0.0);
}

TEST_CASE("demo is deterministic") {
  const auto dir = scratch("demo_again");
  REQUIRE(run({"pulsatio", "demo", "--synthetic", "--seed", "1", "-o", dir.string()}) == kExitOk);
  for (const auto& name : kDemoArtifacts) {
    const auto ext = fs::path(name).extension();
    if (ext == ".csv" || ext == ".json") {
      if (name == "manifest.json") continue;  // records its own output directory
      CHECK_MESSAGE(slurp(dir / name) == slurp(demo_dir() / name), name);
    }
  }
  CHECK(manifest(dir)["stages"] == manifest(demo_dir())["stages"]);
}

TEST_CASE("demo failure still writes a manifest naming the stage") {
  const auto dir = scratch("demo_missing");
  CHECK(run({"pulsatio", "demo", "--input", "/nonexistent/scg.csv", "-o", dir.string()}) == kExitStageFailure);
  const auto m = manifest(dir);
  CHECK(m["failed_stage"] == "load");
  CHECK(m["error"]["code"] == "MissingFile");
}

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch("usage");
  CHECK(run({"pulsatio"}) == kExitUsage);
  CHECK(run({"pulsatio", "demo", "-o", dir.string()}) == kExitUsage);
  CHECK(run({"pulsatio", "demo", "--synthetic", "--input", "x.csv", "-o", dir.string()}) == kExitUsage);
  CHECK(run({"pulsatio", "quality", "--input", "x.csv"}) == kExitUsage);
  CHECK(run({"pulsatio", "bogus"}) == kExitUsage);
  CHECK(run({"pulsatio", "demo", "--seed", "abc", "--synthetic"}) == kExitUsage);
  CHECK(run({"pulsatio", "--help"}) == kExitOk);
}

TEST_CASE("subcommands on the demo outputs") {
  const auto& demo = demo_dir();

  const auto mf = scratch("mf");
  CHECK(run({"pulsatio", "mf", "--input", (demo / "filtered.csv").string(), "--q-min", "-5", "--q-max", "5", "-o",
             mf.string()}) == kExitOk);
  const auto summary = nlohmann::json::parse(slurp(mf / "multifractal.json"));
  const auto q = summary["q_grid"].get<std::vector<double>>();
  CHECK(q.front() == -5.0);
  CHECK(q.back() == 5.0);
  const auto zero = std::find(q.begin(), q.end(), 0.0) - q.begin();
  CHECK(summary["zeta"][static_cast<std::size_t>(zero)] == 0.0);
  CHECK(fs::exists(mf / "zeta_vs_q.svg"));

  const auto qual = scratch("quality");
  CHECK(run({"pulsatio", "quality", "--input", (demo / "filtered.csv").string(), "--template",
             (demo / "template.csv").string(), "-o", qual.string()}) == kExitOk);
  const auto table = read_table(qual / "quality.csv");
  REQUIRE(table.values.rows() > 0);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(table.column_labels.begin(), table.column_labels.end(), name) -
                                    table.column_labels.begin());
  };
  for (std::size_t r = 0; r < table.values.rows(); ++r) {
    const double corr = table.values(r, col("template_correlation_sqi"));
    const double se = table.values(r, col("spectral_entropy_sqi"));
    const double comp = table.values(r, col("composite"));
    CHECK(corr >= -1.0);
    CHECK(corr <= 1.0);
    CHECK(se >= 0.0);
    CHECK(se <= 1.0);
    CHECK(comp >= 0.0);
    CHECK(comp <= 1.0);
  }

  const auto spec = scratch("spectral");
  CHECK(run({"pulsatio", "spectral", "--input", (demo / "filtered.csv").string(), "-o", spec.string()}) == kExitOk);
  const auto psd = read_table(spec / "psd.csv");
  REQUIRE(psd.values.rows() > 0);
  for (std::size_t r = 0; r < psd.values.rows(); ++r) CHECK(psd.values(r, 1) >= 0.0);
  CHECK(fs::exists(spec / "spectrogram.csv"));

  const auto feat = scratch("features");
  CHECK(run({"pulsatio", "features", "--input", (demo / "beats.csv").string(), "-o", feat.string()}) == kExitOk);
  CHECK(data_rows(feat / "features.csv") == data_rows(demo / "beats.csv"));
}

TEST_CASE("config JSON round trip") {
  AnalysisConfig c;
  c.scg_band_hz = {2.0, 35.0};
  c.ar_order_m = 6;
  c.scale_range = std::pair{2, 5};
  c.q_grid = AnalysisConfig::make_q_grid(-3.0, 3.0, 0.5);
  const auto j = config_to_json(c);
  CHECK(config_to_json(config_from_json(j)) == j);
  CHECK(config_from_json(nlohmann::json::object()).ar_order_m == AnalysisConfig{}.ar_order_m);

  auto code = [](const nlohmann::json& bad) {
    try {
      config_from_json(bad);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::EmptyData;
  };
  CHECK(code({{"no_such_key", 1}}) == ErrorCode::InvalidParameter);
  CHECK(code({{"ar_order_m", "four"}}) == ErrorCode::InvalidParameter);
  CHECK(code({{"scg_band_hz", {40.0, 1.0}}}) == ErrorCode::InvalidParameter);

  const auto dir = scratch("config");
  std::ofstream(dir / "cfg.json") << j.dump();
  CHECK(config_to_json(load_config(dir / "cfg.json")) == j);
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(load_config(dir / "broken.json"), Error);
}
