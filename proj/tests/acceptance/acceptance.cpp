// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulsatio/beats.hpp"
#include "pulsatio/cli/app.hpp"
#include "pulsatio/features.hpp"
#include "pulsatio/filtering.hpp"
#include "pulsatio/multifractal.hpp"
#include "pulsatio/wavelets.hpp"
#include "test_support.hpp"

using namespace pulsatio;
namespace fs = std::filesystem;
namespace ts = pulsatio::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

std::size_t index_of(const std::vector<double>& grid, double q) {
  return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), q) - grid.begin());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome burg_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(64, 1024), order(1, 8);
  double worst = 0.0, k_max = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = ts::white_noise(static_cast<std::size_t>(len(rng)), 1.0, 50000 + trial);
    const int m = order(rng);
    const auto got = features::burg_reflection(x, m);
    const auto want = ts::burg_oracle(x, m);
    for (std::size_t i = 0; i < got.size(); ++i) {
      worst = std::max(worst, std::abs(got[i] - want[i]));
      k_max = std::max(k_max, std::abs(got[i]));
    }
  }
  const double alt = features::burg_reflection(std::vector<double>{1, -1, 1, -1}, 1)[0];
  const double flat = features::burg_reflection(std::vector<double>{3, 3, 3, 3}, 1)[0];
  const bool pass = worst <= 1e-12 && k_max <= 1.0 && alt == 1.0 && flat == -1.0;
  return {pass, fmt("max |k - oracle| %.2e (<= 1e-12), max |k| %.6f (<= 1), k0[1,-1,1,-1] %.17g, k0[c,c,c,c] %.17g",
                    worst, k_max, alt, flat)};
}

Outcome ar_recovery() {
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) sum += features::burg_reflection(ts::ar1(10000, 0.9, seed), 1)[0];
  const double mean = sum / 20.0;
  return {mean >= -0.95 && mean <= -0.85, fmt("mean k0 %.4f (in [-0.95, -0.85])", mean)};
}

Outcome dwt_reconstruction() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(64, 4096);
  double worst = 0.0;
  const std::vector<std::string> names{"db2", "db3", "db4", "db5", "db6", "db7", "db8", "db9", "db10"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = ts::white_noise(static_cast<std::size_t>(len(rng)), 1.0, 700 + trial);
    for (const auto& name : names) {
      const int j_max = std::min(6, wavelets::max_dwt_levels(x.size()));
      for (int j = 1; j <= j_max; ++j) {
        const auto back = wavelets::idwt(wavelets::dwt(x, name, j));
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(back[i] - x[i]));
        worst = std::max(worst, err / max_abs(x));
      }
    }
  }

  // cubic: detail (j, k) reads samples 2^j k .. 2^j k + (2^j - 1)(L - 1);
  // interior coefficients are those that stop short of the periodic wrap
  const std::size_t n = 1024, taps = 8;
  std::vector<double> cubic(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    cubic[i] = 1.0 + 2.0 * t - 4.0 * t * t + 3.0 * t * t * t;
  }
  const double rms = std::sqrt(energy(cubic) / n);
  const auto p = wavelets::dwt(cubic, "db4", 6);
  double cubic_worst = 0.0;
  for (std::size_t j = 0; j < p.details.size(); ++j) {
    const std::size_t span = std::size_t{1} << (j + 1);
    for (std::size_t k = 0; k < p.details[j].size(); ++k)
      if (span * k + (span - 1) * (taps - 1) <= n - 1) cubic_worst = std::max(cubic_worst, std::abs(p.details[j][k]));
  }
  const double cubic_rel = cubic_worst / rms;
  return {worst < 1e-10 && cubic_rel < 1e-8,
          fmt("max relative reconstruction error %.2e (< 1e-10), cubic interior |d|/RMS %.2e (< 1e-8)", worst, cubic_rel)};
}

Outcome modwpt_energy() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> len(256, 4096);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = ts::white_noise(static_cast<std::size_t>(len(rng)), 1.0, 900 + trial);
    const auto t = wavelets::modwpt(x, "fk18", 4);
    double total = 0.0;
    for (const auto& node : t.nodes) total += energy(node);
    worst = std::max(worst, std::abs(total - energy(x)) / energy(x));
  }
  const double fs = 500.0;
  const auto tone = ts::tone(5000, 10.0, fs);
  const auto t = wavelets::modwpt(tone, "fk18", 4);
  const double band_width = fs / 2.0 / 16.0;
  const auto node = wavelets::node_for_band(static_cast<std::size_t>(10.0 / band_width), 4);
  const double share = energy(t.nodes[node]) / energy(tone);
  return {worst < 1e-8 && share >= 0.9,
          fmt("max relative energy error %.2e (< 1e-8), 10 Hz node %zu holds %.4f of energy (>= 0.9)", worst, node, share)};
}

Outcome leaders_equivalence() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> levels(2, 4), width(1, 32);
  std::exponential_distribution<double> mag(1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int j = levels(rng);
    std::size_t n = static_cast<std::size_t>(width(rng));
    std::vector<std::vector<double>> mags;
    for (int l = 0; l < j; ++l) {
      std::vector<double> level(n);
      for (auto& v : level) v = mag(rng);
      mags.push_back(level);
      n = (n + 1) / 2;
    }
    if (multifractal::leaders_from_magnitudes(mags).leaders != ts::leaders_oracle(mags)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d of 1000 random pyramids differ from the exhaustive oracle (0)", mismatches)};
}

struct RunSummary {
  double c1, c2, spread, zeta0;
};

RunSummary summarize(std::span<const double> x) {
  const auto s = multifractal::analyze(x);
  return {s.cumulants.c1, s.cumulants.c2, s.spread_delta_h, s.zeta[index_of(s.q_grid, 0.0)]};
}

Outcome monofractal() {
  std::vector<double> c1, c2, spread;
  bool zeta0 = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = summarize(ts::fbm(1 << 14, 0.8, seed));
    c1.push_back(r.c1);
    c2.push_back(std::abs(r.c2));
    spread.push_back(r.spread);
    zeta0 = zeta0 && r.zeta0 == 0.0;
  }
  const double mc1 = ts::median(c1), mc2 = ts::median(c2);
  const double worst_spread = *std::max_element(spread.begin(), spread.end());
  const bool pass = mc1 >= 0.7 && mc1 <= 0.9 && mc2 <= 0.05 && worst_spread < 0.25 && zeta0;
  return {pass, fmt("median c1 %.4f (in [0.7, 0.9]), median |c2| %.4f (<= 0.05), max spread %.4f (< 0.25), "
                    "zeta(0) == 0 in all runs: %s",
                    mc1, mc2, worst_spread, zeta0 ? "yes" : "no")};
}

Outcome multifractal_detection() {
  int negative_c2 = 0, wider = 0;
  std::vector<double> c2s;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cascade = summarize(ts::binomial_cascade(14, 0.3, seed));
    const auto fbm = summarize(ts::fbm(1 << 14, 0.8, seed));
    c2s.push_back(cascade.c2);
    if (cascade.c2 < -0.02) ++negative_c2;
    if (cascade.spread > fbm.spread) ++wider;
  }
  return {negative_c2 >= 18 && wider >= 18,
          fmt("c2 < -0.02 in %d/20 (>= 18, median c2 %.4f), cascade spread > fBm spread in %d/20 (>= 18)", negative_c2,
              ts::median(c2s), wider)};
}

Outcome ensemble_noise() {
  std::vector<double> truth(300);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double t = static_cast<double>(i) / 300.0;
    truth[i] = std::exp(-std::pow((t - 0.3) / 0.04, 2)) * std::sin(70.0 * t) + 0.3 * std::sin(5.0 * t);
  }
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    beats::BeatMatrix m;
    m.fs = 500.0;
    for (std::uint64_t r = 0; r < 100; ++r) {
      auto row = ts::white_noise(truth.size(), 0.1, seed * 100000 + r);
      for (std::size_t i = 0; i < row.size(); ++i) row[i] += truth[i];
      m.beats.push_row(row);
      m.anchor_indices.push_back(r);
      m.accepted.push_back(true);
    }
    const auto avg = beats::ensemble_average(m, true);
    double se = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) se += (avg[i] - truth[i]) * (avg[i] - truth[i]);
    total += std::sqrt(se / static_cast<double>(truth.size()));
  }
  const double mean = total / 20.0;
  return {mean >= 0.008 && mean <= 0.012, fmt("mean residual RMS %.5f (in [0.008, 0.012])", mean)};
}

Outcome entropy_limits() {
  const double ln_n = std::log(1024.0);
  const double uniform = features::shannon_entropy(std::vector<double>(1024, 0.7));
  std::vector<double> single(1024, 0.0);
  single[100] = 3.0;
  const double one = features::shannon_entropy(single);
  double lowest = ln_n;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    for (double h : features::modwpt_shannon_entropy(ts::white_noise(1024, 1.0, 3000 + seed)))
      lowest = std::min(lowest, h);
  const bool pass = std::abs(uniform - ln_n) <= 1e-12 && one == 0.0 && lowest >= 0.9 * ln_n;
  return {pass, fmt("uniform |H - ln N| %.2e (<= 1e-12), single-coefficient H %.3g (0), "
                    "white-noise min node H %.4f (>= %.4f)",
                    std::abs(uniform - ln_n), one, lowest, 0.9 * ln_n)};
}

Outcome end_to_end() {
  const auto dir = fs::temp_directory_path() / "pulsatio_acceptance_demo";
  fs::remove_all(dir);
  const std::vector<std::string> args{"pulsatio", "demo", "--synthetic", "--seed", "1", "-o", dir.string()};
  const std::vector<std::string> artifacts{
      "filtered.csv",   "beats.csv",         "template.csv",  "residuals.csv",    "waterfall.csv",
      "features.csv",   "multifractal.json", "manifest.json", "average_beat.svg", "waterfall.svg",
      "zeta_vs_q.svg", "spectrum_D_of_h.svg"};

  if (cli::run(args) != cli::kExitOk) return {false, "first demo run failed"};
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (ext == ".csv" || ext == ".json") first[e.path().filename().string()] = slurp(e.path());
  }
  if (cli::run(args) != cli::kExitOk) return {false, "second demo run failed"};

  int differing = 0;
  for (const auto& [name, bytes] : first)
    if (slurp(dir / name) != bytes) ++differing;
  int present = 0;
  for (const auto& a : artifacts) present += fs::exists(dir / a) ? 1 : 0;
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  const int detected = manifest["counts"]["detected"].get<int>();
  const bool pass = differing == 0 && present == 12 && std::abs(detected - 30) <= 1;
  return {pass, fmt("%d of %zu CSV/JSON files differ between runs (0), %d/12 artifacts present, "
                    "detected beats %d (30 +/- 1)",
                    differing, first.size(), present, detected)};
}

Outcome zero_phase() {
  const double fs = 500.0;
  const auto band = filtering::FilterSpec::bandpass(1.0, 40.0, 4);
  const auto x = ts::tone(10000, 20.0, fs);
  const auto y = filtering::zero_phase_filter(Signal(x, fs), band);
  const auto fit = ts::fit_sinusoid(y.samples(), 20.0, fs, 2000, 8000);
  const std::span<const double> xi(x.data() + 2000, 6000), yi(y.samples().data() + 2000, 6000);
  const long lag = ts::best_lag(xi, yi, 25);

  const auto slow = ts::tone(10000, 0.2, fs);
  const auto ys = filtering::zero_phase_filter(Signal(slow, fs), band);
  const double gain = ts::fit_sinusoid(ys.samples(), 0.2, fs, 2500, 7500).amplitude;
  const double attenuation_db = -20.0 * std::log10(gain);
  const bool pass = std::abs(fit.amplitude - 1.0) <= 0.01 && lag == 0 && attenuation_db >= 20.0;
  return {pass, fmt("20 Hz gain %.5f (within 1%%), best lag %ld samples (0), 0.2 Hz attenuation %.1f dB (>= 20)",
                    fit.amplitude, lag, attenuation_db)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Burg oracle equivalence", 10.0, burg_oracle},
      {2, "AR(1) recovery", 5.0, ar_recovery},
      {3, "DWT perfect reconstruction", 10.0, dwt_reconstruction},
      {4, "MODWPT energy conservation", 30.0, modwpt_energy},
      {5, "Leaders brute-force equivalence", 5.0, leaders_equivalence},
      {6, "Monofractal recovery (fBm H=0.8)", 60.0, monofractal},
      {7, "Multifractal detection (cascade)", 60.0, multifractal_detection},
      {8, "Ensemble noise law", 5.0, ensemble_noise},
      {9, "Entropy bounds and limits", 30.0, entropy_limits},
      {10, "End-to-end determinism", 60.0, end_to_end},
      {11, "Zero-phase filtering", 5.0, zero_phase},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s  [%2d] %-34s %s; runtime %.2f s (< %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), seconds, c.time_limit_s);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
