#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pulsatio/beats.hpp"
#include "pulsatio/error.hpp"
#include "pulsatio/filtering.hpp"
#include "pulsatio/quality.hpp"
#include "test_support.hpp"

using namespace pulsatio;
using namespace pulsatio::quality;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::EmptyData;
}

std::vector<double> structured(std::size_t n) {
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    b[i] = std::exp(-std::pow((t - 0.3) / 0.05, 2)) * std::sin(50.0 * t) + 0.3 * std::sin(6.0 * t);
  }
  return b;
}

std::vector<double> scaled(std::vector<double> x, double s) {
  for (auto& v : x) v *= s;
  return x;
}

}  // namespace

TEST_CASE("template_correlation_sqi") {
  const auto t = structured(300);
  CHECK(template_correlation_sqi(t, t) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(template_correlation_sqi(scaled(t, -1.0), t) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(code_of([&] { template_correlation_sqi(std::vector<double>(10, 1.0), t); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([&] { template_correlation_sqi(std::vector<double>(300, 1.0), t); }) == ErrorCode::ConstantInput);

  int small = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto n = testing::white_noise(300, 1.0, seed);
    const double r = template_correlation_sqi(n, t);
    if (std::abs(r) < 0.3) ++small;
    CHECK(r == doctest::Approx(template_correlation_sqi(t, n)).epsilon(1e-14));
  }
  CHECK(small > 990);
}

TEST_CASE("kurtosis_sqi") {
  CHECK(std::abs(kurtosis_sqi(testing::white_noise(100000, 1.0, 7))) <= 0.1);
  std::vector<double> alt(1000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  CHECK(kurtosis_sqi(alt) == doctest::Approx(-2.0).epsilon(1e-14));

  auto spike = testing::white_noise(1000, 1.0, 3);
  for (auto& v : spike) v *= 1e-3;
  spike[500] = 10.0;
  CHECK(kurtosis_sqi(spike) > 5.0);

  CHECK(code_of([] { kurtosis_sqi(std::vector<double>(50, 2.0)); }) == ErrorCode::ConstantInput);
  CHECK(code_of([] { kurtosis_sqi(std::vector<double>{1, 2, 3}); }) == ErrorCode::SignalTooShort);
}

TEST_CASE("spectral_entropy_sqi") {
  const double tone = spectral_entropy_sqi(testing::tone(2500, 20.0, 500.0), 500.0);
  CHECK(tone < 0.35);
  CHECK(tone >= 0.0);
  const double noise = spectral_entropy_sqi(testing::white_noise(2500, 1.0, 4), 500.0);
  CHECK(noise > 0.9);
  CHECK(noise <= 1.0);
  CHECK(code_of([] { spectral_entropy_sqi(std::vector<double>(512, 0.0), 500.0); }) == ErrorCode::ConstantInput);
  CHECK(code_of([] { spectral_entropy_sqi(std::vector<double>(63, 1.0), 500.0); }) == ErrorCode::SignalTooShort);
}

TEST_CASE("composite_sqi") {
  const auto t = structured(300);
  auto spiky = std::vector<double>(1000, 0.0);
  const auto tiny = testing::white_noise(1000, 1e-3, 2);
  for (std::size_t i = 0; i < spiky.size(); ++i) spiky[i] = tiny[i] + (i == 400 ? 10.0 : 0.0);
  const double good = composite_sqi(template_correlation_sqi(t, t),
                                    spectral_entropy_sqi(testing::tone(2500, 20.0, 500.0), 500.0), kurtosis_sqi(spiky));
  CHECK(good > 0.8);

  const auto n = testing::white_noise(2500, 1.0, 8);
  const double bad = composite_sqi(template_correlation_sqi(std::span(n).first(300), t),
                                   spectral_entropy_sqi(n, 500.0), kurtosis_sqi(n));
  CHECK(bad < 0.25);

  CHECK(composite_sqi(-1.0, 1.0, 0.0) == 0.0);
  CHECK(composite_sqi(-0.4, 0.5, 5.0) == doctest::Approx(composite_sqi(0.0, 0.5, 5.0)));
  CHECK(composite_sqi(1.0, 0.0, 20.0) == 1.0);
  double prev = -1.0;
  for (double c = -1.0; c <= 1.0; c += 0.1) {
    const double v = composite_sqi(c, 0.4, 3.0);
    CHECK(v >= prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("indices ignore positive amplitude scaling") {
  const auto t = structured(300);
  const auto x = testing::white_noise(1000, 1.0, 12);
  std::vector<double> beat(t);
  for (std::size_t i = 0; i < beat.size(); ++i) beat[i] += 0.3 * x[i];
  for (double s : {0.01, 3.0, 250.0}) {
    CHECK(template_correlation_sqi(scaled(beat, s), t) == doctest::Approx(template_correlation_sqi(beat, t)).epsilon(1e-12));
    CHECK(kurtosis_sqi(scaled(x, s)) == doctest::Approx(kurtosis_sqi(x)).epsilon(1e-12));
    CHECK(spectral_entropy_sqi(scaled(x, s), 500.0) == doctest::Approx(spectral_entropy_sqi(x, 500.0)).epsilon(1e-12));
  }
}

TEST_CASE("assess_windows on the synthetic recording") {
  SyntheticScgParams p;
  const auto filtered =
      filtering::zero_phase_filter(synthesize_scg(p), filtering::FilterSpec::bandpass(1.0, 40.0, 4));
  const auto fid = beats::detect_fiducials(filtered);
  const auto matrix = beats::segment_beats(filtered, fid, 0.1, 0.5);
  const auto tmpl = beats::make_template(matrix, 0.5).template_beat;
  const auto windows = assess_windows(filtered, tmpl, 0.1, 5.0);
  CHECK(windows.size() == 6);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    CHECK(w.report.window_index == i);
    CHECK(w.start_s == doctest::Approx(5.0 * static_cast<double>(i)));
    CHECK(w.report.template_correlation_sqi > 0.8);
    CHECK(w.report.spectral_entropy_sqi >= 0.0);
    CHECK(w.report.spectral_entropy_sqi <= 1.0);
    CHECK(w.report.composite >= 0.0);
    CHECK(w.report.composite <= 1.0);
  }

  const auto flat = assess_windows(Signal(std::vector<double>(5000, 0.0), 500.0), tmpl, 0.1, 5.0);
  REQUIRE(flat.size() == 2);
  CHECK(flat[0].n_beats == 0);
  CHECK(flat[0].report.template_correlation_sqi == 0.0);
  CHECK(flat[0].report.spectral_entropy_sqi == 1.0);
  CHECK(code_of([&] { assess_windows(filtered, tmpl, 0.1, 0.05); }) == ErrorCode::WindowTooShort);
}
