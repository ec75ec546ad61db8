#include "pulsatio/cli/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pulsatio/error.hpp"

namespace pulsatio::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

constexpr const char* kPalette[] = {"#1f4e79", "#c0504d", "#4f8a3c", "#8064a2", "#d98c1a"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 0.0;

  void widen() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double map(double v) const { return (v - lo) / (hi - lo); }
};

Range finite_range(const std::vector<Series>& series, bool use_x) {
  Range r{INFINITY, -INFINITY};
  for (const auto& s : series)
    for (double v : use_x ? s.x : s.y)
      if (std::isfinite(v)) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
      }
  if (!std::isfinite(r.lo)) r = {0.0, 1.0};
  r.widen();
  return r;
}

void frame(std::ostringstream& svg, const FigureData& data, const Range& xr, const Range* yr) {
  svg << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(kPlotW) << "\" height=\""
      << fmt(kPlotH) << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(data.title) << "</text>\n";
  svg << "<text x=\"" << fmt(kLeft + kPlotW / 2) << "\" y=\"" << fmt(kHeight - 12)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(data.x_label) << "</text>\n";
  svg << "<text transform=\"translate(16," << fmt(kTop + kPlotH / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(data.y_label) << "</text>\n";
  const double ybase = kTop + kPlotH + 16;
  svg << "<text x=\"" << fmt(kLeft) << "\" y=\"" << fmt(ybase) << "\" text-anchor=\"middle\" font-size=\"10\">"
      << tick(xr.lo) << "</text>\n";
  svg << "<text x=\"" << fmt(kLeft + kPlotW) << "\" y=\"" << fmt(ybase)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << tick(xr.hi) << "</text>\n";
  if (yr) {
    svg << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(kTop + kPlotH)
        << "\" text-anchor=\"end\" font-size=\"10\">" << tick(yr->lo) << "</text>\n";
    svg << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(kTop + 10) << "\" text-anchor=\"end\" font-size=\"10\">"
        << tick(yr->hi) << "</text>\n";
  }
}

void legend(std::ostringstream& svg, const std::vector<Series>& series) {
  if (series.size() < 2) return;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 14 + 14 * static_cast<double>(i);
    svg << "<text x=\"" << fmt(kLeft + kPlotW - 8) << "\" y=\"" << fmt(y) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
        << kPalette[i % std::size(kPalette)] << "\">" << escape(series[i].label) << "</text>\n";
  }
}

std::string points(const Series& s, const Range& xr, double y_origin, double y_scale, double y_offset) {
  std::string out;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
    if (!out.empty()) out += ' ';
    out += fmt(kLeft + xr.map(s.x[i]) * kPlotW);
    out += ',';
    out += fmt(y_origin - (s.y[i] - y_offset) * y_scale);
  }
  return out;
}

}  // namespace

void emit_figure(const FigureData& data, FigureKind kind, const std::filesystem::path& path) {
  if (data.series.empty()) throw Error(ErrorCode::EmptyData, "figure has no series");
  for (const auto& s : data.series)
    if (s.x.empty() || s.x.size() != s.y.size())
      throw Error(ErrorCode::EmptyData, "series '" + s.label + "' is empty or has mismatched x/y");

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
      << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const Range xr = finite_range(data.series, true);
  switch (kind) {
    case FigureKind::Line: {
      const Range yr = finite_range(data.series, false);
      frame(svg, data, xr, &yr);
      for (std::size_t i = 0; i < data.series.size(); ++i)
        svg << "<polyline fill=\"none\" stroke=\"" << kPalette[i % std::size(kPalette)]
            << "\" stroke-width=\"1.5\" points=\"" << points(data.series[i], xr, kTop + kPlotH, kPlotH / (yr.hi - yr.lo), yr.lo)
            << "\"/>\n";
      legend(svg, data.series);
      break;
    }
    case FigureKind::WaterfallRidges: {
      frame(svg, data, xr, nullptr);
      const auto n = static_cast<double>(data.series.size());
      double amp = 0.0;
      for (const auto& s : data.series)
        for (double v : s.y)
          if (std::isfinite(v)) amp = std::max(amp, std::abs(v));
      if (!(amp > 0.0)) amp = 1.0;
      const double spacing = kPlotH / (n + 1.0);
      const double scale = 1.5 * spacing / amp;
      for (std::size_t i = 0; i < data.series.size(); ++i) {
        const double baseline = kTop + kPlotH - spacing * (static_cast<double>(i) + 1.0);
        svg << "<polyline transform=\"translate(0," << fmt(baseline)
            << ")\" fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1\" points=\""
            << points(data.series[i], xr, 0.0, scale, 0.0) << "\"/>\n";
      }
      break;
    }
    case FigureKind::Scatter: {
      const Range yr = finite_range(data.series, false);
      frame(svg, data, xr, &yr);
      for (std::size_t i = 0; i < data.series.size(); ++i) {
        const auto& s = data.series[i];
        for (std::size_t k = 0; k < s.x.size(); ++k) {
          if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
          svg << "<circle cx=\"" << fmt(kLeft + xr.map(s.x[k]) * kPlotW) << "\" cy=\""
              << fmt(kTop + kPlotH - yr.map(s.y[k]) * kPlotH) << "\" r=\"3\" fill=\""
              << kPalette[i % std::size(kPalette)] << "\"/>\n";
        }
      }
      legend(svg, data.series);
      break;
    }
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << svg.str();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace pulsatio::cli
