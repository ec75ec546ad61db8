#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pulsatio::cli {

enum class FigureKind { Line, WaterfallRidges, Scatter };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct FigureData {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// Standalone SVG. Line: one <polyline> per series on shared axes.
// WaterfallRidges: series in time order, each a <polyline> translated to its
// own baseline, the first series lowest. Scatter: one <circle> per point.
// Throws EmptyData (no series, or a series without points, or x/y of
// different length) and IoError.
void emit_figure(const FigureData& data, FigureKind kind, const std::filesystem::path& path);

}  // namespace pulsatio::cli
