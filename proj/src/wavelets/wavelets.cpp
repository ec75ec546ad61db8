#include "pulsatio/wavelets.hpp"

#include <array>
#include <bit>
#include <cmath>

#include "pulsatio/error.hpp"

namespace pulsatio::wavelets {

namespace {

#include "filter_tables.inc"

struct NamedFilter {
  std::string_view name;
  std::span<const double> taps;
};

constexpr std::array kFilters{
    NamedFilter{"db2", kDb2}, NamedFilter{"db3", kDb3}, NamedFilter{"db4", kDb4},
    NamedFilter{"db5", kDb5}, NamedFilter{"db6", kDb6}, NamedFilter{"db7", kDb7},
    NamedFilter{"db8", kDb8}, NamedFilter{"db9", kDb9}, NamedFilter{"db10", kDb10},
    NamedFilter{"fk18", kFk18},
};

std::size_t half_length(std::size_t n) { return (n + 1) / 2; }

// One analysis step on a periodized (even-length) copy of `x`.
void analysis_step(std::span<const double> x, std::span<const double> h, std::span<const double> g,
                   std::vector<double>& approx, std::vector<double>& detail) {
  std::vector<double> ext(x.begin(), x.end());
  if (ext.size() % 2 == 1) ext.push_back(ext.back());
  const std::size_t m = ext.size();
  const std::size_t half = m / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double v = ext[(2 * k + i) % m];
      a += h[i] * v;
      d += g[i] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// Inverse of analysis_step; returns `out_length` samples of the even extension.
std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail,
                                   std::span<const double> h, std::span<const double> g, std::size_t out_length) {
  const std::size_t half = approx.size();
  const std::size_t m = 2 * half;
  std::vector<double> out(m, 0.0);
  for (std::size_t k = 0; k < half; ++k)
    for (std::size_t i = 0; i < h.size(); ++i) out[(2 * k + i) % m] += h[i] * approx[k] + g[i] * detail[k];
  out.resize(out_length);
  return out;
}

}  // namespace

std::vector<double> WaveletFilter::wavelet() const {
  const auto n = scaling.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (i % 2 == 0 ? 1.0 : -1.0) * scaling[n - 1 - i];
  return g;
}

WaveletFilter wavelet_filter(std::string_view name) {
  for (const auto& f : kFilters)
    if (f.name == name) return {std::string(f.name), f.taps};
  throw Error(ErrorCode::InvalidParameter, "unknown wavelet '" + std::string(name) + "'");
}

std::vector<std::string> available_wavelets() {
  std::vector<std::string> names;
  for (const auto& f : kFilters) names.emplace_back(f.name);
  return names;
}

int max_dwt_levels(std::size_t length) {
  if (length < 2) return 0;
  return std::bit_width(length) - 1 - 2;
}

DwtPyramid dwt(std::span<const double> x, std::string_view wavelet, int levels) {
  const auto filter = wavelet_filter(wavelet);
  if (x.size() < filter.length())
    throw Error(ErrorCode::SignalTooShort, "signal shorter than the " + filter.name + " filter");
  if (levels < 1 || levels > max_dwt_levels(x.size()))
    throw Error(ErrorCode::TooManyLevels, std::to_string(levels) + " levels requested, at most " +
                                              std::to_string(max_dwt_levels(x.size())) + " allowed");
  const auto g = filter.wavelet();
  DwtPyramid pyramid;
  pyramid.wavelet_name = filter.name;
  pyramid.original_length = x.size();
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> approx, detail;
  for (int j = 0; j < levels; ++j) {
    analysis_step(current, filter.scaling, g, approx, detail);
    pyramid.details.push_back(detail);
    current.swap(approx);
  }
  pyramid.approximation = std::move(current);
  return pyramid;
}

DwtPyramid dwt(const Signal& signal, std::string_view wavelet, int levels) {
  return dwt(signal.view(), wavelet, levels);
}

std::vector<double> idwt(const DwtPyramid& pyramid) {
  const auto filter = wavelet_filter(pyramid.wavelet_name);
  const auto g = filter.wavelet();
  const int levels = pyramid.levels();
  if (levels < 1 || pyramid.original_length == 0)
    throw Error(ErrorCode::InconsistentPyramid, "pyramid has no levels");

  std::vector<std::size_t> lengths{pyramid.original_length};  // lengths[j] = approx length at level j
  for (int j = 0; j < levels; ++j) lengths.push_back(half_length(lengths.back()));
  for (int j = 0; j < levels; ++j)
    if (pyramid.details[static_cast<std::size_t>(j)].size() != lengths[static_cast<std::size_t>(j) + 1])
      throw Error(ErrorCode::InconsistentPyramid, "detail level " + std::to_string(j + 1) + " has wrong length");
  if (pyramid.approximation.size() != lengths.back())
    throw Error(ErrorCode::InconsistentPyramid, "approximation has wrong length");

  std::vector<double> current = pyramid.approximation;
  for (int j = levels - 1; j >= 0; --j) {
    const auto idx = static_cast<std::size_t>(j);
    current = synthesis_step(current, pyramid.details[idx], filter.scaling, g, lengths[idx]);
  }
  return current;
}

PacketTable modwpt(std::span<const double> x, std::string_view wavelet, int level_L) {
  const auto filter = wavelet_filter(wavelet);
  if (level_L < 1) throw Error(ErrorCode::InvalidParameter, "packet level must be positive");
  const std::size_t n = x.size();
  if (n < (std::size_t{1} << level_L))
    throw Error(ErrorCode::SignalTooShort, "signal shorter than 2^L samples");

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<double> h(filter.scaling.begin(), filter.scaling.end());
  std::vector<double> g = filter.wavelet();
  for (auto& v : h) v *= inv_sqrt2;
  for (auto& v : g) v *= inv_sqrt2;

  std::vector<std::vector<double>> nodes{std::vector<double>(x.begin(), x.end())};
  for (int level = 1; level <= level_L; ++level) {
    const std::size_t stride = std::size_t{1} << (level - 1);
    std::vector<std::vector<double>> next(nodes.size() * 2, std::vector<double>(n, 0.0));
    for (std::size_t node = 0; node < nodes.size(); ++node) {
      const auto& parent = nodes[node];
      auto& low = next[2 * node];
      auto& high = next[2 * node + 1];
      for (std::size_t t = 0; t < n; ++t) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) {
          // parent[(t - stride * k) mod n]
          const std::size_t offset = (stride * k) % n;
          const double v = parent[(t + n - offset) % n];
          lo += h[k] * v;
          hi += g[k] * v;
        }
        low[t] = lo;
        high[t] = hi;
      }
    }
    nodes.swap(next);
  }
  return {std::move(nodes), level_L, filter.name};
}

PacketTable modwpt(const Signal& signal, std::string_view wavelet, int level_L) {
  return modwpt(signal.view(), wavelet, level_L);
}

std::size_t node_for_band(std::size_t band, int /*level_L*/) { return band ^ (band >> 1); }

std::pair<double, double> node_frequency_band(std::size_t node, int level_L, double sample_rate_hz) {
  // inverse Gray code: natural order -> frequency order
  std::size_t band = node;
  for (std::size_t shift = node >> 1; shift != 0; shift >>= 1) band ^= shift;
  const double width = sample_rate_hz / 2.0 / static_cast<double>(std::size_t{1} << level_L);
  return {static_cast<double>(band) * width, static_cast<double>(band + 1) * width};
}

std::vector<std::vector<double>> node_energy_series(const PacketTable& table) {
  std::vector<std::vector<double>> out;
  out.reserve(table.nodes.size());
  for (const auto& node : table.nodes) {
    std::vector<double> e(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) e[i] = node[i] * node[i];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace pulsatio::wavelets
