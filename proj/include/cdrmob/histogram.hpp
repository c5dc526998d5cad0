#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cdrmob/errors.hpp"

namespace cdrmob {

struct Binning {
  enum class Kind { linear, logarithmic };
  Kind kind = Kind::linear;
  int bins = 0;  // <= 0: default (log: 40 per decade spanned; linear: 50)

  static Binning linear(int n = 0) { return Binning{Kind::linear, n}; }
  static Binning logarithmic(int n = 0) {
    return Binning{Kind::logarithmic, n};
  }
};

// Histogram density default: 40 bins per decade spanned.
inline int default_log_bins(double lo, double hi) {
  const double decades = std::log10(hi / lo);
  return std::max(1, static_cast<int>(std::ceil(40.0 * decades)));
}

// Normalized histogram: density integrates to 1 over the binned range.
struct EmpiricalDistribution {
  std::vector<double> edges;     // bins + 1, increasing
  std::vector<std::uint64_t> counts;
  std::vector<double> density;   // count / (n * width)
  std::uint64_t n = 0;

  std::size_t bins() const { return counts.size(); }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }

  double integral() const {
    double sum = 0;
    for (std::size_t i = 0; i < bins(); ++i) sum += density[i] * width(i);
    return sum;
  }
};

// Bins samples over [min, max]. Left-closed bins, the last bin also closed
// on the right. A zero-span sample set gets one bin widened by a relative
// epsilon so the density stays finite and normalized.
inline EmpiricalDistribution empirical_distribution(
    std::span<const double> samples, Binning binning) {
  if (samples.empty()) throw EmptyInput("no samples to bin");

  double lo = samples[0], hi = samples[0];
  for (double v : samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (binning.kind == Binning::Kind::logarithmic && lo <= 0)
    throw NonPositiveSampleForLogBins(
        "logarithmic binning requires positive samples");

  EmpiricalDistribution out;
  out.n = samples.size();

  if (lo == hi) {
    const double h = std::max(std::abs(lo) * 1e-9, 1e-300);
    out.edges = {lo - h, lo + h};
    out.counts = {samples.size()};
    out.density = {1.0 / (out.edges[1] - out.edges[0])};
    return out;
  }

  int bins = binning.bins;
  if (bins <= 0)
    bins = binning.kind == Binning::Kind::logarithmic ? default_log_bins(lo, hi)
                                                      : 50;

  out.edges.resize(static_cast<std::size_t>(bins) + 1);
  if (binning.kind == Binning::Kind::linear) {
    const double w = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) out.edges[i] = lo + w * i;
  } else {
    const double llo = std::log(lo), lhi = std::log(hi);
    const double w = (lhi - llo) / bins;
    for (int i = 0; i <= bins; ++i) out.edges[i] = std::exp(llo + w * i);
  }
  out.edges.front() = lo;
  out.edges.back() = hi;

  out.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : samples) {
    // Upper_bound handles uneven log-bin widths and edge rounding.
    auto it = std::upper_bound(out.edges.begin(), out.edges.end(), v);
    std::size_t idx = it == out.edges.begin()
                          ? 0
                          : static_cast<std::size_t>(it - out.edges.begin()) - 1;
    if (idx >= out.counts.size()) idx = out.counts.size() - 1;  // v == max
    ++out.counts[idx];
  }

  out.density.resize(out.counts.size());
  const double total = static_cast<double>(out.n);
  for (std::size_t i = 0; i < out.counts.size(); ++i)
    out.density[i] = static_cast<double>(out.counts[i]) / (total * out.width(i));
  return out;
}

}  // namespace cdrmob
