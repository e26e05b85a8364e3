#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "anchorite/error.hpp"

namespace anchorite {

/// Linear-interpolated quantile (type 7), q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  detail::require(!values.empty(), "quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline double mean(std::span<const double> values) {
  detail::require(!values.empty(), "mean: empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

/// Ranks 1..n with ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t stop = start + 1;
    while (stop < order.size() && values[order[stop]] == values[order[start]]) ++stop;
    const double r = 0.5 * static_cast<double>(start + stop + 1);
    for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = r;
    start = stop;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "pearson: need two equal samples of size >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  detail::require(sxx > 0.0 && syy > 0.0, "pearson: constant sample");
  return sxy / std::sqrt(sxx * syy);
}

/// Spearman rank correlation (Pearson on average ranks).
inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

}  // namespace anchorite
