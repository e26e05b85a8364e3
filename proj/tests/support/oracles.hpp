#pragma once

// Independent reference computations used only by the test suites. None of
// these call into the library routine they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace anchorite::oracle {

/// Area of two overlapping disks (centers (0,0) and (dist,0)) by integrating
/// the indicator of the intersection: exact over y (chord overlap), tanh-sinh
/// over x, split where the limiting chord switches disks.
inline double lens_area_by_integration(double dist, double radius) {
  if (dist >= 2 * radius) return 0.0;
  auto overlap = [&](double x) {
    const double h1 = radius * radius - x * x;
    const double h2 = radius * radius - (x - dist) * (x - dist);
    if (h1 <= 0 || h2 <= 0) return 0.0;
    return 2.0 * std::min(std::sqrt(h1), std::sqrt(h2));
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double lo = dist - radius, mid = dist / 2, hi = radius;
  return integrator.integrate(overlap, lo, mid, 1e-14) + integrator.integrate(overlap, mid, hi, 1e-14);
}

/// Strip process: cov = E_phi[exp(-2 lambda L |cos phi|)] / 4 (midpoint rule in phi).
inline double strip_covariance(double dist, double lambda) {
  const int n = 200000;
  double s = 0;
  for (int k = 0; k < n; ++k) {
    const double phi = (k + 0.5) * (std::numbers::pi / 2) / n;
    s += std::exp(-2 * lambda * dist * std::cos(phi));
  }
  return s / n / 4;
}

/// Half-plane with offset U[-sqrt2/2, sqrt2/2] and probes symmetric about the
/// offset origin: P(split) = dist E|cos| / sqrt2, so cov = 1/4 - dist / (pi sqrt2).
inline double half_plane_covariance(double dist) { return 0.25 - dist / (std::numbers::pi * std::numbers::sqrt2); }

/// Independent uniform walkers on a square of side `width`, probes far from its
/// edges: P(neither covered) = (1 - |D1 u D2| / area)^W.
inline double walker_snapshot_covariance(double dist, double r, std::size_t walkers, double width) {
  const double area = width * width;
  const double disk = std::numbers::pi * r * r;
  const double lens = lens_area_by_integration(dist, r);
  const double w = static_cast<double>(walkers);
  const double none_one = std::pow(1 - disk / area, w);
  const double none_both = std::pow(1 - (2 * disk - lens) / area, w);
  const double p = 1 - none_one;
  // P(both) = 1 - 2 P(none at one) + P(none at both)
  return (1 - 2 * none_one + none_both) - p * p;
}

struct GridOptimum {
  double x = 0, y = 0, cost = std::numeric_limits<double>::infinity();
};

/// Brute-force minimum of sum_b (|z - z_b| - d_b)^2 over a grid on [0,1]^2.
template <class Anchors, class Ranges>
GridOptimum grid_search(const Anchors& anchors, const Ranges& ranges, double step) {
  GridOptimum best;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int ix = 0; ix <= n; ++ix)
    for (int iy = 0; iy <= n; ++iy) {
      const double x = ix * step, y = iy * step;
      double c = 0;
      for (std::size_t b = 0; b < anchors.size(); ++b) {
        const double r = std::hypot(x - anchors[b].x, y - anchors[b].y) - ranges[b];
        c += r * r;
      }
      if (c < best.cost) best = {x, y, c};
    }
  return best;
}

}  // namespace anchorite::oracle
