#pragma once

// Position recovery from hop-distance estimates to beacons.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "anchorite/core.hpp"
#include "anchorite/error.hpp"
#include "anchorite/graph.hpp"
#include "anchorite/stats.hpp"

namespace anchorite {

struct Multilateration {
  Point2 position;
  double residual = 0.0;  ///< sqrt(sum_b (|z - z_b| - d_b)^2)
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

/// Solves [[xx xy][xy yy]] z = rhs; nullopt when numerically singular.
inline std::optional<Point2> solve2(const Sym2& m, Point2 rhs) {
  const double det = m.xx * m.yy - m.xy * m.xy;
  const double scale = std::max(m.xx * m.yy, m.xy * m.xy);
  if (!(std::fabs(det) > 1e-12 * scale) || scale == 0.0) return std::nullopt;
  return Point2{(m.yy * rhs.x - m.xy * rhs.y) / det, (m.xx * rhs.y - m.xy * rhs.x) / det};
}

inline double sum_squares(Point2 z, std::span<const Point2> anchors, std::span<const double> ranges) {
  double s = 0.0;
  for (std::size_t b = 0; b < anchors.size(); ++b) {
    const double r = distance(z, anchors[b]) - ranges[b];
    s += r * r;
  }
  return s;
}

inline bool collinear(std::span<const Point2> anchors) {
  double extent = 0.0;
  for (const auto& a : anchors) extent = std::max(extent, squared_norm(a - anchors[0]));
  for (std::size_t j = 1; j < anchors.size(); ++j)
    for (std::size_t k = j + 1; k < anchors.size(); ++k) {
      const Point2 u = anchors[j] - anchors[0];
      const Point2 v = anchors[k] - anchors[0];
      if (std::fabs(u.x * v.y - u.y * v.x) > 1e-9 * extent) return false;
    }
  return true;
}

}  // namespace detail

/// Least-squares position from ranges to >= 3 non-collinear anchors. The
/// start point solves the differenced squared-range equations linearly;
/// Gauss-Newton (step-halving on non-decrease) then minimizes
/// sum_b (|z - z_b| - d_b)^2. At most 100 iterations; converged when the
/// step norm drops below 1e-10.
inline Multilateration multilaterate(std::span<const Point2> anchors, std::span<const double> ranges) {
  detail::require(anchors.size() >= 3, "multilaterate: needs at least 3 anchors");
  detail::require(anchors.size() == ranges.size(), "multilaterate: one range per anchor");
  for (double r : ranges) detail::require(std::isfinite(r) && r >= 0.0, "multilaterate: ranges must be non-negative");
  if (detail::collinear(anchors)) throw DegenerateGeometry("multilaterate: anchors are collinear");

  // 2 (b_k - b_0) . z = d_0^2 - d_k^2 + |b_k|^2 - |b_0|^2
  detail::Sym2 normal;
  Point2 rhs;
  for (std::size_t k = 1; k < anchors.size(); ++k) {
    const Point2 row = 2.0 * (anchors[k] - anchors[0]);
    const double value = ranges[0] * ranges[0] - ranges[k] * ranges[k] + squared_norm(anchors[k]) - squared_norm(anchors[0]);
    normal.xx += row.x * row.x;
    normal.xy += row.x * row.y;
    normal.yy += row.y * row.y;
    rhs = rhs + value * row;
  }
  const auto start = detail::solve2(normal, rhs);
  if (!start) throw DegenerateGeometry("multilaterate: singular linear system");

  Multilateration out;
  Point2 z = *start;
  double cost = detail::sum_squares(z, anchors, ranges);
  constexpr std::size_t kMaxIterations = 100;
  constexpr double kStepTolerance = 1e-10;
  for (out.iterations = 0; out.iterations < kMaxIterations; ++out.iterations) {
    detail::Sym2 jtj;
    Point2 jtr;
    for (std::size_t b = 0; b < anchors.size(); ++b) {
      const Point2 diff = z - anchors[b];
      const double dist = norm(diff);
      if (dist == 0.0) continue;
      const Point2 u = (1.0 / dist) * diff;
      const double r = dist - ranges[b];
      jtj.xx += u.x * u.x;
      jtj.xy += u.x * u.y;
      jtj.yy += u.y * u.y;
      jtr = jtr + r * u;
    }
    auto step = detail::solve2(jtj, -1.0 * jtr);
    if (!step) step = -0.5 * jtr;  // gradient direction when J^T J is singular
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      const Point2 candidate = z + scale * *step;
      const double c = detail::sum_squares(candidate, anchors, ranges);
      if (c < cost) {
        z = candidate;
        cost = c;
        improved = true;
        break;
      }
    }
    const double moved = improved ? scale * norm(*step) : 0.0;
    if (!improved || moved < kStepTolerance) {
      out.converged = true;
      break;
    }
  }
  out.position = z;
  out.residual = std::sqrt(cost);
  return out;
}

/// Per-node outcome of the hop-distance localization.
struct NodeEstimate {
  std::size_t id = 0;
  Point2 truth;
  Point2 estimate;
  std::vector<std::optional<double>> beacon_distances;  ///< one per beacon, empty if unreachable
  double residual = 0.0;
  double error = 0.0;
  bool interior = false;
  bool beacon = false;
  bool localized = false;
};

/// True iff the point is farther than `band` from every side of the square.
inline bool is_interior(Point2 p, double band) {
  return std::min({p.x, 1.0 - p.x, p.y, 1.0 - p.y}) > band;
}

/// Scales hop counts to distances and multilaterates every non-beacon node
/// that reaches at least three non-collinear beacons. Beacons keep their
/// known positions. `hops.sources` must be the deployment's beacons.
inline std::vector<NodeEstimate> localize_all(const Deployment& d, const HopDistanceTable& hops, std::size_t n,
                                              std::size_t k, double interior_band = 0.2) {
  for (auto s : hops.sources) detail::require(d.is_beacon(s), "localize_all: hop source is not a beacon");
  detail::require(hops.hops.size() == hops.sources.size(), "localize_all: malformed hop table");
  const auto ranges = scale_hops(hops, n, k);
  std::vector<NodeEstimate> out(d.size());
  for (std::size_t v = 0; v < d.size(); ++v) {
    auto& node = out[v];
    node.id = v;
    node.truth = d.sensors[v];
    node.interior = is_interior(node.truth, interior_band);
    node.beacon = d.is_beacon(v);
    for (const auto& per_source : ranges) node.beacon_distances.push_back(per_source[v]);
    if (node.beacon) {
      node.estimate = node.truth;
      node.localized = true;
      continue;
    }
    std::vector<Point2> anchors;
    std::vector<double> dist;
    for (std::size_t s = 0; s < hops.sources.size(); ++s) {
      if (!ranges[s][v]) continue;
      anchors.push_back(d.sensors[hops.sources[s]]);
      dist.push_back(*ranges[s][v]);
    }
    if (anchors.size() < 3 || detail::collinear(anchors)) continue;
    const auto fit = multilaterate(anchors, dist);
    node.estimate = fit.position;
    node.residual = fit.residual;
    node.error = distance(fit.position, node.truth);
    node.localized = true;
  }
  return out;
}

struct ErrorSummary {
  std::size_t localized = 0;
  std::size_t unlocalized = 0;
  std::size_t interior_count = 0;
  std::size_t boundary_count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double interior_median = std::numeric_limits<double>::quiet_NaN();
  double boundary_median = std::numeric_limits<double>::quiet_NaN();
};

/// Error statistics over localized non-beacon nodes; NaN marks an empty group.
inline ErrorSummary error_report(std::span<const NodeEstimate> results) {
  ErrorSummary s;
  std::vector<double> all, interior, boundary;
  for (const auto& r : results) {
    if (r.beacon) continue;
    if (!r.localized) {
      ++s.unlocalized;
      continue;
    }
    all.push_back(r.error);
    (r.interior ? interior : boundary).push_back(r.error);
  }
  s.localized = all.size();
  s.interior_count = interior.size();
  s.boundary_count = boundary.size();
  if (!all.empty()) {
    s.mean = anchorite::mean(all);
    s.median = anchorite::median(all);
    s.p90 = quantile(all, 0.9);
  }
  if (!interior.empty()) s.interior_median = anchorite::median(interior);
  if (!boundary.empty()) s.boundary_median = anchorite::median(boundary);
  return s;
}

}  // namespace anchorite
