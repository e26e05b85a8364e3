#pragma once

// Deployment generation and the geometric vocabulary shared by all modules.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "anchorite/error.hpp"
#include "anchorite/rng.hpp"

namespace anchorite {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double squared_norm(Point2 p) { return dot(p, p); }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

inline bool in_unit_square(Point2 p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}

/// Sensors in the unit square; beacons are sensors whose positions are known.
struct Deployment {
  std::vector<Point2> sensors;
  std::vector<std::size_t> beacon_ids;

  [[nodiscard]] std::size_t size() const { return sensors.size(); }
  [[nodiscard]] bool is_beacon(std::size_t i) const {
    for (auto b : beacon_ids)
      if (b == i) return true;
    return false;
  }
  [[nodiscard]] std::vector<bool> beacon_mask() const {
    std::vector<bool> mask(sensors.size(), false);
    for (auto b : beacon_ids) mask[b] = true;
    return mask;
  }
};

/// Throws InvalidArgument unless the deployment satisfies its invariants.
inline void validate(const Deployment& d) {
  detail::require(!d.sensors.empty(), "deployment: needs at least one sensor");
  for (std::size_t i = 0; i < d.sensors.size(); ++i)
    detail::require(in_unit_square(d.sensors[i]), "deployment: sensor " + std::to_string(i) + " outside unit square");
  std::vector<bool> seen(d.sensors.size(), false);
  for (auto b : d.beacon_ids) {
    detail::require(b < d.sensors.size(), "deployment: beacon id out of range");
    detail::require(!seen[b], "deployment: duplicate beacon id");
    seen[b] = true;
  }
}

struct CornerBeacons {};
using BeaconSpec = std::variant<CornerBeacons, std::vector<Point2>>;

/// n sensors i.i.d. uniform on the unit square, in generation order.
inline Deployment deploy_sensors(std::size_t n, RngStream rng) {
  detail::require(n >= 1, "deploy_sensors: n must be positive");
  Deployment d;
  d.sensors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    d.sensors.push_back({x, y});
  }
  return d;
}

/// Appends beacons as extra sensors (they observe the field like any other).
inline Deployment place_beacons(Deployment d, const BeaconSpec& spec) {
  std::vector<Point2> extra;
  if (std::holds_alternative<CornerBeacons>(spec)) {
    extra = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  } else {
    extra = std::get<std::vector<Point2>>(spec);
    for (const auto& p : extra) detail::require(in_unit_square(p), "place_beacons: beacon outside unit square");
  }
  for (const auto& p : extra) {
    d.beacon_ids.push_back(d.sensors.size());
    d.sensors.push_back(p);
  }
  return d;
}

/// Neighbour count k_N = floor((ln n)^c), at least 1.
inline std::size_t compute_kn(std::size_t n, double c) {
  detail::require(n >= 2, "compute_kn: n must be at least 2");
  detail::require(c > 1.0, "compute_kn: exponent must exceed 1");
  const double k = std::floor(std::pow(std::log(static_cast<double>(n)), c));
  return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

/// Radius r(N) = sqrt((ln N)^c / (pi N)) of the reference geometric graph.
inline double geometric_radius(std::size_t n, double c) {
  const double nn = static_cast<double>(n);
  return std::sqrt(std::pow(std::log(nn), c) / (std::numbers::pi * nn));
}

}  // namespace anchorite
