#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anchorite/localization.hpp"
#include "anchorite/rng.hpp"
#include "../support/oracles.hpp"

namespace anchorite {
namespace {

const std::vector<Point2> kCorners = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};

std::vector<double> exact_ranges(const std::vector<Point2>& anchors, Point2 z) {
  std::vector<double> r;
  for (const auto& a : anchors) r.push_back(distance(a, z));
  return r;
}

TEST(Multilaterate, CenterFromCorners) {
  const std::vector<double> r(4, std::sqrt(0.5));
  const auto fit = multilaterate(kCorners, r);
  EXPECT_NEAR(fit.position.x, 0.5, 1e-9);
  EXPECT_NEAR(fit.position.y, 0.5, 1e-9);
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(fit.residual, 1e-9);
}

TEST(Multilaterate, OffCenterPoint) {
  const auto fit = multilaterate(kCorners, exact_ranges(kCorners, {0.3, 0.7}));
  EXPECT_NEAR(fit.position.x, 0.3, 1e-9);
  EXPECT_NEAR(fit.position.y, 0.7, 1e-9);
}

TEST(Multilaterate, ZeroNoiseRecoversAnyPoint) {
  RngStream rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> anchors;
    const std::size_t count = 3 + rng.below(4);
    for (std::size_t b = 0; b < count; ++b) anchors.push_back({rng.uniform(), rng.uniform()});
    const Point2 z{rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)};
    try {
      const auto fit = multilaterate(anchors, exact_ranges(anchors, z));
      EXPECT_NEAR(fit.position.x, z.x, 1e-9);
      EXPECT_NEAR(fit.position.y, z.y, 1e-9);
    } catch (const DegenerateGeometry&) {
    }
  }
}

TEST(Multilaterate, PerturbedRangesMatchGridSearch) {
  RngStream rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const Point2 z{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    auto r = exact_ranges(kCorners, z);
    for (auto& x : r) x *= 1 + rng.uniform(-0.05, 0.05);
    const auto fit = multilaterate(kCorners, r);
    const auto grid = oracle::grid_search(kCorners, r, 1e-3);
    EXPECT_LE(fit.residual * fit.residual, grid.cost + 1e-12);
    EXPECT_LT(std::hypot(fit.position.x - grid.x, fit.position.y - grid.y), 2e-3);
  }
}

TEST(Multilaterate, RigidMotionEquivariance) {
  RngStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point2> anchors = {{0, 0}, {1, 0}, {0, 1}, {rng.uniform(), rng.uniform()}};
    std::vector<double> r;
    for (std::size_t b = 0; b < anchors.size(); ++b) r.push_back(rng.uniform(0.2, 1.2));
    const double phi = rng.uniform(0, 2 * std::numbers::pi);
    const Point2 shift{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    auto motion = [&](Point2 p) {
      return Point2{std::cos(phi) * p.x - std::sin(phi) * p.y + shift.x, std::sin(phi) * p.x + std::cos(phi) * p.y + shift.y};
    };
    std::vector<Point2> moved;
    for (const auto& a : anchors) moved.push_back(motion(a));
    const auto base = multilaterate(anchors, r);
    const auto after = multilaterate(moved, r);
    const Point2 expect = motion(base.position);
    EXPECT_NEAR(after.position.x, expect.x, 1e-8);
    EXPECT_NEAR(after.position.y, expect.y, 1e-8);
  }
}

TEST(Multilaterate, NeverWorseThanLinearStart) {
  // The start point solves the differenced equations; compute it here by
  // Cramer's rule and compare objective values.
  RngStream rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r;
    for (int b = 0; b < 4; ++b) r.push_back(rng.uniform(0.0, 1.4));
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (std::size_t k = 1; k < 4; ++k) {
      const double rx = 2 * (kCorners[k].x - kCorners[0].x), ry = 2 * (kCorners[k].y - kCorners[0].y);
      const double v = r[0] * r[0] - r[k] * r[k] + kCorners[k].x * kCorners[k].x + kCorners[k].y * kCorners[k].y;
      a11 += rx * rx;
      a12 += rx * ry;
      a22 += ry * ry;
      b1 += rx * v;
      b2 += ry * v;
    }
    const double det = a11 * a22 - a12 * a12;
    const Point2 start{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
    double start_cost = 0;
    for (std::size_t b = 0; b < 4; ++b) start_cost += std::pow(distance(start, kCorners[b]) - r[b], 2);
    const auto fit = multilaterate(kCorners, r);
    EXPECT_LE(fit.residual * fit.residual, start_cost * (1 + 1e-12));
  }
}

TEST(Multilaterate, CollinearAnchorsRejected) {
  const std::vector<Point2> line = {{0, 0}, {0.5, 0.5}, {1, 1}};
  EXPECT_THROW(multilaterate(line, std::vector<double>{0.1, 0.2, 0.3}), DegenerateGeometry);
}

TEST(Multilaterate, InputValidation) {
  EXPECT_THROW(multilaterate(std::vector<Point2>{{0, 0}, {1, 0}}, std::vector<double>{0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(multilaterate(kCorners, std::vector<double>{0.1, 0.2, 0.3}), InvalidArgument);
  EXPECT_THROW(multilaterate(kCorners, std::vector<double>{0.1, -0.2, 0.3, 0.4}), InvalidArgument);
}

Deployment tiny_deployment() {
  // node 0 sits near the (0,0) corner; beacons are nodes 1..4.
  Deployment d;
  d.sensors = {{0.1, 0.1}};
  return place_beacons(d, CornerBeacons{});
}

TEST(LocalizeAll, BeaconsKeepTruePositionsAndNodeLandsInSquare) {
  const auto d = tiny_deployment();
  // node 0 adjacent to beacons 1, 2, 3; beacon 4 unreachable.
  const ProximityGraph g{5, {{0, 1}, {0, 2}, {0, 3}}, 1, CumulantTopK{}};
  const auto hops = hop_distances(g, d.beacon_ids);
  const auto res = localize_all(d, hops, 100, 10);
  for (auto b : d.beacon_ids) {
    EXPECT_TRUE(res[b].beacon);
    EXPECT_EQ(res[b].estimate, d.sensors[b]);
    EXPECT_EQ(res[b].error, 0.0);
  }
  ASSERT_TRUE(res[0].localized);
  EXPECT_TRUE(in_unit_square(res[0].estimate));
  EXPECT_FALSE(res[0].beacon_distances[3].has_value());
  EXPECT_FALSE(res[0].interior);
  EXPECT_NEAR(res[0].error, distance(res[0].estimate, d.sensors[0]), 1e-15);
}

TEST(LocalizeAll, FewerThanThreeBeaconsIsUnlocalized) {
  const auto d = tiny_deployment();
  const ProximityGraph g{5, {{0, 1}, {0, 2}}, 1, CumulantTopK{}};
  const auto res = localize_all(d, hop_distances(g, d.beacon_ids), 100, 10);
  EXPECT_FALSE(res[0].localized);
  const auto s = error_report(res);
  EXPECT_EQ(s.unlocalized, 1u);
  EXPECT_EQ(s.localized, 0u);
}

TEST(LocalizeAll, SourcesMustBeBeacons) {
  const auto d = tiny_deployment();
  const ProximityGraph g{5, {{0, 1}}, 1, CumulantTopK{}};
  EXPECT_THROW(localize_all(d, hop_distances(g, {0}), 100, 10), InvalidArgument);
}

TEST(InteriorBand, Boundaries) {
  EXPECT_TRUE(is_interior({0.5, 0.5}, 0.2));
  EXPECT_FALSE(is_interior({0.2, 0.5}, 0.2));
  EXPECT_TRUE(is_interior({0.21, 0.79}, 0.2));
  EXPECT_FALSE(is_interior({0.5, 0.85}, 0.2));
}

NodeEstimate node(double error, bool interior) {
  NodeEstimate e;
  e.error = error;
  e.interior = interior;
  e.localized = true;
  return e;
}

TEST(ErrorReport, AllExact) {
  const std::vector<NodeEstimate> r = {node(0, true), node(0, false), node(0, true)};
  const auto s = error_report(r);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.median, 0.0);
  EXPECT_EQ(s.p90, 0.0);
  EXPECT_EQ(s.interior_median, 0.0);
  EXPECT_EQ(s.boundary_median, 0.0);
}

TEST(ErrorReport, SingleNode) {
  const std::vector<NodeEstimate> r = {node(0.1, true)};
  const auto s = error_report(r);
  EXPECT_EQ(s.mean, 0.1);
  EXPECT_EQ(s.median, 0.1);
  EXPECT_TRUE(std::isnan(s.boundary_median));
}

TEST(ErrorReport, SplitsAndSkipsBeacons) {
  std::vector<NodeEstimate> r = {node(0.1, true), node(0.3, true), node(0.5, false), node(0.9, false)};
  NodeEstimate beacon = node(7.0, false);
  beacon.beacon = true;
  r.push_back(beacon);
  NodeEstimate lost;
  r.push_back(lost);
  const auto s = error_report(r);
  EXPECT_EQ(s.localized, 4u);
  EXPECT_EQ(s.unlocalized, 1u);
  EXPECT_EQ(s.interior_count, 2u);
  EXPECT_DOUBLE_EQ(s.interior_median, 0.2);
  EXPECT_DOUBLE_EQ(s.boundary_median, 0.7);
  EXPECT_DOUBLE_EQ(s.mean, 0.45);
  EXPECT_DOUBLE_EQ(s.median, 0.4);
  // type-7 quantile of {0.1, 0.3, 0.5, 0.9} at 0.9: 0.5 + 0.7 * 0.4
  EXPECT_NEAR(s.p90, 0.78, 1e-15);
}

}  // namespace
}  // namespace anchorite
