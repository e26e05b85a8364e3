#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "anchorite/config.hpp"
#include "anchorite/core.hpp"
#include "anchorite/rng.hpp"

namespace anchorite {
namespace {

TEST(Deploy, ThousandSensorsInsideSquareCenteredNearHalf) {
  const auto d = deploy_sensors(1000, RngStream(7));
  ASSERT_EQ(d.size(), 1000u);
  EXPECT_TRUE(d.beacon_ids.empty());
  double mx = 0, my = 0;
  for (const auto& p : d.sensors) {
    EXPECT_TRUE(in_unit_square(p));
    mx += p.x;
    my += p.y;
  }
  mx /= 1000;
  my /= 1000;
  // Uniform coordinate: sd 1/sqrt(12), so the mean's sd is 1/sqrt(12000).
  const double sigma = 1.0 / std::sqrt(12000.0);
  EXPECT_LT(std::fabs(mx - 0.5), 3 * sigma);
  EXPECT_LT(std::fabs(my - 0.5), 3 * sigma);
}

TEST(Deploy, SingleSensor) {
  const auto d = deploy_sensors(1, RngStream(1));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_TRUE(in_unit_square(d.sensors[0]));
}

TEST(Deploy, SameSeedIsBitIdentical) {
  const auto a = deploy_sensors(1000, RngStream(99));
  const auto b = deploy_sensors(1000, RngStream(99));
  EXPECT_EQ(a.sensors, b.sensors);
  const auto c = deploy_sensors(1000, RngStream(100));
  EXPECT_NE(a.sensors, c.sensors);
}

TEST(Deploy, ZeroSensorsRejected) { EXPECT_THROW(deploy_sensors(0, RngStream(1)), InvalidArgument); }

TEST(Deploy, UniformityChiSquareOnTenByTenGrid) {
  // 99 degrees of freedom; 0.999 quantile of chi^2(99).
  constexpr double kCritical = 148.23035916510173;
  int passes = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = deploy_sensors(10000, RngStream(seed).substream("deployment"));
    std::array<int, 100> cells{};
    for (const auto& p : d.sensors) {
      const int cx = std::min(9, static_cast<int>(p.x * 10));
      const int cy = std::min(9, static_cast<int>(p.y * 10));
      ++cells[cy * 10 + cx];
    }
    double chi2 = 0;
    for (int c : cells) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
    passes += chi2 < kCritical;
  }
  EXPECT_GE(passes, 95);
}

TEST(Beacons, CornersAppendedAsFourSensors) {
  const auto d = place_beacons(deploy_sensors(10, RngStream(3)), CornerBeacons{});
  ASSERT_EQ(d.size(), 14u);
  ASSERT_EQ(d.beacon_ids.size(), 4u);
  const std::vector<Point2> corners = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (std::size_t b = 0; b < 4; ++b) {
    EXPECT_EQ(d.beacon_ids[b], 10 + b);
    EXPECT_EQ(d.sensors[d.beacon_ids[b]], corners[b]);
  }
  EXPECT_NO_THROW(validate(d));
}

TEST(Beacons, EmptyExplicitListLeavesDeploymentUnchanged) {
  const auto base = deploy_sensors(5, RngStream(3));
  const auto d = place_beacons(base, std::vector<Point2>{});
  EXPECT_EQ(d.sensors, base.sensors);
  EXPECT_TRUE(d.beacon_ids.empty());
}

TEST(Beacons, ExplicitCenter) {
  const auto d = place_beacons(deploy_sensors(5, RngStream(3)), std::vector<Point2>{{0.5, 0.5}});
  ASSERT_EQ(d.beacon_ids.size(), 1u);
  EXPECT_EQ(d.sensors[d.beacon_ids[0]], (Point2{0.5, 0.5}));
}

TEST(Beacons, OutsideSquareRejected) {
  EXPECT_THROW(place_beacons(deploy_sensors(5, RngStream(3)), std::vector<Point2>{{1.2, 0.5}}), InvalidArgument);
}

TEST(Kn, ThousandNodesGivesTen) { EXPECT_EQ(compute_kn(1000, 1.2), 10u); }

TEST(Kn, ClampsToOne) { EXPECT_EQ(compute_kn(3, 1.2), 1u); }

TEST(Kn, TenThousandNodes) {
  // (ln 10000)^1.2 = 14.359...
  EXPECT_EQ(compute_kn(10000, 1.2), 14u);
}

TEST(Kn, Preconditions) {
  EXPECT_THROW(compute_kn(1, 1.2), InvalidArgument);
  EXPECT_THROW(compute_kn(100, 1.0), InvalidArgument);
}

TEST(Kn, MonotoneInN) {
  for (double c : {1.05, 1.2, 2.0}) {
    std::size_t prev = 0;
    for (std::size_t n = 2; n < 20000; n += 7) {
      const auto k = compute_kn(n, c);
      EXPECT_GE(k, prev);
      prev = k;
    }
  }
}

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
  const RngStream root(5);
  auto a1 = root.substream("field", 3);
  auto a2 = root.substream("field", 3);
  auto b = root.substream("field", 4);
  auto c = root.substream("deployment");
  const auto x = a1.next_u64();
  EXPECT_EQ(x, a2.next_u64());
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(Rng, PoissonMeanAndVariance) {
  for (double mean : {0.5, 4.0, 58.8, 400.0}) {
    RngStream rng(11);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
      const double x = static_cast<double>(rng.poisson(mean));
      s += x;
      s2 += x * x;
    }
    const double m = s / n;
    const double v = s2 / n - m * m;
    EXPECT_NEAR(m, mean, 4 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR(v / mean, 1.0, 0.03) << mean;
  }
}

TEST(Rng, NormalMoments) {
  RngStream rng(2);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Config, DefaultsAndRoundTrip) {
  const auto cfg = config_from_json(nlohmann::json::parse(R"({"seed": 18446744073709551615, "n_sensors": 10})"));
  EXPECT_EQ(cfg.seed, 18446744073709551615ULL);
  EXPECT_EQ(cfg.total_nodes(), 14u);
  const auto again = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_to_json(again), config_to_json(cfg));
}

TEST(Config, ErrorsNameTheField) {
  auto message_of = [](const char* text) {
    try {
      config_from_json(nlohmann::json::parse(text));
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message_of(R"({"field_model": {"type": "boolean_clouds", "intensity": -30}})").find("intensity"),
            std::string::npos);
  EXPECT_NE(message_of(R"({"n_steps": 0})").find("n_steps"), std::string::npos);
  EXPECT_NE(message_of(R"({"knn_exponent": 1.0})").find("knn_exponent"), std::string::npos);
  EXPECT_NE(message_of(R"({"n_sensors": -4})").find("n_sensors"), std::string::npos);
  EXPECT_NE(message_of(R"({"beacons": [[2, 0]]})").find("beacons"), std::string::npos);
  EXPECT_NE(message_of(R"({"field_model": {"type": "tornado"}})").find("field_model.type"), std::string::npos);
  EXPECT_NE(message_of(R"({"n_steps": 4, "lag_window": 2})").find("lag_window"), std::string::npos);
}

}  // namespace
}  // namespace anchorite
