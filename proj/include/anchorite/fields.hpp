#pragma once

// Background random fields and the binary records they induce at the sensors.
//
// Every model exposes a realization type with a `covers(Point2)` predicate so
// the same sampling code drives both sensor observations and the two-probe
// Monte Carlo covariance oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "anchorite/core.hpp"
#include "anchorite/observations.hpp"
#include "anchorite/parallel.hpp"
#include "anchorite/rng.hpp"

namespace anchorite {

/// Poisson union of disks with i.i.d. radii U[radius_min, radius_max]. Centers
/// fall on the unit square grown by `margin` on every side.
struct BooleanClouds {
  double intensity = 30.0;
  double radius_min = 0.0;
  double radius_max = 0.2;
  double margin = 0.2;
};

enum class BigCloudsVariant { HalfPlane, StripProcess };

/// Unbounded clouds: a single isotropic half-plane per step, or the stationary
/// strip process bounded by Poisson parallel lines.
struct BigClouds {
  BigCloudsVariant variant = BigCloudsVariant::HalfPlane;
  double line_intensity = 3.0;
};

/// Independent Gaussian random walkers reflected inside the unit square grown
/// by `margin`; a sensor fires when a walker is within `sensing_radius`.
struct RandomWalkers {
  std::size_t n_walkers = 10;
  double sensing_radius = 0.13;
  double step_sigma = 0.02;
  double margin = 0.13;
};

using FieldModel = std::variant<BooleanClouds, BigClouds, RandomWalkers>;

inline void validate(const BooleanClouds& m) {
  detail::require(std::isfinite(m.intensity) && m.intensity >= 0.0, "field_model.intensity must be non-negative");
  detail::require(m.radius_min >= 0.0, "field_model.radius_min must be non-negative");
  detail::require(std::isfinite(m.radius_max) && m.radius_max >= m.radius_min && m.radius_max > 0.0,
                  "field_model.radius_max must be positive and at least radius_min");
  detail::require(std::isfinite(m.margin) && m.margin >= m.radius_max, "field_model.margin must be at least radius_max");
}

inline void validate(const BigClouds& m) {
  if (m.variant == BigCloudsVariant::StripProcess)
    detail::require(std::isfinite(m.line_intensity) && m.line_intensity > 0.0,
                    "field_model.line_intensity must be positive");
}

inline void validate(const RandomWalkers& m) {
  detail::require(m.n_walkers >= 1, "field_model.n_walkers must be positive");
  detail::require(std::isfinite(m.sensing_radius) && m.sensing_radius > 0.0,
                  "field_model.sensing_radius must be positive");
  detail::require(std::isfinite(m.step_sigma) && m.step_sigma >= 0.0, "field_model.step_sigma must be non-negative");
  detail::require(std::isfinite(m.margin) && m.margin >= 0.0, "field_model.margin must be non-negative");
}

inline void validate(const FieldModel& m) {
  std::visit([](const auto& v) { validate(v); }, m);
}

/// One column of the observation matrix: the record of every sensor at one step.
using Column = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// Realizations

struct DiskSet {
  std::vector<Point2> centers;
  std::vector<double> radii;

  [[nodiscard]] bool covers(Point2 p) const {
    for (std::size_t k = 0; k < centers.size(); ++k)
      if (squared_norm(p - centers[k]) <= radii[k] * radii[k]) return true;
    return false;
  }
};

inline DiskSet sample_disks(const BooleanClouds& m, RngStream& rng) {
  const double lo = -m.margin;
  const double hi = 1.0 + m.margin;
  const double area = (hi - lo) * (hi - lo);
  const auto count = rng.poisson(m.intensity * area);
  DiskSet s;
  s.centers.reserve(count);
  s.radii.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const double x = rng.uniform(lo, hi);
    const double y = rng.uniform(lo, hi);
    s.centers.push_back({x, y});
    s.radii.push_back(rng.uniform(m.radius_min, m.radius_max));
  }
  return s;
}

inline constexpr Point2 kSquareCenter{0.5, 0.5};

/// Points z with <z - center, e> <= offset.
struct HalfPlane {
  Point2 direction;
  double offset = 0.0;

  [[nodiscard]] bool covers(Point2 p) const { return dot(p - kSquareCenter, direction) <= offset; }
};

/// Alternating in/out intervals along `direction`, switching at `breaks`.
/// Exact over projections in [-extent, extent] around the square's center.
struct StripSet {
  Point2 direction;
  double extent = 0.0;
  std::vector<double> breaks;
  bool starts_inside = false;

  [[nodiscard]] bool covers(Point2 p) const {
    const double s = dot(p - kSquareCenter, direction);
    const auto crossings = std::upper_bound(breaks.begin(), breaks.end(), s) - breaks.begin();
    return starts_inside != (crossings % 2 == 1);
  }
};

inline Point2 random_direction(RngStream& rng) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {std::cos(angle), std::sin(angle)};
}

inline HalfPlane sample_half_plane(RngStream& rng) {
  const double h = std::numbers::sqrt2 / 2.0;
  const Point2 e = random_direction(rng);
  return {e, rng.uniform(-h, h)};
}

/// `extent` must cover every projection queried; sensors need sqrt(2)/2.
inline StripSet sample_strips(const BigClouds& m, double extent, RngStream& rng) {
  StripSet s;
  s.direction = random_direction(rng);
  s.extent = extent;
  s.starts_inside = rng.coin();
  double pos = -extent;
  for (;;) {
    pos += rng.exponential(m.line_intensity);
    if (pos > extent) break;
    s.breaks.push_back(pos);
  }
  return s;
}

template <class Region>
Column observe(const Deployment& d, const Region& region) {
  Column col(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) col[i] = region.covers(d.sensors[i]) ? 1 : 0;
  return col;
}

// ---------------------------------------------------------------------------
// Per-step sampling. Each step draws from its own sub-stream so steps are
// independent of evaluation order.

inline Column sample_boolean_clouds(const Deployment& d, const BooleanClouds& m, std::uint64_t t_index,
                                    const RngStream& rng) {
  auto step = rng.substream("boolean_clouds", t_index);
  return observe(d, sample_disks(m, step));
}

inline Column sample_big_clouds(const Deployment& d, const BigClouds& m, std::uint64_t t_index, const RngStream& rng) {
  auto step = rng.substream("big_clouds", t_index);
  if (m.variant == BigCloudsVariant::HalfPlane) return observe(d, sample_half_plane(step));
  return observe(d, sample_strips(m, std::numbers::sqrt2 / 2.0, step));
}

// ---------------------------------------------------------------------------
// Random walkers

using WalkerState = std::vector<Point2>;

/// Folds x into [lo, hi] by mirror reflection at both ends.
inline double reflect_into(double x, double lo, double hi) {
  const double width = hi - lo;
  if (width <= 0.0) return lo;
  double y = std::fmod(x - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  if (y > width) y = 2.0 * width - y;
  return lo + y;
}

/// Walkers start from the uniform law, which is stationary for the reflected walk.
inline WalkerState initial_walkers(const RandomWalkers& m, RngStream& rng) {
  WalkerState state(m.n_walkers);
  for (auto& p : state) {
    p.x = rng.uniform(-m.margin, 1.0 + m.margin);
    p.y = rng.uniform(-m.margin, 1.0 + m.margin);
  }
  return state;
}

inline WalkerState step_walkers(WalkerState state, const RandomWalkers& m, RngStream& rng) {
  const double lo = -m.margin;
  const double hi = 1.0 + m.margin;
  for (auto& p : state) {
    const double dx = m.step_sigma * rng.normal();
    const double dy = m.step_sigma * rng.normal();
    p.x = reflect_into(p.x + dx, lo, hi);
    p.y = reflect_into(p.y + dy, lo, hi);
  }
  return state;
}

struct WalkerCover {
  std::span<const Point2> walkers;
  double radius;

  [[nodiscard]] bool covers(Point2 p) const {
    const double r2 = radius * radius;
    for (const auto& w : walkers)
      if (squared_norm(p - w) <= r2) return true;
    return false;
  }
};

inline Column observe_walkers(const Deployment& d, const WalkerState& state, double sensing_radius) {
  detail::require(sensing_radius > 0.0, "observe_walkers: sensing radius must be positive");
  return observe(d, WalkerCover{state, sensing_radius});
}

// ---------------------------------------------------------------------------

/// T steps of the field at every sensor. Cloud models use one independent
/// realization per step; walkers follow one trajectory, stepping before each
/// observation so consecutive columns are dependent.
inline ObservationMatrix generate_observations(const Deployment& d, const FieldModel& model, std::size_t n_steps,
                                               const RngStream& rng, unsigned threads = 0) {
  detail::require(n_steps >= 1, "generate_observations: T must be positive");
  validate(model);
  ObservationMatrix obs(d.size(), n_steps);

  if (const auto* walkers = std::get_if<RandomWalkers>(&model)) {
    auto stream = rng.substream("walkers");
    auto state = initial_walkers(*walkers, stream);
    for (std::size_t t = 0; t < n_steps; ++t) {
      state = step_walkers(std::move(state), *walkers, stream);
      const auto col = observe_walkers(d, state, walkers->sensing_radius);
      for (std::size_t i = 0; i < d.size(); ++i)
        if (col[i]) obs.set(i, t, true);
    }
    return obs;
  }

  // Blocks of 64 steps map onto one word per row, so blocks never share memory.
  const std::size_t blocks = obs.words_per_row();
  parallel_for(blocks, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t t_end = std::min(n_steps, (b + 1) * kWordBits);
      std::vector<Word> words(d.size(), 0);
      for (std::size_t t = b * kWordBits; t < t_end; ++t) {
        const Column col = std::visit(
            [&](const auto& m) -> Column {
              using M = std::decay_t<decltype(m)>;
              if constexpr (std::is_same_v<M, BooleanClouds>) {
                return sample_boolean_clouds(d, m, t, rng);
              } else if constexpr (std::is_same_v<M, BigClouds>) {
                return sample_big_clouds(d, m, t, rng);
              } else {
                return {};
              }
            },
            model);
        const Word bit = Word{1} << (t % kWordBits);
        for (std::size_t i = 0; i < d.size(); ++i)
          if (col[i]) words[i] |= bit;
      }
      for (std::size_t i = 0; i < d.size(); ++i) obs.row_words(i)[b] = words[i];
    }
  });
  return obs;
}

}  // namespace anchorite
