#pragma once

// Closed-form covariance of the disk Boolean model, the linear fit used for
// the unbounded-cloud models, and a two-probe Monte Carlo covariance oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "anchorite/core.hpp"
#include "anchorite/error.hpp"
#include "anchorite/fields.hpp"
#include "anchorite/parallel.hpp"
#include "anchorite/rng.hpp"

namespace anchorite {

struct CovarianceCurve {
  std::vector<double> distances;
  std::vector<double> values;
  std::vector<double> stderrs;
};

inline void validate(const CovarianceCurve& c) {
  detail::require(c.distances.size() == c.values.size() && c.values.size() == c.stderrs.size(),
                  "covariance curve: column lengths differ");
  for (std::size_t k = 1; k < c.distances.size(); ++k)
    detail::require(c.distances[k] > c.distances[k - 1], "covariance curve: distances must increase strictly");
}

/// Area of the intersection of two disks of equal radius whose centers are
/// `dist` apart.
inline double lens_area(double dist, double radius) {
  detail::require(dist >= 0.0, "lens_area: distance must be non-negative");
  detail::require(radius > 0.0, "lens_area: radius must be positive");
  if (dist >= 2.0 * radius) return 0.0;
  if (dist == 0.0) return std::numbers::pi * radius * radius;
  return 2.0 * radius * radius * std::acos(dist / (2.0 * radius)) -
         0.5 * dist * std::sqrt(4.0 * radius * radius - dist * dist);
}

namespace detail {

/// E[f(R)] for R ~ U[lo, hi]; a point mass when lo == hi. `kink` is a point
/// where f loses smoothness, split out for the quadrature.
template <class F>
double radius_expectation(F f, double lo, double hi, double kink) {
  if (hi <= lo) return f(lo);
  constexpr double tol = 1e-10;
  double total = 0.0;
  double a = lo;
  if (kink > lo && kink < hi) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, kink, 15, tol);
    a = kink;
  }
  total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, hi, 15, tol);
  return total / (hi - lo);
}

}  // namespace detail

/// Probability that a point lies outside every disk: exp(-intensity * pi * E[R^2]).
inline double void_probability(const BooleanClouds& m) {
  const double a = m.radius_min;
  const double b = m.radius_max;
  const double mean_r2 = b > a ? (b * b * b - a * a * a) / (3.0 * (b - a)) : a * a;
  return std::exp(-m.intensity * std::numbers::pi * mean_r2);
}

/// Coverage probability of the Boolean model, 1 - void_probability.
inline double coverage_probability(const BooleanClouds& m) { return 1.0 - void_probability(m); }

/// Covariance of the coverage indicators at two points `dist` apart:
///   q^2 (exp(intensity * E[lens_area(dist, R)]) - 1),  q = void probability.
/// The two-point void probability is exp(-intensity E|B u (B + h)|) =
/// q^2 exp(intensity E psi(h)). Variants of this formula without the
/// intensity, or with exp(-psi), disagree with the Monte Carlo oracle.
inline double boolean_covariance(double dist, const BooleanClouds& m) {
  validate(m);
  detail::require(dist >= 0.0, "boolean_covariance: distance must be non-negative");
  if (dist >= 2.0 * m.radius_max) return 0.0;
  const double q = void_probability(m);
  const double mean_lens = detail::radius_expectation(
      [dist](double r) { return r > 0.0 ? lens_area(dist, r) : 0.0; }, m.radius_min, m.radius_max, dist / 2.0);
  return q * q * std::expm1(m.intensity * mean_lens);
}

struct LinearFit {
  double a = 0.0;  ///< intercept
  double b = 0.0;  ///< slope magnitude: value = a - b * distance
  double max_residual = 0.0;
};

/// Least-squares line value = a - b * dist through the points at distances
/// <= cutoff.
inline LinearFit bigclouds_covariance_fit(const CovarianceCurve& samples, double cutoff = 0.3) {
  validate(samples);
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < samples.distances.size(); ++k)
    if (samples.distances[k] <= cutoff) used.push_back(k);
  detail::require(used.size() >= 3, "bigclouds_covariance_fit: needs at least 3 distances within the cutoff");

  const double n = static_cast<double>(used.size());
  double mx = 0.0, my = 0.0;
  for (auto k : used) {
    mx += samples.distances[k];
    my += samples.values[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (auto k : used) {
    sxx += (samples.distances[k] - mx) * (samples.distances[k] - mx);
    sxy += (samples.distances[k] - mx) * (samples.values[k] - my);
  }
  LinearFit fit;
  const double slope = sxy / sxx;
  fit.b = -slope;
  fit.a = my - slope * mx;
  for (auto k : used)
    fit.max_residual = std::max(fit.max_residual, std::fabs(samples.values[k] - (fit.a - fit.b * samples.distances[k])));
  return fit;
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle

struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Joint hit counts of two probes over n samples.
struct ProbeCounts {
  std::uint64_t n = 0;
  std::uint64_t first = 0;
  std::uint64_t second = 0;
  std::uint64_t both = 0;

  ProbeCounts& operator+=(const ProbeCounts& o) {
    n += o.n;
    first += o.first;
    second += o.second;
    both += o.both;
    return *this;
  }

  void record(bool a, bool b) {
    ++n;
    first += a;
    second += b;
    both += a && b;
  }

  /// Sample covariance of the two indicators and the standard error of the
  /// mean of (X - mean X)(Y - mean Y).
  [[nodiscard]] CovarianceEstimate estimate() const {
    const double nn = static_cast<double>(n);
    const double mx = static_cast<double>(first) / nn;
    const double my = static_cast<double>(second) / nn;
    const double cov = static_cast<double>(both) / nn - mx * my;
    const double n11 = static_cast<double>(both);
    const double n10 = static_cast<double>(first - both);
    const double n01 = static_cast<double>(second - both);
    const double n00 = nn - n11 - n10 - n01;
    auto sq = [cov](double v) { return (v - cov) * (v - cov); };
    const double ss = n11 * sq((1 - mx) * (1 - my)) + n10 * sq((1 - mx) * -my) + n01 * sq(-mx * (1 - my)) +
                      n00 * sq(mx * my);
    return {cov, std::sqrt(ss / (nn - 1.0) / nn)};
  }
};

/// Steps between walker snapshots: three relaxation times of the slowest
/// mode of a reflected walk on the extended square.
inline std::size_t walker_snapshot_gap(const RandomWalkers& m) {
  if (m.step_sigma <= 0.0) return 1;
  const double width = 1.0 + 2.0 * m.margin;
  const double relax = width * width / (std::numbers::pi * std::numbers::pi * m.step_sigma * m.step_sigma);
  return static_cast<std::size_t>(std::ceil(3.0 * relax));
}

namespace detail {

inline ProbeCounts probe_chunk(const FieldModel& model, double dist, std::size_t samples, RngStream rng) {
  ProbeCounts counts;
  auto probes = [&](RngStream& r) {
    const Point2 e = random_direction(r);
    return std::pair{kSquareCenter - (dist / 2.0) * e, kSquareCenter + (dist / 2.0) * e};
  };
  if (const auto* w = std::get_if<RandomWalkers>(&model)) {
    const auto gap = walker_snapshot_gap(*w);
    auto state = initial_walkers(*w, rng);
    for (std::size_t s = 0; s < samples; ++s) {
      if (w->step_sigma <= 0.0) {
        state = initial_walkers(*w, rng);
      } else {
        for (std::size_t k = 0; k < gap; ++k) state = step_walkers(std::move(state), *w, rng);
      }
      const auto [p, q] = probes(rng);
      const WalkerCover cover{state, w->sensing_radius};
      counts.record(cover.covers(p), cover.covers(q));
    }
    return counts;
  }
  for (std::size_t s = 0; s < samples; ++s) {
    const auto [p, q] = probes(rng);
    if (const auto* b = std::get_if<BooleanClouds>(&model)) {
      const auto disks = sample_disks(*b, rng);
      counts.record(disks.covers(p), disks.covers(q));
    } else {
      const auto& big = std::get<BigClouds>(model);
      if (big.variant == BigCloudsVariant::HalfPlane) {
        const auto h = sample_half_plane(rng);
        counts.record(h.covers(p), h.covers(q));
      } else {
        const auto strips = sample_strips(big, std::numbers::sqrt2 / 2.0, rng);
        counts.record(strips.covers(p), strips.covers(q));
      }
    }
  }
  return counts;
}

}  // namespace detail

/// Empirical covariance of the field indicator at two probes `dist` apart,
/// centered on the square with a random orientation per sample. Cloud models
/// use independent realizations; walkers use widely spaced snapshots of
/// long trajectories. Work is split into fixed chunks with their own
/// sub-streams, so the result does not depend on the thread count.
inline CovarianceEstimate montecarlo_covariance(const FieldModel& model, double dist, std::size_t n_samples,
                                                const RngStream& rng, unsigned threads = 0) {
  validate(model);
  detail::require(n_samples >= 1000, "montecarlo_covariance: needs at least 1000 samples");
  detail::require(dist >= 0.0 && dist <= std::numbers::sqrt2, "montecarlo_covariance: distance out of range");
  const std::size_t chunk = std::holds_alternative<RandomWalkers>(model) ? 500 : 20000;
  const std::size_t chunks = (n_samples + chunk - 1) / chunk;
  std::vector<ProbeCounts> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t count = std::min(chunk, n_samples - c * chunk);
      partial[c] = detail::probe_chunk(model, dist, count, rng.substream("montecarlo_covariance", c));
    }
  });
  ProbeCounts total;
  for (const auto& p : partial) total += p;
  return total.estimate();
}

}  // namespace anchorite
