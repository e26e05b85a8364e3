#pragma once

// Empirical joint moments and pairwise cumulants of binary records.
//
// All statistics are assembled from exact integer co-occurrence counts and
// divided once at the end, so results never depend on summation order or on
// how pairs are split across threads.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anchorite/error.hpp"
#include "anchorite/observations.hpp"
#include "anchorite/parallel.hpp"

namespace anchorite {

using RowView = std::span<const Word>;

/// Number of steps at which every row records 1.
inline std::size_t joint_count(std::span<const RowView> rows) {
  detail::require(!rows.empty(), "empirical_correlation: empty sensor subset");
  const std::size_t words = rows.front().size();
  std::size_t count = 0;
  for (std::size_t w = 0; w < words; ++w) {
    Word acc = ~Word{0};
    for (const auto& r : rows) acc &= r[w];
    count += static_cast<std::size_t>(std::popcount(acc));
  }
  return count;
}

inline std::size_t joint_count(RowView a, RowView b) {
  std::size_t count = 0;
  for (std::size_t w = 0; w < a.size(); ++w) count += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
  return count;
}

/// Fraction of the T steps at which all rows in the subset record 1.
inline double empirical_correlation(std::span<const RowView> rows, std::size_t n_steps) {
  detail::require(n_steps >= 1, "empirical_correlation: T must be positive");
  for (const auto& r : rows)
    detail::require(r.size() == rows.front().size(), "empirical_correlation: rows differ in length");
  return static_cast<double>(joint_count(rows)) / static_cast<double>(n_steps);
}

/// sum_{t} a[t] * b[t + shift] over the steps where both indices are valid.
/// Relies on zero padding past T in both rows.
inline std::size_t shifted_joint_count(RowView a, RowView b, std::size_t shift) {
  const std::size_t word_shift = shift / kWordBits;
  const unsigned bit_shift = static_cast<unsigned>(shift % kWordBits);
  const std::size_t words = a.size();
  auto word_of = [&](std::size_t k) -> Word { return k < words ? b[k] : Word{0}; };
  std::size_t count = 0;
  for (std::size_t w = 0; w + word_shift < words; ++w) {
    Word shifted = word_of(w + word_shift) >> bit_shift;
    if (bit_shift != 0) shifted |= word_of(w + word_shift + 1) << (kWordBits - bit_shift);
    count += static_cast<std::size_t>(std::popcount(a[w] & shifted));
  }
  return count;
}

struct PairStatistics {
  std::size_t i = 0;
  std::size_t j = 0;
  double kappa = 0.0;
  double mean_i = 0.0;
  double mean_j = 0.0;
  double c2 = 0.0;
  std::optional<double> c2_lagged;
};

namespace detail {

/// (T * n_ij - n_i * n_j) / T^2, with the numerator formed exactly in integers.
inline double cumulant_from_counts(std::size_t n_ij, std::size_t n_i, std::size_t n_j, std::size_t n_steps) {
  const auto t = static_cast<std::int64_t>(n_steps);
  const auto num = t * static_cast<std::int64_t>(n_ij) - static_cast<std::int64_t>(n_i) * static_cast<std::int64_t>(n_j);
  return static_cast<double>(num) / (static_cast<double>(t) * static_cast<double>(t));
}

inline double lagged_from_rows(RowView a, RowView b, std::size_t n_a, std::size_t n_b, std::size_t n_steps,
                               std::size_t lag_window) {
  const double t = static_cast<double>(n_steps);
  const double mean_product = (static_cast<double>(n_a) / t) * (static_cast<double>(n_b) / t);
  // Lags are accumulated in the fixed order -window..window.
  double sum = 0.0;
  for (std::size_t k = lag_window; k >= 1; --k) {
    const double terms = static_cast<double>(n_steps - k);
    sum += static_cast<double>(shifted_joint_count(b, a, k)) / terms - mean_product;
  }
  sum += cumulant_from_counts(joint_count(a, b), n_a, n_b, n_steps);
  for (std::size_t k = 1; k <= lag_window; ++k) {
    const double terms = static_cast<double>(n_steps - k);
    sum += static_cast<double>(shifted_joint_count(a, b, k)) / terms - mean_product;
  }
  return sum;
}

}  // namespace detail

/// kappa, means and c2 = kappa - mean_i * mean_j for two records.
inline PairStatistics pair_cumulant(RowView a, RowView b, std::size_t n_steps) {
  detail::require(a.size() == b.size(), "pair_cumulant: rows differ in length");
  detail::require(n_steps >= 1, "pair_cumulant: T must be positive");
  const RowView both[] = {a, b};
  const auto n_ab = joint_count(both);
  const RowView only_a[] = {a};
  const RowView only_b[] = {b};
  const auto n_a = joint_count(only_a);
  const auto n_b = joint_count(only_b);
  const double t = static_cast<double>(n_steps);
  PairStatistics s;
  s.kappa = static_cast<double>(n_ab) / t;
  s.mean_i = static_cast<double>(n_a) / t;
  s.mean_j = static_cast<double>(n_b) / t;
  s.c2 = detail::cumulant_from_counts(n_ab, n_a, n_b, n_steps);
  return s;
}

/// Sum over lags s in [-window, window] of the lag-s covariance
/// (1/(T-|s|)) sum_t a(t) b(t+s) - mean_a mean_b.
inline double lagged_cumulant(RowView a, RowView b, std::size_t n_steps, std::size_t lag_window) {
  detail::require(a.size() == b.size(), "lagged_cumulant: rows differ in length");
  detail::require(n_steps > 2 * lag_window, "lagged_cumulant: T must exceed twice the lag window");
  const RowView only_a[] = {a};
  const RowView only_b[] = {b};
  return detail::lagged_from_rows(a, b, joint_count(only_a), joint_count(only_b), n_steps, lag_window);
}

/// Pairwise statistics for all unordered pairs, stored in row-major upper
/// triangle order (i < j).
class CumulantMatrix {
 public:
  CumulantMatrix() = default;
  CumulantMatrix(std::size_t n, std::size_t n_steps, std::size_t lag_window)
      : n_(n), n_steps_(n_steps), lag_window_(lag_window), ones_(n, 0), joint_(n * (n - 1) / 2, 0) {
    if (lag_window > 0) lagged_.assign(joint_.size(), 0.0);
  }

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t n_steps() const { return n_steps_; }
  [[nodiscard]] std::size_t lag_window() const { return lag_window_; }
  [[nodiscard]] bool has_lagged() const { return !lagged_.empty(); }
  [[nodiscard]] std::size_t pair_count() const { return joint_.size(); }

  /// Position of pair (i, j), i != j, in the upper-triangle layout.
  [[nodiscard]] std::size_t pair_index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  [[nodiscard]] double mean(std::size_t i) const {
    return static_cast<double>(ones_[i]) / static_cast<double>(n_steps_);
  }
  [[nodiscard]] double variance(std::size_t i) const { return detail::cumulant_from_counts(ones_[i], ones_[i], ones_[i], n_steps_); }
  [[nodiscard]] double kappa(std::size_t i, std::size_t j) const {
    return static_cast<double>(joint_[pair_index(i, j)]) / static_cast<double>(n_steps_);
  }
  [[nodiscard]] double c2(std::size_t i, std::size_t j) const {
    return detail::cumulant_from_counts(joint_[pair_index(i, j)], ones_[i], ones_[j], n_steps_);
  }
  [[nodiscard]] double c2_lagged(std::size_t i, std::size_t j) const {
    detail::require(has_lagged(), "cumulant matrix has no lagged values");
    return lagged_[pair_index(i, j)];
  }
  /// The statistic used for ranking partners.
  [[nodiscard]] double score(std::size_t i, std::size_t j, bool lagged) const {
    return lagged ? c2_lagged(i, j) : c2(i, j);
  }

  [[nodiscard]] PairStatistics pair(std::size_t i, std::size_t j) const {
    PairStatistics s;
    s.i = std::min(i, j);
    s.j = std::max(i, j);
    s.kappa = kappa(i, j);
    s.mean_i = mean(s.i);
    s.mean_j = mean(s.j);
    s.c2 = c2(i, j);
    if (has_lagged()) s.c2_lagged = c2_lagged(i, j);
    return s;
  }

  std::vector<std::uint32_t>& ones() { return ones_; }
  std::vector<std::uint32_t>& joint() { return joint_; }
  std::vector<double>& lagged() { return lagged_; }

  friend bool operator==(const CumulantMatrix&, const CumulantMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t n_steps_ = 0;
  std::size_t lag_window_ = 0;
  std::vector<std::uint32_t> ones_;
  std::vector<std::uint32_t> joint_;
  std::vector<double> lagged_;
};

/// All N(N-1)/2 pairwise statistics. Parallel over the first pair index; each
/// pair's slot is written by exactly one worker.
inline CumulantMatrix cumulant_matrix(const ObservationMatrix& obs, std::size_t lag_window, unsigned threads = 0) {
  const std::size_t n = obs.n_sensors();
  detail::require(n >= 1, "cumulant_matrix: no sensors");
  detail::require(obs.n_steps() < (std::size_t{1} << 32), "cumulant_matrix: T too large for 32-bit counts");
  if (lag_window > 0)
    detail::require(obs.n_steps() > 2 * lag_window, "cumulant_matrix: T must exceed twice the lag window");
  CumulantMatrix cm(n, obs.n_steps(), lag_window);
  for (std::size_t i = 0; i < n; ++i) cm.ones()[i] = static_cast<std::uint32_t>(obs.count_ones(i));

  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto a = obs.row(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto b = obs.row(j);
        const auto idx = cm.pair_index(i, j);
        cm.joint()[idx] = static_cast<std::uint32_t>(joint_count(a, b));
        if (lag_window > 0)
          cm.lagged()[idx] = detail::lagged_from_rows(a, b, cm.ones()[i], cm.ones()[j], obs.n_steps(), lag_window);
      }
    }
  });
  return cm;
}

}  // namespace anchorite
