#pragma once

// Bit-packed binary records: one row of T bits per sensor.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "anchorite/error.hpp"

namespace anchorite {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

/// N rows of T bits. Bit t of row i is the record of sensor i at step t
/// (0-based), stored LSB-first in 64-bit words. Padding bits past T are zero.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  ObservationMatrix(std::size_t n_sensors, std::size_t n_steps)
      : n_sensors_(n_sensors), n_steps_(n_steps), words_per_row_((n_steps + kWordBits - 1) / kWordBits),
        bits_(n_sensors * words_per_row_, 0) {}

  [[nodiscard]] std::size_t n_sensors() const { return n_sensors_; }
  [[nodiscard]] std::size_t n_steps() const { return n_steps_; }
  [[nodiscard]] std::size_t words_per_row() const { return words_per_row_; }

  [[nodiscard]] bool get(std::size_t i, std::size_t t) const {
    return (bits_[i * words_per_row_ + t / kWordBits] >> (t % kWordBits)) & 1u;
  }
  void set(std::size_t i, std::size_t t, bool value) {
    Word& w = bits_[i * words_per_row_ + t / kWordBits];
    const Word mask = Word{1} << (t % kWordBits);
    w = value ? (w | mask) : (w & ~mask);
  }

  [[nodiscard]] std::span<const Word> row(std::size_t i) const {
    return {bits_.data() + i * words_per_row_, words_per_row_};
  }
  /// Mutable word access; callers must keep padding bits zero.
  [[nodiscard]] std::span<Word> row_words(std::size_t i) { return {bits_.data() + i * words_per_row_, words_per_row_}; }

  [[nodiscard]] std::size_t count_ones(std::size_t i) const {
    std::size_t c = 0;
    for (Word w : row(i)) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  friend bool operator==(const ObservationMatrix&, const ObservationMatrix&) = default;

 private:
  std::size_t n_sensors_ = 0;
  std::size_t n_steps_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<Word> bits_;
};

/// Builds a matrix from '0'/'1' strings, all of equal length. Handy for small cases.
inline ObservationMatrix observations_from_strings(const std::vector<std::string>& rows) {
  detail::require(!rows.empty(), "observations_from_strings: no rows");
  ObservationMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail::require(rows[i].size() == rows.front().size(), "observations_from_strings: ragged rows");
    for (std::size_t t = 0; t < rows[i].size(); ++t) {
      detail::require(rows[i][t] == '0' || rows[i][t] == '1', "observations_from_strings: expected 0/1");
      m.set(i, t, rows[i][t] == '1');
    }
  }
  return m;
}

namespace detail {

inline void put_u64_le(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  out.write(buf, 8);
}

inline std::uint64_t get_u64_le(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw DataError("observations.bin: truncated header");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t{buf[b]} << (8 * b);
  return v;
}

}  // namespace detail

/// observations.bin: N and T as little-endian u64, then N rows of ceil(T/8)
/// bytes, LSB-first within each byte.
inline void write_observations(std::ostream& out, const ObservationMatrix& m) {
  detail::put_u64_le(out, m.n_sensors());
  detail::put_u64_le(out, m.n_steps());
  const std::size_t bytes_per_row = (m.n_steps() + 7) / 8;
  std::vector<char> buf(bytes_per_row);
  for (std::size_t i = 0; i < m.n_sensors(); ++i) {
    const auto words = m.row(i);
    for (std::size_t k = 0; k < bytes_per_row; ++k)
      buf[k] = static_cast<char>((words[k / 8] >> (8 * (k % 8))) & 0xffu);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

inline ObservationMatrix read_observations(std::istream& in) {
  const auto n = detail::get_u64_le(in);
  const auto t = detail::get_u64_le(in);
  if (n == 0 || t == 0 || n > (1u << 24) || t > (std::uint64_t{1} << 34))
    throw DataError("observations.bin: implausible dimensions");
  ObservationMatrix m(n, t);
  const std::size_t bytes_per_row = (t + 7) / 8;
  std::vector<unsigned char> buf(bytes_per_row);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes_per_row)))
      throw DataError("observations.bin: truncated row " + std::to_string(i));
    auto words = m.row_words(i);
    for (std::size_t k = 0; k < bytes_per_row; ++k) words[k / 8] |= Word{buf[k]} << (8 * (k % 8));
    if (t % kWordBits != 0) words.back() &= (Word{1} << (t % kWordBits)) - 1;
  }
  return m;
}

}  // namespace anchorite
