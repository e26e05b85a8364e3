#pragma once

// CSV exports and the readers the later pipeline stages use to consume them.
// Reals are printed with 17 significant digits so they read back bit-exact.

#include <charconv>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "anchorite/analytic.hpp"
#include "anchorite/core.hpp"
#include "anchorite/error.hpp"
#include "anchorite/estimation.hpp"
#include "anchorite/graph.hpp"
#include "anchorite/localization.hpp"
#include "anchorite/observations.hpp"

namespace anchorite {

namespace fs = std::filesystem;

inline std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

// ---------------------------------------------------------------------------
// Minimal CSV reading (no quoting: every field here is numeric or empty)

class CsvReader {
 public:
  CsvReader(const fs::path& path, std::string_view expected_header) : path_(path), in_(path) {
    if (!in_) throw DataError(path.string() + ": cannot open");
    std::string header;
    if (!std::getline(in_, header)) throw DataError(path.string() + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected_header)
      throw DataError(path.string() + ": expected header '" + std::string(expected_header) + "'");
  }

  /// Next row split on commas; false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    if (!std::getline(in_, line_)) return false;
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    fields.clear();
    std::size_t start = 0;
    for (;;) {
      const auto comma = line_.find(',', start);
      fields.emplace_back(std::string_view(line_).substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(path_.string() + ":" + std::to_string(line_no_ + 1) + ": " + what);
  }

  template <class T>
  T parse(std::string_view s) const {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail("cannot parse '" + std::string(s) + "'");
    return v;
  }

  void expect_fields(const std::vector<std::string_view>& fields, std::size_t n) const {
    if (fields.size() != n) fail("expected " + std::to_string(n) + " fields");
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

inline std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  return out;
}

// ---------------------------------------------------------------------------
// sensors.csv: id,x,y,is_beacon

inline void write_sensors_csv(const fs::path& path, const Deployment& d) {
  auto out = open_output(path);
  out << "id,x,y,is_beacon\n";
  const auto mask = d.beacon_mask();
  for (std::size_t i = 0; i < d.size(); ++i)
    out << i << ',' << format_real(d.sensors[i].x) << ',' << format_real(d.sensors[i].y) << ','
        << (mask[i] ? 1 : 0) << '\n';
}

inline Deployment read_sensors_csv(const fs::path& path) {
  CsvReader csv(path, "id,x,y,is_beacon");
  Deployment d;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    csv.expect_fields(f, 4);
    const auto id = csv.parse<std::size_t>(f[0]);
    if (id != d.sensors.size()) csv.fail("ids must be consecutive from 0");
    d.sensors.push_back({csv.parse<double>(f[1]), csv.parse<double>(f[2])});
    const auto flag = csv.parse<int>(f[3]);
    if (flag != 0 && flag != 1) csv.fail("is_beacon must be 0 or 1");
    if (flag == 1) d.beacon_ids.push_back(id);
  }
  try {
    validate(d);
  } catch (const InvalidArgument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// observations.bin

inline void write_observations_file(const fs::path& path, const ObservationMatrix& m) {
  auto out = open_output(path);
  write_observations(out, m);
  if (!out) throw DataError(path.string() + ": write failed");
}

inline ObservationMatrix read_observations_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  return read_observations(in);
}

// ---------------------------------------------------------------------------
// cumulants.csv: i,j,kappa,c2,c2_lagged (c2_lagged empty when no lag window)

inline void write_cumulants_csv(const fs::path& path, const CumulantMatrix& cm) {
  auto out = open_output(path);
  out << "i,j,kappa,c2,c2_lagged\n";
  std::string line;
  for (std::size_t i = 0; i < cm.size(); ++i)
    for (std::size_t j = i + 1; j < cm.size(); ++j) {
      line.clear();
      line += std::to_string(i);
      line += ',';
      line += std::to_string(j);
      line += ',';
      line += format_real(cm.kappa(i, j));
      line += ',';
      line += format_real(cm.c2(i, j));
      line += ',';
      if (cm.has_lagged()) line += format_real(cm.c2_lagged(i, j));
      line += '\n';
      out << line;
    }
}

/// Pair scores as read back from cumulants.csv, upper-triangle order.
struct PairTable {
  std::size_t n = 0;
  std::vector<double> kappa;
  std::vector<double> c2;
  std::vector<double> c2_lagged;  ///< empty when the file carries none

  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
  }
  [[nodiscard]] double score(std::size_t i, std::size_t j, bool lagged) const {
    return lagged ? c2_lagged[index(i, j)] : c2[index(i, j)];
  }
};

inline PairTable read_cumulants_csv(const fs::path& path, std::size_t n) {
  CsvReader csv(path, "i,j,kappa,c2,c2_lagged");
  PairTable t;
  t.n = n;
  const std::size_t pairs = n * (n - 1) / 2;
  t.kappa.reserve(pairs);
  t.c2.reserve(pairs);
  std::vector<std::string_view> f;
  std::size_t ei = 0, ej = 1;
  bool lagged = false;
  while (csv.next(f)) {
    csv.expect_fields(f, 5);
    if (t.c2.size() == pairs) csv.fail("more pairs than sensors allow");
    if (csv.parse<std::size_t>(f[0]) != ei || csv.parse<std::size_t>(f[1]) != ej)
      csv.fail("pairs must be listed with i < j in lexicographic order");
    t.kappa.push_back(csv.parse<double>(f[2]));
    t.c2.push_back(csv.parse<double>(f[3]));
    if (t.c2.size() == 1) lagged = !f[4].empty();
    if (lagged != !f[4].empty()) csv.fail("c2_lagged must be present on every row or none");
    if (lagged) t.c2_lagged.push_back(csv.parse<double>(f[4]));
    if (++ej == n) {
      ++ei;
      ej = ei + 1;
    }
  }
  if (t.c2.size() != pairs)
    throw DataError(path.string() + ": expected " + std::to_string(pairs) + " pairs, found " + std::to_string(t.c2.size()));
  return t;
}

// ---------------------------------------------------------------------------
// graph.csv: i,j

inline void write_graph_csv(const fs::path& path, const ProximityGraph& g) {
  auto out = open_output(path);
  out << "i,j\n";
  for (const auto& e : g.edges) out << e.i << ',' << e.j << '\n';
}

inline ProximityGraph read_graph_csv(const fs::path& path, std::size_t n) {
  CsvReader csv(path, "i,j");
  ProximityGraph g;
  g.n = n;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    csv.expect_fields(f, 2);
    const Edge e{csv.parse<std::size_t>(f[0]), csv.parse<std::size_t>(f[1])};
    if (!(e.i < e.j) || e.j >= n) csv.fail("edge must satisfy i < j < node count");
    if (!g.edges.empty() && !(g.edges.back() < e)) csv.fail("edges must be sorted and unique");
    g.edges.push_back(e);
  }
  return g;
}

// ---------------------------------------------------------------------------
// hops.csv: beacon_id,node_id,hops,estimated_distance (empty when unreachable)

inline void write_hops_csv(const fs::path& path, const HopDistanceTable& h, std::size_t n, std::size_t k) {
  const auto est = scale_hops(h, n, k);
  auto out = open_output(path);
  out << "beacon_id,node_id,hops,estimated_distance\n";
  for (std::size_t s = 0; s < h.sources.size(); ++s)
    for (std::size_t v = 0; v < h.hops[s].size(); ++v) {
      out << h.sources[s] << ',' << v << ',';
      if (h.hops[s][v]) out << *h.hops[s][v] << ',' << format_real(*est[s][v]);
      else out << ',';
      out << '\n';
    }
}

// ---------------------------------------------------------------------------
// positions.csv: id,true_x,true_y,est_x,est_y,error,interior,unlocalized

inline void write_positions_csv(const fs::path& path, std::span<const NodeEstimate> results) {
  auto out = open_output(path);
  out << "id,true_x,true_y,est_x,est_y,error,interior,unlocalized\n";
  for (const auto& r : results) {
    if (r.beacon) continue;
    out << r.id << ',' << format_real(r.truth.x) << ',' << format_real(r.truth.y) << ',';
    if (r.localized)
      out << format_real(r.estimate.x) << ',' << format_real(r.estimate.y) << ',' << format_real(r.error);
    else
      out << ",,";
    out << ',' << (r.interior ? 1 : 0) << ',' << (r.localized ? 0 : 1) << '\n';
  }
}

// ---------------------------------------------------------------------------
// scatter.csv and covariance_curve.csv

struct ScatterRow {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = 0.0;
  double c2 = 0.0;
};

inline void write_scatter_csv(const fs::path& path, std::span<const ScatterRow> rows) {
  auto out = open_output(path);
  out << "i,j,distance,c2\n";
  for (const auto& r : rows)
    out << r.i << ',' << r.j << ',' << format_real(r.distance) << ',' << format_real(r.c2) << '\n';
}

struct CurveRow {
  double distance = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  std::string source;  ///< analytic | montecarlo | empirical
};

inline void write_covariance_curve_csv(const fs::path& path, std::span<const CurveRow> rows) {
  auto out = open_output(path);
  out << "distance,value,stderr,source\n";
  for (const auto& r : rows)
    out << format_real(r.distance) << ',' << format_real(r.value) << ',' << format_real(r.std_error) << ','
        << r.source << '\n';
}

/// FNV-1a 64 over the file's bytes, as 16 hex digits.
inline std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace anchorite
