#pragma once

// Pipeline stages: each reads its inputs from the output directory, writes
// its CSVs there, and records paths, checksums and timings in manifest.json.
// `run_pipeline` is literally the four stages run in order.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "anchorite/analytic.hpp"
#include "anchorite/config.hpp"
#include "anchorite/core.hpp"
#include "anchorite/estimation.hpp"
#include "anchorite/fields.hpp"
#include "anchorite/graph.hpp"
#include "anchorite/io.hpp"
#include "anchorite/localization.hpp"
#include "anchorite/rng.hpp"

namespace anchorite {

namespace files {
inline constexpr const char* kSensors = "sensors.csv";
inline constexpr const char* kObservations = "observations.bin";
inline constexpr const char* kCumulants = "cumulants.csv";
inline constexpr const char* kGraph = "graph.csv";
inline constexpr const char* kHops = "hops.csv";
inline constexpr const char* kPositions = "positions.csv";
inline constexpr const char* kScatter = "scatter.csv";
inline constexpr const char* kCovarianceCurve = "covariance_curve.csv";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace files

/// Streams of the scenario, one per concern.
struct ScenarioStreams {
  RngStream deployment;
  RngStream field;
  RngStream oracle;

  explicit ScenarioStreams(std::uint64_t seed)
      : deployment(RngStream(seed).substream("deployment")),
        field(RngStream(seed).substream("field")),
        oracle(RngStream(seed).substream("oracle")) {}
};

namespace detail {

class StageRecord {
 public:
  StageRecord(const ScenarioConfig& cfg, fs::path dir, std::string stage)
      : cfg_(cfg), dir_(std::move(dir)), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}

  void output(const std::string& role, const std::string& file) { outputs_[role] = file; }

  void commit() {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const auto path = dir_ / files::kManifest;
    nlohmann::json manifest = nlohmann::json::object();
    if (fs::exists(path)) {
      std::ifstream in(path);
      try {
        manifest = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception&) {
        manifest = nlohmann::json::object();
      }
    }
    manifest["config"] = config_to_json(cfg_);
    manifest["seed"] = cfg_.seed;
    auto& stage = manifest["stages"][stage_];
    stage["outputs"] = outputs_;
    stage["seconds"] = seconds;
    for (const auto& [role, file] : outputs_) manifest["checksums"][file] = file_checksum(dir_ / file);
    std::ofstream out(path);
    out << manifest.dump(2) << '\n';
  }

 private:
  const ScenarioConfig& cfg_;
  fs::path dir_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
  std::map<std::string, std::string> outputs_;
};

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(dir.string() + ": cannot create directory");
}

inline void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw DataError(path.string() + ": missing (run the upstream stage first)");
}

}  // namespace detail

/// Deployment plus beacons for the scenario.
inline Deployment make_deployment(const ScenarioConfig& cfg) {
  const ScenarioStreams streams(cfg.seed);
  return place_beacons(deploy_sensors(cfg.n_sensors, streams.deployment), cfg.beacons);
}

inline ObservationMatrix make_observations(const ScenarioConfig& cfg, const Deployment& d, unsigned threads) {
  const ScenarioStreams streams(cfg.seed);
  return generate_observations(d, cfg.field_model, cfg.n_steps, streams.field, threads);
}

inline void run_generate(const ScenarioConfig& cfg, const fs::path& dir, unsigned threads) {
  validate(cfg);
  detail::ensure_dir(dir);
  detail::StageRecord rec(cfg, dir, "generate");
  const auto d = make_deployment(cfg);
  write_sensors_csv(dir / files::kSensors, d);
  write_observations_file(dir / files::kObservations, make_observations(cfg, d, threads));
  rec.output("sensors", files::kSensors);
  rec.output("observations", files::kObservations);
  rec.commit();
}

inline void run_estimate(const ScenarioConfig& cfg, const fs::path& dir, unsigned threads) {
  validate(cfg);
  detail::require_file(dir / files::kObservations);
  detail::StageRecord rec(cfg, dir, "estimate");
  const auto obs = read_observations_file(dir / files::kObservations);
  if (cfg.lag_window > 0 && obs.n_steps() <= 2 * cfg.lag_window)
    throw InvalidArgument("lag_window: observations too short for the lag window");
  write_cumulants_csv(dir / files::kCumulants, cumulant_matrix(obs, cfg.lag_window, threads));
  rec.output("cumulants", files::kCumulants);
  rec.commit();
}

inline void run_graph(const ScenarioConfig& cfg, const fs::path& dir, unsigned threads) {
  validate(cfg);
  detail::require_file(dir / files::kSensors);
  detail::require_file(dir / files::kCumulants);
  detail::StageRecord rec(cfg, dir, "graph");
  const auto d = read_sensors_csv(dir / files::kSensors);
  const std::size_t n = d.size();
  if (n < 2) throw InvalidArgument("k_neighbors: a graph needs at least 2 nodes");
  const std::size_t k = cfg.neighbours(n);
  if (k >= n) throw InvalidArgument("k_neighbors: k (" + std::to_string(k) + ") must be smaller than N (" + std::to_string(n) + ")");
  const auto table = read_cumulants_csv(dir / files::kCumulants, n);
  const bool lagged = cfg.lag_window > 0;
  if (lagged && table.c2_lagged.empty()) throw DataError("cumulants.csv: lag window set but no c2_lagged column values");
  const auto g = build_topk_graph(
      n, k, [&](std::size_t i, std::size_t j) { return table.score(i, j, lagged); }, threads);
  write_graph_csv(dir / files::kGraph, g);
  rec.output("graph", files::kGraph);
  rec.commit();
}

inline ErrorSummary run_localize(const ScenarioConfig& cfg, const fs::path& dir, unsigned threads,
                                 std::ostream* log = nullptr) {
  validate(cfg);
  detail::require_file(dir / files::kSensors);
  detail::require_file(dir / files::kGraph);
  detail::StageRecord rec(cfg, dir, "localize");
  const auto d = read_sensors_csv(dir / files::kSensors);
  if (d.beacon_ids.empty()) throw InvalidArgument("beacons: localization needs beacons");
  const std::size_t n = d.size();
  const std::size_t k = cfg.neighbours(n);
  const auto g = read_graph_csv(dir / files::kGraph, n);
  const auto hops = hop_distances(g, d.beacon_ids, threads);
  const auto results = localize_all(d, hops, n, k, cfg.interior_band);
  write_hops_csv(dir / files::kHops, hops, n, k);
  write_positions_csv(dir / files::kPositions, results);
  const auto summary = error_report(results);
  if (log && summary.unlocalized > 0)
    *log << "warning: " << summary.unlocalized << " node(s) reach fewer than 3 beacons and were not localized\n";
  rec.output("hops", files::kHops);
  rec.output("positions", files::kPositions);
  rec.commit();
  return summary;
}

inline ErrorSummary run_pipeline(const ScenarioConfig& cfg, const fs::path& dir, unsigned threads,
                                 std::ostream* log = nullptr) {
  run_generate(cfg, dir, threads);
  run_estimate(cfg, dir, threads);
  run_graph(cfg, dir, threads);
  return run_localize(cfg, dir, threads, log);
}

/// Pairs with distances for a scatter; all pairs, or every pair containing
/// `fixed_node`. Uses c2_lagged when the cumulants carry it and `lagged` is set.
inline std::vector<ScatterRow> scatter_rows(const Deployment& d, const PairTable& t, std::optional<std::size_t> fixed_node,
                                            bool lagged) {
  const std::size_t n = d.size();
  if (fixed_node) detail::require(*fixed_node < n, "node: id out of range");
  if (lagged) detail::require(!t.c2_lagged.empty(), "lagged: cumulants carry no c2_lagged values");
  std::vector<ScatterRow> rows;
  auto add = [&](std::size_t i, std::size_t j) {
    rows.push_back({i, j, distance(d.sensors[i], d.sensors[j]), t.score(i, j, lagged)});
  };
  if (fixed_node) {
    for (std::size_t j = 0; j < n; ++j)
      if (j != *fixed_node) add(std::min(j, *fixed_node), std::max(j, *fixed_node));
  } else {
    rows.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) add(i, j);
  }
  return rows;
}

inline std::size_t run_scatter(const fs::path& dir, std::optional<std::size_t> fixed_node, bool lagged) {
  detail::require_file(dir / files::kSensors);
  detail::require_file(dir / files::kCumulants);
  const auto d = read_sensors_csv(dir / files::kSensors);
  const auto table = read_cumulants_csv(dir / files::kCumulants, d.size());
  const auto rows = scatter_rows(d, table, fixed_node, lagged && !table.c2_lagged.empty());
  write_scatter_csv(dir / files::kScatter, rows);
  return rows.size();
}

struct OracleOptions {
  std::vector<double> distances;
  std::size_t n_samples = 100000;
  bool empirical = false;        ///< add binned empirical c2 from cumulants.csv
  double empirical_bin = 0.025;  ///< full bin width around each distance
};

/// Covariance curve for the configured field model: closed form (Boolean
/// clouds only), Monte Carlo, and optionally binned empirical cumulants.
inline std::vector<CurveRow> run_oracle(const ScenarioConfig& cfg, const OracleOptions& opt, const fs::path& dir,
                                        unsigned threads) {
  validate(cfg);
  detail::require(!opt.distances.empty(), "distances: at least one distance is required");
  detail::require(opt.n_samples >= 1000, "samples: at least 1000 Monte Carlo samples are required");
  for (double x : opt.distances)
    detail::require(std::isfinite(x) && x >= 0.0 && x <= std::numbers::sqrt2, "distances: values must lie in [0, sqrt(2)]");
  detail::ensure_dir(dir);
  const ScenarioStreams streams(cfg.seed);
  std::vector<CurveRow> rows;
  if (const auto* b = std::get_if<BooleanClouds>(&cfg.field_model))
    for (double x : opt.distances) rows.push_back({x, boolean_covariance(x, *b), 0.0, "analytic"});
  for (std::size_t k = 0; k < opt.distances.size(); ++k) {
    const auto est = montecarlo_covariance(cfg.field_model, opt.distances[k], opt.n_samples,
                                           streams.oracle.substream("distance", k), threads);
    rows.push_back({opt.distances[k], est.value, est.std_error, "montecarlo"});
  }
  if (opt.empirical) {
    detail::require_file(dir / files::kSensors);
    detail::require_file(dir / files::kCumulants);
    const auto d = read_sensors_csv(dir / files::kSensors);
    const auto t = read_cumulants_csv(dir / files::kCumulants, d.size());
    for (double x : opt.distances) {
      std::vector<double> vals;
      for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j)
          if (std::fabs(distance(d.sensors[i], d.sensors[j]) - x) <= opt.empirical_bin / 2) vals.push_back(t.c2[t.index(i, j)]);
      if (vals.size() < 2) continue;
      const double m = mean(vals);
      double ss = 0.0;
      for (double v : vals) ss += (v - m) * (v - m);
      rows.push_back({x, m, std::sqrt(ss / static_cast<double>(vals.size() - 1) / static_cast<double>(vals.size())), "empirical"});
    }
  }
  write_covariance_curve_csv(dir / files::kCovarianceCurve, rows);
  return rows;
}

}  // namespace anchorite
