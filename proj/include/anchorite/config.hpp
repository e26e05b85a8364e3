#pragma once

// Scenario configuration and its JSON form.
//
//   {
//     "seed": 42, "n_sensors": 1000, "beacons": "corners",
//     "field_model": {"type": "boolean_clouds", "intensity": 30,
//                     "radius_min": 0, "radius_max": 0.2, "margin": 0.2},
//     "n_steps": 2000, "knn_exponent": 1.2, "lag_window": 0,
//     "output_dir": "out"
//   }
//
// Optional keys: "k_neighbors" (overrides the k_N rule), "interior_band".

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "anchorite/core.hpp"
#include "anchorite/error.hpp"
#include "anchorite/fields.hpp"

namespace anchorite {

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::size_t n_sensors = 1000;
  BeaconSpec beacons = CornerBeacons{};
  FieldModel field_model = BooleanClouds{};
  std::size_t n_steps = 2000;
  double knn_exponent = 1.2;
  std::size_t lag_window = 0;
  std::string output_dir = "out";
  std::optional<std::size_t> k_neighbors;
  double interior_band = 0.2;

  /// Total node count once beacons are appended.
  [[nodiscard]] std::size_t total_nodes() const {
    if (std::holds_alternative<CornerBeacons>(beacons)) return n_sensors + 4;
    return n_sensors + std::get<std::vector<Point2>>(beacons).size();
  }

  /// k used for the proximity graph over `n` nodes.
  [[nodiscard]] std::size_t neighbours(std::size_t n) const {
    return k_neighbors ? *k_neighbors : compute_kn(n, knn_exponent);
  }
};

inline void validate(const ScenarioConfig& c) {
  detail::require(c.n_sensors >= 1, "n_sensors must be positive");
  detail::require(c.n_steps >= 1, "n_steps must be positive");
  detail::require(std::isfinite(c.knn_exponent) && c.knn_exponent > 1.0, "knn_exponent must exceed 1");
  detail::require(std::isfinite(c.interior_band) && c.interior_band >= 0.0 && c.interior_band < 0.5,
                  "interior_band must lie in [0, 0.5)");
  if (c.k_neighbors) detail::require(*c.k_neighbors >= 1, "k_neighbors must be positive");
  if (const auto* pts = std::get_if<std::vector<Point2>>(&c.beacons))
    for (const auto& p : *pts) detail::require(in_unit_square(p), "beacons: coordinates must lie in the unit square");
  if (c.lag_window > 0)
    detail::require(c.n_steps > 2 * c.lag_window, "lag_window: n_steps must exceed twice the lag window");
  validate(c.field_model);
}

namespace detail {

using nlohmann::json;

template <class T>
T field(const json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(path + key + ": wrong type");
  }
}

inline double number(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw InvalidArgument(path + key + ": expected a number");
  return j.at(key).get<double>();
}

inline std::size_t count(const json& j, const char* key, const std::string& path, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) throw InvalidArgument(path + key + " must be non-negative");
  throw InvalidArgument(path + key + ": expected a non-negative integer");
}

inline FieldModel parse_field_model(const json& j) {
  if (!j.is_object()) throw InvalidArgument("field_model: expected an object");
  const auto type = field<std::string>(j, "type", "field_model.", "boolean_clouds");
  const std::string p = "field_model.";
  if (type == "boolean_clouds") {
    BooleanClouds m;
    m.intensity = number(j, "intensity", p, m.intensity);
    m.radius_min = number(j, "radius_min", p, m.radius_min);
    m.radius_max = number(j, "radius_max", p, m.radius_max);
    m.margin = number(j, "margin", p, m.radius_max);
    return m;
  }
  if (type == "big_clouds") {
    BigClouds m;
    const auto variant = field<std::string>(j, "variant", p, "half_plane");
    if (variant == "half_plane") {
      m.variant = BigCloudsVariant::HalfPlane;
    } else if (variant == "strip_process") {
      m.variant = BigCloudsVariant::StripProcess;
    } else {
      throw InvalidArgument("field_model.variant: expected half_plane or strip_process");
    }
    m.line_intensity = number(j, "line_intensity", p, m.line_intensity);
    return m;
  }
  if (type == "random_walkers") {
    RandomWalkers m;
    m.n_walkers = count(j, "n_walkers", p, m.n_walkers);
    m.sensing_radius = number(j, "sensing_radius", p, m.sensing_radius);
    m.step_sigma = number(j, "step_sigma", p, m.step_sigma);
    m.margin = number(j, "margin", p, m.sensing_radius);
    return m;
  }
  throw InvalidArgument("field_model.type: unknown model '" + type + "'");
}

inline json field_model_json(const FieldModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, BooleanClouds>) {
          return {{"type", "boolean_clouds"}, {"intensity", m.intensity}, {"radius_min", m.radius_min},
                  {"radius_max", m.radius_max}, {"margin", m.margin}};
        } else if constexpr (std::is_same_v<M, BigClouds>) {
          return {{"type", "big_clouds"},
                  {"variant", m.variant == BigCloudsVariant::HalfPlane ? "half_plane" : "strip_process"},
                  {"line_intensity", m.line_intensity}};
        } else {
          return {{"type", "random_walkers"}, {"n_walkers", m.n_walkers}, {"sensing_radius", m.sensing_radius},
                  {"step_sigma", m.step_sigma}, {"margin", m.margin}};
        }
      },
      model);
}

}  // namespace detail

/// Parses and validates; errors name the offending key.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  using detail::count;
  using detail::number;
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  ScenarioConfig c;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw InvalidArgument("seed: expected an unsigned 64-bit integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.n_sensors = count(j, "n_sensors", "", c.n_sensors);
  if (j.contains("beacons")) {
    const auto& b = j.at("beacons");
    if (b.is_string() && b.get<std::string>() == "corners") {
      c.beacons = CornerBeacons{};
    } else if (b.is_array()) {
      std::vector<Point2> pts;
      for (const auto& p : b) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          throw InvalidArgument("beacons: expected [[x, y], ...] or \"corners\"");
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      c.beacons = std::move(pts);
    } else {
      throw InvalidArgument("beacons: expected [[x, y], ...] or \"corners\"");
    }
  }
  if (j.contains("field_model")) c.field_model = detail::parse_field_model(j.at("field_model"));
  c.n_steps = count(j, "n_steps", "", c.n_steps);
  c.knn_exponent = number(j, "knn_exponent", "", c.knn_exponent);
  c.lag_window = count(j, "lag_window", "", c.lag_window);
  c.output_dir = detail::field<std::string>(j, "output_dir", "", c.output_dir);
  if (j.contains("k_neighbors")) c.k_neighbors = count(j, "k_neighbors", "", 0);
  c.interior_band = number(j, "interior_band", "", c.interior_band);
  validate(c);
  return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["n_sensors"] = c.n_sensors;
  if (std::holds_alternative<CornerBeacons>(c.beacons)) {
    j["beacons"] = "corners";
  } else {
    auto arr = nlohmann::json::array();
    for (const auto& p : std::get<std::vector<Point2>>(c.beacons)) arr.push_back({p.x, p.y});
    j["beacons"] = arr;
  }
  j["field_model"] = detail::field_model_json(c.field_model);
  j["n_steps"] = c.n_steps;
  j["knn_exponent"] = c.knn_exponent;
  j["lag_window"] = c.lag_window;
  j["output_dir"] = c.output_dir;
  if (c.k_neighbors) j["k_neighbors"] = *c.k_neighbors;
  j["interior_band"] = c.interior_band;
  return j;
}

}  // namespace anchorite
