#pragma once

// JSON scenario configuration and run summary.
//
// Config layout (all keys optional unless noted):
//
//   {
//     "road":      {"length_km": 10, "lanes": 2, "speed_floor_kmh": 100},
//     "mode":      "pbv" | "cbv",
//     "dt_s": 0.001, "rng_seed": 1, "max_time_s": 600, "contact_tolerance_m": 1e-6,
//     "deviation": {"e_L": 1, "e_V": 1, "e_brake": 1, "e_tau": 1},
//     "regime":    "conservative" | "good-perception" | "unchecked",
//     "latency":   {"preset": "dsrc"} | {"constant_s": 0.01} | {"uniform_s": [0, 0.1]}, plus optional "label",
//     "request_timeout_s": 0.1,
//     "perception_available": true,
//     "perception_biases": {"speed": [...], "brake": [...], "length": [...], "response_time": [...]},
//     "conservative_defaults": <vehicle>,
//     "vehicle":   <vehicle>                 fleet-wide defaults for every lane entry
//     "lanes":     [[<spawn>, ...], ...]     required; front-most car first
//     "brake_triggers": [{"lane": 0, "vehicle": 0, "time_s": 0}]
//   }
//
//   <vehicle> = {"length_m", "a_max_brake", "a_max_acc", "tau0_s", "speed_mps" | "speed_kmh"}
//   <spawn>   = <vehicle> keys plus "gap_m": number | "gap": "safe", "gap_factor", "extra_reaction_delay_s"

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"
#include "sdc/capacity.hpp"
#include "sdc/cooperative.hpp"
#include "sdc/error.hpp"
#include "sdc/simulator.hpp"
#include "sdc/units.hpp"

namespace sdc::config {

using nlohmann::json;

namespace detail {

template <typename Keys>
inline void reject_keys_outside(const json& obj, const Keys& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidInput(where + ": unknown key '" + key + "'");
  }
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  reject_keys_outside(obj, allowed, where);
}

inline void reject_unknown_keys(const json& obj, const std::array<std::string_view, 6>& allowed,
                                const std::string& where) {
  reject_keys_outside(obj, allowed, where);
}

inline double number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw InvalidInput(where + "." + key + " must be a number");
  return v.get<double>();
}

inline std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw InvalidInput(where + " must be an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw InvalidInput(where + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline constexpr std::array<std::string_view, 6> kVehicleKeys = {"length_m", "a_max_brake", "a_max_acc",
                                                                 "tau0_s",   "speed_mps",   "speed_kmh"};

inline VehicleParams vehicle(const json& obj, VehicleParams base, const std::string& where) {
  base.length_m = number(obj, "length_m", base.length_m, where);
  base.a_max_brake = number(obj, "a_max_brake", base.a_max_brake, where);
  base.a_max_acc = number(obj, "a_max_acc", base.a_max_acc, where);
  base.tau0 = number(obj, "tau0_s", base.tau0, where);
  if (obj.contains("speed_mps") && obj.contains("speed_kmh")) {
    throw InvalidInput(where + ": give either speed_mps or speed_kmh, not both");
  }
  base.speed = number(obj, "speed_mps", base.speed, where);
  if (obj.contains("speed_kmh")) base.speed = units::kmh_to_mps(number(obj, "speed_kmh", 0.0, where));
  return base;
}

inline LatencyModel latency(const json& obj) {
  reject_unknown_keys(obj, {"preset", "constant_s", "uniform_s", "label"}, "latency");
  const int forms = obj.contains("preset") + obj.contains("constant_s") + obj.contains("uniform_s");
  if (forms != 1) throw InvalidInput("latency: give exactly one of preset, constant_s, uniform_s");
  LatencyModel m;
  if (obj.contains("preset")) {
    m = latency_preset(obj.at("preset").get<std::string>());
  } else if (obj.contains("constant_s")) {
    m = LatencyModel::constant(number(obj, "constant_s", 0.0, "latency"));
  } else {
    const auto range = number_list(obj.at("uniform_s"), "latency.uniform_s");
    if (range.size() != 2) throw InvalidInput("latency.uniform_s must hold [lo, hi]");
    m = LatencyModel::uniform(range[0], range[1]);
  }
  if (obj.contains("label")) m.technology = obj.at("label").get<std::string>();
  m.validate();
  return m;
}

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

inline sim::ScenarioConfig scenario_from_json(const json& root) {
  using detail::number;
  detail::reject_unknown_keys(root,
                              {"road", "mode", "dt_s", "rng_seed", "max_time_s", "contact_tolerance_m", "deviation",
                               "regime", "latency", "request_timeout_s", "perception_available", "perception_biases",
                               "conservative_defaults", "vehicle", "lanes", "brake_triggers"},
                              "config");
  sim::ScenarioConfig cfg;
  try {
    if (root.contains("road")) {
      const json& r = root.at("road");
      detail::reject_unknown_keys(r, {"length_km", "lanes", "speed_floor_kmh"}, "road");
      cfg.road.length_km = number(r, "length_km", cfg.road.length_km, "road");
      cfg.road.lanes = r.value("lanes", cfg.road.lanes);
      cfg.road.speed_floor_kmh = number(r, "speed_floor_kmh", cfg.road.speed_floor_kmh, "road");
    }
    if (root.contains("mode")) cfg.mode = parse_mode(root.at("mode").get<std::string>());
    cfg.dt = number(root, "dt_s", cfg.dt, "config");
    cfg.rng_seed = root.value("rng_seed", cfg.rng_seed);
    cfg.max_time_s = number(root, "max_time_s", cfg.max_time_s, "config");
    cfg.contact_tolerance_m = number(root, "contact_tolerance_m", cfg.contact_tolerance_m, "config");
    if (root.contains("deviation")) {
      const json& d = root.at("deviation");
      detail::reject_unknown_keys(d, {"e_L", "e_V", "e_brake", "e_tau"}, "deviation");
      cfg.dev.e_L = number(d, "e_L", 1.0, "deviation");
      cfg.dev.e_V_f = number(d, "e_V", 1.0, "deviation");
      cfg.dev.e_brake = number(d, "e_brake", 1.0, "deviation");
      cfg.dev.e_tau = number(d, "e_tau", 1.0, "deviation");
    }
    if (root.contains("regime")) cfg.regime = parse_regime(root.at("regime").get<std::string>());
    if (root.contains("latency")) cfg.latency = detail::latency(root.at("latency"));
    cfg.request_timeout_s = number(root, "request_timeout_s", cfg.request_timeout_s, "config");
    cfg.perception_available = root.value("perception_available", cfg.perception_available);
    if (root.contains("perception_biases")) {
      const json& b = root.at("perception_biases");
      detail::reject_unknown_keys(b, {"speed", "brake", "length", "response_time"}, "perception_biases");
      if (b.contains("speed")) cfg.perception_biases.speed = detail::number_list(b.at("speed"), "perception_biases.speed");
      if (b.contains("brake")) cfg.perception_biases.brake = detail::number_list(b.at("brake"), "perception_biases.brake");
      if (b.contains("length")) cfg.perception_biases.length = detail::number_list(b.at("length"), "perception_biases.length");
      if (b.contains("response_time")) {
        cfg.perception_biases.response_time = detail::number_list(b.at("response_time"), "perception_biases.response_time");
      }
    }
    if (root.contains("conservative_defaults")) {
      const json& d = root.at("conservative_defaults");
      detail::reject_unknown_keys(d, detail::kVehicleKeys, "conservative_defaults");
      cfg.conservative_defaults = detail::vehicle(d, cfg.conservative_defaults, "conservative_defaults");
    }
    VehicleParams fleet;
    if (root.contains("vehicle")) {
      detail::reject_unknown_keys(root.at("vehicle"), detail::kVehicleKeys, "vehicle");
      fleet = detail::vehicle(root.at("vehicle"), fleet, "vehicle");
    }
    if (!root.contains("lanes")) throw InvalidInput("config: 'lanes' is required");
    const json& lanes = root.at("lanes");
    if (!lanes.is_array()) throw InvalidInput("config.lanes must be an array of lanes");
    for (std::size_t l = 0; l < lanes.size(); ++l) {
      if (!lanes[l].is_array()) throw InvalidInput("config.lanes[" + std::to_string(l) + "] must be an array");
      std::vector<sim::VehicleSpawn> lane;
      for (std::size_t k = 0; k < lanes[l].size(); ++k) {
        const std::string where = "lanes[" + std::to_string(l) + "][" + std::to_string(k) + "]";
        const json& v = lanes[l][k];
        detail::reject_unknown_keys(v,
                                    {"length_m", "a_max_brake", "a_max_acc", "tau0_s", "speed_mps", "speed_kmh",
                                     "gap_m", "gap", "gap_factor", "extra_reaction_delay_s"},
                                    where);
        sim::VehicleSpawn s;
        s.params = detail::vehicle(v, fleet, where);
        if (v.contains("gap_m") && v.contains("gap")) throw InvalidInput(where + ": give either gap_m or gap");
        if (v.contains("gap_m")) s.gap_m = number(v, "gap_m", 0.0, where);
        if (v.contains("gap") && v.at("gap") != "safe") throw InvalidInput(where + ".gap must be \"safe\"");
        if (k > 0 && !v.contains("gap_m") && !v.contains("gap")) {
          throw InvalidInput(where + ": followers need gap_m or \"gap\": \"safe\"");
        }
        s.gap_factor = number(v, "gap_factor", 1.0, where);
        s.extra_reaction_delay_s = number(v, "extra_reaction_delay_s", 0.0, where);
        lane.push_back(std::move(s));
      }
      cfg.lanes.push_back(std::move(lane));
    }
    if (root.contains("brake_triggers")) {
      for (const json& t : root.at("brake_triggers")) {
        detail::reject_unknown_keys(t, {"lane", "vehicle", "time_s"}, "brake_triggers[]");
        cfg.triggers.push_back({t.value("lane", std::size_t{0}), t.value("vehicle", std::size_t{0}),
                                number(t, "time_s", 0.0, "brake_triggers[]")});
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

/// Parses config text; syntax errors carry the line and column of the failure.
inline sim::ScenarioConfig parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("invalid JSON: " + std::string(e.what()), line, column);
  }
  return scenario_from_json(root);
}

inline json summary_json(const sim::SimulationResult& result, const sim::ScenarioConfig& cfg) {
  const std::size_t safe = ltl::sdt(result.traces);
  json j;
  j["mode"] = std::string(to_string(cfg.mode));
  j["dt_s"] = result.dt;
  j["horizon_steps"] = result.horizon_steps();
  j["vehicle_length_m"] = result.vehicle_length;
  j["rng_seed"] = cfg.rng_seed;
  j["vehicles"] = result.traces.size();
  j["sdt"] = safe;
  j["road_safe"] = safe == result.traces.size();
  j["collisions"] = json::array();
  for (const auto& c : result.collisions) {
    j["collisions"].push_back({{"t_s", c.time},
                               {"lane", c.lane},
                               {"rear", c.rear_id},
                               {"front", c.front_id},
                               {"rear_responsible", c.rear_responsible}});
  }
  j["responsible"] = json::array();
  j["per_vehicle"] = json::array();
  for (const auto& v : result.vehicles) {
    if (v.responsible) j["responsible"].push_back(v.id);
    json pv = {{"id", v.id},
               {"lane", v.lane},
               {"info_source", v.info_source},
               {"effective_tau_s", v.effective_tau},
               {"eta_s", v.eta},
               {"responsible", v.responsible},
               {"blame", v.blame}};
    if (v.index > 0) {
      pv["initial_gap_m"] = v.initial_gap;
      pv["min_gap_m"] = v.min_gap;
      if (!std::isnan(v.required_gap)) pv["required_gap_m"] = v.required_gap;
      if (!std::isnan(v.gap_at_front_change)) pv["gap_at_front_change_m"] = v.gap_at_front_change;
    }
    j["per_vehicle"].push_back(std::move(pv));
  }
  return j;
}

}  // namespace sdc::config
