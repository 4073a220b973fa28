#pragma once

// Cooperative (V2V) information flow: latency models, the request/response
// fallback chain for front-vehicle information, the additive delay model and
// the communication-corrected safe distance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>

#include "sdc/error.hpp"
#include "sdc/kinematics.hpp"
#include "sdc/perception.hpp"

namespace sdc {

/// V2V latency: either a fixed value or uniform on [lo, hi].
struct LatencyModel {
  enum class Kind { Constant, UniformRange };

  Kind kind = Kind::Constant;
  double lo = 0.0;
  double hi = 0.0;
  std::string technology;

  static LatencyModel constant(double seconds, std::string label = {}) {
    return {Kind::Constant, seconds, seconds, std::move(label)};
  }
  static LatencyModel uniform(double lo, double hi, std::string label = {}) {
    return {Kind::UniformRange, lo, hi, std::move(label)};
  }

  void validate() const {
    detail::require_non_negative(lo, "latency lower bound");
    detail::require_non_negative(hi, "latency upper bound");
    if (lo > hi) throw InvalidParameter("latency range has lo > hi");
  }
};

/// Built-in presets: dsrc = 10 ms, 5g = 1 ms, 4g = 50 ms.
inline LatencyModel latency_preset(std::string_view name) {
  if (name == "dsrc" || name == "DSRC") return LatencyModel::constant(0.010, "DSRC");
  if (name == "5g" || name == "5G") return LatencyModel::constant(0.001, "5G");
  if (name == "4g" || name == "4G") return LatencyModel::constant(0.050, "4G");
  throw InvalidParameter("unknown latency preset '" + std::string(name) + "' (expected dsrc, 5g or 4g)");
}

/// Draws one latency from `model` using the caller's engine. Uniform draws
/// use the top 53 bits of one engine output, so sequences do not depend on
/// the standard library's distribution implementation.
inline double sample_latency(const LatencyModel& model, std::mt19937_64& rng) {
  model.validate();
  if (model.kind == LatencyModel::Kind::Constant || model.lo == model.hi) return model.lo;
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return model.lo + unit * (model.hi - model.lo);
}

/// tau(eta) = tau0 + eta
inline double effective_response_time(double tau0, double eta) {
  detail::require_non_negative(tau0, "tau0");
  detail::require_non_negative(eta, "eta");
  return tau0 + eta;
}

// Outcome of one information request to the front car.
struct CommResponse {
  VehicleParams params;  // actual values reported by the front car
  double latency = 0.0;
};
struct CommTimeout {};
using CommOutcome = std::variant<CommResponse, CommTimeout>;

/// Onboard observations of the front car, one set per perceived metric.
struct PerceptionObservations {
  ObservationSet front_speed;
  ObservationSet max_brake;
  ObservationSet length;
  ObservationSet response_time;
};

enum class InfoSource { Response, PerceptionFallback, ConservativeDefaults };

inline std::string_view to_string(InfoSource s) {
  switch (s) {
    case InfoSource::Response: return "response";
    case InfoSource::PerceptionFallback: return "perception";
    case InfoSource::ConservativeDefaults: return "defaults";
  }
  return "?";
}

/// Rear-vehicle timing inputs needed to turn resolved information into a response time.
struct ResponseTiming {
  double tau0 = 0.4;
  double e_tau = 1.0;
};

struct FrontInfoResolution {
  InfoSource source = InfoSource::ConservativeDefaults;
  VehicleParams params;
  double effective_tau = 0.0;
};

/// Request, then perception, then predefined conservative defaults.
/// Only the response path pays communication latency; the other paths react
/// after the plain machine response time.
inline FrontInfoResolution resolve_front_info(const CommOutcome& outcome,
                                              const std::optional<PerceptionObservations>& perception,
                                              const VehicleParams& defaults, const ResponseTiming& timing) {
  defaults.validate();
  if (const auto* response = std::get_if<CommResponse>(&outcome)) {
    return {InfoSource::Response, response->params,
            effective_response_time(timing.e_tau * timing.tau0, response->latency)};
  }
  if (perception) {
    VehicleParams p = defaults;
    p.speed = std::max(0.0, conservative_observation(perception->front_speed, MetricKind::FrontSpeed));
    p.a_max_brake = conservative_observation(perception->max_brake, MetricKind::MaxBrake);
    p.length_m = conservative_observation(perception->length, MetricKind::Length);
    p.tau0 = conservative_observation(perception->response_time, MetricKind::ResponseTime);
    p.validate();
    return {InfoSource::PerceptionFallback, p, timing.tau0};
  }
  return {InfoSource::ConservativeDefaults, defaults, timing.tau0};
}

/// Safe distance once communication has replaced the conservative estimates
/// of the front car by their actual values.
///
/// `rear` carries the cooperative machine response time in `tau0`;
/// `front_conservative` holds the perception-side estimates that `dev` scales.
/// The rear car's own brake is known exactly and is not scaled.
inline double corrected_safe_distance(const VehicleParams& rear, const VehicleParams& front_conservative,
                                      const DeviationSet& dev, double eta,
                                      DeviationRegime regime = DeviationRegime::Conservative) {
  rear.validate();
  front_conservative.validate();
  dev.validate(regime);
  detail::require_non_negative(eta, "eta");

  const double length = front_conservative.length_m;
  const double tau_c = dev.e_tau * rear.tau0 + eta;
  const double v_front_c = dev.e_V_f * front_conservative.speed;
  const double brake_front_c = dev.e_brake * front_conservative.a_max_brake;

  const double v_rear_max_c = rear.speed + tau_c * rear.a_max_acc;
  const double t_rear_c = tau_c + v_rear_max_c / rear.a_max_brake;
  const double t_front_c = v_front_c / brake_front_c;

  if (t_front_c >= t_rear_c) {
    return 0.5 * (length + length * dev.e_L);
  }
  return 0.5 * ((length + length * dev.e_L) - v_front_c * t_front_c + (rear.speed + v_rear_max_c) * tau_c +
                v_rear_max_c * v_rear_max_c / rear.a_max_brake);
}

}  // namespace sdc
