#pragma once

// Longitudinal worst-case braking kinematics between a rear and a front
// vehicle: stopping times, the closed-form safe center-to-center distance,
// and the gap trajectory of the sudden-brake scenario.

#include <algorithm>
#include <cmath>
#include <string>

#include "sdc/error.hpp"

namespace sdc {

inline constexpr double kDefaultVehicleLength = 5.0;

namespace detail {

inline void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw InvalidParameter(std::string(name) + " must be finite");
  }
}

inline void require_non_negative(double value, const char* name) {
  require_finite(value, name);
  if (value < 0.0) {
    throw InvalidParameter(std::string(name) + " must be >= 0, got " + std::to_string(value));
  }
}

inline void require_positive(double value, const char* name) {
  require_finite(value, name);
  if (value <= 0.0) {
    throw InvalidParameter(std::string(name) + " must be > 0, got " + std::to_string(value));
  }
}

}  // namespace detail

/// Physical and response parameters of one vehicle, SI units throughout.
/// `a_max_brake` is the magnitude of the full-brake deceleration.
struct VehicleParams {
  double length_m = kDefaultVehicleLength;
  double a_max_brake = 9.0;
  double a_max_acc = 3.0;
  double speed = 0.0;
  double tau0 = 0.5;

  void validate() const {
    detail::require_positive(length_m, "length_m");
    detail::require_positive(a_max_brake, "a_max_brake");
    detail::require_non_negative(a_max_acc, "a_max_acc");
    detail::require_non_negative(speed, "speed");
    detail::require_non_negative(tau0, "tau0");
  }

  VehicleParams with_speed(double v) const {
    VehicleParams p = *this;
    p.speed = v;
    return p;
  }

  VehicleParams with_tau0(double t) const {
    VehicleParams p = *this;
    p.tau0 = t;
    return p;
  }

  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

/// Speed the rear car can reach if it keeps accelerating for the whole response time.
inline double max_speed_after_response(const VehicleParams& rear, double tau) {
  detail::require_non_negative(tau, "tau");
  detail::require_non_negative(rear.speed, "speed");
  detail::require_non_negative(rear.a_max_acc, "a_max_acc");
  return rear.speed + tau * rear.a_max_acc;
}

/// Time from detecting the front car's brake until the rear car halts.
inline double time_to_stop_rear(const VehicleParams& rear, double tau) {
  detail::require_positive(rear.a_max_brake, "a_max_brake");
  return tau + max_speed_after_response(rear, tau) / rear.a_max_brake;
}

inline double time_to_stop_front(const VehicleParams& front) {
  detail::require_positive(front.a_max_brake, "a_max_brake");
  detail::require_non_negative(front.speed, "speed");
  return front.speed / front.a_max_brake;
}

/// Minimum initial center-to-center distance such that the rear car, reacting
/// after `tau` with full braking, never closes below one vehicle length on a
/// front car that brakes fully at time zero.
///
/// When the front car needs at least as long to stop as the rear car, the
/// answer is exactly the vehicle length. Otherwise it is the vehicle length
/// plus the difference of the two stopping distances. Both cars must share
/// the same length. The result is exact when both cars share a_max_brake; if
/// the rear car brakes harder the gap can bottom out before either car stops,
/// which this expression does not capture.
inline double safe_longitudinal_distance(const VehicleParams& rear, const VehicleParams& front, double tau) {
  rear.validate();
  front.validate();
  detail::require_non_negative(tau, "tau");
  if (rear.length_m != front.length_m) {
    throw InvalidParameter("rear and front vehicle lengths differ; the fleet must be homogeneous");
  }
  const double length = rear.length_m;
  const double v_rear_max = max_speed_after_response(rear, tau);
  const double t_rear = time_to_stop_rear(rear, tau);
  const double t_front = time_to_stop_front(front);
  if (t_front >= t_rear) {
    return length;
  }
  const double response_travel = 0.5 * (rear.speed + v_rear_max) * tau;
  const double rear_brake_travel = 0.5 * (t_rear - tau) * v_rear_max;
  const double front_brake_travel = 0.5 * front.speed * t_front;
  return std::max(length, length + response_travel + rear_brake_travel - front_brake_travel);
}

/// Two-vehicle sudden-brake setup: the front car brakes at t = 0, the rear car
/// accelerates for `response_time` and then brakes fully.
struct BrakingScenario {
  VehicleParams rear;
  VehicleParams front;
  double initial_center_gap = 0.0;
  double response_time = 0.0;

  void validate() const {
    rear.validate();
    front.validate();
    detail::require_finite(initial_center_gap, "initial_center_gap");
    detail::require_non_negative(response_time, "response_time");
    if (initial_center_gap < rear.length_m) {
      throw InvalidParameter("initial_center_gap is shorter than the vehicle length (vehicles overlap)");
    }
  }
};

namespace detail {

/// Distance covered after `t` seconds of braking at `decel` from `v0`, speed floored at zero.
inline double braking_travel(double v0, double decel, double t) {
  const double t_stop = v0 / decel;
  const double s = std::min(t, t_stop);
  return v0 * s - 0.5 * decel * s * s;
}

}  // namespace detail

/// Center-to-center distance at time `t` under the worst-case profile.
inline double gap_at_time(const BrakingScenario& scenario, double t) {
  scenario.validate();
  detail::require_non_negative(t, "t");
  const VehicleParams& rear = scenario.rear;
  const VehicleParams& front = scenario.front;
  const double tau = scenario.response_time;

  const double front_travel = detail::braking_travel(front.speed, front.a_max_brake, t);

  double rear_travel = 0.0;
  if (t <= tau) {
    rear_travel = rear.speed * t + 0.5 * rear.a_max_acc * t * t;
  } else {
    const double v_peak = max_speed_after_response(rear, tau);
    rear_travel = rear.speed * tau + 0.5 * rear.a_max_acc * tau * tau +
                  detail::braking_travel(v_peak, rear.a_max_brake, t - tau);
  }
  return scenario.initial_center_gap + front_travel - rear_travel;
}

}  // namespace sdc
