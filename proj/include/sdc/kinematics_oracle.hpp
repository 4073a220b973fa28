#pragma once

// Numerical cross-check for safe_longitudinal_distance: time-stepped
// simulation of the sudden-brake scenario plus bisection on the initial gap.
// Shares no code with the closed form.

#include <algorithm>
#include <cmath>

#include "sdc/error.hpp"
#include "sdc/kinematics.hpp"

namespace sdc {

namespace detail {

struct OracleBody {
  double position = 0.0;
  double velocity = 0.0;
};

// One step with acceleration held constant; velocity floors at zero inside the step.
inline void oracle_step(OracleBody& body, double accel, double dt) {
  const double v_next = body.velocity + accel * dt;
  if (v_next < 0.0) {
    body.position += body.velocity * body.velocity / (2.0 * -accel);
    body.velocity = 0.0;
    return;
  }
  body.position += body.velocity * dt + 0.5 * accel * dt * dt;
  body.velocity = v_next;
}

// Smallest center gap reached over the whole manoeuvre for a given start gap.
inline double simulated_min_gap(const VehicleParams& rear, const VehicleParams& front, double tau, double dt,
                                double initial_gap) {
  OracleBody r{0.0, rear.speed};
  OracleBody f{initial_gap, front.speed};
  double min_gap = initial_gap;
  for (long step = 0;; ++step) {
    const double t = static_cast<double>(step) * dt;
    const bool rear_responding = t < tau;
    if (!rear_responding && r.velocity == 0.0 && f.velocity == 0.0) {
      break;
    }
    oracle_step(f, f.velocity > 0.0 ? -front.a_max_brake : 0.0, dt);
    if (rear_responding && t + dt > tau) {
      // The response ends inside this step.
      oracle_step(r, rear.a_max_acc, tau - t);
      oracle_step(r, r.velocity > 0.0 ? -rear.a_max_brake : 0.0, t + dt - tau);
    } else if (rear_responding) {
      oracle_step(r, rear.a_max_acc, dt);
    } else {
      oracle_step(r, r.velocity > 0.0 ? -rear.a_max_brake : 0.0, dt);
    }
    min_gap = std::min(min_gap, f.position - r.position);
  }
  return min_gap;
}

}  // namespace detail

/// Minimal initial center gap for which the simulated gap never drops below
/// the vehicle length. Bisection stops once the bracket is narrower than 1 mm.
inline double min_safe_gap_oracle(const VehicleParams& rear, const VehicleParams& front, double tau,
                                  double dt = 1e-3) {
  rear.validate();
  front.validate();
  detail::require_non_negative(tau, "tau");
  detail::require_positive(dt, "dt");
  const double length = rear.length_m;
  constexpr double kBisectionTolerance = 1e-3;

  auto safe = [&](double d0) { return detail::simulated_min_gap(rear, front, tau, dt, d0) >= length; };

  if (safe(length)) {
    return length;
  }
  // Upper bracket: the rear car's travel bound at its peak speed plus slack.
  const double v_peak = rear.speed + tau * rear.a_max_acc;
  double hi = length + v_peak * (tau + v_peak / rear.a_max_brake) + v_peak * dt + 1.0;
  double lo = length;
  if (!safe(hi)) {
    throw InternalError("oracle bisection bracket does not contain a safe gap");
  }
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (safe(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace sdc
