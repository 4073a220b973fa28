#pragma once

// Conservative perception estimates and the deviation ratios that relate them
// to the actual values a cooperative vehicle learns over V2V.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "sdc/error.hpp"
#include "sdc/kinematics.hpp"

namespace sdc {

/// Perceived metric. Front speed is biased low; the others are biased high.
enum class MetricKind { FrontSpeed, MaxBrake, Length, ResponseTime };

struct ObservationSet {
  std::vector<double> samples;
  std::vector<double> biases;

  void validate() const {
    if (samples.empty()) throw InvalidInput("observation set has no samples");
    if (biases.empty()) throw InvalidInput("observation set has no biases");
    for (double s : samples) detail::require_finite(s, "observation sample");
    for (double b : biases) detail::require_finite(b, "observation bias");
  }
};

/// Ensemble mean shifted by the most safety-preserving bias for `kind`.
inline double conservative_observation(const ObservationSet& obs, MetricKind kind) {
  obs.validate();
  const double mean =
      std::accumulate(obs.samples.begin(), obs.samples.end(), 0.0) / static_cast<double>(obs.samples.size());
  const auto [min_bias, max_bias] = std::minmax_element(obs.biases.begin(), obs.biases.end());
  return mean + (kind == MetricKind::FrontSpeed ? *min_bias : *max_bias);
}

/// Relative inaccuracy |1 - actual / conservative|.
inline double inaccuracy(double actual, double conservative) {
  detail::require_finite(actual, "actual");
  detail::require_finite(conservative, "conservative");
  if (conservative == 0.0) {
    throw InvalidInput("inaccuracy is undefined for a zero conservative estimate (division by zero)");
  }
  return std::abs(1.0 - actual / conservative);
}

enum class DeviationRegime {
  /// e_L, e_brake, e_tau in (0, 1] and e_V >= 1: the estimate is always on the safe side.
  Conservative,
  /// Conservative and every inaccuracy at most 5 %.
  GoodPerception,
  /// Only positivity and finiteness are checked.
  Unchecked,
};

inline std::string_view to_string(DeviationRegime r) {
  switch (r) {
    case DeviationRegime::Conservative: return "conservative";
    case DeviationRegime::GoodPerception: return "good-perception";
    case DeviationRegime::Unchecked: return "unchecked";
  }
  return "?";
}

inline DeviationRegime parse_regime(std::string_view text) {
  if (text == "conservative") return DeviationRegime::Conservative;
  if (text == "good-perception" || text == "good") return DeviationRegime::GoodPerception;
  if (text == "unchecked" || text == "none") return DeviationRegime::Unchecked;
  throw InvalidParameter("unknown deviation regime '" + std::string(text) + "'");
}

/// Ratios actual / conservative-estimate for the four perceived metrics.
struct DeviationSet {
  double e_L = 1.0;
  double e_V_f = 1.0;
  double e_brake = 1.0;
  double e_tau = 1.0;

  static constexpr DeviationSet unit() { return {}; }

  /// Throws InvalidDeviation naming the first offending field.
  void validate(DeviationRegime regime) const {
    // Grid values such as 0.95 are often produced by arithmetic; allow rounding slack.
    constexpr double kSlack = 1e-12;
    auto fail = [](const char* field, double value, const char* rule) {
      throw InvalidDeviation(field, std::string(field) + " = " + std::to_string(value) + " violates " + rule);
    };
    const struct {
      const char* name;
      double value;
      bool lower_biased;  // actual >= estimate
    } fields[] = {{"e_L", e_L, false}, {"e_V", e_V_f, true}, {"e_brake", e_brake, false}, {"e_tau", e_tau, false}};

    for (const auto& f : fields) {
      if (!std::isfinite(f.value) || f.value <= 0.0) fail(f.name, f.value, "positivity");
    }
    if (regime == DeviationRegime::Unchecked) return;

    for (const auto& f : fields) {
      if (f.lower_biased) {
        if (f.value < 1.0 - kSlack) fail(f.name, f.value, "the conservative regime (must be >= 1)");
        if (regime == DeviationRegime::GoodPerception && f.value > 1.05 + kSlack) {
          fail(f.name, f.value, "the good-perception regime (must be <= 1.05)");
        }
      } else {
        if (f.value > 1.0 + kSlack) fail(f.name, f.value, "the conservative regime (must be in (0, 1])");
        if (regime == DeviationRegime::GoodPerception && f.value < 0.95 - kSlack) {
          fail(f.name, f.value, "the good-perception regime (must be >= 0.95)");
        }
      }
    }
  }

  friend bool operator==(const DeviationSet&, const DeviationSet&) = default;
};

/// Actual parameters recovered from conservative estimates: length, front
/// speed, brake and response time are each scaled by their deviation ratio.
inline VehicleParams corrected_params(const VehicleParams& conservative, const DeviationSet& dev,
                                      DeviationRegime regime = DeviationRegime::Conservative) {
  conservative.validate();
  dev.validate(regime);
  VehicleParams actual = conservative;
  actual.length_m = dev.e_L * conservative.length_m;
  actual.speed = dev.e_V_f * conservative.speed;
  actual.a_max_brake = dev.e_brake * conservative.a_max_brake;
  actual.tau0 = dev.e_tau * conservative.tau0;
  actual.validate();
  return actual;
}

}  // namespace sdc
