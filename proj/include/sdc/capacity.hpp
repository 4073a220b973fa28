#pragma once

// Safe driving capacity of a straight multi-lane road for perception-based
// (PBV) and cooperative (CBV) fleets, and the sweep that checks the CBV road
// never holds fewer vehicles than the PBV road.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdc/cooperative.hpp"
#include "sdc/error.hpp"
#include "sdc/kinematics.hpp"
#include "sdc/perception.hpp"
#include "sdc/units.hpp"

namespace sdc {

/// SDC(M, N, V): road length in km, lane count, minimum speed in km/h.
struct RoadSpec {
  double length_km = 10.0;
  int lanes = 2;
  double speed_floor_kmh = 100.0;

  void validate() const {
    detail::require_positive(length_km, "road length");
    if (lanes < 1) throw InvalidParameter("lane count must be >= 1");
    detail::require_finite(speed_floor_kmh, "speed floor");
    if (speed_floor_kmh <= 0.0) {
      throw InvalidParameter("speed floor must be > 0 km/h; without it every vehicle could stop and capacity is unbounded");
    }
  }

  double length_m() const { return units::km_to_m(length_km); }
  double speed_floor_mps() const { return units::kmh_to_mps(speed_floor_kmh); }
};

enum class VehicleMode { PBV, CBV };

inline std::string_view to_string(VehicleMode m) { return m == VehicleMode::PBV ? "pbv" : "cbv"; }

inline VehicleMode parse_mode(std::string_view text) {
  if (text == "pbv" || text == "PBV") return VehicleMode::PBV;
  if (text == "cbv" || text == "CBV") return VehicleMode::CBV;
  throw InvalidParameter("unknown vehicle mode '" + std::string(text) + "' (expected pbv or cbv)");
}

/// Expected gap a vehicle must keep on a homogeneous road where every car runs
/// at the speed floor. `fleet.tau0` is the machine response time of the mode:
/// PBVs use it directly, CBVs add `eta` and scale it by `dev.e_tau`.
inline double expected_safe_distance(const VehicleParams& fleet, const RoadSpec& road, VehicleMode mode,
                                     const DeviationSet& dev, double eta,
                                     DeviationRegime regime = DeviationRegime::Conservative) {
  road.validate();
  const VehicleParams at_floor = fleet.with_speed(road.speed_floor_mps());
  if (mode == VehicleMode::PBV) {
    return safe_longitudinal_distance(at_floor, at_floor, at_floor.tau0);
  }
  return corrected_safe_distance(at_floor, at_floor, dev, eta, regime);
}

/// Vehicle type share in a mixed fleet.
struct WeightedVehicle {
  VehicleParams params;
  double weight = 1.0;
};

/// Mixture extension: pairs (rear, front) drawn independently by weight,
/// distance averaged over all ordered pairs. All types must share one length.
inline double expected_safe_distance(std::span<const WeightedVehicle> fleet, const RoadSpec& road, VehicleMode mode,
                                     const DeviationSet& dev, double eta,
                                     DeviationRegime regime = DeviationRegime::Conservative) {
  road.validate();
  if (fleet.empty()) throw InvalidInput("fleet mixture is empty");
  double total = 0.0;
  for (const auto& w : fleet) {
    detail::require_positive(w.weight, "fleet weight");
    total += w.weight;
  }
  const double v = road.speed_floor_mps();
  double expectation = 0.0;
  for (const auto& rear : fleet) {
    for (const auto& front : fleet) {
      const VehicleParams r = rear.params.with_speed(v);
      const VehicleParams f = front.params.with_speed(v);
      const double d = mode == VehicleMode::PBV ? safe_longitudinal_distance(r, f, r.tau0)
                                                : corrected_safe_distance(r, f, dev, eta, regime);
      expectation += (rear.weight / total) * (front.weight / total) * d;
    }
  }
  return expectation;
}

namespace detail {

// Exact-packing ratios (M - L = k * D) must not lose a vehicle to rounding.
inline std::int64_t floor_ratio(double numerator, double denominator) {
  const double ratio = numerator / denominator;
  return static_cast<std::int64_t>(std::floor(ratio * (1.0 + 1e-12)));
}

inline void check_sdc_inputs(const RoadSpec& road, double expected_distance, double vehicle_length) {
  road.validate();
  detail::require_finite(expected_distance, "expected distance");
  if (expected_distance <= 0.0) throw InvalidParameter("expected safe distance must be > 0");
  detail::require_positive(vehicle_length, "vehicle length");
  if (vehicle_length >= road.length_m()) throw InvalidParameter("vehicle is longer than the road");
}

}  // namespace detail

/// floor(N (M - L) / E{D}) + 1
inline std::int64_t sdc(const RoadSpec& road, double expected_distance, double vehicle_length) {
  detail::check_sdc_inputs(road, expected_distance, vehicle_length);
  return detail::floor_ratio(road.lanes * (road.length_m() - vehicle_length), expected_distance) + 1;
}

/// N (floor((M - L) / E{D}) + 1): every lane packed separately.
inline std::int64_t sdc_per_lane(const RoadSpec& road, double expected_distance, double vehicle_length) {
  detail::check_sdc_inputs(road, expected_distance, vehicle_length);
  return road.lanes * (detail::floor_ratio(road.length_m() - vehicle_length, expected_distance) + 1);
}

enum class Packing { Aggregate, PerLane };

struct CapacityInputs {
  VehicleParams fleet;  // conservative estimates; speed is overridden by the road's floor
  double tau0_pbv = 0.5;
  double tau0_cbv = 0.4;
  RoadSpec road;
  DeviationSet dev;
  double eta = 0.0;
  DeviationRegime regime = DeviationRegime::Conservative;
  Packing packing = Packing::Aggregate;
};

struct CapacityReport {
  CapacityInputs inputs;
  double expected_distance_pbv = 0.0;
  double expected_distance_cbv = 0.0;
  double vehicle_length_pbv = 0.0;
  double vehicle_length_cbv = 0.0;
  std::int64_t sdc_pbv = 0;
  std::int64_t sdc_cbv = 0;
};

inline CapacityReport capacity_report(const CapacityInputs& in) {
  CapacityReport r;
  r.inputs = in;
  r.expected_distance_pbv =
      expected_safe_distance(in.fleet.with_tau0(in.tau0_pbv), in.road, VehicleMode::PBV, in.dev, 0.0, in.regime);
  r.expected_distance_cbv =
      expected_safe_distance(in.fleet.with_tau0(in.tau0_cbv), in.road, VehicleMode::CBV, in.dev, in.eta, in.regime);
  r.vehicle_length_pbv = in.fleet.length_m;
  r.vehicle_length_cbv = in.dev.e_L * in.fleet.length_m;
  auto count = in.packing == Packing::Aggregate ? &sdc : &sdc_per_lane;
  r.sdc_pbv = count(in.road, r.expected_distance_pbv, r.vehicle_length_pbv);
  r.sdc_cbv = count(in.road, r.expected_distance_cbv, r.vehicle_length_cbv);
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

struct LatencyValue {
  double seconds = 0.0;
  std::string label;  // preset name or empty for a literal value
};

struct SweepPoint {
  double e_tau = 1.0;
  double e_brake = 1.0;
  double e_V = 1.0;
  double e_L = 1.0;
  LatencyValue eta;
  double speed_kmh = 100.0;

  DeviationSet deviations() const { return {e_L, e_V, e_brake, e_tau}; }
};

/// Cartesian grid. Points are enumerated with e_tau outermost, then e_brake,
/// e_V, e_L, eta and speed innermost.
struct SweepGrid {
  std::vector<double> e_tau{1.0};
  std::vector<double> e_brake{1.0};
  std::vector<double> e_V{1.0};
  std::vector<double> e_L{1.0};
  std::vector<LatencyValue> eta{{0.0, ""}};
  std::vector<double> speed_kmh{100.0};

  void validate() const {
    auto non_empty = [](bool empty, const char* axis) {
      if (empty) throw InvalidInput(std::string("sweep axis '") + axis + "' is empty");
    };
    non_empty(e_tau.empty(), "e_tau");
    non_empty(e_brake.empty(), "e_brake");
    non_empty(e_V.empty(), "e_V");
    non_empty(e_L.empty(), "e_L");
    non_empty(eta.empty(), "eta");
    non_empty(speed_kmh.empty(), "speed");
  }

  std::vector<SweepPoint> points() const {
    validate();
    std::vector<SweepPoint> out;
    out.reserve(e_tau.size() * e_brake.size() * e_V.size() * e_L.size() * eta.size() * speed_kmh.size());
    for (double t : e_tau)
      for (double b : e_brake)
        for (double v : e_V)
          for (double l : e_L)
            for (const auto& h : eta)
              for (double s : speed_kmh) out.push_back({t, b, v, l, h, s});
    return out;
  }
};

/// `count` values from `first` in steps of `step`, computed as first + i*step
/// and rounded to 12 decimals so 0.95 + 0.01*5 lands exactly on 1.0.
inline std::vector<double> linear_axis(double first, double step, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(std::round((first + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

/// Grid of the perception-inaccuracy study: e_tau, e_brake in {0.95..1.00},
/// e_V in {1.00..1.05} (step 0.01) against the DSRC/5G/4G presets and 100 ms.
inline SweepGrid inaccuracy_study_grid() {
  SweepGrid g;
  g.e_tau = linear_axis(0.95, 0.01, 6);
  g.e_brake = linear_axis(0.95, 0.01, 6);
  g.e_V = linear_axis(1.00, 0.01, 6);
  g.e_L = {1.0};
  g.eta = {{0.001, "5G"}, {0.010, "DSRC"}, {0.050, "4G"}, {0.100, ""}};
  g.speed_kmh = {100.0};
  return g;
}

struct SweepRow {
  SweepPoint point;
  double d_pbv = 0.0;
  double d_cbv = 0.0;
  std::int64_t sdc_pbv = 0;
  std::int64_t sdc_cbv = 0;
};

struct RejectedPoint {
  SweepPoint point;
  std::string reason;
};

struct Theorem1Report {
  std::vector<SweepRow> rows;          // in grid order
  std::vector<SweepRow> violations;    // rows with SDC_cbv < SDC_pbv
  std::vector<RejectedPoint> rejected; // outside the hypothesis, not evaluated

  bool holds() const { return violations.empty(); }
};

/// Evaluates both capacities at every grid point. A point is rejected (and
/// not counted) if its deviations are not conservative or if the cooperative
/// delay e_tau * tau0_cbv + eta exceeds the perception response time.
inline Theorem1Report check_theorem1(const SweepGrid& grid, const VehicleParams& fleet, double tau0_pbv,
                                     double tau0_cbv, const RoadSpec& road, Packing packing = Packing::Aggregate) {
  fleet.validate();
  Theorem1Report report;
  constexpr double kDelaySlack = 1e-12;
  for (const SweepPoint& p : grid.points()) {
    const DeviationSet dev = p.deviations();
    try {
      dev.validate(DeviationRegime::Conservative);
    } catch (const InvalidDeviation& e) {
      report.rejected.push_back({p, e.what()});
      continue;
    }
    if (dev.e_tau * tau0_cbv + p.eta.seconds > tau0_pbv + kDelaySlack) {
      report.rejected.push_back({p, "cooperative delay e_tau*tau0 + eta exceeds the perception response time"});
      continue;
    }
    CapacityInputs in;
    in.fleet = fleet;
    in.tau0_pbv = tau0_pbv;
    in.tau0_cbv = tau0_cbv;
    in.road = road;
    in.road.speed_floor_kmh = p.speed_kmh;
    in.dev = dev;
    in.eta = p.eta.seconds;
    in.packing = packing;
    const CapacityReport r = capacity_report(in);
    SweepRow row{p, r.expected_distance_pbv, r.expected_distance_cbv, r.sdc_pbv, r.sdc_cbv};
    report.rows.push_back(row);
    if (row.sdc_cbv < row.sdc_pbv) report.violations.push_back(row);
  }
  return report;
}

}  // namespace sdc
