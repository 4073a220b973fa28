#pragma once

// Discrete-time sudden-brake scenario on a straight multi-lane road.
//
// Each lane is an ordered list of vehicles, front first. A brake trigger makes
// one vehicle apply full brake. Every follower reacts to its predecessor's
// sudden change (brake onset, or a collision stop): during its response time
// it accelerates at full throttle (the worst case), then performs its
// best-effort reaction (BER: full brake held until halt and beyond).
// Vehicles ahead of a trigger, or in lanes without one, keep cruising.
//
// Motion is integrated per step with piecewise-constant acceleration. Phase
// changes and halts that fall inside a step split the step, so the result is
// exact up to rounding for any dt. Collisions are checked at step ends: a
// center gap below the vehicle length freezes both cars where they are.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sdc/capacity.hpp"
#include "sdc/cooperative.hpp"
#include "sdc/error.hpp"
#include "sdc/kinematics.hpp"
#include "sdc/ltl.hpp"
#include "sdc/perception.hpp"

namespace sdc::sim {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct VehicleSpawn {
  VehicleParams params;  // `speed` is the initial speed
  /// Center gap to the predecessor. When unset, the gap is `gap_factor` times
  /// the mode-appropriate safe distance at the initial speeds.
  std::optional<double> gap_m;
  double gap_factor = 1.0;
  /// Fault injection: BER starts this long after the response time elapsed.
  double extra_reaction_delay_s = 0.0;
};

struct BrakeTrigger {
  std::size_t lane = 0;
  std::size_t vehicle = 0;
  double time_s = 0.0;
};

/// Bias sets used to build perception observations when a V2V request times out.
struct PerceptionBiases {
  std::vector<double> speed{0.0};
  std::vector<double> brake{0.0};
  std::vector<double> length{0.0};
  std::vector<double> response_time{0.0};
};

struct ScenarioConfig {
  RoadSpec road;
  std::vector<std::vector<VehicleSpawn>> lanes;  // lanes[i][0] is the front-most car
  VehicleMode mode = VehicleMode::PBV;
  DeviationSet dev;
  DeviationRegime regime = DeviationRegime::Conservative;
  LatencyModel latency = LatencyModel::constant(0.0);
  double request_timeout_s = 0.1;
  bool perception_available = true;
  PerceptionBiases perception_biases;
  /// Predefined worst-case front parameters (front assumed stopped by default).
  VehicleParams conservative_defaults{kDefaultVehicleLength, 9.0, 3.0, 0.0, 0.5};
  double dt = 1e-3;
  std::uint64_t rng_seed = 0;
  std::vector<BrakeTrigger> triggers;
  double contact_tolerance_m = 1e-6;
  double max_time_s = 600.0;

  std::size_t vehicle_count() const {
    std::size_t n = 0;
    for (const auto& lane : lanes) n += lane.size();
    return n;
  }

  void validate() const {
    road.validate();
    detail::require_positive(dt, "dt");
    detail::require_positive(max_time_s, "max_time_s");
    detail::require_non_negative(contact_tolerance_m, "contact_tolerance_m");
    detail::require_non_negative(request_timeout_s, "request_timeout_s");
    if (lanes.size() > static_cast<std::size_t>(road.lanes)) {
      throw InvalidParameter("scenario uses " + std::to_string(lanes.size()) + " lanes but the road has " +
                             std::to_string(road.lanes));
    }
    latency.validate();
    conservative_defaults.validate();
    if (mode == VehicleMode::CBV) dev.validate(regime);

    const VehicleParams* reference = nullptr;
    for (std::size_t l = 0; l < lanes.size(); ++l) {
      double span = 0.0;
      for (std::size_t k = 0; k < lanes[l].size(); ++k) {
        const VehicleSpawn& v = lanes[l][k];
        const std::string where = "lane " + std::to_string(l) + " vehicle " + std::to_string(k);
        v.params.validate();
        detail::require_non_negative(v.extra_reaction_delay_s, "extra_reaction_delay_s");
        detail::require_positive(v.gap_factor, "gap_factor");
        if (!reference) {
          reference = &v.params;
        } else if (v.params.length_m != reference->length_m || v.params.a_max_brake != reference->a_max_brake ||
                   v.params.a_max_acc != reference->a_max_acc || v.params.tau0 != reference->tau0) {
          throw InvalidParameter(where + ": fleet must be homogeneous (same length, brake, acceleration, tau0)");
        }
        if (k > 0 && v.gap_m) {
          detail::require_finite(*v.gap_m, "gap_m");
          if (*v.gap_m < v.params.length_m) throw InvalidParameter(where + ": gap is shorter than the vehicle length");
          span += *v.gap_m;
        }
      }
      if (span > road.length_m()) throw InvalidParameter("lane " + std::to_string(l) + " does not fit on the road");
    }
    std::set<std::size_t> triggered_lanes;
    for (const BrakeTrigger& t : triggers) {
      if (t.lane >= lanes.size() || t.vehicle >= lanes[t.lane].size()) {
        throw InvalidParameter("brake trigger refers to a vehicle that does not exist");
      }
      detail::require_non_negative(t.time_s, "trigger time");
      if (!triggered_lanes.insert(t.lane).second) {
        throw InvalidParameter("at most one brake trigger per lane is supported");
      }
    }
  }
};

/// Per-vehicle bookkeeping of one run.
struct VehicleRecord {
  std::string id;
  std::size_t lane = 0;
  std::size_t index = 0;
  std::string info_source;  // "pbv", "response", "perception", "defaults", or "-" without predecessor
  double eta = 0.0;
  double effective_tau = 0.0;
  double initial_gap = std::numeric_limits<double>::quiet_NaN();
  double front_change_time = kNever;
  double detection_time = kNever;
  double brake_onset_time = kNever;
  double gap_at_front_change = std::numeric_limits<double>::quiet_NaN();
  double required_gap = std::numeric_limits<double>::quiet_NaN();
  double min_gap = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> collision_step;
  bool responsible = false;
  std::vector<std::string> blame;
};

struct CollisionEvent {
  std::size_t step = 0;
  double time = 0.0;
  std::size_t lane = 0;
  std::size_t rear_index = 0;  // the front car is rear_index - 1
  std::string rear_id;
  std::string front_id;
  bool rear_responsible = false;
};

struct SimulationResult {
  std::vector<ltl::Trace> traces;  // lane-major, front to back
  std::vector<VehicleRecord> vehicles;
  std::vector<CollisionEvent> collisions;
  double dt = 0.0;
  double vehicle_length = 0.0;

  std::size_t horizon_steps() const { return traces.empty() ? 0 : traces.front().size(); }
};

namespace detail {

inline std::string vehicle_id(std::size_t lane, std::size_t index) {
  return "L" + std::to_string(lane) + "V" + std::to_string(index);
}

struct Body {
  double x = 0.0;
  double v = 0.0;
  bool frozen = false;
  double freeze_time = kNever;
  bool collided = false;
  double extra_delay = 0.0;
  bool snapshot_taken = false;
  std::optional<FrontInfoResolution> info;  // CBV resolution with params filled at snapshot time
};

class Engine {
 public:
  explicit Engine(const ScenarioConfig& cfg) : cfg_(cfg) {}

  SimulationResult run() {
    cfg_.validate();
    setup();
    const double dt = cfg_.dt;
    const std::size_t max_steps = static_cast<std::size_t>(std::ceil(cfg_.max_time_s / dt));
    bool finishing = false;
    for (std::size_t step = 0;; ++step) {
      const double t = static_cast<double>(step) * dt;
      take_due_snapshots(t);
      record(t);
      if (finishing) break;
      if (settled(t)) {
        finishing = true;  // one extra step past the full stop
      }
      if (step >= max_steps) {
        throw InvalidInput("scenario did not settle within max_time_s = " + std::to_string(cfg_.max_time_s));
      }
      const double t_next = static_cast<double>(step + 1) * dt;
      for (std::size_t l = 0; l < bodies_.size(); ++l) advance_lane(l, t, t_next);
      detect_collisions(step + 1, t_next);
    }
    result_.dt = dt;
    result_.vehicle_length = length_;
    return std::move(result_);
  }

 private:
  std::size_t flat(std::size_t lane, std::size_t k) const { return offset_[lane] + k; }
  VehicleRecord& rec(std::size_t lane, std::size_t k) { return result_.vehicles[flat(lane, k)]; }

  void setup() {
    std::mt19937_64 rng(cfg_.rng_seed);
    bodies_.resize(cfg_.lanes.size());
    offset_.resize(cfg_.lanes.size());
    std::size_t flat_index = 0;
    for (std::size_t l = 0; l < cfg_.lanes.size(); ++l) {
      offset_[l] = flat_index;
      const auto& lane = cfg_.lanes[l];
      bodies_[l].resize(lane.size());
      for (std::size_t k = 0; k < lane.size(); ++k, ++flat_index) {
        length_ = lane[k].params.length_m;
        Body& b = bodies_[l][k];
        b.v = lane[k].params.speed;
        b.extra_delay = lane[k].extra_reaction_delay_s;
        VehicleRecord r;
        r.id = vehicle_id(l, k);
        r.lane = l;
        r.index = k;
        if (k == 0) {
          r.info_source = "-";
          r.effective_tau = lane[k].params.tau0;
        } else if (cfg_.mode == VehicleMode::PBV) {
          r.info_source = "pbv";
          r.effective_tau = lane[k].params.tau0;
        } else {
          r.eta = sample_latency(cfg_.latency, rng);
          const ResponseTiming timing{lane[k].params.tau0, cfg_.dev.e_tau};
          FrontInfoResolution res;
          if (r.eta <= cfg_.request_timeout_s) {
            res = resolve_front_info(CommResponse{lane[k - 1].params, r.eta}, std::nullopt,
                                     cfg_.conservative_defaults, timing);
          } else {
            res = resolve_front_info(CommTimeout{}, perception_for(lane[k - 1].params), cfg_.conservative_defaults,
                                     timing);
          }
          r.info_source = std::string(to_string(res.source));
          r.effective_tau = res.effective_tau;
          b.info = res;
        }
        result_.vehicles.push_back(std::move(r));
      }
      place_lane(l);
    }
    for (const BrakeTrigger& trig : cfg_.triggers) {
      rec(trig.lane, trig.vehicle).brake_onset_time = trig.time_s;
    }
    for (std::size_t l = 0; l < bodies_.size(); ++l) refresh_chain(l);
  }

  std::optional<PerceptionObservations> perception_for(const VehicleParams& front) const {
    if (!cfg_.perception_available) return std::nullopt;
    const PerceptionBiases& b = cfg_.perception_biases;
    return PerceptionObservations{{{front.speed}, b.speed},
                                  {{front.a_max_brake}, b.brake},
                                  {{front.length_m}, b.length},
                                  {{front.tau0}, b.response_time}};
  }

  // Initial positions: the last car of a lane sits at 0, the lead at the sum of gaps.
  void place_lane(std::size_t l) {
    const auto& lane = cfg_.lanes[l];
    auto& bodies = bodies_[l];
    if (lane.empty()) return;
    std::vector<double> gaps(lane.size(), 0.0);
    for (std::size_t k = 1; k < lane.size(); ++k) {
      const VehicleSpawn& s = lane[k];
      gaps[k] = s.gap_m ? *s.gap_m : s.gap_factor * required_gap(l, k, lane[k].params.speed, lane[k - 1].params.speed);
      if (gaps[k] < length_) {
        throw InvalidParameter("lane " + std::to_string(l) + " vehicle " + std::to_string(k) +
                               ": resolved gap is shorter than the vehicle length");
      }
      rec(l, k).initial_gap = gaps[k];
    }
    double x = 0.0;
    for (std::size_t k = lane.size(); k-- > 0;) {
      bodies[k].x = x;
      x += gaps[k];
    }
    double span = 0.0;
    for (double g : gaps) span += g;
    if (span > cfg_.road.length_m()) throw InvalidParameter("lane " + std::to_string(l) + " does not fit on the road");
  }

  // Distance the rear car must keep given what it knows about its predecessor.
  double required_gap(std::size_t l, std::size_t k, double rear_speed, double front_speed) const {
    const VehicleParams& rear_p = cfg_.lanes[l][k].params;
    const VehicleParams& front_p = cfg_.lanes[l][k - 1].params;
    VehicleParams rear = rear_p.with_speed(rear_speed);
    if (cfg_.mode == VehicleMode::PBV) {
      return safe_longitudinal_distance(rear, front_p.with_speed(front_speed), rear_p.tau0);
    }
    const FrontInfoResolution& info = *bodies_[l][k].info;
    VehicleParams front = info.params;
    if (info.source == InfoSource::Response) {
      front = front_p.with_speed(front_speed);
    } else if (info.source == InfoSource::PerceptionFallback) {
      auto obs = *perception_for(front_p.with_speed(front_speed));
      front.speed = std::max(0.0, conservative_observation(obs.front_speed, MetricKind::FrontSpeed));
    }
    const double length = std::max(rear.length_m, front.length_m);
    rear.length_m = length;
    front.length_m = length;
    return safe_longitudinal_distance(rear, front, info.effective_tau);
  }

  // Propagates sudden-change times down a lane (brake onset or collision stop of the predecessor).
  void refresh_chain(std::size_t l) {
    auto& bodies = bodies_[l];
    for (std::size_t k = 1; k < bodies.size(); ++k) {
      const VehicleRecord& front = rec(l, k - 1);
      const double change = std::min(front.brake_onset_time, bodies[k - 1].freeze_time);
      VehicleRecord& r = rec(l, k);
      if (change < r.front_change_time) {
        r.front_change_time = change;
        r.detection_time = change + r.effective_tau;
        r.brake_onset_time = std::min(r.brake_onset_time, r.detection_time + bodies[k].extra_delay);
      }
    }
  }

  void take_due_snapshots(double t) {
    for (std::size_t l = 0; l < bodies_.size(); ++l) snapshot_lane(l, t);
  }

  void snapshot_lane(std::size_t l, double t) {
    auto& bodies = bodies_[l];
    for (std::size_t k = 1; k < bodies.size(); ++k) {
      VehicleRecord& r = rec(l, k);
      if (bodies[k].snapshot_taken || r.front_change_time > t) continue;
      bodies[k].snapshot_taken = true;
      r.gap_at_front_change = bodies[k - 1].x - bodies[k].x;
      r.required_gap = required_gap(l, k, bodies[k].v, bodies[k - 1].v);
    }
  }

  double acceleration(const VehicleParams& p, const VehicleRecord& r, const Body& b, double t) const {
    if (t >= r.brake_onset_time) return b.v > 0.0 ? -p.a_max_brake : 0.0;
    if (t >= r.front_change_time) return p.a_max_acc;
    return 0.0;
  }

  void advance_body(std::size_t l, std::size_t k, double t0, double t1) {
    Body& b = bodies_[l][k];
    if (b.frozen) return;
    const VehicleParams& p = cfg_.lanes[l][k].params;
    const VehicleRecord& r = rec(l, k);
    double t = t0;
    while (t < t1) {
      const double a = acceleration(p, r, b, t);
      double end = t1;
      bool halts = false;
      if (t >= r.brake_onset_time) {
        if (b.v > 0.0 && t + b.v / p.a_max_brake <= t1) {
          end = t + b.v / p.a_max_brake;
          halts = true;
        }
      } else {
        if (r.front_change_time > t) end = std::min(end, r.front_change_time);
        end = std::min(end, r.brake_onset_time);
      }
      const double h = end - t;
      b.x += b.v * h + 0.5 * a * h * h;
      b.v = halts ? 0.0 : std::max(0.0, b.v + a * h);
      if (end <= t) break;  // only reachable through rounding
      t = end;
    }
  }

  void advance_lane(std::size_t l, double t0, double t1) {
    auto& bodies = bodies_[l];
    // Split the step at sudden-change instants so gaps are snapshotted exactly then.
    std::vector<double> cuts;
    for (std::size_t k = 1; k < bodies.size(); ++k) {
      const double c = rec(l, k).front_change_time;
      if (!bodies[k].snapshot_taken && c > t0 && c < t1) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double t = t0;
    for (double c : cuts) {
      if (c <= t) continue;
      for (std::size_t k = 0; k < bodies.size(); ++k) advance_body(l, k, t, c);
      snapshot_lane(l, c);
      t = c;
    }
    for (std::size_t k = 0; k < bodies.size(); ++k) advance_body(l, k, t, t1);
  }

  void detect_collisions(std::size_t step, double t) {
    for (std::size_t l = 0; l < bodies_.size(); ++l) {
      auto& bodies = bodies_[l];
      bool changed = false;
      for (std::size_t k = 1; k < bodies.size(); ++k) {
        const double gap = bodies[k - 1].x - bodies[k].x;
        VehicleRecord& r = rec(l, k);
        r.min_gap = std::min(r.min_gap, gap);
        if (r.collision_step || gap >= length_ - cfg_.contact_tolerance_m) continue;
        r.collision_step = step;
        for (std::size_t j : {k - 1, k}) {
          Body& b = bodies[j];
          b.collided = true;
          if (!b.frozen) {
            b.frozen = true;
            b.v = 0.0;
            b.freeze_time = t;
          }
        }
        result_.collisions.push_back({step, t, l, k, r.id, rec(l, k - 1).id, false});
        changed = true;
      }
      if (changed) refresh_chain(l);
    }
  }

  // Every vehicle drawn into an event has stopped and passed all its scheduled phase changes.
  bool settled(double t) const {
    for (std::size_t l = 0; l < bodies_.size(); ++l) {
      for (std::size_t k = 0; k < bodies_[l].size(); ++k) {
        const Body& b = bodies_[l][k];
        const VehicleRecord& r = result_.vehicles[offset_[l] + k];
        const bool involved = b.frozen || r.brake_onset_time < kNever;
        if (!involved) continue;
        if (b.v > 0.0) return false;
        if (r.brake_onset_time < kNever && t < r.brake_onset_time) return false;
      }
    }
    return true;
  }

  void record(double t) {
    if (result_.traces.empty()) {
      for (std::size_t l = 0; l < bodies_.size(); ++l) {
        for (std::size_t k = 0; k < bodies_[l].size(); ++k) {
          const VehicleRecord& r = rec(l, k);
          ltl::Trace tr;
          tr.vehicle_id = r.id;
          tr.dt = cfg_.dt;
          tr.lane = static_cast<int>(l);
          tr.info_source = r.info_source;
          result_.traces.push_back(std::move(tr));
        }
      }
    }
    for (std::size_t l = 0; l < bodies_.size(); ++l) {
      for (std::size_t k = 0; k < bodies_[l].size(); ++k) {
        const Body& b = bodies_[l][k];
        const VehicleRecord& r = rec(l, k);
        ltl::VehicleState s;
        s.position = b.x;
        s.velocity = b.v;
        s.ber_active = t >= r.brake_onset_time;
        s.collided = b.collided;
        result_.traces[flat(l, k)].steps.push_back(s);
      }
    }
  }

  const ScenarioConfig& cfg_;
  std::vector<std::vector<Body>> bodies_;
  std::vector<std::size_t> offset_;
  double length_ = kDefaultVehicleLength;
  SimulationResult result_;
};

}  // namespace detail

/// Blame rule for rear-end collisions. The rear car is responsible when
///  (a) its gap at the moment its predecessor changed behaviour was below the
///      distance required for its information mode (or the predecessor made
///      no sudden change at all), or
///  (b) it did not start BER within its effective response time.
/// The front car is never blamed. Flags are set from the collision step on.
inline void assign_responsibility(SimulationResult& result, const ScenarioConfig& cfg) {
  constexpr double kTimeSlack = 1e-9;
  for (CollisionEvent& ev : result.collisions) {
    VehicleRecord* rear = nullptr;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < result.vehicles.size(); ++i) {
      if (result.vehicles[i].id == ev.rear_id) {
        rear = &result.vehicles[i];
        flat = i;
        break;
      }
    }
    if (!rear) throw InternalError("collision refers to unknown vehicle " + ev.rear_id);
    std::vector<std::string> reasons;
    if (rear->front_change_time == kNever) {
      reasons.emplace_back("closed in on a front car that made no sudden change");
    } else if (rear->gap_at_front_change < rear->required_gap - cfg.contact_tolerance_m) {
      reasons.emplace_back("gap below the required safe distance when the front car changed behaviour");
    }
    if (rear->brake_onset_time > rear->detection_time + kTimeSlack) {
      reasons.emplace_back("did not start BER within its response time");
    }
    ev.rear_responsible = !reasons.empty();
    if (!ev.rear_responsible) continue;
    rear->responsible = true;
    rear->blame.insert(rear->blame.end(), reasons.begin(), reasons.end());
    auto& steps = result.traces[flat].steps;
    for (std::size_t s = ev.step; s < steps.size(); ++s) steps[s].responsible = true;
  }
}

/// Runs the scenario and annotates responsibility. Deterministic for a given config.
inline SimulationResult run_scenario(const ScenarioConfig& cfg) {
  SimulationResult result = detail::Engine(cfg).run();
  assign_responsibility(result, cfg);
  return result;
}

}  // namespace sdc::sim
