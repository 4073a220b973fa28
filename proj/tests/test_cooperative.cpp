#include <gtest/gtest.h>

#include <random>

#include "sdc/cooperative.hpp"
#include "sdc/units.hpp"

using sdc::DeviationSet;
using sdc::VehicleParams;

namespace {

VehicleParams car(double speed, double tau0) { return {5.0, 9.0, 3.0, speed, tau0}; }

}  // namespace

TEST(Cooperative, LatencyPresets) {
  EXPECT_DOUBLE_EQ(sdc::latency_preset("dsrc").lo, 0.010);
  EXPECT_DOUBLE_EQ(sdc::latency_preset("5g").lo, 0.001);
  EXPECT_DOUBLE_EQ(sdc::latency_preset("4G").hi, 0.050);
  EXPECT_EQ(sdc::latency_preset("DSRC").technology, "DSRC");
  EXPECT_THROW(sdc::latency_preset("wifi"), sdc::InvalidParameter);
}

TEST(Cooperative, LatencySamplingIsSeededAndInRange) {
  const auto model = sdc::LatencyModel::uniform(0.001, 0.05);
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = sdc::sample_latency(model, a);
    EXPECT_EQ(x, sdc::sample_latency(model, b));
    EXPECT_GE(x, 0.001);
    EXPECT_LE(x, 0.05);
  }
  std::mt19937_64 c(1);
  EXPECT_EQ(sdc::sample_latency(sdc::LatencyModel::constant(0.01), c), 0.01);
  EXPECT_THROW(sdc::LatencyModel::uniform(0.2, 0.1).validate(), sdc::InvalidParameter);
  EXPECT_THROW(sdc::LatencyModel::constant(-0.1).validate(), sdc::InvalidParameter);
}

TEST(Cooperative, EffectiveResponseTime) {
  EXPECT_DOUBLE_EQ(sdc::effective_response_time(0.4, 0.1), 0.5);
  EXPECT_DOUBLE_EQ(sdc::effective_response_time(0.4, 0.0), 0.4);
  EXPECT_THROW(sdc::effective_response_time(0.4, -0.01), sdc::InvalidParameter);
}

TEST(Cooperative, ResolveUsesResponseFirst) {
  const VehicleParams defaults{5.0, 9.0, 3.0, 0.0, 0.5};
  const VehicleParams actual{4.8, 8.5, 3.0, 27.0, 0.45};
  const sdc::PerceptionObservations obs{{{26.0}, {-0.5}}, {{9.2}, {0.1}}, {{5.0}, {0.2}}, {{0.5}, {0.05}}};
  const auto r = sdc::resolve_front_info(sdc::CommResponse{actual, 0.01}, obs, defaults, {0.4, 1.0});
  EXPECT_EQ(r.source, sdc::InfoSource::Response);
  EXPECT_EQ(r.params, actual);
  EXPECT_DOUBLE_EQ(r.effective_tau, 0.41);
}

TEST(Cooperative, ResolveFallsBackToPerception) {
  const VehicleParams defaults{5.0, 9.0, 3.0, 0.0, 0.5};
  const sdc::PerceptionObservations obs{{{26.0, 28.0}, {-0.5, 0.3}}, {{9.2}, {0.1}}, {{5.0}, {0.2}}, {{0.5}, {0.05}}};
  const auto r = sdc::resolve_front_info(sdc::CommTimeout{}, obs, defaults, {0.4, 1.0});
  EXPECT_EQ(r.source, sdc::InfoSource::PerceptionFallback);
  EXPECT_DOUBLE_EQ(r.params.speed, 26.5);
  EXPECT_DOUBLE_EQ(r.params.a_max_brake, 9.3);
  EXPECT_DOUBLE_EQ(r.params.length_m, 5.2);
  EXPECT_DOUBLE_EQ(r.params.tau0, 0.55);
  EXPECT_DOUBLE_EQ(r.effective_tau, 0.4);
}

TEST(Cooperative, ResolveFallsBackToDefaults) {
  const VehicleParams defaults{5.0, 9.0, 3.0, 0.0, 0.5};
  const auto r = sdc::resolve_front_info(sdc::CommTimeout{}, std::nullopt, defaults, {0.4, 1.0});
  EXPECT_EQ(r.source, sdc::InfoSource::ConservativeDefaults);
  EXPECT_EQ(r.params, defaults);
  EXPECT_EQ(sdc::to_string(r.source), "defaults");
}

TEST(Cooperative, UnitDeviationsCollapseToPlainDistance) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> speed(0.0, 40.0), tau(0.05, 1.0), eta(0.0, 0.2);
  for (int i = 0; i < 1000; ++i) {
    const double v = speed(rng), t = tau(rng), h = eta(rng);
    const VehicleParams rear = car(v, t);
    const double plain = sdc::safe_longitudinal_distance(rear, car(v, t), t + h);
    EXPECT_NEAR(sdc::corrected_safe_distance(rear, car(v, t), DeviationSet::unit(), h), plain, 1e-9);
  }
}

TEST(Cooperative, HighwayExampleWithLatency) {
  // 0.4 s machine response plus 100 ms latency recovers the 0.5 s example.
  EXPECT_NEAR(sdc::corrected_safe_distance(car(27.78, 0.4), car(27.78, 0.4), DeviationSet::unit(), 0.1), 24.02, 1e-9);
}

TEST(Cooperative, CorrectedNeverExceedsPerceptionDistance) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> speed(0.0, 40.0), lower(0.5, 1.0), upper(1.0, 1.5), unit(0.0, 1.0);
  int checked = 0;
  while (checked < 2000) {
    const double tau_pbv = 0.2 + unit(rng);
    const double tau0 = tau_pbv * unit(rng);
    const DeviationSet dev{lower(rng), upper(rng), lower(rng), lower(rng)};
    const double eta = (tau_pbv - dev.e_tau * tau0) * unit(rng);
    const double vr = speed(rng), vf = speed(rng);
    const double corrected = sdc::corrected_safe_distance(car(vr, tau0), car(vf, tau0), dev, eta);
    const double pbv = sdc::safe_longitudinal_distance(car(vr, tau_pbv), car(vf, tau_pbv), tau_pbv);
    EXPECT_LE(corrected, pbv + 1e-9) << "vr=" << vr << " vf=" << vf << " eta=" << eta;
    ++checked;
  }
}

TEST(Cooperative, MonotoneInLatencyAndDeviations) {
  const double v = sdc::units::kmh_to_mps(100.0);
  const VehicleParams c = car(v, 0.4);
  double prev = 0.0;
  for (double eta = 0.0; eta <= 0.2; eta += 0.01) {
    const double d = sdc::corrected_safe_distance(c, c, DeviationSet::unit(), eta);
    EXPECT_GE(d, prev - 1e-12);
    prev = d;
  }
  const double base = sdc::corrected_safe_distance(c, c, {1.0, 1.0, 1.0, 1.0}, 0.01);
  EXPECT_LT(sdc::corrected_safe_distance(c, c, {1.0, 1.05, 1.0, 1.0}, 0.01), base);
  EXPECT_LT(sdc::corrected_safe_distance(c, c, {1.0, 1.0, 0.95, 1.0}, 0.01), base);
  EXPECT_LT(sdc::corrected_safe_distance(c, c, {1.0, 1.0, 1.0, 0.95}, 0.01), base);
  EXPECT_LT(sdc::corrected_safe_distance(c, c, {0.95, 1.0, 1.0, 1.0}, 0.01), base);
}

TEST(Cooperative, RegimeEnforced) {
  const VehicleParams c = car(20.0, 0.4);
  EXPECT_THROW(sdc::corrected_safe_distance(c, c, {1.0, 0.9, 1.0, 1.0}, 0.01), sdc::InvalidDeviation);
  EXPECT_NO_THROW(
      sdc::corrected_safe_distance(c, c, {1.0, 0.9, 1.0, 1.0}, 0.01, sdc::DeviationRegime::Unchecked));
  EXPECT_THROW(sdc::corrected_safe_distance(c, c, DeviationSet::unit(), -0.01), sdc::InvalidParameter);
}
