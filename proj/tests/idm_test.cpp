#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles/idm_oracle.hpp"
#include "rrl/idm.hpp"
#include "rrl/vehicle.hpp"

using namespace rrl;

namespace {

double oracle_idm(double v, double dv, double s, const IdmParams& p) {
  return oracle::idm(v, dv, s, p.v0, p.T, p.a, p.b, p.delta, p.s0);
}

}  // namespace

TEST(DesiredHeadway, Examples) {
  const IdmParams p;
  EXPECT_DOUBLE_EQ(desired_headway(0, 0, p), 2.0);
  EXPECT_DOUBLE_EQ(desired_headway(2, 0, p), 4.0);
  EXPECT_DOUBLE_EQ(desired_headway(2, -10, p), 2.0);
}

TEST(DesiredHeadway, NeverBelowMinimumGap) {
  const IdmParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0, 30), dv(-30, 30);
  for (int i = 0; i < 10000; ++i) EXPECT_GE(desired_headway(v(rng), dv(rng), p), p.s0);
}

TEST(IdmAcceleration, FreeRoadAtRestIsMaxAcceleration) {
  const IdmParams p;
  EXPECT_NEAR(idm_acceleration(0, 0, 1e9, p), 1.0, 1e-9);
  EXPECT_EQ(idm_acceleration(0, 0, kFreeRoad, p), 1.0);
}

TEST(IdmAcceleration, FreeRoadEquilibrium) {
  const IdmParams p;
  EXPECT_NEAR(idm_acceleration(30, 0, 1e9, p), 0.0, 1e-9);
  EXPECT_EQ(idm_acceleration(30, 0, kFreeRoad, p), 0.0);
  EXPECT_GT(idm_acceleration(29, 0, kFreeRoad, p), 0.0);
  EXPECT_LT(idm_acceleration(31, 0, kFreeRoad, p), 0.0);
}

TEST(IdmAcceleration, HandEvaluatedCase) {
  const IdmParams p;
  // 1 - (5/30)^4 - (7/10)^2
  EXPECT_NEAR(idm_acceleration(5, 0, 10, p), 0.50915, 1e-4);
  EXPECT_NEAR(idm_acceleration(5, 0, 10, p), 1.0 - 1.0 / 1296.0 - 0.49, 1e-15);
}

TEST(IdmAcceleration, MatchesOracle) {
  const IdmParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> v(0, 8), dv(-8, 8), s(0.01, 100);
  for (int i = 0; i < 10000; ++i) {
    const double a = v(rng), b = dv(rng), c = s(rng);
    EXPECT_NEAR(idm_acceleration(a, b, c, p), oracle_idm(a, b, c, p), 1e-12);
  }
}

TEST(IdmAcceleration, StrictlyIncreasingInGap) {
  const IdmParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(0, 8), dv(-8, 8), s(0.1, 50);
  for (int i = 0; i < 5000; ++i) {
    const double a = v(rng), b = dv(rng), g = s(rng);
    EXPECT_LT(idm_acceleration(a, b, g, p), idm_acceleration(a, b, g * 1.01, p));
  }
}

TEST(IdmAcceleration, NonPositiveGapIsAnError) {
  const IdmParams p;
  EXPECT_THROW(idm_acceleration(1, 0, 0.0, p), CollisionHandlingError);
  EXPECT_THROW(idm_acceleration(1, 0, -0.5, p), CollisionHandlingError);
}

TEST(IdmAcceleration, NoiseIsZeroMeanWithConfiguredStd) {
  const IdmParams p;
  std::mt19937_64 rng(8);
  const double base = idm_acceleration(3, 0, 20, p);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double d = idm_acceleration(3, 0, 20, p, rng) - base;
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 3 * 0.1 / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 0.1, 0.005);
}

TEST(IdmParamsTest, Validation) {
  IdmParams p;
  EXPECT_NO_THROW(p.validate());
  p.a = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.s0 = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.accel_noise_std = -1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.T = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(StepVehicle, Examples) {
  const SpeedLimits lim;
  VehicleState v;
  v.pos = 5;
  v.speed = 0;
  auto w = step_vehicle(v, -1, 1, lim);
  EXPECT_EQ(w.speed, 0.0);
  EXPECT_EQ(w.pos, 5.0);

  v.speed = 7.5;
  w = step_vehicle(v, 1, 1, lim);
  EXPECT_EQ(w.speed, 8.0);
  EXPECT_EQ(w.pos, 13.0);

  v.speed = 4;
  w = step_vehicle(v, 0, 1, lim);
  EXPECT_EQ(w.pos, 9.0);
}

TEST(StepVehicle, StaysWithinLimits) {
  const SpeedLimits lim;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> sp(0, 8), acc(-20, 20);
  for (int i = 0; i < 10000; ++i) {
    VehicleState v;
    v.speed = sp(rng);
    const double a = acc(rng);
    const auto w = step_vehicle(v, a, 1, lim);
    EXPECT_GE(w.speed, 0.0);
    EXPECT_LE(w.speed, 8.0);
    EXPECT_GE(w.speed - v.speed, lim.max_decel - 1e-12);
    EXPECT_LE(w.speed - v.speed, lim.max_accel + 1e-12);
  }
}

TEST(StepVehicle, RejectsNonPositiveDt) {
  EXPECT_THROW(step_vehicle(VehicleState{}, 0, 0, SpeedLimits{}), ContractError);
}
