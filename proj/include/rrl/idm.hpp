#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rrl/error.hpp"

namespace rrl {

// Intelligent driver model parameters. Defaults are the values used for the
// human-driven vehicles of the roundabout scenario.
struct IdmParams {
  double v0 = 30.0;               // desired speed (m/s)
  double T = 1.0;                 // desired time headway (s)
  double a = 1.0;                 // max acceleration (m/s^2)
  double b = 1.5;                 // comfortable deceleration (m/s^2)
  double delta = 4.0;             // acceleration exponent
  double s0 = 2.0;                // minimum gap (m)
  double accel_noise_std = 0.1;   // std of additive Gaussian acceleration noise (m/s^2)

  void validate() const {
    if (!(a > 0.0)) throw ConfigError("idm.a must be > 0");
    if (!(b > 0.0)) throw ConfigError("idm.b must be > 0");
    if (!(v0 > 0.0)) throw ConfigError("idm.v0 must be > 0");
    if (!(T >= 0.0)) throw ConfigError("idm.T must be >= 0");
    if (!(s0 > 0.0)) throw ConfigError("idm.s0 must be > 0");
    if (!(delta > 0.0)) throw ConfigError("idm.delta must be > 0");
    if (!(accel_noise_std >= 0.0)) throw ConfigError("idm.accel_noise_std must be >= 0");
  }
};

// Speed and acceleration bounds enforced by the integrator.
struct SpeedLimits {
  double v_max = 8.0;
  double max_accel = 1.0;
  double max_decel = -3.0;
};

// Desired dynamic gap s*(v, dv). `dv` is the approach rate v - v_leader.
inline double desired_headway(double v, double dv, const IdmParams& p) {
  return p.s0 + std::max(0.0, v * p.T + v * dv / (2.0 * std::sqrt(p.a * p.b)));
}

// Deterministic IDM acceleration. A gap of +infinity means free road.
inline double idm_acceleration(double v, double dv, double s, const IdmParams& p) {
  if (!(s > 0.0)) {
    throw CollisionHandlingError("idm_acceleration: nonpositive gap " + std::to_string(s));
  }
  const double free_term = std::pow(v / p.v0, p.delta);
  const double interaction = std::isinf(s) ? 0.0 : std::pow(desired_headway(v, dv, p) / s, 2);
  return p.a * (1.0 - free_term - interaction);
}

// IDM acceleration plus the zero-mean Gaussian perturbation when enabled.
// The result is not clamped; that is step_vehicle's job.
template <typename Rng>
double idm_acceleration(double v, double dv, double s, const IdmParams& p, Rng& rng) {
  double acc = idm_acceleration(v, dv, s, p);
  if (p.accel_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, p.accel_noise_std);
    acc += noise(rng);
  }
  return acc;
}

inline constexpr double kFreeRoad = std::numeric_limits<double>::infinity();

}  // namespace rrl
