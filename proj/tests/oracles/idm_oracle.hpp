#pragma once

#include <algorithm>
#include <cmath>

namespace oracle {

// Plain transcription of the car-following law, parameters spelled out.
inline double idm(double v, double dv, double s, double v0, double T, double a, double b, double delta,
                  double s0) {
  const double s_star = s0 + std::max(0.0, v * T + v * dv / (2.0 * std::sqrt(a * b)));
  return a * (1.0 - std::pow(v / v0, delta) - (s_star / s) * (s_star / s));
}

}  // namespace oracle
