#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string_view>

#include "rrl/idm.hpp"

namespace rrl {

enum class RouteId : int { kNorth = 0, kWest = 1 };
inline constexpr int kNumRoutes = 2;

inline constexpr int route_index(RouteId r) { return static_cast<int>(r); }

inline constexpr std::string_view route_name(RouteId r) {
  return r == RouteId::kNorth ? "north" : "west";
}

enum class ControllerKind : int { kIdm = 0, kRlNorth = 1, kRlWest = 2 };

inline constexpr std::string_view kind_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::kRlNorth: return "rl_north";
    case ControllerKind::kRlWest: return "rl_west";
    default: return "idm";
  }
}

using VehicleId = std::int32_t;

struct VehicleState {
  VehicleId id = 0;
  RouteId route = RouteId::kNorth;
  double pos = 0.0;      // arc length of the front bumper along the route (m)
  double speed = 0.0;    // m/s
  double length = 1.0;   // m
  ControllerKind kind = ControllerKind::kIdm;
  double entry_time = 0.0;
  std::optional<double> exit_time;
  bool crashed = false;  // frozen after a collision

  bool is_rl() const { return kind != ControllerKind::kIdm; }
  double rear() const { return pos - length; }
};

// Semi-implicit Euler: the clamped acceleration updates speed first, the new
// speed then advances the position.
inline VehicleState step_vehicle(VehicleState state, double accel, double dt,
                                 const SpeedLimits& limits) {
  if (!(dt > 0.0)) throw ContractError("step_vehicle: dt must be > 0");
  const double applied = std::clamp(accel, limits.max_decel, limits.max_accel);
  state.speed = std::clamp(state.speed + applied * dt, 0.0, limits.v_max);
  state.pos += state.speed * dt;
  return state;
}

}  // namespace rrl
