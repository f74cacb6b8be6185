#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "rrl/network.hpp"
#include "rrl/vehicle.hpp"

namespace oracle {

// Arc length along polyline `pl` at which point p lies, if it lies on it
// (first hit from the start).
inline std::optional<double> locate(const std::vector<rrl::Point>& pl, rrl::Point p, double tol = 1e-7) {
  double base = 0.0;
  for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
    const double dx = pl[i + 1].x - pl[i].x;
    const double dy = pl[i + 1].y - pl[i].y;
    const double len = std::hypot(dx, dy);
    const double t = ((p.x - pl[i].x) * dx + (p.y - pl[i].y) * dy) / (len * len);
    if (t >= -1e-12 && t <= 1.0 + 1e-12) {
      const double qx = pl[i].x + t * dx;
      const double qy = pl[i].y + t * dy;
      if (std::hypot(p.x - qx, p.y - qy) < tol) return base + std::clamp(t, 0.0, 1.0) * len;
    }
    base += len;
  }
  return std::nullopt;
}

struct Found {
  rrl::VehicleId id;
  double gap;
};

// Physical leader by geometry alone: sample every other vehicle's body in the
// plane and project the samples onto the target's polyline. A vehicle is ahead
// when the furthest projected sample is past the target's front bumper; the
// gap runs to the nearest projected sample.
inline std::optional<Found> physical_leader(const std::vector<rrl::VehicleState>& vs, const rrl::VehicleState& target,
                                            const rrl::RouteNetwork& net, int samples = 2000) {
  const auto& pl = net.route(target.route).polyline;
  std::optional<Found> best;
  for (const auto& o : vs) {
    if (o.id == target.id) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int k = 0; k <= samples; ++k) {
      const double s = o.pos - o.length + o.length * k / samples;
      if (s < 0.0) continue;
      const auto at = locate(pl, net.position(o.route, s));
      if (!at) continue;
      lo = std::min(lo, *at);
      hi = std::max(hi, *at);
    }
    if (!(hi > target.pos)) continue;
    const double gap = lo - target.pos;
    if (!best || gap < best->gap) best = Found{o.id, gap};
  }
  return best;
}

}  // namespace oracle
