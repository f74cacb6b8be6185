#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "rrl/error.hpp"
#include "rrl/vehicle.hpp"

namespace rrl {

// Dimensions of the two-entry roundabout. Ring coordinates run from 0 to
// ring_circumference in the direction of travel.
struct GeometryConfig {
  double north_approach = 25.0;
  double north_ring = 35.0;
  double north_exit = 20.0;
  double west_approach = 30.0;
  double west_ring = 40.0;
  double west_exit = 25.0;
  double ring_circumference = 60.0;
  double north_ring_entry = 10.0;
  double west_ring_entry = 0.0;
  double entrance_zone = 15.0;
  // Other-route traffic within this path distance upstream of a merge point
  // blocks the merge.
  double yield_lookback = 20.0;
  // ... and only if it could get there within this many seconds, accelerating
  // at yield_accel from its current speed.
  double yield_time = 3.0;
  double yield_accel = 1.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

struct Route {
  RouteId id = RouteId::kNorth;
  std::vector<Point> polyline;
  double length = 0.0;
  double merge = 0.0;        // route arc length where the route joins the ring
  double ring_entry = 0.0;   // ring coordinate of the merge point
  double ring_length = 0.0;
  Interval entrance_zone;    // queue-counting interval, ends at `merge`

  double approach_length() const { return merge; }
  double ring_exit_pos() const { return merge + ring_length; }
  bool on_approach(double pos) const { return pos < merge; }
  bool on_ring(double pos) const { return pos >= merge && pos <= ring_exit_pos(); }
};

class RouteNetwork {
 public:
  const Route& route(RouteId r) const { return routes_[route_index(r)]; }
  const std::array<Route, kNumRoutes>& routes() const { return routes_; }
  double ring_circumference() const { return circumference_; }
  double yield_lookback() const { return yield_lookback_; }
  double yield_time() const { return yield_time_; }

  // Time to cover `distance` from `speed` under constant yield acceleration.
  double arrival_time(double distance, double speed) const {
    if (distance <= 0.0) return 0.0;
    return (-speed + std::sqrt(speed * speed + 2.0 * yield_accel_ * distance)) / yield_accel_;
  }

  // Forward distance along the ring from coordinate `from` to `to`.
  double ring_offset(double from, double to) const {
    double d = std::fmod(to - from, circumference_);
    if (d < 0.0) d += circumference_;
    return d;
  }

  double ring_coord(RouteId r, double pos) const {
    const Route& rt = route(r);
    return ring_offset(0.0, rt.ring_entry + (pos - rt.merge));
  }

  // Ring offset of coordinate `c` past route r's merge, if r's ring arc covers it.
  std::optional<double> ring_offset_on_route(RouteId r, double c) const {
    const Route& rt = route(r);
    const double o = ring_offset(rt.ring_entry, c);
    if (o <= rt.ring_length + 1e-12) return o;
    return std::nullopt;
  }

  Point ring_point(double c) const {
    const int n = ring_vertices_;
    const double side = circumference_ / n;
    c = ring_offset(0.0, c);
    int k = static_cast<int>(std::floor(c / side));
    if (k >= n) k = n - 1;
    const double f = (c - k * side) / side;
    const Point a = vertex(k);
    const Point b = vertex((k + 1) % n);
    return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
  }

  // Physical position of arc length `pos` along a route.
  Point position(RouteId r, double pos) const {
    const auto& pl = route(r).polyline;
    double remaining = std::max(pos, 0.0);
    for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
      const double seg = std::hypot(pl[i + 1].x - pl[i].x, pl[i + 1].y - pl[i].y);
      if (remaining <= seg || i + 2 == pl.size()) {
        const double f = seg > 0.0 ? std::min(remaining / seg, 1.0) : 0.0;
        return {pl[i].x + f * (pl[i + 1].x - pl[i].x), pl[i].y + f * (pl[i + 1].y - pl[i].y)};
      }
      remaining -= seg;
    }
    return pl.back();
  }

  friend RouteNetwork build_network(const GeometryConfig& g);

 private:
  Point vertex(int k) const {
    const double theta = 2.0 * std::numbers::pi * k / ring_vertices_;
    return {ring_radius_ * std::cos(theta), ring_radius_ * std::sin(theta)};
  }

  std::array<Route, kNumRoutes> routes_;
  double circumference_ = 0.0;
  double ring_radius_ = 0.0;
  int ring_vertices_ = 0;
  double yield_lookback_ = 0.0;
  double yield_time_ = 0.0;
  double yield_accel_ = 1.0;
};

inline double polyline_length(const std::vector<Point>& pl) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
    total += std::hypot(pl[i + 1].x - pl[i].x, pl[i + 1].y - pl[i].y);
  }
  return total;
}

inline RouteNetwork build_network(const GeometryConfig& g) {
  const double lengths[] = {g.north_approach, g.north_ring, g.north_exit,
                            g.west_approach,  g.west_ring,  g.west_exit};
  for (double l : lengths) {
    if (!(l > 0.0)) throw ConfigError("geometry: every route segment must have positive length");
  }
  const double c = g.ring_circumference;
  if (!(c > 0.0)) throw ConfigError("geometry: ring circumference must be > 0");
  if (!(g.north_ring < c) || !(g.west_ring < c)) {
    throw ConfigError("geometry: inconsistent ring mapping, ring arc longer than the ring");
  }
  for (double e : {g.north_ring_entry, g.west_ring_entry}) {
    if (!(e >= 0.0 && e < c)) throw ConfigError("geometry: ring entry outside [0, circumference)");
  }
  if (!(g.entrance_zone > 0.0) || g.entrance_zone > std::min(g.north_approach, g.west_approach)) {
    throw ConfigError("geometry: entrance zone must lie within both approaches");
  }
  if (!(g.yield_lookback >= 0.0)) throw ConfigError("geometry: yield_lookback must be >= 0");
  if (!(g.yield_time >= 0.0)) throw ConfigError("geometry: yield_time must be >= 0");
  if (!(g.yield_accel > 0.0)) throw ConfigError("geometry: yield_accel must be > 0");

  RouteNetwork net;
  net.circumference_ = c;
  net.yield_lookback_ = g.yield_lookback;
  net.yield_time_ = g.yield_time;
  net.yield_accel_ = g.yield_accel;
  net.ring_vertices_ = std::max(8, static_cast<int>(std::lround(c)));
  const double side = c / net.ring_vertices_;
  net.ring_radius_ = side / (2.0 * std::sin(std::numbers::pi / net.ring_vertices_));

  const double fwd_no = net.ring_offset(g.north_ring_entry, g.west_ring_entry);
  const double fwd_wn = net.ring_offset(g.west_ring_entry, g.north_ring_entry);
  if (!(fwd_no < g.north_ring || fwd_wn < g.west_ring)) {
    throw ConfigError("geometry: inconsistent ring mapping, the routes share no ring arc");
  }

  auto make_route = [&](RouteId id, double approach, double ring, double exit, double entry) {
    Route r;
    r.id = id;
    r.merge = approach;
    r.ring_entry = entry;
    r.ring_length = ring;
    r.entrance_zone = {approach - g.entrance_zone, approach};

    const Point e = net.ring_point(entry);
    const double er = std::hypot(e.x, e.y);
    r.polyline.push_back({e.x + e.x / er * approach, e.y + e.y / er * approach});
    r.polyline.push_back(e);
    // Ring vertices strictly inside the arc, then the exit point.
    const double first = std::floor(entry / side) + 1.0;
    for (double k = first; k * side < entry + ring - 1e-9; k += 1.0) {
      r.polyline.push_back(net.ring_point(k * side));
    }
    const Point x = net.ring_point(entry + ring);
    const double xr = std::hypot(x.x, x.y);
    r.polyline.push_back(x);
    r.polyline.push_back({x.x + x.x / xr * exit, x.y + x.y / xr * exit});
    r.length = approach + ring + exit;
    return r;
  };

  net.routes_[route_index(RouteId::kNorth)] =
      make_route(RouteId::kNorth, g.north_approach, g.north_ring, g.north_exit, g.north_ring_entry);
  net.routes_[route_index(RouteId::kWest)] =
      make_route(RouteId::kWest, g.west_approach, g.west_ring, g.west_exit, g.west_ring_entry);
  return net;
}

}  // namespace rrl
