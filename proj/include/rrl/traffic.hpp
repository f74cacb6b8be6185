#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rrl/network.hpp"
#include "rrl/vehicle.hpp"

namespace rrl {

// kPhysical: only vehicles whose body lies on the target's future path.
// kDriving: additionally, while the target is on its approach, other-route
// traffic that will cross the target's merge point soon (within the yield
// lookback distance and able to get there within the yield time) is projected
// onto the merge point as a stop line. This is what makes approaching vehicles
// yield to the ring.
enum class LeaderView { kPhysical, kDriving };

struct Neighbor {
  VehicleId id = 0;
  double gap = 0.0;        // bumper to bumper (m); distance to the merge line when projected
  bool projected = false;  // ring traffic standing in as a stop line at the merge point
};

struct CollisionEvent {
  double time = 0.0;
  VehicleId follower_id = 0;
  VehicleId leader_id = 0;
  double gap = 0.0;
  bool operator==(const CollisionEvent&) const = default;
};

namespace detail {

inline bool ahead_on_tie(double d, const VehicleState& target, const VehicleState& other) {
  return d > 0.0 || (d == 0.0 && other.id < target.id);
}

// `other` as seen from the target: on (or projected onto) the target's future
// path, with the bumper gap to it.
inline std::optional<Neighbor> candidate(const RouteNetwork& net, const VehicleState& target,
                                         const VehicleState& other, LeaderView view) {
  if (other.id == target.id) return std::nullopt;
  if (other.route == target.route) {
    const double d = other.pos - target.pos;
    if (ahead_on_tie(d, target, other)) return Neighbor{other.id, d - other.length, false};
    return std::nullopt;
  }
  const Route& own = net.route(target.route);
  const Route& theirs = net.route(other.route);

  // Part of the body on the ring that also lies on the target's ring arc,
  // as target route coordinates [lo, hi].
  const double body_lo = std::max(other.pos - other.length, theirs.merge);
  const double body_hi = std::min(other.pos, theirs.merge + theirs.ring_length);
  if (body_lo <= body_hi) {
    const double width = body_hi - body_lo;
    double lo = net.ring_offset(own.ring_entry, net.ring_coord(other.route, body_lo));
    if (lo + width > net.ring_circumference()) lo -= net.ring_circumference();  // straddles the target's ring entry
    const double on_lo = std::max(lo, 0.0);
    const double on_hi = std::min(lo + width, own.ring_length);
    if (on_lo <= on_hi) {
      const double d = own.merge + on_hi - target.pos;
      if (!ahead_on_tie(d, target, other)) return std::nullopt;
      return Neighbor{other.id, own.merge + on_lo - target.pos, false};
    }
  }

  if (view != LeaderView::kDriving || !own.on_approach(target.pos)) return std::nullopt;
  // Path distance until `other` crosses the target's merge point, if it ever does.
  const auto merge_on_theirs = net.ring_offset_on_route(other.route, own.ring_entry);
  if (!merge_on_theirs) return std::nullopt;
  const double upstream = theirs.merge + *merge_on_theirs - other.pos;
  if (!(upstream > 0.0 && upstream <= net.yield_lookback())) return std::nullopt;
  if (net.arrival_time(upstream, other.speed) > net.yield_time()) return std::nullopt;
  return Neighbor{other.id, own.merge - target.pos, true};
}

inline const VehicleState* find_vehicle(std::span<const VehicleState> vehicles, VehicleId id) {
  for (const auto& v : vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

}  // namespace detail

inline std::optional<Neighbor> leader_of(std::span<const VehicleState> vehicles,
                                         const VehicleState& target, const RouteNetwork& net,
                                         LeaderView view = LeaderView::kDriving) {
  std::optional<Neighbor> best;
  for (const auto& other : vehicles) {
    const auto n = detail::candidate(net, target, other, view);
    if (!n) continue;
    if (!best || n->gap < best->gap || (n->gap == best->gap && n->id < best->id)) best = n;
  }
  return best;
}

inline std::optional<Neighbor> leader_of(std::span<const VehicleState> vehicles, VehicleId target,
                                         const RouteNetwork& net,
                                         LeaderView view = LeaderView::kDriving) {
  const VehicleState* t = detail::find_vehicle(vehicles, target);
  if (t == nullptr) throw ContractError("leader_of: target is not active");
  return leader_of(vehicles, *t, net, view);
}

// Nearest vehicle whose leader is the target; gap is the follower's headway.
inline std::optional<Neighbor> follower_of(std::span<const VehicleState> vehicles,
                                           const VehicleState& target, const RouteNetwork& net,
                                           LeaderView view = LeaderView::kPhysical) {
  std::optional<Neighbor> best;
  for (const auto& other : vehicles) {
    if (other.id == target.id) continue;
    const auto l = leader_of(vehicles, other, net, view);
    if (!l || l->id != target.id) continue;
    if (!best || l->gap < best->gap) best = Neighbor{other.id, l->gap, l->projected};
  }
  return best;
}

inline std::vector<CollisionEvent> detect_collisions(std::span<const VehicleState> vehicles,
                                                     const RouteNetwork& net, double time = 0.0) {
  std::vector<CollisionEvent> events;
  for (const auto& f : vehicles) {
    const auto l = leader_of(vehicles, f, net, LeaderView::kPhysical);
    if (l && l->gap <= 0.0) events.push_back({time, f.id, l->id, l->gap});
  }
  return events;
}

}  // namespace rrl
