#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "rrl/error.hpp"
#include "rrl/idm.hpp"
#include "rrl/network.hpp"
#include "rrl/traffic.hpp"
#include "rrl/vehicle.hpp"

namespace rrl {

// Index layout of the 62-element observation.
namespace obs {
inline constexpr int kSize = 62;
inline constexpr int kAvBegin = 0;        // per AV: pos, speed, tailway, headway
inline constexpr int kAvFeatures = 4;
inline constexpr int kNumAvs = 2;
inline constexpr int kRingBegin = 8;      // 13 slots x (pos, speed)
inline constexpr int kRingSlots = 13;
inline constexpr int kEntranceDistBegin = 34;   // north 6, west 6
inline constexpr int kEntranceSpeedBegin = 46;  // north 6, west 6
inline constexpr int kClosest = 6;
inline constexpr int kQueueBegin = 58;    // north, west
inline constexpr int kInflowBegin = 60;   // north, west

inline constexpr int av_index(int av, int feature) { return kAvBegin + av * kAvFeatures + feature; }
inline constexpr int ring_pos_index(int slot) { return kRingBegin + 2 * slot; }
inline constexpr int ring_speed_index(int slot) { return kRingBegin + 2 * slot + 1; }
inline constexpr int entrance_dist_index(RouteId r, int k) {
  return kEntranceDistBegin + route_index(r) * kClosest + k;
}
inline constexpr int entrance_speed_index(RouteId r, int k) {
  return kEntranceSpeedBegin + route_index(r) * kClosest + k;
}
}  // namespace obs

struct ObservationVector {
  std::array<double, obs::kSize> values{};

  double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  std::span<const double> span() const { return values; }
  bool operator==(const ObservationVector&) const = default;
};

// Accelerations for the northern (0) and western (1) AV.
struct ActionCommand {
  std::array<double, 2> accels{};
  bool operator==(const ActionCommand&) const = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct PenaltyWeights {
  double standstill = 1.0;  // c_s
  double crawl = 0.5;       // c_p
  double jerk = 0.2;        // c_j
  double speeding = 1.0;    // c_v
};

enum class AvControl { kRl, kIdm };

// Highest next-step speed v' with v'^2/(2D) + v' dt <= s - min_gap + vl' dt + vl'^2/(2D),
// vl' being the leader's speed after one step of full braking.
inline double safe_speed(double gap, double leader_speed, double dt, double decel, double min_gap) {
  const double vl = std::max(leader_speed - decel * dt, 0.0);
  const double room = gap - min_gap + vl * dt + vl * vl / (2.0 * decel);
  if (room <= 0.0) return 0.0;
  return decel * (-dt + std::sqrt(dt * dt + 2.0 * room / decel));
}

struct EnvConfig {
  IntRange north_group{2, 5};
  IntRange west_group{2, 8};
  Interval north_delay{0.0, 4.0};
  Interval west_delay{0.0, 1.0};
  int horizon = 500;
  double dt = 1.0;
  double v_max = 8.0;
  double max_accel = 1.0;
  double max_decel = -3.0;
  PenaltyWeights penalties;
  IdmParams idm;
  GeometryConfig geometry;
  double vehicle_length = 1.0;
  double staging_gap_extra = 1.0;     // initial bumper gap is s0 + this
  int jerk_window = 10;
  double standstill_speed = 1e-3;
  double crawl_speed = 0.2;
  AvControl av_control = AvControl::kRl;
  // AV commands are capped at a safe speed toward the driving-view leader
  // (stop lines included), like a simulator speed mode that keeps right of way.
  bool av_safe_speed = true;
  double av_min_gap = 1.0;

  SpeedLimits limits() const { return {v_max, max_accel, max_decel}; }
  double staging_spacing() const { return idm.s0 + staging_gap_extra + vehicle_length; }
  int max_group(RouteId r) const { return r == RouteId::kNorth ? north_group.hi : west_group.hi; }

  void validate() const {
    idm.validate();
    auto check_range = [](IntRange r, const char* name) {
      if (r.lo < 1 || r.hi < r.lo) throw ConfigError(std::string(name) + " range is empty");
    };
    check_range(north_group, "north_group");
    check_range(west_group, "west_group");
    if (north_group.hi + west_group.hi > obs::kRingSlots) {
      throw ConfigError("group sizes exceed the roundabout observation slots");
    }
    for (const auto& d : {north_delay, west_delay}) {
      if (!(d.lo >= 0.0 && d.hi >= d.lo)) throw ConfigError("release delay range is empty");
    }
    if (horizon <= 0) throw ConfigError("horizon must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(max_decel < 0.0 && 0.0 < max_accel)) throw ConfigError("need max_decel < 0 < max_accel");
    if (!(v_max > 0.0)) throw ConfigError("v_max must be > 0");
    if (!(vehicle_length > 0.0)) throw ConfigError("vehicle_length must be > 0");
    if (!(staging_gap_extra >= 0.0)) throw ConfigError("staging_gap_extra must be >= 0");
    if (jerk_window < 1) throw ConfigError("jerk_window must be >= 1");
    if (!(av_min_gap >= 0.0)) throw ConfigError("av_min_gap must be >= 0");
    const PenaltyWeights& w = penalties;
    if (w.standstill < 0 || w.crawl < 0 || w.jerk < 0 || w.speeding < 0) {
      throw ConfigError("penalty weights must be >= 0");
    }
    if ((north_group.hi - 1) * staging_spacing() >= geometry.north_approach ||
        (west_group.hi - 1) * staging_spacing() >= geometry.west_approach) {
      throw ConfigError("largest inflow group does not fit on its approach");
    }
  }
};

struct RewardBreakdown {
  double base = 0.0;
  double standstill = 0.0;  // p_s
  double crawl = 0.0;       // p_p
  double jerk = 0.0;        // p_j
  double speeding = 0.0;    // p_v
  double total = 0.0;

  double penalty() const { return standstill + crawl + jerk + speeding; }
  bool operator==(const RewardBreakdown&) const = default;
};

inline double population_variance(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / xs.size();
}

// Delay-minimizing reward with standstill, crawl, jerk and speeding penalties.
// `av_windows` holds the recent applied accelerations of each active AV.
inline RewardBreakdown compute_reward(std::span<const double> speeds,
                                      std::span<const std::vector<double>> av_windows,
                                      const EnvConfig& cfg) {
  RewardBreakdown r;
  const std::size_t n = speeds.size();
  if (n == 0) return r;
  const double vmax = cfg.v_max;
  const double scale = vmax * std::sqrt(static_cast<double>(n));
  double ss = 0.0;
  int stopped = 0;
  int crawling = 0;
  double over = 0.0;
  for (double v : speeds) {
    ss += (v - vmax) * (v - vmax);
    if (v < cfg.standstill_speed) {
      ++stopped;
    } else if (v < cfg.crawl_speed) {
      ++crawling;
    }
    over += std::max(0.0, v - vmax);
  }
  r.base = std::clamp(2.0 * std::max(scale - std::sqrt(ss), 0.0) / scale, 0.0, 2.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  r.standstill = cfg.penalties.standstill * stopped * inv_n;
  r.crawl = cfg.penalties.crawl * crawling * inv_n;
  if (!av_windows.empty()) {
    double var_sum = 0.0;
    for (const auto& w : av_windows) var_sum += population_variance(w);
    r.jerk = cfg.penalties.jerk * var_sum / av_windows.size();
  }
  r.speeding = cfg.penalties.speeding * over * inv_n;
  r.total = r.base - r.penalty();
  return r;
}

enum class AvStatus { kStaged, kActive, kExited };

// Everything build_observation needs, decoupled from the env internals.
struct TrafficSnapshot {
  std::span<const VehicleState> vehicles;
  std::array<int, kNumRoutes> group_sizes{};
  std::array<AvStatus, obs::kNumAvs> av_status{AvStatus::kStaged, AvStatus::kStaged};
  std::array<VehicleId, obs::kNumAvs> av_ids{-1, -1};
};

inline ObservationVector build_observation(const TrafficSnapshot& snap, const RouteNetwork& net,
                                           const EnvConfig& cfg) {
  ObservationVector o;
  const double dist_norm = std::max(net.route(RouteId::kNorth).length, net.route(RouteId::kWest).length);
  auto unit = [](double x) { return std::clamp(x, 0.0, 1.0); };

  for (int av = 0; av < obs::kNumAvs; ++av) {
    const VehicleState* v = snap.av_status[av] == AvStatus::kActive
                                ? detail::find_vehicle(snap.vehicles, snap.av_ids[av])
                                : nullptr;
    double pos = snap.av_status[av] == AvStatus::kExited ? 1.0 : 0.0;
    double speed = 0.0;
    double tail = 1.0;
    double head = 1.0;
    if (v != nullptr) {
      pos = v->pos / net.route(v->route).length;
      speed = v->speed / cfg.v_max;
      if (auto f = follower_of(snap.vehicles, *v, net, LeaderView::kPhysical)) tail = f->gap / dist_norm;
      if (auto l = leader_of(snap.vehicles, *v, net, LeaderView::kDriving)) head = l->gap / dist_norm;
    }
    o[obs::av_index(av, 0)] = unit(pos);
    o[obs::av_index(av, 1)] = unit(speed);
    o[obs::av_index(av, 2)] = unit(tail);
    o[obs::av_index(av, 3)] = unit(head);
  }

  // Roundabout slots in ring-arc order; unused slots stay (0, 0).
  std::vector<std::pair<double, const VehicleState*>> ring;
  for (const auto& v : snap.vehicles) {
    if (net.route(v.route).on_ring(v.pos)) ring.emplace_back(net.ring_coord(v.route, v.pos), &v);
  }
  std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
  });
  for (int s = 0; s < obs::kRingSlots && s < static_cast<int>(ring.size()); ++s) {
    const VehicleState& v = *ring[s].second;
    o[obs::ring_pos_index(s)] = unit(v.pos / net.route(v.route).length);
    o[obs::ring_speed_index(s)] = unit(v.speed / cfg.v_max);
  }

  for (RouteId r : {RouteId::kNorth, RouteId::kWest}) {
    const Route& rt = net.route(r);
    std::vector<std::pair<double, double>> approaching;  // distance, speed
    int queued = 0;
    for (const auto& v : snap.vehicles) {
      if (v.route != r) continue;
      if (rt.on_approach(v.pos)) approaching.emplace_back(rt.merge - v.pos, v.speed);
      if (rt.on_approach(v.pos) && rt.entrance_zone.contains(v.pos)) ++queued;
    }
    std::sort(approaching.begin(), approaching.end());
    for (int k = 0; k < obs::kClosest; ++k) {
      const bool present = k < static_cast<int>(approaching.size());
      o[obs::entrance_dist_index(r, k)] = present ? unit(approaching[k].first / rt.approach_length()) : 1.0;
      o[obs::entrance_speed_index(r, k)] = present ? unit(approaching[k].second / cfg.v_max) : 0.0;
    }
    o[obs::kQueueBegin + route_index(r)] = unit(static_cast<double>(queued) / cfg.max_group(r));
    o[obs::kInflowBegin + route_index(r)] =
        unit(static_cast<double>(snap.group_sizes[route_index(r)]) / cfg.max_group(r));
  }
  return o;
}

struct VehicleSample {
  VehicleId id = 0;
  RouteId route = RouteId::kNorth;
  ControllerKind kind = ControllerKind::kIdm;
  double pos = 0.0;
  double speed = 0.0;
  bool operator==(const VehicleSample&) const = default;
};

struct StepInfo {
  std::vector<CollisionEvent> crashes;
  std::vector<VehicleSample> vehicles;  // post-step active vehicles
  int active_count = 0;
};

struct StepOutcome {
  ObservationVector obs;       // what the agent sees
  ObservationVector true_obs;  // unperturbed
  RewardBreakdown reward;
  bool done = false;
  bool truncated = false;      // done because the horizon was reached
  StepInfo info;
};

struct InflowGroup {
  RouteId route = RouteId::kNorth;
  int size = 0;
  double delay = 0.0;
  bool released = false;
};

class RoundaboutEnv {
 public:
  explicit RoundaboutEnv(EnvConfig cfg) : cfg_(std::move(cfg)), net_(build_network(cfg_.geometry)) {
    cfg_.validate();
  }

  const EnvConfig& config() const { return cfg_; }
  const RouteNetwork& network() const { return net_; }

  ObservationVector reset(std::int64_t seed) {
    if (seed < 0) throw ConfigError("reset: seed must be non-negative");
    rng_.seed(static_cast<std::uint64_t>(seed));
    std::uniform_int_distribution<int> north_size(cfg_.north_group.lo, cfg_.north_group.hi);
    std::uniform_int_distribution<int> west_size(cfg_.west_group.lo, cfg_.west_group.hi);
    std::uniform_real_distribution<double> north_delay(cfg_.north_delay.lo, cfg_.north_delay.hi);
    std::uniform_real_distribution<double> west_delay(cfg_.west_delay.lo, cfg_.west_delay.hi);
    groups_[route_index(RouteId::kNorth)] = {RouteId::kNorth, north_size(rng_), 0.0, false};
    groups_[route_index(RouteId::kWest)] = {RouteId::kWest, west_size(rng_), 0.0, false};
    groups_[route_index(RouteId::kNorth)].delay = north_delay(rng_);
    groups_[route_index(RouteId::kWest)].delay = west_delay(rng_);

    active_.clear();
    finished_.clear();
    crashes_.clear();
    for (auto& h : accel_history_) h.clear();
    av_ids_ = {-1, -1};
    av_status_ = {AvStatus::kStaged, AvStatus::kStaged};
    time_ = 0.0;
    steps_ = 0;
    spawned_ = 0;
    next_id_ = 0;
    done_ = false;
    started_ = true;
    release_due_groups();
    return observe();
  }

  StepOutcome step(const ActionCommand& action) {
    if (!started_) throw ContractError("step called before reset");
    if (done_) throw ContractError("step called on a finished episode");
    for (double a : action.accels) {
      if (!std::isfinite(a)) throw ContractError("step: non-finite action");
    }
    const SpeedLimits limits = cfg_.limits();

    // Accelerations are computed from the pre-step state for every vehicle.
    std::vector<double> accel(active_.size(), 0.0);
    for (std::size_t i = 0; i < active_.size(); ++i) {
      const VehicleState& v = active_[i];
      if (v.is_rl()) {
        const int av = v.kind == ControllerKind::kRlNorth ? 0 : 1;
        double cmd = action.accels[av];
        if (cfg_.av_safe_speed) cmd = std::min(cmd, safe_accel(v));
        const double applied = std::clamp(cmd, limits.max_decel, limits.max_accel);
        accel[i] = applied;
        auto& hist = accel_history_[av];
        hist.push_back(applied);
        if (static_cast<int>(hist.size()) > cfg_.jerk_window) hist.erase(hist.begin());
      } else {
        const auto l = leader_of(active_, v, net_, LeaderView::kDriving);
        double gap = kFreeRoad;
        double dv = 0.0;
        if (l) {
          gap = l->gap;
          // A projected leader is a stop line at the merge point.
          const double leader_speed = l->projected ? 0.0 : detail::find_vehicle(active_, l->id)->speed;
          dv = v.speed - leader_speed;
        }
        accel[i] = idm_acceleration(v.speed, dv, gap, cfg_.idm, rng_);
      }
    }
    for (std::size_t i = 0; i < active_.size(); ++i) {
      active_[i] = step_vehicle(active_[i], accel[i], cfg_.dt, limits);
    }
    time_ += cfg_.dt;
    ++steps_;

    // Route completion.
    for (auto it = active_.begin(); it != active_.end();) {
      const Route& rt = net_.route(it->route);
      if (it->pos >= rt.length) {
        it->pos = rt.length;
        it->exit_time = time_;
        if (it->is_rl()) {
          const int av = it->kind == ControllerKind::kRlNorth ? 0 : 1;
          av_status_[av] = AvStatus::kExited;
          accel_history_[av].clear();
        } else if (it->id == av_ids_[0] || it->id == av_ids_[1]) {
          av_status_[it->id == av_ids_[0] ? 0 : 1] = AvStatus::kExited;
        }
        finished_.push_back(*it);
        it = active_.erase(it);
      } else {
        ++it;
      }
    }
    release_due_groups();

    StepOutcome out;
    out.info.crashes = detect_collisions(active_, net_, time_);
    for (const auto& c : out.info.crashes) {
      for (auto& v : active_) {
        if (v.id == c.follower_id || v.id == c.leader_id) v.crashed = true;
      }
    }
    crashes_.insert(crashes_.end(), out.info.crashes.begin(), out.info.crashes.end());

    std::vector<double> speeds;
    speeds.reserve(active_.size());
    for (const auto& v : active_) {
      speeds.push_back(v.speed);
      out.info.vehicles.push_back({v.id, v.route, v.kind, v.pos, v.speed});
    }
    out.info.active_count = static_cast<int>(active_.size());
    std::vector<std::vector<double>> windows;
    for (int av = 0; av < obs::kNumAvs; ++av) {
      if (av_status_[av] == AvStatus::kActive && !accel_history_[av].empty()) {
        windows.push_back(accel_history_[av]);
      }
    }
    out.reward = compute_reward(speeds, windows, cfg_);

    const bool all_released = groups_[0].released && groups_[1].released;
    const bool all_exited = all_released && active_.empty();
    out.truncated = steps_ >= cfg_.horizon && out.info.crashes.empty() && !all_exited;
    out.done = !out.info.crashes.empty() || all_exited || steps_ >= cfg_.horizon;
    done_ = out.done;
    out.true_obs = observe();
    out.obs = out.true_obs;
    return out;
  }

  ObservationVector observe() const {
    TrafficSnapshot snap;
    snap.vehicles = active_;
    snap.group_sizes = {groups_[0].size, groups_[1].size};
    snap.av_status = av_status_;
    snap.av_ids = av_ids_;
    return build_observation(snap, net_, cfg_);
  }

  bool done() const { return done_; }
  double time() const { return time_; }
  int steps() const { return steps_; }
  int spawned() const { return spawned_; }
  int exited() const { return static_cast<int>(finished_.size()); }
  const std::vector<VehicleState>& active() const { return active_; }
  const std::vector<VehicleState>& finished() const { return finished_; }
  const std::vector<CollisionEvent>& crashes() const { return crashes_; }
  const InflowGroup& group(RouteId r) const { return groups_[route_index(r)]; }
  VehicleId av_id(RouteId r) const { return av_ids_[route_index(r)]; }

  // Replaces the live vehicle set. Intended for constructing test scenes.
  void set_vehicles_for_testing(std::vector<VehicleState> vehicles) {
    active_ = std::move(vehicles);
    groups_[0].released = groups_[1].released = true;
    spawned_ = static_cast<int>(active_.size());
    av_status_ = {AvStatus::kExited, AvStatus::kExited};
    for (const auto& v : active_) {
      if (v.kind == ControllerKind::kRlNorth) { av_ids_[0] = v.id; av_status_[0] = AvStatus::kActive; }
      if (v.kind == ControllerKind::kRlWest) { av_ids_[1] = v.id; av_status_[1] = AvStatus::kActive; }
      next_id_ = std::max(next_id_, v.id + 1);
    }
    started_ = true;
    done_ = false;
  }

 private:
  // Largest acceleration after which the AV could still stop behind its
  // driving leader if that leader brakes as hard as allowed. On the approach
  // the merge line also counts as a stop line unless the AV would clear the
  // merge yield_time before the next crossing vehicle arrives there (or can no
  // longer stop before it).
  double safe_accel(const VehicleState& v) const {
    const double decel = -cfg_.max_decel;
    double cap = cfg_.v_max;
    if (const auto l = leader_of(active_, v, net_, LeaderView::kDriving)) {
      const double leader_speed = l->projected ? 0.0 : detail::find_vehicle(active_, l->id)->speed;
      cap = safe_speed(l->gap, leader_speed, cfg_.dt, decel, cfg_.av_min_gap);
    }
    const Route& own = net_.route(v.route);
    const double to_line = own.merge - v.pos;
    if (own.on_approach(v.pos) && to_line > 0.0) {
      const double line_cap = safe_speed(to_line, 0.0, cfg_.dt, decel, 0.0);
      const bool committed = line_cap < v.speed - decel * cfg_.dt;
      if (!committed && line_cap < cap && foe_conflict(v, to_line)) cap = line_cap;
    }
    return (cap - v.speed) / cfg_.dt;
  }

  bool foe_conflict(const VehicleState& v, double to_line) const {
    const Route& own = net_.route(v.route);
    const double clear = net_.arrival_time(to_line + v.length, v.speed);
    for (const auto& o : active_) {
      if (o.route == v.route) continue;
      const auto at = net_.ring_offset_on_route(o.route, own.ring_entry);
      if (!at) continue;
      const double upstream = net_.route(o.route).merge + *at - o.pos;
      if (upstream <= 0.0) continue;
      if (net_.arrival_time(upstream, o.speed) <= clear + net_.yield_time()) return true;
    }
    return false;
  }


  void release_due_groups() {
    for (auto& g : groups_) {
      if (g.released || g.delay > time_) continue;
      g.released = true;
      const int av = route_index(g.route);
      const double spacing = cfg_.staging_spacing();
      for (int k = 0; k < g.size; ++k) {
        VehicleState v;
        v.id = next_id_++;
        v.route = g.route;
        v.pos = (g.size - 1 - k) * spacing;
        v.speed = 0.0;
        v.length = cfg_.vehicle_length;
        v.entry_time = time_;
        if (k == 0) {
          av_ids_[av] = v.id;
          av_status_[av] = AvStatus::kActive;
          if (cfg_.av_control == AvControl::kRl) {
            v.kind = g.route == RouteId::kNorth ? ControllerKind::kRlNorth : ControllerKind::kRlWest;
          }
        }
        active_.push_back(v);
        ++spawned_;
      }
    }
  }

  EnvConfig cfg_;
  RouteNetwork net_;
  std::mt19937_64 rng_;
  std::array<InflowGroup, kNumRoutes> groups_{};
  std::vector<VehicleState> active_;
  std::vector<VehicleState> finished_;
  std::vector<CollisionEvent> crashes_;
  std::array<std::vector<double>, obs::kNumAvs> accel_history_;
  std::array<VehicleId, obs::kNumAvs> av_ids_{-1, -1};
  std::array<AvStatus, obs::kNumAvs> av_status_{AvStatus::kStaged, AvStatus::kStaged};
  double time_ = 0.0;
  int steps_ = 0;
  int spawned_ = 0;
  VehicleId next_id_ = 0;
  bool done_ = false;
  bool started_ = false;
};

}  // namespace rrl
