#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "rrl/env.hpp"

using namespace rrl;

namespace {

VehicleState car(VehicleId id, RouteId r, double pos, double speed = 0.0,
                 ControllerKind kind = ControllerKind::kIdm) {
  VehicleState v;
  v.id = id;
  v.route = r;
  v.pos = pos;
  v.speed = speed;
  v.kind = kind;
  return v;
}

void expect_unit(const ObservationVector& o) {
  for (int i = 0; i < obs::kSize; ++i) {
    EXPECT_GE(o[i], 0.0) << i;
    EXPECT_LE(o[i], 1.0) << i;
  }
}

}  // namespace

// ---- reward ----

TEST(Reward, AllAtMaxSpeed) {
  const EnvConfig cfg;
  const std::vector<double> v(4, 8.0);
  const auto r = compute_reward(v, {}, cfg);
  EXPECT_EQ(r.base, 2.0);
  EXPECT_EQ(r.total, 2.0);
}

TEST(Reward, AllStopped) {
  const EnvConfig cfg;
  const std::vector<double> v(5, 0.0);
  const auto r = compute_reward(v, {}, cfg);
  EXPECT_EQ(r.base, 0.0);
  EXPECT_EQ(r.standstill, 1.0);
  EXPECT_LE(r.total, 0.0);
}

TEST(Reward, SingleVehicleAtHalfSpeed) {
  EnvConfig cfg;
  cfg.penalties = {0, 0, 0, 0};
  const std::vector<double> v{4.0};
  const auto r = compute_reward(v, {}, cfg);
  EXPECT_NEAR(r.base, 1.0, 1e-12);
  EXPECT_NEAR(r.total, 1.0, 1e-12);
}

TEST(Reward, NoVehiclesGivesZero) {
  const auto r = compute_reward({}, {}, EnvConfig{});
  EXPECT_EQ(r, RewardBreakdown{});
}

TEST(Reward, PenaltiesAreDisjointAndWeighted) {
  const EnvConfig cfg;
  // stopped, crawling, crawling, moving, speeding
  const std::vector<double> v{0.0, 1e-3, 0.19, 5.0, 9.0};
  const auto r = compute_reward(v, {}, cfg);
  EXPECT_DOUBLE_EQ(r.standstill, 1.0 * 1 / 5);
  EXPECT_DOUBLE_EQ(r.crawl, 0.5 * 2 / 5);
  EXPECT_DOUBLE_EQ(r.speeding, 1.0 * 1.0 / 5);
  EXPECT_EQ(r.jerk, 0.0);
  EXPECT_DOUBLE_EQ(r.total, r.base - r.penalty());
}

TEST(Reward, JerkIsMeanPopulationVarianceOfAvWindows) {
  const EnvConfig cfg;
  const std::vector<double> v{8.0};
  const std::vector<std::vector<double>> windows{{1.0, -1.0}, {0.5, 0.5, 0.5}};
  const auto r = compute_reward(v, windows, cfg);
  EXPECT_DOUBLE_EQ(r.jerk, 0.2 * (1.0 + 0.0) / 2);
}

TEST(Reward, BaseBoundedAndTotalBelowBase) {
  const EnvConfig cfg;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> n(1, 13);
  std::uniform_real_distribution<double> sp(0, 8);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> v(n(rng));
    for (double& x : v) x = sp(rng);
    const std::vector<std::vector<double>> w{{sp(rng), sp(rng)}};
    const auto r = compute_reward(v, w, cfg);
    EXPECT_GE(r.base, 0.0);
    EXPECT_LE(r.base, 2.0);
    EXPECT_LE(r.total, r.base);
  }
}

// ---- configuration ----

TEST(EnvConfigTest, Validation) {
  EnvConfig c;
  EXPECT_NO_THROW(c.validate());
  c.north_group = {3, 2};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.horizon = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_decel = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.v_max = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.west_group = {2, 9};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.north_delay = {1, 0};
  EXPECT_THROW(c.validate(), ConfigError);
}

// ---- reset ----

TEST(Reset, IsDeterministic) {
  RoundaboutEnv a{EnvConfig{}}, b{EnvConfig{}};
  for (int s = 0; s < 50; ++s) {
    EXPECT_EQ(a.reset(s), b.reset(s));
    EXPECT_EQ(a.group(RouteId::kNorth).size, b.group(RouteId::kNorth).size);
    EXPECT_EQ(a.group(RouteId::kWest).delay, b.group(RouteId::kWest).delay);
  }
}

TEST(Reset, NegativeSeedIsRejected) {
  RoundaboutEnv env{EnvConfig{}};
  EXPECT_THROW(env.reset(-1), ConfigError);
}

TEST(Reset, GroupSizeAndDelayDistributions) {
  RoundaboutEnv env{EnvConfig{}};
  const int n = 10000;
  std::map<int, int> north, west;
  double nd_min = 1e9, nd_max = -1, wd_min = 1e9, wd_max = -1;
  for (int s = 0; s < n; ++s) {
    env.reset(s);
    north[env.group(RouteId::kNorth).size]++;
    west[env.group(RouteId::kWest).size]++;
    nd_min = std::min(nd_min, env.group(RouteId::kNorth).delay);
    nd_max = std::max(nd_max, env.group(RouteId::kNorth).delay);
    wd_min = std::min(wd_min, env.group(RouteId::kWest).delay);
    wd_max = std::max(wd_max, env.group(RouteId::kWest).delay);
  }
  ASSERT_EQ(north.size(), 4u);
  double chi2 = 0;
  for (int k = 2; k <= 5; ++k) {
    EXPECT_NEAR(north[k] / double(n), 0.25, 0.02) << k;
    chi2 += std::pow(north[k] - n / 4.0, 2) / (n / 4.0);
  }
  EXPECT_LT(chi2, 16.27);  // 3 dof, p = 0.001
  ASSERT_EQ(west.size(), 7u);
  for (int k = 2; k <= 8; ++k) EXPECT_NEAR(west[k] / double(n), 1.0 / 7, 0.02) << k;
  EXPECT_GE(nd_min, 0.0);
  EXPECT_LE(nd_max, 4.0);
  EXPECT_GT(nd_max, 3.9);
  EXPECT_GE(wd_min, 0.0);
  EXPECT_LE(wd_max, 1.0);
}

TEST(Reset, GroupsAreStagedWithAnAvAtTheHead) {
  RoundaboutEnv env{EnvConfig{}};
  for (int s = 0; s < 200; ++s) {
    const auto o = env.reset(s);
    expect_unit(o);
    for (RouteId r : {RouteId::kNorth, RouteId::kWest}) {
      if (!env.group(r).released) continue;
      std::vector<VehicleState> mine;
      for (const auto& v : env.active()) {
        if (v.route == r) mine.push_back(v);
      }
      ASSERT_EQ(static_cast<int>(mine.size()), env.group(r).size);
      const auto head = *std::max_element(mine.begin(), mine.end(),
                                          [](const auto& a, const auto& b) { return a.pos < b.pos; });
      EXPECT_EQ(head.id, env.av_id(r));
      EXPECT_TRUE(head.is_rl());
      EXPECT_DOUBLE_EQ(head.pos, (mine.size() - 1) * 4.0);
      for (const auto& v : mine) {
        EXPECT_EQ(v.speed, 0.0);
        if (v.id != head.id) {
          EXPECT_FALSE(v.is_rl());
        }
      }
    }
  }
}

TEST(Reset, DelayedGroupIsReleasedLater) {
  RoundaboutEnv env{EnvConfig{}};
  int s = 0;
  while (true) {
    env.reset(s);
    if (env.group(RouteId::kNorth).delay > 2.0) break;
    ++s;
  }
  EXPECT_FALSE(env.group(RouteId::kNorth).released);
  EXPECT_EQ(env.observe()[obs::av_index(0, 0)], 0.0);
  while (!env.group(RouteId::kNorth).released) env.step({});
  EXPECT_GE(env.time(), env.group(RouteId::kNorth).delay);
  EXPECT_LT(env.time() - 1.0, env.group(RouteId::kNorth).delay);
  for (const auto& v : env.active()) {
    if (v.route == RouteId::kNorth) {
      EXPECT_EQ(v.entry_time, env.time());
    }
  }
}

// ---- observation ----

TEST(Observation, SpeedIsNormalizedByMaxSpeed) {
  const EnvConfig cfg;
  const auto net = build_network(cfg.geometry);
  std::vector<VehicleState> vs{car(0, RouteId::kNorth, 10, 4.0, ControllerKind::kRlNorth)};
  TrafficSnapshot snap;
  snap.vehicles = vs;
  snap.av_ids = {0, -1};
  snap.av_status = {AvStatus::kActive, AvStatus::kStaged};
  snap.group_sizes = {1, 0};
  const auto o = build_observation(snap, net, cfg);
  EXPECT_EQ(o[obs::av_index(0, 1)], 0.5);
  EXPECT_EQ(o[obs::av_index(0, 0)], 10.0 / 80.0);
  // No neighbours: tailway and headway are at their far pad.
  EXPECT_EQ(o[obs::av_index(0, 2)], 1.0);
  EXPECT_EQ(o[obs::av_index(0, 3)], 1.0);
  EXPECT_EQ(o[obs::entrance_speed_index(RouteId::kNorth, 0)], 0.5);
  EXPECT_EQ(o[obs::kInflowBegin], 1.0 / 5.0);
}

TEST(Observation, EmptyRoundaboutPadsSlotsWithZeros) {
  const EnvConfig cfg;
  const auto net = build_network(cfg.geometry);
  std::vector<VehicleState> vs{car(0, RouteId::kNorth, 10), car(1, RouteId::kWest, 5)};
  TrafficSnapshot snap;
  snap.vehicles = vs;
  const auto o = build_observation(snap, net, cfg);
  for (int s = 0; s < obs::kRingSlots; ++s) {
    EXPECT_EQ(o[obs::ring_pos_index(s)], 0.0);
    EXPECT_EQ(o[obs::ring_speed_index(s)], 0.0);
  }
}

TEST(Observation, ShortEntranceListIsPaddedFar) {
  const EnvConfig cfg;
  const auto net = build_network(cfg.geometry);
  std::vector<VehicleState> vs{car(0, RouteId::kWest, 20, 2.0), car(1, RouteId::kWest, 14, 1.0),
                               car(2, RouteId::kWest, 2), car(3, RouteId::kWest, 50, 6.0)};
  TrafficSnapshot snap;
  snap.vehicles = vs;
  snap.group_sizes = {0, 4};
  const auto o = build_observation(snap, net, cfg);
  EXPECT_EQ(o[obs::entrance_dist_index(RouteId::kWest, 0)], 10.0 / 30.0);
  EXPECT_EQ(o[obs::entrance_dist_index(RouteId::kWest, 1)], 16.0 / 30.0);
  EXPECT_EQ(o[obs::entrance_dist_index(RouteId::kWest, 2)], 28.0 / 30.0);
  for (int k = 3; k < 6; ++k) {
    EXPECT_EQ(o[obs::entrance_dist_index(RouteId::kWest, k)], 1.0);
    EXPECT_EQ(o[obs::entrance_speed_index(RouteId::kWest, k)], 0.0);
  }
  EXPECT_EQ(o[obs::entrance_speed_index(RouteId::kWest, 0)], 0.25);
  // Only the vehicle at 20 is inside the last 15 m.
  EXPECT_EQ(o[obs::kQueueBegin + 1], 1.0 / 8.0);
  // The vehicle on the ring takes the first slot.
  EXPECT_EQ(o[obs::ring_pos_index(0)], 50.0 / 95.0);
  EXPECT_EQ(o[obs::ring_speed_index(0)], 0.75);
  EXPECT_EQ(o[obs::ring_pos_index(1)], 0.0);
}

TEST(Observation, RingSlotsFollowRingOrder) {
  const EnvConfig cfg;
  const auto net = build_network(cfg.geometry);
  // Ring coordinates: north 40 -> 25, west 35 -> 5, north 30 -> 15.
  std::vector<VehicleState> vs{car(0, RouteId::kNorth, 40), car(1, RouteId::kWest, 35), car(2, RouteId::kNorth, 30)};
  TrafficSnapshot snap;
  snap.vehicles = vs;
  const auto o = build_observation(snap, net, cfg);
  EXPECT_EQ(o[obs::ring_pos_index(0)], 35.0 / 95.0);
  EXPECT_EQ(o[obs::ring_pos_index(1)], 30.0 / 80.0);
  EXPECT_EQ(o[obs::ring_pos_index(2)], 40.0 / 80.0);
}

TEST(Observation, ExitedAvIsPaddedAtTheEnd) {
  const EnvConfig cfg;
  const auto net = build_network(cfg.geometry);
  TrafficSnapshot snap;
  snap.av_status = {AvStatus::kExited, AvStatus::kStaged};
  const auto o = build_observation(snap, net, cfg);
  EXPECT_EQ(o[obs::av_index(0, 0)], 1.0);
  EXPECT_EQ(o[obs::av_index(1, 0)], 0.0);
  EXPECT_EQ(o[obs::av_index(0, 1)], 0.0);
}

// ---- step ----

TEST(Step, ActionIsClippedToLimits) {
  RoundaboutEnv env{EnvConfig{}};
  env.reset(0);
  env.set_vehicles_for_testing({car(0, RouteId::kNorth, 5, 2.0, ControllerKind::kRlNorth),
                                car(1, RouteId::kWest, 5, 2.0, ControllerKind::kRlWest)});
  const auto out = env.step({{2.0, 0.5}});
  ASSERT_EQ(out.info.vehicles.size(), 2u);
  EXPECT_DOUBLE_EQ(out.info.vehicles[0].speed, 3.0);
  EXPECT_DOUBLE_EQ(out.info.vehicles[1].speed, 2.5);
}

TEST(Step, ExitedAvActionsAreDiscarded) {
  auto run = [](ActionCommand a) {
    RoundaboutEnv env{EnvConfig{}};
    env.reset(3);
    env.set_vehicles_for_testing({car(0, RouteId::kNorth, 5, 2.0), car(1, RouteId::kWest, 12, 1.0),
                                  car(2, RouteId::kWest, 3, 0.0)});
    std::vector<StepOutcome> outs;
    for (int i = 0; i < 20 && !env.done(); ++i) outs.push_back(env.step(a));
    return outs;
  };
  const auto a = run({{1.0, 1.0}});
  const auto b = run({{-3.0, 0.3}});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].true_obs, b[i].true_obs);
    EXPECT_EQ(a[i].reward, b[i].reward);
  }
}

TEST(Step, OverlapEndsTheEpisodeWithOneCrash) {
  RoundaboutEnv env{EnvConfig{}};
  env.reset(0);
  // Too close to stop: the follower runs into the leader during the step.
  env.set_vehicles_for_testing({car(0, RouteId::kNorth, 10, 5.0), car(1, RouteId::kNorth, 11.8, 0.0)});
  const auto out = env.step({});
  EXPECT_TRUE(out.done);
  EXPECT_FALSE(out.truncated);
  ASSERT_EQ(out.info.crashes.size(), 1u);
  EXPECT_EQ(env.crashes().size(), 1u);
  for (const auto& v : env.active()) EXPECT_TRUE(v.crashed);
  EXPECT_THROW(env.step({}), ContractError);
}

TEST(Step, ContractErrors) {
  RoundaboutEnv env{EnvConfig{}};
  EXPECT_THROW(env.step({}), ContractError);
  env.reset(0);
  EXPECT_THROW(env.step({{std::nan(""), 0.0}}), ContractError);
}

TEST(Step, AllExitedEndsWithZeroReward) {
  RoundaboutEnv env{EnvConfig{}};
  env.reset(0);
  env.set_vehicles_for_testing({car(0, RouteId::kNorth, 79.5, 8.0)});
  const auto out = env.step({});
  EXPECT_TRUE(out.done);
  EXPECT_FALSE(out.truncated);
  EXPECT_EQ(out.reward, RewardBreakdown{});
  ASSERT_EQ(env.finished().size(), 1u);
  EXPECT_EQ(*env.finished()[0].exit_time, 1.0);
}

TEST(SafeSpeed, StoppingDistanceFitsTheRoom) {
  // v'^2 / 6 + v' = room for a stationary leader.
  for (double gap : {0.5, 2.0, 7.0, 30.0}) {
    const double v = safe_speed(gap, 0.0, 1.0, 3.0, 0.0);
    EXPECT_NEAR(v * v / 6.0 + v, gap, 1e-12);
  }
  EXPECT_EQ(safe_speed(0.5, 0.0, 1.0, 3.0, 1.0), 0.0);
  EXPECT_GT(safe_speed(5.0, 6.0, 1.0, 3.0, 1.0), safe_speed(5.0, 0.0, 1.0, 3.0, 1.0));
}

TEST(SafeSpeed, CapsAnAvHeadingIntoAStoppedCar) {
  RoundaboutEnv env{EnvConfig{}};
  env.reset(0);
  env.set_vehicles_for_testing({car(0, RouteId::kWest, 40, 8.0, ControllerKind::kRlWest),
                                car(1, RouteId::kWest, 50, 0.0)});
  const auto out = env.step({{0.0, 1.0}});
  // Full acceleration would reach 9 m/s and overlap; the cap brakes instead.
  EXPECT_LT(out.info.vehicles[0].speed, 8.0);
  EXPECT_TRUE(out.info.crashes.empty());
}

// ---- rollouts ----

TEST(Rollout, FuzzInvariants) {
  RoundaboutEnv env{EnvConfig{}};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> act(-4.0, 2.0);
  int crashes = 0;
  for (int s = 0; s < 200; ++s) {
    expect_unit(env.reset(s));
    int steps = 0;
    while (!env.done()) {
      const auto out = env.step({{act(rng), act(rng)}});
      ++steps;
      expect_unit(out.obs);
      EXPECT_GE(out.reward.base, 0.0);
      EXPECT_LE(out.reward.base, 2.0);
      EXPECT_LE(out.reward.total, out.reward.base);
      EXPECT_EQ(env.spawned(), env.exited() + static_cast<int>(env.active().size()));
      EXPECT_EQ(out.info.active_count, static_cast<int>(env.active().size()));
      for (const auto& v : env.finished()) EXPECT_GT(*v.exit_time, v.entry_time);
    }
    EXPECT_LE(steps, 500);
    crashes += static_cast<int>(env.crashes().size());
  }
  // AV commands are capped at a safe speed, so even random driving stays clear.
  EXPECT_EQ(crashes, 0);
}

TEST(Rollout, HorizonTruncates) {
  EnvConfig cfg;
  cfg.horizon = 5;
  RoundaboutEnv env{cfg};
  env.reset(1);
  StepOutcome out;
  int n = 0;
  while (!env.done()) {
    out = env.step({});
    ++n;
  }
  EXPECT_EQ(n, 5);
  EXPECT_TRUE(out.truncated);
}

TEST(Rollout, DeterministicGivenSeedAndActions) {
  RoundaboutEnv a{EnvConfig{}}, b{EnvConfig{}};
  std::mt19937_64 ra(5), rb(5);
  std::uniform_real_distribution<double> act(-3.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    ASSERT_EQ(a.reset(s), b.reset(s));
    while (!a.done()) {
      const auto oa = a.step({{act(ra), act(ra)}});
      const auto ob = b.step({{act(rb), act(rb)}});
      ASSERT_EQ(oa.true_obs, ob.true_obs);
      ASSERT_EQ(oa.reward, ob.reward);
      ASSERT_EQ(oa.info.vehicles, ob.info.vehicles);
      ASSERT_EQ(oa.done, ob.done);
    }
    EXPECT_TRUE(b.done());
  }
}

TEST(Rollout, IdmControlHasNoCrashesAndNorthYields) {
  EnvConfig cfg;
  cfg.av_control = AvControl::kIdm;
  RoundaboutEnv env{cfg};
  double tn = 0, tw = 0;
  int nn = 0, nw = 0, crashes = 0;
  for (int s = 0; s < 100; ++s) {
    env.reset(s);
    while (!env.done()) env.step({{1.0, 1.0}});
    crashes += static_cast<int>(env.crashes().size());
    for (const auto& v : env.finished()) {
      EXPECT_FALSE(v.is_rl());
      (v.route == RouteId::kNorth ? tn : tw) += *v.exit_time - v.entry_time;
      ++(v.route == RouteId::kNorth ? nn : nw);
    }
  }
  EXPECT_EQ(crashes, 0);
  EXPECT_GT(tn / nn, tw / nw);
}
