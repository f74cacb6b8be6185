#include <cmath>

#include <gtest/gtest.h>

#include "rrl/network.hpp"

using namespace rrl;

TEST(BuildNetwork, DefaultRouteLengths) {
  const auto net = build_network(GeometryConfig{});
  EXPECT_DOUBLE_EQ(net.route(RouteId::kNorth).length, 80.0);
  EXPECT_DOUBLE_EQ(net.route(RouteId::kWest).length, 95.0);
  // Summing the polyline segments gives the same lengths.
  EXPECT_NEAR(polyline_length(net.route(RouteId::kNorth).polyline), 80.0, 1e-9);
  EXPECT_NEAR(polyline_length(net.route(RouteId::kWest).polyline), 95.0, 1e-9);
}

TEST(BuildNetwork, MergePointsAndZones) {
  const auto net = build_network(GeometryConfig{});
  const Route& n = net.route(RouteId::kNorth);
  const Route& w = net.route(RouteId::kWest);
  EXPECT_EQ(n.merge, 25.0);
  EXPECT_EQ(w.merge, 30.0);
  EXPECT_EQ(n.entrance_zone.lo, 10.0);
  EXPECT_EQ(n.entrance_zone.hi, n.merge);
  EXPECT_EQ(w.entrance_zone.lo, 15.0);
  EXPECT_EQ(w.entrance_zone.hi, w.merge);
  EXPECT_TRUE(n.on_approach(24.9));
  EXPECT_FALSE(n.on_approach(25.0));
  EXPECT_TRUE(n.on_ring(25.0));
  EXPECT_TRUE(n.on_ring(60.0));
  EXPECT_FALSE(n.on_ring(60.1));
}

TEST(BuildNetwork, SharedArcMapsToTheSamePlace) {
  const auto net = build_network(GeometryConfig{});
  // The shared arc runs over ring coordinates [10, 40].
  for (double c = 10.0; c <= 40.0; c += 0.37) {
    const auto on_n = net.ring_offset_on_route(RouteId::kNorth, c);
    const auto on_w = net.ring_offset_on_route(RouteId::kWest, c);
    ASSERT_TRUE(on_n && on_w) << c;
    const Point a = net.position(RouteId::kNorth, net.route(RouteId::kNorth).merge + *on_n);
    const Point b = net.position(RouteId::kWest, net.route(RouteId::kWest).merge + *on_w);
    EXPECT_NEAR(a.x, b.x, 1e-9);
    EXPECT_NEAR(a.y, b.y, 1e-9);
    const Point r = net.ring_point(c);
    EXPECT_NEAR(a.x, r.x, 1e-9);
    EXPECT_NEAR(a.y, r.y, 1e-9);
  }
  EXPECT_FALSE(net.ring_offset_on_route(RouteId::kNorth, 5.0));
  EXPECT_FALSE(net.ring_offset_on_route(RouteId::kWest, 42.0));
}

TEST(BuildNetwork, ConfigurationErrors) {
  GeometryConfig g;
  g.north_approach = 0;
  EXPECT_THROW(build_network(g), ConfigError);
  g = {};
  g.west_exit = -1;
  EXPECT_THROW(build_network(g), ConfigError);
  g = {};
  g.north_ring = 60;
  EXPECT_THROW(build_network(g), ConfigError);
  g = {};
  g.west_ring_entry = 60;
  EXPECT_THROW(build_network(g), ConfigError);
  g = {};
  g.entrance_zone = 26;
  EXPECT_THROW(build_network(g), ConfigError);
  g = {};
  g.yield_time = -1;
  EXPECT_THROW(build_network(g), ConfigError);
  // Ring arcs that never overlap.
  g = {};
  g.north_ring_entry = 0;
  g.north_ring = 5;
  g.west_ring_entry = 30;
  g.west_ring = 10;
  EXPECT_THROW(build_network(g), ConfigError);
}

TEST(RouteNetworkTest, RingOffsetWraps) {
  const auto net = build_network(GeometryConfig{});
  EXPECT_DOUBLE_EQ(net.ring_offset(50, 10), 20.0);
  EXPECT_DOUBLE_EQ(net.ring_offset(10, 50), 40.0);
  EXPECT_DOUBLE_EQ(net.ring_coord(RouteId::kNorth, 25.0), 10.0);
  EXPECT_DOUBLE_EQ(net.ring_coord(RouteId::kNorth, 60.0), 45.0);
}

TEST(RouteNetworkTest, ArrivalTime) {
  const auto net = build_network(GeometryConfig{});
  // d = v t + t^2 / 2 at unit acceleration.
  EXPECT_NEAR(net.arrival_time(4.5, 0.0), 3.0, 1e-12);
  EXPECT_NEAR(net.arrival_time(2.5, 2.0), 1.0, 1e-12);
}
