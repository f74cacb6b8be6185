#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "rrl/env.hpp"

namespace rrl {

inline constexpr int kRecordSchemaVersion = 1;

struct VehicleRecord {
  VehicleId id = 0;
  RouteId route = RouteId::kNorth;
  ControllerKind kind = ControllerKind::kIdm;
  bool group_head = false;
  double entry_time = 0.0;
  std::optional<double> exit_time;
  double distance = 0.0;    // path length covered (m)
  double mean_speed = 0.0;  // distance / (exit - entry); 0 if the vehicle never exited

  double travel_time() const { return exit_time ? *exit_time - entry_time : 0.0; }
  bool operator==(const VehicleRecord&) const = default;
};

struct StepSample {
  double time = 0.0;
  RewardBreakdown reward;
  std::vector<VehicleSample> vehicles;
  bool operator==(const StepSample&) const = default;
};

struct EpisodeRecord {
  std::int64_t seed = 0;
  int trial = 0;
  std::vector<VehicleRecord> vehicles;
  std::vector<StepSample> steps;
  std::vector<CollisionEvent> crashes;
  std::array<int, 2> group_sizes{0, 0};
  std::array<double, 2> group_delays{0.0, 0.0};
  double total_reward = 0.0;
  bool operator==(const EpisodeRecord&) const = default;
};

// Builds an EpisodeRecord from an environment as it runs. Call begin() right
// after reset, observe() after every step and finish() once the episode is over.
class EpisodeRecorder {
 public:
  void begin(const RoundaboutEnv& env, std::int64_t seed, int trial) {
    rec_ = EpisodeRecord{};
    rec_.seed = seed;
    rec_.trial = trial;
    start_pos_.clear();
    for (RouteId r : {RouteId::kNorth, RouteId::kWest}) {
      rec_.group_sizes[route_index(r)] = env.group(r).size;
      rec_.group_delays[route_index(r)] = env.group(r).delay;
    }
    note_starts(env);
  }

  void observe(const RoundaboutEnv& env, const StepOutcome& step) {
    rec_.steps.push_back({env.time(), step.reward, step.info.vehicles});
    rec_.total_reward += step.reward.total;
    note_starts(env);
  }

  EpisodeRecord finish(const RoundaboutEnv& env) {
    rec_.crashes = env.crashes();
    auto add = [&](const VehicleState& v) {
      VehicleRecord r;
      r.id = v.id;
      r.route = v.route;
      r.kind = v.kind;
      r.group_head = v.id == env.av_id(v.route);
      r.entry_time = v.entry_time;
      r.exit_time = v.exit_time;
      r.distance = v.pos - start_pos_.at(v.id);
      if (v.exit_time && *v.exit_time > v.entry_time) r.mean_speed = r.distance / (*v.exit_time - v.entry_time);
      rec_.vehicles.push_back(r);
    };
    for (const auto& v : env.finished()) add(v);
    for (const auto& v : env.active()) add(v);
    std::sort(rec_.vehicles.begin(), rec_.vehicles.end(),
              [](const VehicleRecord& a, const VehicleRecord& b) { return a.id < b.id; });
    return std::move(rec_);
  }

 private:
  void note_starts(const RoundaboutEnv& env) {
    for (const auto& v : env.active()) start_pos_.try_emplace(v.id, v.pos);
  }

  EpisodeRecord rec_;
  std::map<VehicleId, double> start_pos_;
};

// ---- persistence (one JSON object per line) ----

inline nlohmann::json to_json(const EpisodeRecord& r) {
  using nlohmann::json;
  json j;
  j["schema"] = kRecordSchemaVersion;
  j["seed"] = r.seed;
  j["trial"] = r.trial;
  j["group_sizes"] = r.group_sizes;
  j["group_delays"] = r.group_delays;
  j["total_reward"] = r.total_reward;
  json vs = json::array();
  for (const auto& v : r.vehicles) {
    json e = {{"id", v.id},
              {"route", route_name(v.route)},
              {"kind", kind_name(v.kind)},
              {"group_head", v.group_head},
              {"entry_time", v.entry_time},
              {"distance", v.distance},
              {"mean_speed", v.mean_speed}};
    e["exit_time"] = v.exit_time ? json(*v.exit_time) : json(nullptr);
    vs.push_back(std::move(e));
  }
  j["vehicles"] = std::move(vs);
  json steps = json::array();
  for (const auto& s : r.steps) {
    const auto& b = s.reward;
    json e = {{"time", s.time},
              {"reward", {b.base, b.standstill, b.crawl, b.jerk, b.speeding, b.total}}};
    json cars = json::array();
    for (const auto& v : s.vehicles) {
      cars.push_back({v.id, route_index(v.route), static_cast<int>(v.kind), v.pos, v.speed});
    }
    e["vehicles"] = std::move(cars);
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  json crashes = json::array();
  for (const auto& c : r.crashes) crashes.push_back({c.time, c.follower_id, c.leader_id, c.gap});
  j["crashes"] = std::move(crashes);
  return j;
}

namespace detail {

inline RouteId parse_route(const std::string& s) {
  if (s == route_name(RouteId::kNorth)) return RouteId::kNorth;
  if (s == route_name(RouteId::kWest)) return RouteId::kWest;
  throw FormatError("record: unknown route '" + s + "'");
}

inline ControllerKind parse_kind(const std::string& s) {
  for (ControllerKind k : {ControllerKind::kIdm, ControllerKind::kRlNorth, ControllerKind::kRlWest}) {
    if (s == kind_name(k)) return k;
  }
  throw FormatError("record: unknown controller kind '" + s + "'");
}

inline ControllerKind kind_from_int(int k) {
  if (k < 0 || k > 2) throw FormatError("record: controller kind out of range");
  return static_cast<ControllerKind>(k);
}

}  // namespace detail

inline EpisodeRecord from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<int>() != kRecordSchemaVersion) {
      throw FormatError("record: unsupported schema version " + j.at("schema").dump());
    }
    EpisodeRecord r;
    r.seed = j.at("seed").get<std::int64_t>();
    r.trial = j.at("trial").get<int>();
    r.group_sizes = j.at("group_sizes").get<std::array<int, 2>>();
    r.group_delays = j.at("group_delays").get<std::array<double, 2>>();
    r.total_reward = j.at("total_reward").get<double>();
    for (const auto& e : j.at("vehicles")) {
      VehicleRecord v;
      v.id = e.at("id").get<VehicleId>();
      v.route = detail::parse_route(e.at("route").get<std::string>());
      v.kind = detail::parse_kind(e.at("kind").get<std::string>());
      v.group_head = e.at("group_head").get<bool>();
      v.entry_time = e.at("entry_time").get<double>();
      if (!e.at("exit_time").is_null()) v.exit_time = e.at("exit_time").get<double>();
      v.distance = e.at("distance").get<double>();
      v.mean_speed = e.at("mean_speed").get<double>();
      r.vehicles.push_back(v);
    }
    for (const auto& e : j.at("steps")) {
      StepSample s;
      s.time = e.at("time").get<double>();
      const auto b = e.at("reward").get<std::array<double, 6>>();
      s.reward = {b[0], b[1], b[2], b[3], b[4], b[5]};
      for (const auto& c : e.at("vehicles")) {
        const int route = c.at(1).get<int>();
        if (route != 0 && route != 1) throw FormatError("record: route index out of range");
        s.vehicles.push_back({c.at(0).get<VehicleId>(), route == 0 ? RouteId::kNorth : RouteId::kWest,
                              detail::kind_from_int(c.at(2).get<int>()), c.at(3).get<double>(),
                              c.at(4).get<double>()});
      }
      r.steps.push_back(std::move(s));
    }
    for (const auto& c : j.at("crashes")) {
      r.crashes.push_back({c.at(0).get<double>(), c.at(1).get<VehicleId>(), c.at(2).get<VehicleId>(),
                           c.at(3).get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("record: ") + e.what());
  }
}

inline void write_records(std::ostream& out, std::span<const EpisodeRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<EpisodeRecord> read_records(std::istream& in) {
  std::vector<EpisodeRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("records line " + std::to_string(n) + ": " + e.what());
    }
    out.push_back(from_json(j));
  }
  return out;
}

inline void save_records(const std::string& path, std::span<const EpisodeRecord> records) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  write_records(f, records);
  if (!f) throw FormatError("write failed: " + path);
}

inline std::vector<EpisodeRecord> load_records(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  return read_records(f);
}

// ---- summary metrics ----

struct MetricsSummary {
  double mean_travel_time = 0.0;  // s, per exited vehicle over all trials
  double mean_speed = 0.0;        // m/s, per exited vehicle
  int trials = 0;
  int vehicles = 0;               // exited vehicles contributing to the means
  int crashes = 0;
  std::optional<double> percent_time_saved;
};

// Positive when `mean` is faster than `baseline_mean`.
inline double percent_time_saved(double baseline_mean, double mean) {
  if (!(baseline_mean > 0.0)) throw ContractError("percent_time_saved: baseline mean must be > 0");
  return 100.0 * (baseline_mean - mean) / baseline_mean;
}

inline MetricsSummary compute_metrics(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw ContractError("compute_metrics: no records");
  MetricsSummary m;
  m.trials = static_cast<int>(records.size());
  double tt = 0.0;
  double sp = 0.0;
  for (const auto& r : records) {
    m.crashes += static_cast<int>(r.crashes.size());
    for (const auto& v : r.vehicles) {
      if (!v.exit_time) continue;
      tt += v.travel_time();
      sp += v.mean_speed;
      ++m.vehicles;
    }
  }
  if (m.vehicles > 0) {
    m.mean_travel_time = tt / m.vehicles;
    m.mean_speed = sp / m.vehicles;
  }
  return m;
}

inline MetricsSummary compute_metrics(std::span<const EpisodeRecord> records,
                                      std::span<const EpisodeRecord> baseline) {
  MetricsSummary m = compute_metrics(records);
  const MetricsSummary b = compute_metrics(baseline);
  m.percent_time_saved = percent_time_saved(b.mean_travel_time, m.mean_travel_time);
  return m;
}

// ---- histograms ----

enum class HistogramMetric { kTravelTime, kMeanSpeed };

inline HistogramMetric parse_histogram_metric(std::string_view s) {
  if (s == "travel_time") return HistogramMetric::kTravelTime;
  if (s == "mean_speed") return HistogramMetric::kMeanSpeed;
  throw ConfigError("unknown histogram metric '" + std::string(s) + "'");
}

struct HistogramSpec {
  HistogramMetric metric = HistogramMetric::kTravelTime;
  std::vector<double> edges;
  std::vector<double> frequencies;  // filled by histogram()
};

// Bins are [e_i, e_{i+1}) with the last one closed. Values outside the edges
// land in the first or last bin.
inline HistogramSpec histogram(std::span<const double> values, HistogramSpec spec) {
  if (spec.edges.size() < 2) throw ContractError("histogram: need at least two edges");
  for (std::size_t i = 1; i < spec.edges.size(); ++i) {
    if (!(spec.edges[i] > spec.edges[i - 1])) throw ContractError("histogram: edges must be strictly increasing");
  }
  if (values.empty()) throw ContractError("histogram: no values");
  const std::size_t bins = spec.edges.size() - 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : values) {
    const auto it = std::upper_bound(spec.edges.begin(), spec.edges.end(), x);
    const auto idx = static_cast<std::ptrdiff_t>(it - spec.edges.begin()) - 1;
    counts[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bins) - 1))]++;
  }
  spec.frequencies.assign(bins, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    spec.frequencies[i] = static_cast<double>(counts[i]) / static_cast<double>(values.size());
  }
  return spec;
}

inline std::vector<double> metric_values(std::span<const EpisodeRecord> records, HistogramMetric metric) {
  std::vector<double> out;
  for (const auto& r : records) {
    for (const auto& v : r.vehicles) {
      if (!v.exit_time) continue;
      out.push_back(metric == HistogramMetric::kTravelTime ? v.travel_time() : v.mean_speed);
    }
  }
  return out;
}

inline HistogramSpec histogram(std::span<const EpisodeRecord> records, HistogramSpec spec) {
  const auto values = metric_values(records, spec.metric);
  return histogram(std::span<const double>(values), std::move(spec));
}

// ---- metering ----

struct EntranceStats {
  double mean_speed = 0.0;  // over every in-zone sample
  int samples = 0;
  int yield_count = 0;      // vehicles that came to a stop in the zone after having moved
  int dwell_steps = 0;      // in-zone samples below the stop speed after having moved
};

struct MeteringSignature {
  std::array<EntranceStats, 2> entrances;  // indexed by route_index
};

inline MeteringSignature metering_signature(std::span<const EpisodeRecord> records, const RouteNetwork& net,
                                            double stop_speed = 0.2) {
  MeteringSignature sig;
  std::array<double, 2> speed_sum{0.0, 0.0};
  for (const auto& r : records) {
    std::map<VehicleId, bool> moved;
    std::map<VehicleId, bool> yielded;
    for (const auto& s : r.steps) {
      for (const auto& v : s.vehicles) {
        const Route& rt = net.route(v.route);
        const bool in_zone = rt.on_approach(v.pos) && rt.entrance_zone.contains(v.pos);
        const bool slow = v.speed < stop_speed;
        if (in_zone) {
          auto& e = sig.entrances[route_index(v.route)];
          speed_sum[route_index(v.route)] += v.speed;
          ++e.samples;
          if (slow && moved[v.id]) {
            ++e.dwell_steps;
            if (!yielded[v.id]) {
              yielded[v.id] = true;
              ++e.yield_count;
            }
          }
        }
        if (!slow) moved[v.id] = true;
      }
    }
  }
  for (int i = 0; i < 2; ++i) {
    auto& e = sig.entrances[i];
    if (e.samples > 0) e.mean_speed = speed_sum[i] / e.samples;
  }
  return sig;
}

// Metering: exactly one entrance approaches more slowly than under the baseline
// (by more than `margin`, relative) while the other does not.
inline std::array<bool, 2> reduced_entrances(const MeteringSignature& policy, const MeteringSignature& baseline,
                                             double margin = 0.05) {
  std::array<bool, 2> out{};
  for (int i = 0; i < 2; ++i) {
    out[i] = policy.entrances[i].mean_speed < (1.0 - margin) * baseline.entrances[i].mean_speed;
  }
  return out;
}

inline bool exhibits_metering(const MeteringSignature& policy, const MeteringSignature& baseline,
                              double margin = 0.05) {
  const auto r = reduced_entrances(policy, baseline, margin);
  return r[0] != r[1];
}

}  // namespace rrl
