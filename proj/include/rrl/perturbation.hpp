#pragma once

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rrl/env.hpp"
#include "rrl/error.hpp"

namespace rrl {

enum class NoiseMode { kNone, kState, kAction, kActionState };
enum class NoiseKind { kGaussian, kAdversarial };

inline NoiseMode parse_noise_mode(std::string_view s) {
  if (s == "none") return NoiseMode::kNone;
  if (s == "state") return NoiseMode::kState;
  if (s == "action") return NoiseMode::kAction;
  if (s == "action_state") return NoiseMode::kActionState;
  throw ConfigError("unknown noise.mode '" + std::string(s) + "'");
}

inline std::string_view noise_mode_name(NoiseMode m) {
  switch (m) {
    case NoiseMode::kState: return "state";
    case NoiseMode::kAction: return "action";
    case NoiseMode::kActionState: return "action_state";
    default: return "none";
  }
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "gaussian") return NoiseKind::kGaussian;
  if (s == "adversarial") return NoiseKind::kAdversarial;
  throw ConfigError("unknown noise.kind '" + std::string(s) + "'");
}

inline std::string_view noise_kind_name(NoiseKind k) {
  return k == NoiseKind::kAdversarial ? "adversarial" : "gaussian";
}

inline bool perturbs_state(NoiseMode m) { return m == NoiseMode::kState || m == NoiseMode::kActionState; }
inline bool perturbs_action(NoiseMode m) { return m == NoiseMode::kAction || m == NoiseMode::kActionState; }

// Inflow lengths are never perturbed by any channel.
inline constexpr std::array<int, 2> kExemptIndices{obs::kInflowBegin, obs::kInflowBegin + 1};

inline bool is_exempt(int index) {
  return std::find(kExemptIndices.begin(), kExemptIndices.end(), index) != kExemptIndices.end();
}

struct NoiseProfile {
  std::array<double, obs::kSize> state_std{};
  double action_std = 0.5;
  NoiseMode mode = NoiseMode::kNone;

  // Entrance distances 0.05, absolute positions 0.02, everything else 0.1,
  // inflow lengths 0.
  static NoiseProfile standard(NoiseMode mode = NoiseMode::kNone, double merge_edge_std = 0.05,
                               double position_std = 0.02, double other_std = 0.1,
                               double action_std = 0.5) {
    NoiseProfile p;
    p.mode = mode;
    p.action_std = action_std;
    p.state_std.fill(other_std);
    for (int i = obs::kEntranceDistBegin; i < obs::kEntranceSpeedBegin; ++i) p.state_std[i] = merge_edge_std;
    for (int av = 0; av < obs::kNumAvs; ++av) p.state_std[obs::av_index(av, 0)] = position_std;
    for (int s = 0; s < obs::kRingSlots; ++s) p.state_std[obs::ring_pos_index(s)] = position_std;
    for (int i : kExemptIndices) p.state_std[i] = 0.0;
    return p;
  }

  void validate() const {
    for (int i = 0; i < obs::kSize; ++i) {
      if (!(state_std[i] >= 0.0)) throw ConfigError("noise: state std must be >= 0");
      if (is_exempt(i) && state_std[i] != 0.0) throw ConfigError("noise: inflow elements are exempt");
    }
    if (!(action_std >= 0.0)) throw ConfigError("noise: action std must be >= 0");
  }
};

template <typename Rng>
ObservationVector gaussian_perturb_state(const ObservationVector& o, const NoiseProfile& profile, Rng& rng) {
  ObservationVector out = o;
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < obs::kSize; ++i) {
    const double sd = profile.state_std[i];
    if (sd == 0.0) continue;
    out[i] = std::clamp(o[i] + sd * unit(rng), 0.0, 1.0);
  }
  return out;
}

// Clipping to the actuator range happens later, inside the env.
template <typename Rng>
ActionCommand gaussian_perturb_action(const ActionCommand& a, const NoiseProfile& profile, Rng& rng) {
  ActionCommand out = a;
  if (profile.action_std == 0.0) return out;
  std::normal_distribution<double> noise(0.0, profile.action_std);
  for (double& x : out.accels) x += noise(rng);
  return out;
}

inline constexpr int kAdversaryDim = 22;
inline constexpr int kAdversaryTargets = 20;
inline constexpr double kAdversaryScale = 0.1;

struct AdversaryAction {
  std::array<double, kAdversaryDim> values{};
};

struct AdversaryTargets {
  std::vector<int> indices;

  // AV pos/speed/tailway/headway for both AVs, then the 12 entrance distances.
  static AdversaryTargets standard() {
    AdversaryTargets t;
    for (int i = obs::kAvBegin; i < obs::kAvBegin + obs::kNumAvs * obs::kAvFeatures; ++i) t.indices.push_back(i);
    for (int i = obs::kEntranceDistBegin; i < obs::kEntranceSpeedBegin; ++i) t.indices.push_back(i);
    return t;
  }

  void validate() const {
    if (indices.size() != kAdversaryTargets) {
      throw ConfigError("adversary targets: expected 20 indices, got " + std::to_string(indices.size()));
    }
    const std::set<int> unique(indices.begin(), indices.end());
    if (unique.size() != indices.size()) throw ConfigError("adversary targets: duplicate index");
    for (int i : indices) {
      if (i < 0 || i >= obs::kSize) throw ConfigError("adversary targets: index out of range");
      if (is_exempt(i)) throw ConfigError("adversary targets: inflow elements are exempt");
    }
  }
};

// Applies a bounded adversarial perturbation to the agent's view and action.
inline std::pair<ObservationVector, ActionCommand> adversarial_perturb(const ObservationVector& o,
                                                                       const ActionCommand& a,
                                                                       const AdversaryAction& adv,
                                                                       const AdversaryTargets& targets) {
  targets.validate();
  auto bounded = [&](int k) { return kAdversaryScale * std::clamp(adv.values[k], -1.0, 1.0); };
  ActionCommand a2 = a;
  for (int i = 0; i < 2; ++i) a2.accels[i] += bounded(i);
  ObservationVector o2 = o;
  for (int k = 0; k < kAdversaryTargets; ++k) {
    const int idx = targets.indices[k];
    o2[idx] = std::clamp(o[idx] + bounded(2 + k), 0.0, 1.0);
  }
  return {o2, a2};
}

}  // namespace rrl
