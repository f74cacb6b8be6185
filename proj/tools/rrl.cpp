// rrl: train, evaluate and summarize roundabout policies.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrl/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rrl;

namespace {

struct Options {
  ExperimentConfig exp;
  std::string noise_mode = "none";
  std::string noise_kind = "gaussian";
  double merge_edge_std = 0.05;
  double position_std = 0.02;
  double other_std = 0.1;
  double action_std = 0.5;
  std::string av_control = "rl";
};

// Reads [section] key = value as the option --section.key.
class FlatIni : public CLI::ConfigINI {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> out;
    for (auto item : CLI::ConfigINI::from_config(input)) {
      if (item.name == "++" || item.name == "--") continue;
      if (!item.parents.empty()) {
        std::string name;
        for (const auto& p : item.parents) name += p + ".";
        item.name = name + item.name;
        item.parents.clear();
      }
      out.push_back(std::move(item));
    }
    return out;
  }
};

// Every tunable constant is an option named section.key, so an INI file with
// [section] headers sets the same values.
void add_constants(CLI::App& app, Options& o) {
  EnvConfig& e = o.exp.env;
  auto add = [&](const std::string& name, auto& field, const std::string& help) {
    return app.add_option("--" + name, field, help)->capture_default_str()->group("Constants");
  };
  add("env.horizon", e.horizon, "episode length in steps");
  add("env.dt", e.dt, "step length (s)");
  add("env.v_max", e.v_max, "speed limit (m/s)");
  add("env.max_accel", e.max_accel, "upper acceleration clip (m/s^2)");
  add("env.max_decel", e.max_decel, "lower acceleration clip (m/s^2)");
  add("env.north_group_min", e.north_group.lo, "smallest northern inflow group");
  add("env.north_group_max", e.north_group.hi, "largest northern inflow group");
  add("env.west_group_min", e.west_group.lo, "smallest western inflow group");
  add("env.west_group_max", e.west_group.hi, "largest western inflow group");
  add("env.north_delay_min", e.north_delay.lo, "northern release delay lower bound (s)");
  add("env.north_delay_max", e.north_delay.hi, "northern release delay upper bound (s)");
  add("env.west_delay_min", e.west_delay.lo, "western release delay lower bound (s)");
  add("env.west_delay_max", e.west_delay.hi, "western release delay upper bound (s)");
  add("env.vehicle_length", e.vehicle_length, "vehicle length (m)");
  add("env.staging_gap_extra", e.staging_gap_extra, "initial bumper gap beyond s0 (m)");
  add("env.jerk_window", e.jerk_window, "AV action history length for the jerk penalty");
  add("env.standstill_speed", e.standstill_speed, "speed below which a vehicle is stopped (m/s)");
  add("env.crawl_speed", e.crawl_speed, "speed below which a vehicle crawls (m/s)");
  add("env.av_control", o.av_control, "rl | idm");
  add("env.av_safe_speed", e.av_safe_speed, "cap AV commands at a safe speed");
  add("env.av_min_gap", e.av_min_gap, "gap kept by the AV safe-speed cap (m)");

  add("penalty.standstill", e.penalties.standstill, "c_s");
  add("penalty.crawl", e.penalties.crawl, "c_p");
  add("penalty.jerk", e.penalties.jerk, "c_j");
  add("penalty.speeding", e.penalties.speeding, "c_v");

  add("idm.v0", e.idm.v0, "desired speed (m/s)");
  add("idm.T", e.idm.T, "time headway (s)");
  add("idm.a", e.idm.a, "max acceleration (m/s^2)");
  add("idm.b", e.idm.b, "comfortable deceleration (m/s^2)");
  add("idm.delta", e.idm.delta, "acceleration exponent");
  add("idm.s0", e.idm.s0, "minimum gap (m)");
  add("idm.accel_noise_std", e.idm.accel_noise_std, "acceleration noise std (m/s^2)");

  GeometryConfig& g = e.geometry;
  add("geometry.north_approach", g.north_approach, "m");
  add("geometry.north_ring", g.north_ring, "m");
  add("geometry.north_exit", g.north_exit, "m");
  add("geometry.west_approach", g.west_approach, "m");
  add("geometry.west_ring", g.west_ring, "m");
  add("geometry.west_exit", g.west_exit, "m");
  add("geometry.ring_circumference", g.ring_circumference, "m");
  add("geometry.north_ring_entry", g.north_ring_entry, "ring coordinate of the northern merge (m)");
  add("geometry.west_ring_entry", g.west_ring_entry, "ring coordinate of the western merge (m)");
  add("geometry.entrance_zone", g.entrance_zone, "queue zone length before each merge (m)");
  add("geometry.yield_lookback", g.yield_lookback, "upstream distance checked before merging (m)");
  add("geometry.yield_time", g.yield_time, "arrival window that blocks a merge (s)");
  add("geometry.yield_accel", g.yield_accel, "acceleration assumed for arrival times (m/s^2)");

  PpoConfig& p = o.exp.ppo;
  add("ppo.gamma", p.gamma, "discount");
  add("ppo.gae_lambda", p.gae_lambda, "GAE lambda");
  add("ppo.clip_epsilon", p.clip_epsilon, "ratio clip");
  add("ppo.batch_size", p.batch_size, "env steps per iteration");
  add("ppo.iterations", p.iterations, "training iterations");
  add("ppo.epochs", p.epochs, "epochs per iteration");
  add("ppo.minibatch_size", p.minibatch_size, "minibatch size");
  add("ppo.learning_rate", p.learning_rate, "Adam step size");
  add("ppo.kl_target", p.kl_target, "approximate KL early-stop target");
  add("ppo.max_grad_norm", p.max_grad_norm, "global gradient norm clip (0 disables)");
  add("ppo.entropy_coef", p.entropy_coef, "entropy bonus");
  add("ppo.normalize_advantages", p.normalize_advantages, "standardize advantages per batch");
  add("ppo.num_workers", p.num_workers, "parallel rollout workers");
  add("ppo.hidden", p.hidden, "hidden layer sizes")->delimiter(',');
  add("ppo.policy_output_scale", p.policy_output_scale, "init scale of the policy output layer");

  add("noise.mode", o.noise_mode, "none | state | action | action_state");
  add("noise.kind", o.noise_kind, "gaussian | adversarial");
  add("noise.merge_edge_std", o.merge_edge_std, "std for entrance distances");
  add("noise.position_std", o.position_std, "std for AV and ring positions");
  add("noise.other_std", o.other_std, "std for every other perturbed element");
  add("noise.action_std", o.action_std, "std of action noise");

  add("run.seed", o.exp.seed, "master seed");
  add("run.trials", o.exp.trials, "evaluation episodes");
}

// The effective constants as INI, readable back through --config.
std::string dump_constants(const CLI::App& app) {
  std::ostringstream out;
  std::string section;
  for (const CLI::Option* opt : app.get_options([](const CLI::Option* op) { return op->get_group() == "Constants"; })) {
    const std::string name = opt->get_name().substr(2);
    const auto dot = name.find('.');
    if (name.substr(0, dot) != section) {
      section = name.substr(0, dot);
      out << (out.tellp() > 0 ? "\n" : "") << '[' << section << "]\n";
    }
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
    }
    out << name.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

void finalize(Options& o) {
  const NoiseMode mode = parse_noise_mode(o.noise_mode);
  o.exp.kind = parse_noise_kind(o.noise_kind);
  o.exp.noise = NoiseProfile::standard(mode, o.merge_edge_std, o.position_std, o.other_std, o.action_std);
  if (o.av_control == "rl") {
    o.exp.env.av_control = AvControl::kRl;
  } else if (o.av_control == "idm") {
    o.exp.env.av_control = AvControl::kIdm;
  } else {
    throw ConfigError("env.av_control must be rl or idm");
  }
  o.exp.validate();
}

json summary_json(const MetricsSummary& m) {
  json j{{"mean_travel_time", m.mean_travel_time}, {"mean_speed", m.mean_speed}, {"trials", m.trials},
         {"vehicles", m.vehicles}, {"crashes", m.crashes}};
  if (m.percent_time_saved) j["percent_time_saved"] = *m.percent_time_saved;
  return j;
}

json signature_json(const MeteringSignature& s) {
  json j;
  for (RouteId r : {RouteId::kNorth, RouteId::kWest}) {
    const auto& e = s.entrances[route_index(r)];
    j[route_name(r)] = {{"mean_speed", e.mean_speed},
                        {"samples", e.samples},
                        {"yield_count", e.yield_count},
                        {"dwell_steps", e.dwell_steps}};
  }
  return j;
}

json log_json(const TrainLog& l) {
  return {{"iteration", l.iteration},
          {"steps", l.steps},
          {"episodes", l.episodes},
          {"mean_episode_reward", l.mean_episode_reward},
          {"mean_adversary_reward", l.mean_adversary_reward},
          {"policy_loss", l.policy_loss},
          {"value_loss", l.value_loss},
          {"approx_kl", l.approx_kl},
          {"max_epoch_kl", l.max_epoch_kl},
          {"entropy", l.entropy},
          {"epochs_completed", l.epochs_completed},
          {"adversary_policy_loss", l.adversary_policy_loss},
          {"adversary_value_loss", l.adversary_value_loss},
          {"adversary_approx_kl", l.adversary_approx_kl},
          {"aborted", l.aborted},
          {"diagnostic", l.diagnostic}};
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

std::vector<double> parse_edges(const std::vector<double>& edges, int bins, double lo, double hi) {
  if (!edges.empty()) return edges;
  if (bins < 1 || !(hi > lo)) throw ConfigError("histogram needs --edges or --bins with --min < --max");
  std::vector<double> out(bins + 1);
  for (int i = 0; i <= bins; ++i) out[i] = lo + (hi - lo) * i / bins;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Roundabout traffic simulator and PPO trainer"};
  app.set_config("--config", "", "INI file; [section] key = value for any section.key option");
  app.config_formatter(std::make_shared<FlatIni>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  Options o;
  add_constants(app, o);
  std::string output_dir = ".";
  app.add_option("--output-dir", output_dir, "where artifacts are written")
      ->envname("RRL_OUTPUT_DIR")
      ->configurable(false)
      ->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train a policy");
  std::string mode_name = "single";
  int checkpoint_every = 10;
  train_cmd->add_option("--mode", mode_name, "single | adversarial")->capture_default_str();
  train_cmd->add_option("--noise-mode", o.noise_mode, "none | state | action | action_state");
  train_cmd->add_option("--noise-kind", o.noise_kind, "gaussian | adversarial");
  train_cmd->add_option("--iterations", o.exp.ppo.iterations, "training iterations");
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "save weights every K iterations (0 = final only)")
      ->capture_default_str();

  auto* baseline = app.add_subcommand("baseline", "run IDM-only episodes");
  baseline->add_option("--trials", o.exp.trials, "episodes");

  auto* evaluate = app.add_subcommand("evaluate", "run a trained policy");
  std::string weights;
  evaluate->add_option("--weights", weights, "policy weight file")->required();
  evaluate->add_option("--trials", o.exp.trials, "episodes");
  evaluate->add_option("--noise-mode", o.noise_mode, "none | state | action | action_state");
  evaluate->add_option("--noise-kind", o.noise_kind, "gaussian | adversarial");

  auto* metrics = app.add_subcommand("metrics", "summarize episode records");
  std::string records_path, baseline_path;
  metrics->add_option("--records", records_path, "records JSONL")->required();
  metrics->add_option("--baseline-records", baseline_path, "baseline records JSONL");

  auto* hist = app.add_subcommand("histogram", "relative-frequency histogram of per-vehicle metrics");
  std::string metric_name = "travel_time";
  std::vector<double> edges;
  int bins = 10;
  double lo = 0.0, hi = 60.0;
  hist->add_option("--records", records_path, "records JSONL")->required();
  hist->add_option("--metric", metric_name, "travel_time | mean_speed")->capture_default_str();
  hist->add_option("--edges", edges, "explicit bin edges")->delimiter(',');
  hist->add_option("--bins", bins, "number of equal bins")->capture_default_str();
  hist->add_option("--min", lo, "lowest edge")->capture_default_str();
  hist->add_option("--max", hi, "highest edge")->capture_default_str();

  auto* dump = app.add_subcommand("config", "print the effective configuration as INI");

  CLI11_PARSE(app, argc, argv);

  try {
    finalize(o);
    if (*dump) {
      std::cout << dump_constants(app);
      return 0;
    }
    if (*train_cmd) {
      const TrainMode mode = parse_train_mode(mode_name);
      if (mode == TrainMode::kAdversarial && o.exp.noise.mode != NoiseMode::kNone) {
        throw ConfigError("adversarial training uses the adversary channel; set --noise-mode none");
      }
      if (checkpoint_every < 0) throw ConfigError("--checkpoint-every must be >= 0");
      const fs::path dir = prepare_dir(output_dir);
      std::ofstream cfg_out(dir / "config.ini");
      cfg_out << dump_constants(app);
      std::ofstream log_out(dir / "train_log.jsonl");
      if (!log_out) throw FormatError("cannot write " + (dir / "train_log.jsonl").string());
      const auto res = train(o.exp, mode, [&](const TrainLog& l, const TrainResult& r) {
        log_out << log_json(l).dump() << '\n' << std::flush;
        std::cerr << "iteration " << l.iteration << " reward " << l.mean_episode_reward
                  << (l.aborted ? " (aborted: " + l.diagnostic + ")" : "") << '\n';
        if (checkpoint_every > 0 && (l.iteration + 1) % checkpoint_every == 0) {
          const std::string tag = std::to_string(l.iteration + 1);
          save_weights(r.agent.policy, (dir / ("policy_iter" + tag + ".bin")).string());
          if (r.adversary) save_weights(r.adversary->policy, (dir / ("adversary_iter" + tag + ".bin")).string());
        }
      });
      save_weights(res.agent.policy, (dir / "policy.bin").string());
      save_weights(res.agent.value, (dir / "value.bin").string());
      if (res.adversary) save_weights(res.adversary->policy, (dir / "adversary.bin").string());
      std::cout << json{{"iterations", res.logs.size()},
                        {"final_reward", res.logs.empty() ? 0.0 : res.logs.back().mean_episode_reward},
                        {"weights", (dir / "policy.bin").string()}}
                       .dump(2)
                << '\n';
    } else if (*baseline) {
      const fs::path dir = prepare_dir(output_dir);
      const auto recs = run_baseline(o.exp);
      const auto path = (dir / "baseline_records.jsonl").string();
      save_records(path, recs);
      std::cout << json{{"records", path}, {"summary", summary_json(compute_metrics(recs))}}.dump(2) << '\n';
    } else if (*evaluate) {
      const fs::path dir = prepare_dir(output_dir);
      const auto recs = run_policy(o.exp, weights);
      const auto path = (dir / "policy_records.jsonl").string();
      save_records(path, recs);
      std::cout << json{{"records", path}, {"summary", summary_json(compute_metrics(recs))}}.dump(2) << '\n';
    } else if (*metrics) {
      const auto recs = load_records(records_path);
      const auto net = build_network(o.exp.env.geometry);
      json out;
      if (baseline_path.empty()) {
        out["summary"] = summary_json(compute_metrics(recs));
        out["metering_signature"] = signature_json(metering_signature(recs, net));
      } else {
        const auto base = load_records(baseline_path);
        const auto sp = metering_signature(recs, net);
        const auto sb = metering_signature(base, net);
        const auto red = reduced_entrances(sp, sb);
        out["summary"] = summary_json(compute_metrics(recs, base));
        out["baseline_summary"] = summary_json(compute_metrics(base));
        out["metering_signature"] = signature_json(sp);
        out["baseline_metering_signature"] = signature_json(sb);
        out["reduced_entrances"] = {{"north", red[route_index(RouteId::kNorth)]},
                                    {"west", red[route_index(RouteId::kWest)]}};
        out["exhibits_metering"] = exhibits_metering(sp, sb);
      }
      std::cout << out.dump(2) << '\n';
    } else if (*hist) {
      HistogramSpec spec;
      spec.metric = parse_histogram_metric(metric_name);
      spec.edges = parse_edges(edges, bins, lo, hi);
      const auto h = histogram(load_records(records_path), spec);
      std::cout << json{{"metric", metric_name}, {"edges", h.edges}, {"frequencies", h.frequencies}}.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "rrl: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
