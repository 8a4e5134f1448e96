#include "cbfnav/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cbfnav/checkpoint.hpp"
#include "cbfnav/metrics.hpp"
#include "cbfnav/num_format.hpp"
#include "cbfnav/parallel.hpp"
#include "cbfnav/render.hpp"
#include "cbfnav/rl.hpp"
#include "cbfnav/scenario_json.hpp"
#include "cbfnav/scenarios.hpp"
#include "cbfnav/trajectory_log.hpp"

namespace cbfnav {

namespace {

using nlohmann::json;

// Paper-matched cadence: the random baseline redraws every 10 steps.
constexpr int kRandomPeriod = 10;

int log_level() {
  static const int level = [] {
    const char* v = std::getenv("CBFNAV_LOG");
    if (v == nullptr) return 0;
    const std::string s(v);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[info] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[debug] " << msg << '\n';
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ConfigError(what + " is not a number: '" + std::string(text) + "'");
  return value;
}

void allow_keys(const json& j, std::initializer_list<const char*> keys,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(where + " has unknown key '" + item.key() + "'");
  }
}

double get_number(const json& j, const char* key, double fallback,
                  const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError(where + "." + key + " must be a number");
  return j[key].get<double>();
}

int get_integer(const json& j, const char* key, int fallback,
                const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw ConfigError(where + "." + key + " must be an integer");
  return j[key].get<int>();
}

Interval get_interval(const json& j, const char* key, Interval fallback,
                      const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(where + "." + key + " must be [lo, hi]");
  Interval iv{v[0].get<double>(), v[1].get<double>()};
  if (!(iv.lo > 0.0) || !(iv.lo <= iv.hi))
    throw ConfigError(where + "." + key + " must satisfy 0 < lo <= hi");
  return iv;
}

struct AppConfig {
  ControllerConfig controller;
  RewardConfig reward;
  TrainConfig train;
};

AppConfig load_app_config(const std::string& path) {
  AppConfig cfg;
  if (path.empty()) return cfg;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  allow_keys(j, {"controller", "reward", "train"}, "config");

  if (j.contains("controller")) {
    const json& c = j["controller"];
    allow_keys(c, {"epsilon", "xi", "bounds"}, "controller");
    cfg.controller.epsilon = get_number(c, "epsilon", cfg.controller.epsilon, "controller");
    cfg.controller.xi = get_number(c, "xi", cfg.controller.xi, "controller");
    if (!(cfg.controller.epsilon > 0.0)) throw ConfigError("controller.epsilon must be positive");
    if (!(cfg.controller.xi > 0.0)) throw ConfigError("controller.xi must be positive");
    if (c.contains("bounds")) {
      const json& b = c["bounds"];
      allow_keys(b, {"zeta", "eta"}, "controller.bounds");
      cfg.controller.bounds.zeta =
          get_interval(b, "zeta", cfg.controller.bounds.zeta, "controller.bounds");
      cfg.controller.bounds.eta =
          get_interval(b, "eta", cfg.controller.bounds.eta, "controller.bounds");
    }
  }
  if (j.contains("reward")) {
    const json& r = j["reward"];
    allow_keys(r, {"beta", "qp_penalty", "gamma"}, "reward");
    cfg.reward.beta = get_number(r, "beta", cfg.reward.beta, "reward");
    cfg.reward.r_qp_penalty = get_number(r, "qp_penalty", cfg.reward.r_qp_penalty, "reward");
    cfg.reward.gamma = get_number(r, "gamma", cfg.reward.gamma, "reward");
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    allow_keys(t,
               {"iterations", "episodes_per_iteration", "epochs",
                "minibatch_size", "clip_ratio", "gae_lambda", "learning_rate",
                "entropy_coeff", "value_coeff", "init_std"},
               "train");
    TrainConfig& tc = cfg.train;
    tc.iterations = get_integer(t, "iterations", tc.iterations, "train");
    tc.episodes_per_iteration =
        get_integer(t, "episodes_per_iteration", tc.episodes_per_iteration, "train");
    tc.epochs = get_integer(t, "epochs", tc.epochs, "train");
    tc.minibatch_size = get_integer(t, "minibatch_size", tc.minibatch_size, "train");
    tc.clip_ratio = get_number(t, "clip_ratio", tc.clip_ratio, "train");
    tc.gae_lambda = get_number(t, "gae_lambda", tc.gae_lambda, "train");
    tc.learning_rate = get_number(t, "learning_rate", tc.learning_rate, "train");
    tc.entropy_coeff = get_number(t, "entropy_coeff", tc.entropy_coeff, "train");
    tc.value_coeff = get_number(t, "value_coeff", tc.value_coeff, "train");
    tc.init_std = get_number(t, "init_std", tc.init_std, "train");
  }
  return cfg;
}

WorldConfig resolve_scenario(const std::string& arg, std::uint64_t seed) {
  constexpr std::string_view kBuiltin = "builtin:";
  if (arg.rfind(kBuiltin, 0) == 0) {
    const std::string name = arg.substr(kBuiltin.size());
    auto kind = parse_scenario_kind(name);
    if (!kind) throw ConfigError("unknown builtin scenario '" + name + "'");
    return make_scenario(*kind, seed);
  }
  return load_scenario(arg);
}

std::unique_ptr<Policy> make_policy_from_spec(const std::string& spec,
                                              const ControllerConfig& controller) {
  if (spec == "random")
    return std::make_unique<RandomPolicy>(controller.bounds, kRandomPeriod);
  if (spec.rfind("fixed:", 0) == 0) {
    const std::string list = spec.substr(6);
    std::array<double, 4> v{};
    std::size_t pos = 0;
    for (int k = 0; k < 4; ++k) {
      const std::size_t comma = k < 3 ? list.find(',', pos) : list.size();
      if (comma == std::string::npos)
        throw ConfigError("fixed policy needs four comma-separated values");
      v[k] = parse_double(std::string_view(list).substr(pos, comma - pos),
                          "fixed policy value");
      pos = comma + 1;
    }
    for (double x : {v[0], v[2]})
      if (!(x > 0.0)) throw ConfigError("fixed policy zeta must be positive");
    for (double x : {v[1], v[3]})
      if (!(x > 0.0)) throw ConfigError("fixed policy eta must be positive");
    return std::make_unique<FixedPolicy>(CbfParams{v[0], v[1], v[2], v[3]});
  }
  if (spec.rfind("gnn:", 0) == 0) {
    const Checkpoint ck = load_checkpoint(spec.substr(4));
    // The checkpoint's own bounds define the squash, not the runtime config.
    return std::make_unique<GnnPolicy>(ck.arch, ck.theta, ck.bounds);
  }
  throw ConfigError("unknown policy '" + spec + "'");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
  if (!out) throw ConfigError("cannot write " + path);
}

struct Options {
  std::string scenario;
  std::string family = "proof_of_concept";
  std::string policy = "fixed:1,1,1,1";
  std::string out;
  std::string config_path;
  std::string trajectory_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  int iterations = -1;  // -1 keeps the config value
  int episodes = 20;
};

int run_simulate(const Options& opts) {
  const AppConfig cfg = load_app_config(opts.config_path);
  const WorldConfig scenario = resolve_scenario(opts.scenario, opts.seed);
  const auto policy = make_policy_from_spec(opts.policy, cfg.controller);

  EpisodeOptions options;
  options.controller = cfg.controller;
  options.reward = cfg.reward;
  options.jobs = resolve_jobs(opts.jobs);
  log_debug("scenario hash " + scenario_hash(scenario));

  const Trajectory traj = run_episode(scenario, *policy, opts.seed, options);
  if (!opts.out.empty()) {
    save_trajectory(opts.out, traj, scenario);
    log_info("wrote " + opts.out);
  }

  const EpisodeMetrics m = episode_metrics(traj, scenario);
  int arrived = 0;
  for (char c : traj.arrived) arrived += c != 0;
  std::cout << "steps=" << m.episode_steps << " arrived=" << arrived << '/'
            << scenario.agents.size() << " infeasible=" << m.infeasible_steps
            << " spl=" << format_double(m.spl)
            << " pct_speed=" << format_double(m.pct_speed) << '\n';

  if (!traj.violation.empty()) {
    std::cerr << "safety violation: " << traj.violation << '\n';
    return kExitSafety;
  }
  return traj.all_arrived() ? kExitOk : kExitTimeout;
}

int run_train(const Options& opts) {
  const AppConfig cfg = load_app_config(opts.config_path);
  auto kind = parse_scenario_kind(opts.family);
  if (!kind) throw ConfigError("unknown scenario family '" + opts.family + "'");

  TrainConfig tc = cfg.train;
  tc.seed = opts.seed;
  tc.jobs = opts.jobs;
  if (opts.iterations >= 0) tc.iterations = opts.iterations;

  const TrainResult result =
      train(default_spec(*kind), tc, cfg.reward, cfg.controller,
            [](const IterationRow& row) {
              std::cout << "iter=" << row.iteration
                        << " reward=" << format_double(row.mean_reward)
                        << " success=" << format_double(row.success_rate)
                        << " infeasible=" << format_double(row.infeasible_steps)
                        << " clip=" << format_double(row.clip_fraction)
                        << " kl=" << format_double(row.approx_kl) << '\n';
            });

  std::filesystem::create_directories(opts.out);
  const std::string ckpt_path = opts.out + "/policy.ckpt";
  save_checkpoint(ckpt_path, result.policy);
  log_info("wrote " + ckpt_path);

  std::ostringstream curve;
  write_learning_curve_csv(curve, result.curve);
  write_text_file(opts.out + "/curve.csv", curve.str());
  log_info("wrote " + opts.out + "/curve.csv");

  if (result.aborted_non_finite) {
    std::cerr << "training stopped on a non-finite loss; last good checkpoint kept\n";
    return kExitNonFinite;
  }
  return kExitOk;
}

int run_gridsearch(const Options& opts) {
  const AppConfig cfg = load_app_config(opts.config_path);
  const WorldConfig scenario = resolve_scenario(opts.scenario, opts.seed);

  GridSpec grid;
  grid.zeta = cfg.controller.bounds.zeta;
  grid.eta = cfg.controller.bounds.eta;
  const std::vector<GridRow> rows =
      grid_search(scenario, grid, cfg.controller, opts.seed, opts.jobs);

  std::ostringstream csv;
  write_grid_csv(csv, rows);
  write_text_file(opts.out, csv.str());
  log_info("wrote " + opts.out);

  const GridRow& best = rows.front();
  std::cout << "best zeta=" << format_double(best.zeta)
            << " eta=" << format_double(best.eta)
            << " spl=" << format_double(best.spl)
            << " pct_speed=" << format_double(best.pct_speed)
            << " success=" << (best.success ? 1 : 0) << '\n';
  return kExitOk;
}

int run_eval(const Options& opts) {
  const AppConfig cfg = load_app_config(opts.config_path);
  const auto policy = make_policy_from_spec(opts.policy, cfg.controller);

  ScenarioSource source;
  constexpr std::string_view kBuiltin = "builtin:";
  if (opts.scenario.rfind(kBuiltin, 0) == 0) {
    const std::string name = opts.scenario.substr(kBuiltin.size());
    auto kind = parse_scenario_kind(name);
    if (!kind) throw ConfigError("unknown builtin scenario '" + name + "'");
    source = family_source(default_spec(*kind));
  } else {
    source = fixed_source(load_scenario(opts.scenario));
  }

  const EvalSummary summary = evaluate(*policy, source, opts.episodes,
                                       opts.seed, cfg.controller, cfg.reward,
                                       opts.jobs);
  if (!opts.out.empty()) {
    write_text_file(opts.out, eval_summary_json(summary));
    log_info("wrote " + opts.out);
  }
  std::cout << "episodes=" << summary.episodes
            << " spl=" << format_double(summary.spl.mean)
            << " spl_std=" << format_double(summary.spl.std_dev)
            << " pct_speed=" << format_double(summary.pct_speed.mean)
            << " pct_speed_std=" << format_double(summary.pct_speed.std_dev)
            << " success_rate=" << format_double(summary.success_rate.mean)
            << " success_rate_std=" << format_double(summary.success_rate.std_dev)
            << '\n';
  return kExitOk;
}

int run_render(const Options& opts) {
  const LoggedTrajectory logged = load_trajectory(opts.trajectory_path);
  render_svg_file(opts.out, logged);
  log_info("wrote " + opts.out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Safe multi-agent navigation with learned CBF parameters"};
  app.name("cbfnav");
  app.require_subcommand(1);

  Options opts;

  CLI::App* simulate = app.add_subcommand("simulate", "Run one episode");
  simulate->add_option("--scenario", opts.scenario, "Scenario file or builtin:<name>")
      ->required();
  simulate->add_option("--policy", opts.policy,
                       "fixed:<za,ea,zo,eo> | random | gnn:<checkpoint>");
  simulate->add_option("--seed", opts.seed, "Episode seed");
  simulate->add_option("--out", opts.out, "Trajectory JSONL path");
  simulate->add_option("--config", opts.config_path, "Config JSON");
  simulate->add_option("--jobs", opts.jobs, "Worker threads (0 = all)");

  CLI::App* train_cmd = app.add_subcommand("train", "Train the policy with PPO");
  train_cmd->add_option("--scenario-family", opts.family, "Scenario family name");
  train_cmd->add_option("--iterations", opts.iterations, "Override iteration count");
  train_cmd->add_option("--seed", opts.seed, "Training seed");
  train_cmd->add_option("--out", opts.out, "Output directory")->required();
  train_cmd->add_option("--config", opts.config_path, "Config JSON");
  train_cmd->add_option("--jobs", opts.jobs, "Worker threads (0 = all)");

  CLI::App* gridsearch = app.add_subcommand("gridsearch", "Fixed-parameter grid baseline");
  gridsearch->add_option("--scenario", opts.scenario, "Scenario file or builtin:<name>")
      ->required();
  gridsearch->add_option("--seed", opts.seed, "Episode seed");
  gridsearch->add_option("--out", opts.out, "CSV path")->required();
  gridsearch->add_option("--config", opts.config_path, "Config JSON");
  gridsearch->add_option("--jobs", opts.jobs, "Worker threads (0 = all)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a policy over seeded episodes");
  eval_cmd->add_option("--scenario", opts.scenario, "Scenario file or builtin:<name>")
      ->required();
  eval_cmd->add_option("--policy", opts.policy,
                       "fixed:<za,ea,zo,eo> | random | gnn:<checkpoint>");
  eval_cmd->add_option("--episodes", opts.episodes, "Episode count");
  eval_cmd->add_option("--seed", opts.seed, "Evaluation seed");
  eval_cmd->add_option("--out", opts.out, "Summary JSON path");
  eval_cmd->add_option("--config", opts.config_path, "Config JSON");
  eval_cmd->add_option("--jobs", opts.jobs, "Worker threads (0 = all)");

  CLI::App* render = app.add_subcommand("render", "Draw a trajectory log as SVG");
  render->add_option("--trajectory", opts.trajectory_path, "Trajectory JSONL path")
      ->required();
  render->add_option("--out", opts.out, "SVG path")->required();

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("cbfnav");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(opts);
    if (*train_cmd) return run_train(opts);
    if (*gridsearch) return run_gridsearch(opts);
    if (*eval_cmd) return run_eval(opts);
    if (*render) return run_render(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cbfnav
