#include "cbfnav/trajectory_log.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "cbfnav/scenario_json.hpp"
#include "json.hpp"

namespace cbfnav {

namespace {
using nlohmann::json;
}

void write_trajectory_jsonl(std::ostream& out, const Trajectory& trajectory,
                            const WorldConfig& scenario) {
  json header;
  header["scenario_hash"] = trajectory.scenario_hash;
  header["seed"] = trajectory.seed;
  header["scenario"] = json::parse(scenario_to_json(scenario));
  out << header.dump() << "\n";

  for (const auto& step : trajectory.steps) {
    for (std::size_t i = 0; i < step.agents.size(); ++i) {
      const auto& rec = step.agents[i];
      json line;
      line["t"] = step.t;
      line["agent"] = scenario.agents[i].id;
      line["p"] = {rec.position.x(), rec.position.y()};
      line["u"] = {rec.control.x(), rec.control.y()};
      line["params"] = {{"za", rec.params.zeta_agent},
                        {"ea", rec.params.eta_agent},
                        {"zo", rec.params.zeta_obstacle},
                        {"eo", rec.params.eta_obstacle}};
      line["feasible"] = rec.feasible;
      line["reward"] = rec.reward;
      out << line.dump() << "\n";
    }
  }
  if (!trajectory.violation.empty()) {
    json trailer;
    trailer["violation"] = trajectory.violation;
    out << trailer.dump() << "\n";
  }
}

void save_trajectory(const std::string& path, const Trajectory& trajectory,
                     const WorldConfig& scenario) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write trajectory file '" + path + "'");
  write_trajectory_jsonl(out, trajectory, scenario);
}

LoggedTrajectory read_trajectory_jsonl(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory file");

  LoggedTrajectory logged;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("trajectory header parse error: ") + e.what());
  }
  if (!header.contains("scenario") || !header.contains("seed") ||
      !header.contains("scenario_hash"))
    throw ConfigError("trajectory header missing scenario, seed, or hash");
  logged.scenario = scenario_from_json(header["scenario"].dump());
  logged.seed = header["seed"].get<std::uint64_t>();
  logged.scenario_hash = header["scenario_hash"].get<std::string>();
  logged.trajectory.seed = logged.seed;
  logged.trajectory.scenario_hash = logged.scenario_hash;

  std::map<int, std::size_t> index_of_id;
  for (std::size_t i = 0; i < logged.scenario.agents.size(); ++i)
    index_of_id[logged.scenario.agents[i].id] = i;
  const std::size_t n = logged.scenario.agents.size();

  auto& steps = logged.trajectory.steps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("trajectory record parse error: ") + e.what());
    }
    if (j.contains("violation")) {
      logged.trajectory.violation = j["violation"].get<std::string>();
      continue;
    }
    int t = j.at("t").get<int>();
    int id = j.at("agent").get<int>();
    auto it = index_of_id.find(id);
    if (it == index_of_id.end())
      throw ConfigError("trajectory record for unknown agent " + std::to_string(id));
    if (steps.empty() || steps.back().t != t) {
      StepRecord rec;
      rec.t = t;
      rec.agents.resize(n);
      steps.push_back(std::move(rec));
    }
    AgentStepRecord& rec = steps.back().agents[it->second];
    rec.position = Vec2(j.at("p")[0].get<double>(), j.at("p")[1].get<double>());
    rec.control = Vec2(j.at("u")[0].get<double>(), j.at("u")[1].get<double>());
    const auto& params = j.at("params");
    rec.params.zeta_agent = params.at("za").get<double>();
    rec.params.eta_agent = params.at("ea").get<double>();
    rec.params.zeta_obstacle = params.at("zo").get<double>();
    rec.params.eta_obstacle = params.at("eo").get<double>();
    rec.feasible = j.at("feasible").get<bool>();
    rec.reward = j.at("reward").get<double>();
  }

  // Final positions are approximate for an agent that snapped onto its goal
  // on the very last executed step; exact everywhere else.
  if (!steps.empty()) {
    logged.trajectory.final_positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rec = steps.back().agents[i];
      logged.trajectory.final_positions[i] =
          rec.position + rec.control * logged.scenario.dt;
    }
  }
  return logged;
}

LoggedTrajectory load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read trajectory file '" + path + "'");
  return read_trajectory_jsonl(in);
}

}  // namespace cbfnav
