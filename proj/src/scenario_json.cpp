#include "cbfnav/scenario_json.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cbfnav {

namespace {

using nlohmann::json;

void expect_keys(const json& j, std::initializer_list<const char*> keys,
                 const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const char* k : keys) {
    if (!j.contains(k)) throw ConfigError(where + " missing key '" + k + "'");
  }
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

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<int>();
}

Vec2 vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(where + " must be an array of two numbers");
  return {number(j[0], where), number(j[1], where)};
}

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

WorldConfig scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  expect_keys(j, {"agents", "obstacles", "sensing_radius", "dt", "max_steps",
                  "u_max", "workspace"},
              "scenario");

  WorldConfig config;
  if (!j["agents"].is_array()) throw ConfigError("'agents' must be an array");
  for (const auto& a : j["agents"]) {
    expect_keys(a, {"id", "start", "goal", "radius"}, "agent");
    AgentSpec spec;
    spec.id = integer(a["id"], "agent id");
    spec.start = vec2(a["start"], "agent start");
    spec.goal = vec2(a["goal"], "agent goal");
    spec.radius = number(a["radius"], "agent radius");
    config.agents.push_back(spec);
  }
  if (!j["obstacles"].is_array()) throw ConfigError("'obstacles' must be an array");
  for (const auto& o : j["obstacles"]) {
    expect_keys(o, {"id", "center", "radius"}, "obstacle");
    ObstacleSpec spec;
    spec.id = integer(o["id"], "obstacle id");
    spec.center = vec2(o["center"], "obstacle center");
    spec.radius = number(o["radius"], "obstacle radius");
    config.obstacles.push_back(spec);
  }
  config.sensing_radius = number(j["sensing_radius"], "sensing_radius");
  config.dt = number(j["dt"], "dt");
  config.max_steps = integer(j["max_steps"], "max_steps");
  config.u_max = number(j["u_max"], "u_max");
  expect_keys(j["workspace"], {"min", "max"}, "workspace");
  config.workspace.min = vec2(j["workspace"]["min"], "workspace min");
  config.workspace.max = vec2(j["workspace"]["max"], "workspace max");
  return config;
}

WorldConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const WorldConfig& config) {
  json j;
  j["agents"] = json::array();
  for (const auto& a : config.agents) {
    j["agents"].push_back({{"id", a.id},
                           {"start", vec2_json(a.start)},
                           {"goal", vec2_json(a.goal)},
                           {"radius", a.radius}});
  }
  j["obstacles"] = json::array();
  for (const auto& o : config.obstacles) {
    j["obstacles"].push_back(
        {{"id", o.id}, {"center", vec2_json(o.center)}, {"radius", o.radius}});
  }
  j["sensing_radius"] = config.sensing_radius;
  j["dt"] = config.dt;
  j["max_steps"] = config.max_steps;
  j["u_max"] = config.u_max;
  j["workspace"] = {{"min", vec2_json(config.workspace.min)},
                    {"max", vec2_json(config.workspace.max)}};
  return j.dump(2) + "\n";
}

void save_scenario(const std::string& path, const WorldConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write scenario file '" + path + "'");
  out << scenario_to_json(config);
}

std::string scenario_hash(const WorldConfig& config) {
  const std::string bytes = scenario_to_json(config);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace cbfnav
