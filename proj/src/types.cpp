#include "cbfnav/types.hpp"

#include <set>
#include <sstream>

namespace cbfnav {

double pairwise_clearance(const Vec2& p, double r_p, const Vec2& q, double r_q) {
  return (p - q).norm() - (r_p + r_q);
}

namespace {

bool inside(const Workspace& w, const Vec2& p) {
  return p.x() >= w.min.x() && p.x() <= w.max.x() && p.y() >= w.min.y() &&
         p.y() <= w.max.y();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> validate_config(const WorldConfig& config) {
  std::vector<std::string> out;
  auto add = [&out](const std::string& msg) { out.push_back(msg); };

  if (config.workspace.min.x() >= config.workspace.max.x() ||
      config.workspace.min.y() >= config.workspace.max.y()) {
    add("workspace must have positive extent");
  }
  if (config.sensing_radius <= 0.0) add("sensing radius must be positive");
  if (config.dt <= 0.0) add("dt must be positive");
  if (config.max_steps < 1) add("max_steps must be at least 1");
  if (config.u_max <= 0.0) add("u_max must be positive");

  std::set<int> agent_ids;
  for (const auto& a : config.agents) {
    if (!agent_ids.insert(a.id).second)
      add("duplicate agent id " + std::to_string(a.id));
    if (a.radius <= 0.0)
      add("agent " + std::to_string(a.id) + " radius must be positive");
    if (!inside(config.workspace, a.start))
      add("agent " + std::to_string(a.id) + " start outside workspace");
    if (!inside(config.workspace, a.goal))
      add("agent " + std::to_string(a.id) + " goal outside workspace");
  }

  std::set<int> obstacle_ids;
  for (const auto& o : config.obstacles) {
    if (!obstacle_ids.insert(o.id).second)
      add("duplicate obstacle id " + std::to_string(o.id));
    if (o.radius <= 0.0)
      add("obstacle " + std::to_string(o.id) + " radius must be positive");
  }

  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    const auto& a = config.agents[i];
    for (std::size_t j = i + 1; j < config.agents.size(); ++j) {
      const auto& b = config.agents[j];
      double c = pairwise_clearance(a.start, a.radius, b.start, b.radius);
      if (c < 0.0) {
        add("agent " + std::to_string(a.id) + " start overlaps agent " +
            std::to_string(b.id) + " (clearance " + fmt(c) + ")");
      }
    }
    for (const auto& o : config.obstacles) {
      double c = pairwise_clearance(a.start, a.radius, o.center, o.radius);
      if (c < 0.0) {
        add("agent " + std::to_string(a.id) + " start overlaps obstacle " +
            std::to_string(o.id) + " (clearance " + fmt(c) + ")");
      }
    }
  }
  return out;
}

}  // namespace cbfnav
