#include "cbfnav/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cbfnav/num_format.hpp"

namespace cbfnav {

namespace {

constexpr double kScale = 80.0;   // pixels per meter
constexpr double kMargin = 24.0;  // pixel border around the workspace

struct Mapper {
  Vec2 min;
  Vec2 max;

  double x(double wx) const { return kMargin + (wx - min.x()) * kScale; }
  // SVG y grows downward.
  double y(double wy) const { return kMargin + (max.y() - wy) * kScale; }
  double width() const { return (max.x() - min.x()) * kScale + 2.0 * kMargin; }
  double height() const { return (max.y() - min.y()) * kScale + 2.0 * kMargin; }
};

std::string agent_color(int index, int count) {
  const int hue = count > 0 ? (360 * index) / count : 0;
  return "hsl(" + std::to_string(hue) + ",70%,45%)";
}

// Dark blue to warm orange as the episode progresses.
std::string time_color(double frac) {
  const auto mix = [frac](int a, int b) {
    return static_cast<int>(std::lround(a + (b - a) * frac));
  };
  return "rgb(" + std::to_string(mix(26, 255)) + "," +
         std::to_string(mix(35, 143)) + "," + std::to_string(mix(126, 0)) + ")";
}

void circle(std::ostream& out, const Mapper& m, const Vec2& c, double r,
            const std::string& fill, const std::string& extra = "") {
  out << "  <circle cx=\"" << format_double(m.x(c.x())) << "\" cy=\""
      << format_double(m.y(c.y())) << "\" r=\"" << format_double(r * kScale)
      << "\" fill=\"" << fill << "\"" << extra << "/>\n";
}

}  // namespace

void render_svg(std::ostream& out, const LoggedTrajectory& logged) {
  const WorldConfig& config = logged.scenario;
  const Trajectory& traj = logged.trajectory;
  const int n = static_cast<int>(config.agents.size());
  Mapper m{config.workspace.min, config.workspace.max};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << format_double(m.width()) << "\" height=\"" << format_double(m.height())
      << "\" viewBox=\"0 0 " << format_double(m.width()) << ' '
      << format_double(m.height()) << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& o : config.obstacles)
    circle(out, m, o.center, o.radius, "#9e9e9e");

  for (const auto& a : config.agents)
    circle(out, m, a.start, a.radius, "#2e7d32", " stroke=\"#1b5e20\"");

  for (const auto& a : config.agents) {
    const double side = a.radius * kScale;
    out << "  <rect x=\"" << format_double(m.x(a.goal.x()) - side) << "\" y=\""
        << format_double(m.y(a.goal.y()) - side) << "\" width=\""
        << format_double(2.0 * side) << "\" height=\""
        << format_double(2.0 * side) << "\" fill=\"#1565c0\"/>\n";
  }

  const int steps = static_cast<int>(traj.steps.size());
  for (int i = 0; i < n; ++i) {
    out << "  <polyline fill=\"none\" stroke=\"" << agent_color(i, n)
        << "\" stroke-width=\"2\" points=\"";
    for (int t = 0; t < steps; ++t) {
      const Vec2& p = traj.steps[t].agents[i].position;
      if (t > 0) out << ' ';
      out << format_double(m.x(p.x())) << ',' << format_double(m.y(p.y()));
    }
    if (static_cast<int>(traj.final_positions.size()) == n) {
      const Vec2& p = traj.final_positions[i];
      if (steps > 0) out << ' ';
      out << format_double(m.x(p.x())) << ',' << format_double(m.y(p.y()));
    }
    out << "\"/>\n";
  }

  // Sparse markers shaded by time so direction of travel stays readable.
  const int stride = std::max(1, steps / 20);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < steps; t += stride) {
      const double frac = steps > 1 ? static_cast<double>(t) / (steps - 1) : 0.0;
      circle(out, m, traj.steps[t].agents[i].position, 0.03, time_color(frac));
    }
  }

  out << "</svg>\n";
}

void render_svg_file(const std::string& path, const LoggedTrajectory& logged) {
  std::ostringstream buffer;
  render_svg(buffer, logged);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << buffer.str();
  if (!out) throw ConfigError("cannot write " + path);
}

}  // namespace cbfnav
