#pragma once

#include <iosfwd>
#include <string>

#include "cbfnav/trajectory_log.hpp"

namespace cbfnav {

// Draws a logged episode as a self-contained SVG: grey obstacle discs, green
// start circles, blue goal squares, and exactly one polyline per agent with
// time-graded markers along it. Output bytes are deterministic.
void render_svg(std::ostream& out, const LoggedTrajectory& logged);
void render_svg_file(const std::string& path, const LoggedTrajectory& logged);

}  // namespace cbfnav
