#pragma once

#include <iosfwd>
#include <string>

#include "cbfnav/sim.hpp"

namespace cbfnav {

// Trajectory logs are JSONL. The header line carries the scenario hash, the
// seed, and the full scenario (so a log is self-contained for rendering);
// each following line is one (step, agent) record:
//   {"t":0,"agent":1,"p":[x,y],"u":[x,y],
//    "params":{"za":..,"ea":..,"zo":..,"eo":..},"feasible":true,"reward":..}
// A final {"violation": "..."} line is appended when the episode aborted.
void write_trajectory_jsonl(std::ostream& out, const Trajectory& trajectory,
                            const WorldConfig& scenario);
void save_trajectory(const std::string& path, const Trajectory& trajectory,
                     const WorldConfig& scenario);

struct LoggedTrajectory {
  WorldConfig scenario;
  std::uint64_t seed = 0;
  std::string scenario_hash;
  Trajectory trajectory;  // final_positions reconstructed from the last step
};

LoggedTrajectory read_trajectory_jsonl(std::istream& in);
LoggedTrajectory load_trajectory(const std::string& path);

}  // namespace cbfnav
