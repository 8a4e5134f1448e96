#pragma once

#include "cbfnav/types.hpp"

namespace cbfnav {

struct RewardConfig {
  double beta = 1.0;          // infeasibility penalty weight
  double r_qp_penalty = -1.0; // added once per infeasible step
  double gamma = 0.99;        // discount
};

// Progress term dot(unit(goal - position), control) plus beta * r_qp_penalty
// when the step's QP was infeasible. Zero progress at the goal or for zero
// control.
inline double reward(const Vec2& position, const Vec2& goal, const Vec2& control,
                     bool feasible, const RewardConfig& config) {
  double r = 0.0;
  const Vec2 to_goal = goal - position;
  const double dist = to_goal.norm();
  if (dist > 0.0) r += to_goal.dot(control) / dist;
  if (!feasible) r += config.beta * config.r_qp_penalty;
  return r;
}

}  // namespace cbfnav
