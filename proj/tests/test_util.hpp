#pragma once

// Shared fixtures and independent reference oracles. Everything here is
// written from the environment definitions directly, on purpose: these
// routines must not share code with the library paths they check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rlens/grid.hpp"
#include "rlens/reward.hpp"

namespace testutil {

inline rlens::GridSpec default_grid() { return rlens::GridSpec{10, 10, {9, 9}, {}, 50}; }

inline rlens::GridSpec terminal_goal_grid() {
  return rlens::GridSpec{10, 10, {9, 9}, {{9, 9}}, 50};
}

// Independent gridworld stepper: plain coordinate arithmetic with clipping
// and absorbing terminals.
inline std::pair<int, int> ref_step(int width, int height, int x, int y, int action,
                                    const std::vector<std::pair<int, int>>& terminal = {}) {
  for (const auto& t : terminal) {
    if (t.first == x && t.second == y) return {x, y};
  }
  int nx = x, ny = y;
  if (action == 1) ny = y + 1;        // up
  else if (action == 2) ny = y - 1;   // down
  else if (action == 3) nx = x - 1;   // left
  else if (action == 4) nx = x + 1;   // right
  if (nx < 0 || nx >= width || ny < 0 || ny >= height) return {x, y};
  return {nx, ny};
}

// Reference discounted return, summed in time order.
template <typename LookupFn>
double ref_return(const rlens::GridTrajectory& traj, double gamma, LookupFn reward_of) {
  double g = 0.0, disc = 1.0;
  for (std::size_t t = 0; t < traj.length(); ++t) {
    g += disc * reward_of(traj.states[t], traj.actions[t], traj.states[t + 1]);
    disc *= gamma;
  }
  return g;
}

// Random-walk trajectory over the grid dynamics.
inline rlens::GridTrajectory random_trajectory(const rlens::GridSpec& spec, int steps,
                                               std::mt19937_64& gen) {
  rlens::GridTrajectory traj;
  int s = static_cast<int>(gen() % static_cast<std::uint64_t>(spec.num_states()));
  traj.states.push_back(s);
  for (int t = 0; t < steps; ++t) {
    const int a = static_cast<int>(gen() % 5);
    s = rlens::grid_step_index(spec, s, a);
    traj.actions.push_back(a);
    traj.states.push_back(s);
  }
  traj.terminated_at_goal = (traj.states.back() == spec.state_index(spec.goal));
  return traj;
}

inline int ref_manhattan(int ax, int ay, int bx, int by) {
  return std::abs(ax - bx) + std::abs(ay - by);
}

}  // namespace testutil
