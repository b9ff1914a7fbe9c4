#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rlens/grid.hpp"

namespace rlens {

inline constexpr double kMcMinPosition = -1.2;
inline constexpr double kMcMaxPosition = 0.6;
inline constexpr double kMcMaxSpeed = 0.07;
inline constexpr double kMcGoalPosition = 0.45;
inline constexpr double kMcForceScale = 0.0015;
inline constexpr double kMcGravityScale = 0.0025;

struct MountainCarState {
  double position = -0.5;
  double velocity = 0.0;
  bool operator==(const MountainCarState&) const = default;
};

inline bool mc_at_goal(const MountainCarState& s) { return s.position >= kMcGoalPosition; }

// v' = clip(v + 0.0015 a - 0.0025 cos(3p)), p' = clip(p + v'); hitting the
// left wall zeroes velocity. Throws InputError for |force| > 1.
MountainCarState mc_step(const MountainCarState& s, double force);

struct McTransition {
  MountainCarState s;
  double a = 0.0;
  MountainCarState s_next;
  bool operator==(const McTransition&) const = default;
};

using McTrajectory = Trajectory<MountainCarState, double>;
using McPolicy = std::function<double(const MountainCarState&)>;
using McPotentialFn = std::function<double(const MountainCarState&)>;

// Episodes start at position ~ U[-0.6, -0.4], velocity 0, and end at the goal
// threshold or after max_steps. Bit-reproducible for a fixed seed.
std::vector<McTrajectory> mc_rollout(const McPolicy& policy, int n_episodes, int max_steps,
                                     std::uint64_t seed);

// Transitions of one trajectory in time order.
std::vector<McTransition> trajectory_transitions(const McTrajectory& traj);

// CSV with header episode,t,position,velocity,action.
void write_trajectories_csv(std::span<const McTrajectory> trajectories, std::ostream& os);

}  // namespace rlens
