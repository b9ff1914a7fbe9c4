#include "rlens/mountain_car.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "rlens/rng.hpp"

namespace rlens {

MountainCarState mc_step(const MountainCarState& s, double force) {
  if (!(force >= -1.0 && force <= 1.0)) {
    throw InputError("mc_step: force must be in [-1, 1]");
  }
  double v = s.velocity + kMcForceScale * force - kMcGravityScale * std::cos(3.0 * s.position);
  v = std::clamp(v, -kMcMaxSpeed, kMcMaxSpeed);
  double p = s.position + v;
  if (p < kMcMinPosition) {
    p = kMcMinPosition;
    if (v < 0.0) v = 0.0;
  }
  if (p > kMcMaxPosition) p = kMcMaxPosition;
  return {p, v};
}

std::vector<McTrajectory> mc_rollout(const McPolicy& policy, int n_episodes, int max_steps,
                                     std::uint64_t seed) {
  std::vector<McTrajectory> out;
  if (n_episodes <= 0) return out;
  Rng rng(seed);
  out.reserve(n_episodes);
  for (int ep = 0; ep < n_episodes; ++ep) {
    McTrajectory traj;
    MountainCarState s{rng.uniform(-0.6, -0.4), 0.0};
    traj.states.push_back(s);
    for (int t = 0; t < max_steps; ++t) {
      const double a = policy(s);
      s = mc_step(s, a);
      traj.actions.push_back(a);
      traj.states.push_back(s);
      if (mc_at_goal(s)) {
        traj.terminated_at_goal = true;
        break;
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<McTransition> trajectory_transitions(const McTrajectory& traj) {
  std::vector<McTransition> out;
  out.reserve(traj.length());
  for (std::size_t t = 0; t < traj.length(); ++t) {
    out.push_back({traj.states[t], traj.actions[t], traj.states[t + 1]});
  }
  return out;
}

void write_trajectories_csv(std::span<const McTrajectory> trajectories, std::ostream& os) {
  os << "episode,t,position,velocity,action\n";
  char buf[128];
  for (std::size_t ep = 0; ep < trajectories.size(); ++ep) {
    const McTrajectory& traj = trajectories[ep];
    for (std::size_t t = 0; t < traj.length(); ++t) {
      std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g\n", ep, t,
                    traj.states[t].position, traj.states[t].velocity, traj.actions[t]);
      os << buf;
    }
  }
}

}  // namespace rlens
