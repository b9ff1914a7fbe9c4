#include "rlens/costs.hpp"

#include <cmath>

namespace rlens {

const char* penalty_kind_name(PenaltyKind k) {
  return k == PenaltyKind::L1 ? "l1" : "log";
}

PenaltyKind penalty_kind_from_name(const std::string& name) {
  if (name == "l1") return PenaltyKind::L1;
  if (name == "log" || name == "log1p_abs") return PenaltyKind::Log1pAbs;
  throw InputError("unknown penalty kind: " + name);
}

const char* cost_family_name(CostFamily f) {
  return f == CostFamily::Sparse ? "sparse" : "smooth";
}

CostFamily cost_family_from_name(const std::string& name) {
  if (name == "sparse") return CostFamily::Sparse;
  if (name == "smooth") return CostFamily::Smooth;
  throw InputError("unknown cost family: " + name);
}

PenaltyValue penalty(PenaltyKind kind, double x) {
  const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  if (kind == PenaltyKind::L1) {
    return {std::abs(x), sign};
  }
  const double ax = std::abs(x);
  return {std::log1p(ax), sign / (1.0 + ax)};
}

std::vector<McTransition> pool_transitions(std::span<const McTrajectory> trajectories) {
  if (trajectories.empty()) throw InputError("pool_transitions: no trajectories");
  std::vector<McTransition> pool;
  for (const McTrajectory& traj : trajectories) {
    const auto ts = trajectory_transitions(traj);
    pool.insert(pool.end(), ts.begin(), ts.end());
  }
  return pool;
}

std::vector<std::pair<McTransition, McTransition>> pool_adjacent_pairs(
    std::span<const McTrajectory> trajectories) {
  if (trajectories.empty()) throw InputError("pool_adjacent_pairs: no trajectories");
  std::vector<std::pair<McTransition, McTransition>> pool;
  for (const McTrajectory& traj : trajectories) {
    const auto ts = trajectory_transitions(traj);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) pool.push_back({ts[i], ts[i + 1]});
  }
  return pool;
}

TrajectoryBatches<McTransition> sparse_trajectory_batches(
    std::span<const McTrajectory> trajectories, std::size_t batch_size, std::uint64_t seed) {
  return TrajectoryBatches<McTransition>(pool_transitions(trajectories), batch_size, seed);
}

TrajectoryBatches<std::pair<McTransition, McTransition>> smooth_trajectory_batches(
    std::span<const McTrajectory> trajectories, std::size_t batch_size, std::uint64_t seed) {
  return TrajectoryBatches<std::pair<McTransition, McTransition>>(
      pool_adjacent_pairs(trajectories), batch_size, seed);
}

}  // namespace rlens
