#pragma once

#include <vector>

#include "rlens/reward.hpp"

namespace rlens {

struct QTable {
  int width = 0;
  int height = 0;
  double gamma = 0.99;
  double residual = 0.0;        // final Bellman residual of the value sweep
  std::vector<double> q;        // s * 5 + a

  double value(int s, int a) const { return q[s * kNumGridActions + a]; }
  double state_value(int s) const;
  int num_states() const { return width * height; }
};

// Bellman optimality backups over the deterministic transition table until
// the max residual drops below threshold. Terminal states keep V = 0.
QTable value_iteration(const GridSpec& spec, const TabularReward& r, double gamma,
                       double threshold = 1e-12);

// Per-state action sets within tie_tol of the best Q value.
std::vector<std::vector<int>> greedy_policy(const QTable& q, double tie_tol = 1e-9);

// Bang-bang energy pumping: push along the current velocity.
double mc_expert(const MountainCarState& s);

}  // namespace rlens
