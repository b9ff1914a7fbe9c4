#pragma once

#include <span>
#include <vector>

#include "rlens/reward.hpp"

namespace rlens {

// Fraction of the table's L1 mass on goal-entering transitions.
double goal_mass_fraction(const TabularReward& r, const GridSpec& spec);

// Per-step rewards of each episode, the timeline view's input.
std::vector<std::vector<double>> reward_over_time(const McRewardSource& r,
                                                  std::span<const McTrajectory> episodes);

double median(std::vector<double> values);

}  // namespace rlens
