#include "rlens/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace rlens {

double goal_mass_fraction(const TabularReward& r, const GridSpec& spec) {
  const int goal = spec.state_index(spec.goal);
  double on_goal = 0.0, total = 0.0;
  for (std::size_t i = 0; i < r.transitions.size(); ++i) {
    const double mass = std::abs(r.values[i]);
    total += mass;
    if (r.transitions[i].s_next == goal) on_goal += mass;
  }
  return total > 0.0 ? on_goal / total : 0.0;
}

std::vector<std::vector<double>> reward_over_time(const McRewardSource& r,
                                                  std::span<const McTrajectory> episodes) {
  std::vector<std::vector<double>> out;
  out.reserve(episodes.size());
  for (const McTrajectory& traj : episodes) {
    const auto transitions = trajectory_transitions(traj);
    out.push_back(r.evaluate_all(std::span<const McTransition>(transitions)));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    m = (m + lower) / 2.0;
  }
  return m;
}

}  // namespace rlens
