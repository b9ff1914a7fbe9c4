#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "rlens/policy.hpp"
#include "rlens/reward.hpp"

namespace rlens {

struct EquivalenceReport {
  std::vector<double> recovered_potential;
  double max_residual = 0.0;
  bool is_equivalent = false;
  double tolerance = 1e-6;
  std::optional<double> return_invariance_max_error;
  std::optional<bool> policy_match;  // only set when value iteration was run
  double gamma = 0.99;
};

// Phi(s) = (r'(s, Stay, s) - r(s, Stay, s)) / (gamma - 1), using the self-loop
// closed form; exact whenever a valid shaping relates the two tables.
std::vector<double> recover_potential(const TabularReward& r, const TabularReward& r_prime,
                                      double gamma);

// Recovers Phi, then checks |delta(s,a,s') - (gamma Phi(s') - Phi(s))| <= tol
// over every enumerated transition.
std::pair<bool, double> check_shaping_equiv(const TabularReward& r,
                                            const TabularReward& r_prime, double gamma,
                                            double tol);

// Max over trajectories of |(G' - G) - (gamma^T Phi(s_T) - Phi(s_0))| with Phi
// recovered from the pair.
double return_invariance_check(const TabularReward& r, const TabularReward& r_prime,
                               std::span<const GridTrajectory> trajectories, double gamma);

// Continuous-state variant with an explicitly supplied potential.
double return_invariance_check_mc(const McRewardSource& r, const McRewardSource& r_prime,
                                  std::span<const McTrajectory> trajectories,
                                  const McPotentialFn& phi, double gamma);

struct PolicyCheck {
  bool match = false;
  double q_gap = 0.0;  // max |(Q' - Q) + Phi(s)|
};

// Greedy action sets from value iteration must agree state by state; Q values
// themselves shift by -Phi(s).
PolicyCheck optimal_policy_check(const TabularReward& r, const TabularReward& r_prime,
                                 const GridSpec& spec, double gamma, double tie_tol = 1e-9,
                                 double vi_threshold = 1e-12);

EquivalenceReport certify_equivalence(const TabularReward& r, const TabularReward& r_prime,
                                      const GridSpec& spec, double gamma, double tol = 1e-6,
                                      bool run_value_iteration = false);

void save_report(const EquivalenceReport& report, const std::filesystem::path& path);

}  // namespace rlens
