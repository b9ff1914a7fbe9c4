#include "rlens/equivalence.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace rlens {

namespace {

void check_same_enumeration(const TabularReward& r, const TabularReward& r_prime) {
  if (r.width != r_prime.width || r.height != r_prime.height) {
    throw InputError("equivalence: reward tables cover different grids");
  }
  if (r.transitions != r_prime.transitions) {
    throw InputError("equivalence: reward tables cover different enumerations");
  }
}

double discounted_return(const TabularReward& r, const GridTrajectory& traj, double gamma) {
  double g = 0.0;
  double disc = 1.0;
  for (std::size_t t = 0; t < traj.length(); ++t) {
    g += disc * r.value(traj.states[t], traj.actions[t]);
    disc *= gamma;
  }
  return g;
}

}  // namespace

std::vector<double> recover_potential(const TabularReward& r, const TabularReward& r_prime,
                                      double gamma) {
  check_same_enumeration(r, r_prime);
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw InputError("recover_potential: gamma must be in [0, 1)");
  }
  const int stay = static_cast<int>(GridAction::Stay);
  std::vector<double> phi(r.num_states());
  for (int s = 0; s < r.num_states(); ++s) {
    const double delta = r_prime.value(s, stay) - r.value(s, stay);
    phi[s] = delta / (gamma - 1.0);
  }
  return phi;
}

std::pair<bool, double> check_shaping_equiv(const TabularReward& r,
                                            const TabularReward& r_prime, double gamma,
                                            double tol) {
  const std::vector<double> phi = recover_potential(r, r_prime, gamma);
  double max_residual = 0.0;
  for (std::size_t i = 0; i < r.transitions.size(); ++i) {
    const Transition& t = r.transitions[i];
    const double delta = r_prime.values[i] - r.values[i];
    const double predicted = gamma * phi[t.s_next] - phi[t.s];
    max_residual = std::max(max_residual, std::abs(delta - predicted));
  }
  return {max_residual <= tol, max_residual};
}

double return_invariance_check(const TabularReward& r, const TabularReward& r_prime,
                               std::span<const GridTrajectory> trajectories, double gamma) {
  const std::vector<double> phi = recover_potential(r, r_prime, gamma);
  double max_dev = 0.0;
  for (const GridTrajectory& traj : trajectories) {
    const double g = discounted_return(r, traj, gamma);
    const double g_prime = discounted_return(r_prime, traj, gamma);
    const double t_end = std::pow(gamma, static_cast<double>(traj.length()));
    const double predicted = t_end * phi[traj.states.back()] - phi[traj.states.front()];
    max_dev = std::max(max_dev, std::abs((g_prime - g) - predicted));
  }
  return max_dev;
}

double return_invariance_check_mc(const McRewardSource& r, const McRewardSource& r_prime,
                                  std::span<const McTrajectory> trajectories,
                                  const McPotentialFn& phi, double gamma) {
  double max_dev = 0.0;
  for (const McTrajectory& traj : trajectories) {
    const auto transitions = trajectory_transitions(traj);
    const auto batch = std::span<const McTransition>(transitions);
    const std::vector<double> base = r.evaluate_all(batch);
    const std::vector<double> shaped = r_prime.evaluate_all(batch);
    double g = 0.0, g_prime = 0.0, disc = 1.0;
    for (std::size_t t = 0; t < transitions.size(); ++t) {
      g += disc * base[t];
      g_prime += disc * shaped[t];
      disc *= gamma;
    }
    const double t_end = std::pow(gamma, static_cast<double>(traj.length()));
    const double predicted = t_end * phi(traj.states.back()) - phi(traj.states.front());
    max_dev = std::max(max_dev, std::abs((g_prime - g) - predicted));
  }
  return max_dev;
}

PolicyCheck optimal_policy_check(const TabularReward& r, const TabularReward& r_prime,
                                 const GridSpec& spec, double gamma, double tie_tol,
                                 double vi_threshold) {
  check_same_enumeration(r, r_prime);
  const std::vector<double> phi = recover_potential(r, r_prime, gamma);
  const QTable q = value_iteration(spec, r, gamma, vi_threshold);
  const QTable q_prime = value_iteration(spec, r_prime, gamma, vi_threshold);

  PolicyCheck out;
  out.match = greedy_policy(q, tie_tol) == greedy_policy(q_prime, tie_tol);
  for (int s = 0; s < q.num_states(); ++s) {
    for (int a = 0; a < kNumGridActions; ++a) {
      const double gap = (q_prime.value(s, a) - q.value(s, a)) + phi[s];
      out.q_gap = std::max(out.q_gap, std::abs(gap));
    }
  }
  return out;
}

EquivalenceReport certify_equivalence(const TabularReward& r, const TabularReward& r_prime,
                                      const GridSpec& spec, double gamma, double tol,
                                      bool run_value_iteration) {
  EquivalenceReport report;
  report.gamma = gamma;
  report.tolerance = tol;
  report.recovered_potential = recover_potential(r, r_prime, gamma);
  const auto [ok, residual] = check_shaping_equiv(r, r_prime, gamma, tol);
  report.is_equivalent = ok;
  report.max_residual = residual;
  if (run_value_iteration) {
    const PolicyCheck pc = optimal_policy_check(r, r_prime, spec, gamma);
    report.policy_match = pc.match;
  }
  return report;
}

void save_report(const EquivalenceReport& report, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["gamma"] = report.gamma;
  doc["tolerance"] = report.tolerance;
  doc["max_residual"] = report.max_residual;
  doc["is_equivalent"] = report.is_equivalent;
  doc["recovered_potential"] = report.recovered_potential;
  if (report.return_invariance_max_error) {
    doc["return_invariance_max_error"] = *report.return_invariance_max_error;
  }
  if (report.policy_match) doc["policy_match"] = *report.policy_match;
  std::ofstream os(path);
  if (!os) throw IoError("save_report: cannot open " + path.string());
  os << doc.dump(2) << "\n";
}

}  // namespace rlens
