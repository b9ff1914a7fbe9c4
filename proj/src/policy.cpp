#include "rlens/policy.hpp"

#include <algorithm>
#include <cmath>

namespace rlens {

double QTable::state_value(int s) const {
  double best = q[s * kNumGridActions];
  for (int a = 1; a < kNumGridActions; ++a) best = std::max(best, q[s * kNumGridActions + a]);
  return best;
}

QTable value_iteration(const GridSpec& spec, const TabularReward& r, double gamma,
                       double threshold) {
  spec.validate();
  validate_gamma(gamma);
  if (!(threshold > 0.0)) throw InputError("value_iteration: threshold must be positive");
  if (r.width != spec.width || r.height != spec.height) {
    throw InputError("value_iteration: reward table does not match the grid");
  }
  const int n = spec.num_states();
  std::vector<char> terminal(n, 0);
  for (const Cell& c : spec.terminal_cells) terminal[spec.state_index(c)] = 1;

  std::vector<double> v(n, 0.0);
  std::vector<double> v_next(n, 0.0);
  double residual = 0.0;
  constexpr long kIterationCap = 1000000;
  long iter = 0;
  for (; iter < kIterationCap; ++iter) {
    residual = 0.0;
    for (int s = 0; s < n; ++s) {
      if (terminal[s]) {
        v_next[s] = 0.0;
        continue;
      }
      double best = -1e300;
      for (int a = 0; a < kNumGridActions; ++a) {
        const Transition& t = r.transitions[s * kNumGridActions + a];
        best = std::max(best, r.values[s * kNumGridActions + a] + gamma * v[t.s_next]);
      }
      v_next[s] = best;
      residual = std::max(residual, std::abs(best - v[s]));
    }
    std::swap(v, v_next);
    if (residual < threshold) break;
  }
  if (iter >= kIterationCap) {
    throw DiagnosticError("value_iteration: did not converge within the iteration cap");
  }

  QTable out;
  out.width = spec.width;
  out.height = spec.height;
  out.gamma = gamma;
  out.residual = residual;
  out.q.resize(static_cast<std::size_t>(n) * kNumGridActions);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < kNumGridActions; ++a) {
      if (terminal[s]) {
        out.q[s * kNumGridActions + a] = 0.0;  // nothing is collectable past a terminal
        continue;
      }
      const Transition& t = r.transitions[s * kNumGridActions + a];
      out.q[s * kNumGridActions + a] = r.values[s * kNumGridActions + a] + gamma * v[t.s_next];
    }
  }
  return out;
}

std::vector<std::vector<int>> greedy_policy(const QTable& q, double tie_tol) {
  std::vector<std::vector<int>> out(q.num_states());
  for (int s = 0; s < q.num_states(); ++s) {
    const double best = q.state_value(s);
    for (int a = 0; a < kNumGridActions; ++a) {
      if (q.value(s, a) >= best - tie_tol) out[s].push_back(a);
    }
  }
  return out;
}

double mc_expert(const MountainCarState& s) { return s.velocity >= 0.0 ? 1.0 : -1.0; }

}  // namespace rlens
