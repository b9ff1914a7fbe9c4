#include "rlens/reward.hpp"

#include <bit>
#include <cmath>

#include "rlens/rng.hpp"

namespace rlens {

TabularReward TabularReward::from_source(const GridSpec& spec, const GridRewardSource& r,
                                         double gamma) {
  TabularReward out;
  out.width = spec.width;
  out.height = spec.height;
  out.gamma = gamma;
  out.transitions = enumerate_transitions(spec);
  out.values = r.evaluate_all(std::span<const Transition>(out.transitions));
  return out;
}

void TabularRewardSource::evaluate(std::span<const Transition> batch,
                                   std::span<double> out) const {
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = table_.value(batch[i]);
}

TabularReward goal_reward(const GridSpec& spec, double gamma) {
  spec.validate();
  TabularReward out;
  out.width = spec.width;
  out.height = spec.height;
  out.gamma = gamma;
  out.transitions = enumerate_transitions(spec);
  out.values.reserve(out.transitions.size());
  const int goal = spec.state_index(spec.goal);
  for (const Transition& t : out.transitions) {
    out.values.push_back(t.s_next == goal ? 1.0 : 0.0);
  }
  return out;
}

std::vector<Cell> path_cells(const GridSpec& spec) {
  if (spec.width != spec.height) throw InputError("path reward requires a square grid");
  std::vector<Cell> cells;
  Cell c{0, 0};
  cells.push_back(c);
  // Alternate right/up, starting with right, until the main-diagonal goal.
  bool move_right = true;
  while (!(c.x == spec.width - 1 && c.y == spec.height - 1)) {
    if (move_right) {
      c.x += 1;
    } else {
      c.y += 1;
    }
    move_right = !move_right;
    cells.push_back(c);
  }
  return cells;
}

TabularReward path_reward(const GridSpec& spec, double gamma) {
  spec.validate();
  const std::vector<Cell> cells = path_cells(spec);
  TabularReward out;
  out.width = spec.width;
  out.height = spec.height;
  out.gamma = gamma;
  out.transitions = enumerate_transitions(spec);
  out.values.assign(out.transitions.size(), -0.2);
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const int from = spec.state_index(cells[i]);
    const int to = spec.state_index(cells[i + 1]);
    for (int a = 0; a < kNumGridActions; ++a) {
      const std::size_t idx = static_cast<std::size_t>(from) * kNumGridActions + a;
      if (out.transitions[idx].s_next == to && to != from) out.values[idx] = 1.0;
    }
  }
  return out;
}

std::vector<double> manhattan_potential(const GridSpec& spec, int sign) {
  spec.validate();
  if (sign != 1 && sign != -1) throw InputError("manhattan_potential: sign must be +1 or -1");
  std::vector<double> phi(spec.num_states());
  for (int s = 0; s < spec.num_states(); ++s) {
    phi[s] = sign * manhattan_distance(spec.cell(s), spec.goal);
  }
  return phi;
}

std::vector<double> random_potential(const GridSpec& spec, std::uint64_t seed, double scale) {
  spec.validate();
  if (!(scale > 0.0)) throw InputError("random_potential: scale must be positive");
  Rng rng(seed);
  std::vector<double> phi(spec.num_states());
  for (double& v : phi) v = rng.uniform(0.0, scale);
  for (const Cell& c : spec.terminal_cells) phi[spec.state_index(c)] = 0.0;
  return phi;
}

ShapedGridReward::ShapedGridReward(std::shared_ptr<const GridRewardSource> base,
                                   std::vector<double> phi, double gamma)
    : base_(std::move(base)), phi_(std::move(phi)), gamma_(gamma) {
  if (!base_) throw InputError("shaped reward: null base");
  validate_gamma(gamma);
}

void ShapedGridReward::evaluate(std::span<const Transition> batch, std::span<double> out) const {
  base_->evaluate(batch, out);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] += gamma_ * phi_[batch[i].s_next] - phi_[batch[i].s];
  }
}

std::shared_ptr<const GridRewardSource> apply_shaping(std::shared_ptr<const GridRewardSource> base,
                                                      std::vector<double> phi, double gamma) {
  return std::make_shared<ShapedGridReward>(std::move(base), std::move(phi), gamma);
}

namespace {

std::uint64_t transition_key(std::uint64_t seed, const Transition& t) {
  std::uint64_t h = splitmix64(seed);
  h = hash_combine(h, static_cast<std::uint64_t>(t.s));
  h = hash_combine(h, static_cast<std::uint64_t>(t.a));
  h = hash_combine(h, static_cast<std::uint64_t>(t.s_next));
  return h;
}

std::uint64_t transition_key(std::uint64_t seed, const McTransition& t) {
  std::uint64_t h = splitmix64(seed);
  h = hash_combine(h, std::bit_cast<std::uint64_t>(t.s.position));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(t.s.velocity));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(t.a));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(t.s_next.position));
  h = hash_combine(h, std::bit_cast<std::uint64_t>(t.s_next.velocity));
  return h;
}

}  // namespace

NoisyGridReward::NoisyGridReward(std::shared_ptr<const GridRewardSource> base, double sigma,
                                 std::uint64_t seed)
    : base_(std::move(base)), sigma_(sigma), seed_(seed) {
  if (!base_) throw InputError("noisy reward: null base");
  if (sigma < 0.0) throw InputError("noisy reward: sigma must be >= 0");
}

void NoisyGridReward::evaluate(std::span<const Transition> batch, std::span<double> out) const {
  base_->evaluate(batch, out);
  if (sigma_ == 0.0) return;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] += sigma_ * hashed_normal(transition_key(seed_, batch[i]));
  }
}

std::shared_ptr<const GridRewardSource> add_noise(std::shared_ptr<const GridRewardSource> base,
                                                  double sigma, std::uint64_t seed) {
  return std::make_shared<NoisyGridReward>(std::move(base), sigma, seed);
}

void McGroundTruthReward::evaluate(std::span<const McTransition> batch,
                                   std::span<double> out) const {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] = mc_at_goal(batch[i].s_next) ? 1.0 : 0.0;
  }
}

std::shared_ptr<const McRewardSource> mc_ground_truth() {
  return std::make_shared<McGroundTruthReward>();
}

ShapedMcReward::ShapedMcReward(std::shared_ptr<const McRewardSource> base, McPotentialFn phi,
                               double gamma)
    : base_(std::move(base)), phi_(std::move(phi)), gamma_(gamma) {
  if (!base_ || !phi_) throw InputError("shaped reward: null base or potential");
  validate_gamma(gamma);
}

void ShapedMcReward::evaluate(std::span<const McTransition> batch, std::span<double> out) const {
  base_->evaluate(batch, out);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] += gamma_ * phi_(batch[i].s_next) - phi_(batch[i].s);
  }
}

std::shared_ptr<const McRewardSource> apply_shaping_mc(std::shared_ptr<const McRewardSource> base,
                                                       McPotentialFn phi, double gamma) {
  return std::make_shared<ShapedMcReward>(std::move(base), std::move(phi), gamma);
}

NoisyMcReward::NoisyMcReward(std::shared_ptr<const McRewardSource> base, double sigma,
                             std::uint64_t seed)
    : base_(std::move(base)), sigma_(sigma), seed_(seed) {
  if (!base_) throw InputError("noisy reward: null base");
  if (sigma < 0.0) throw InputError("noisy reward: sigma must be >= 0");
}

void NoisyMcReward::evaluate(std::span<const McTransition> batch, std::span<double> out) const {
  base_->evaluate(batch, out);
  if (sigma_ == 0.0) return;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] += sigma_ * hashed_normal(transition_key(seed_, batch[i]));
  }
}

std::shared_ptr<const McRewardSource> add_noise_mc(std::shared_ptr<const McRewardSource> base,
                                                   double sigma, std::uint64_t seed) {
  return std::make_shared<NoisyMcReward>(std::move(base), sigma, seed);
}

McPotentialFn mc_linear_potential(double c_p, double c_v) {
  return [c_p, c_v](const MountainCarState& s) { return c_p * s.position + c_v * s.velocity; };
}

double McValueTable::node_position(int i) const {
  return kMcMinPosition + (kMcMaxPosition - kMcMinPosition) * i / (resolution - 1);
}

double McValueTable::node_velocity(int j) const {
  return -kMcMaxSpeed + 2.0 * kMcMaxSpeed * j / (resolution - 1);
}

double McValueTable::interpolate(const MountainCarState& s) const {
  if (mc_at_goal(s)) return 0.0;
  const int n = resolution;
  const double fp = (s.position - kMcMinPosition) / (kMcMaxPosition - kMcMinPosition) * (n - 1);
  const double fv = (s.velocity + kMcMaxSpeed) / (2.0 * kMcMaxSpeed) * (n - 1);
  int i = std::clamp(static_cast<int>(fp), 0, n - 2);
  int j = std::clamp(static_cast<int>(fv), 0, n - 2);
  const double tx = std::clamp(fp - i, 0.0, 1.0);
  const double ty = std::clamp(fv - j, 0.0, 1.0);
  const double v00 = values[i * n + j];
  const double v10 = values[(i + 1) * n + j];
  const double v01 = values[i * n + j + 1];
  const double v11 = values[(i + 1) * n + j + 1];
  return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

McValueTable mc_value_table(double gamma, int grid_resolution) {
  if (grid_resolution < 32) throw InputError("mc_value_table: grid_resolution must be >= 32");
  validate_gamma(gamma);
  McValueTable table;
  table.resolution = grid_resolution;
  table.gamma = gamma;
  table.values.assign(static_cast<std::size_t>(grid_resolution) * grid_resolution, 0.0);

  const double actions[3] = {-1.0, 0.0, 1.0};
  constexpr int kMaxIterations = 100000;
  constexpr double kTolerance = 1e-6;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double residual = 0.0;
    for (int i = 0; i < grid_resolution; ++i) {
      const double p = table.node_position(i);
      for (int j = 0; j < grid_resolution; ++j) {
        const MountainCarState s{p, table.node_velocity(j)};
        if (mc_at_goal(s)) continue;  // terminal, pinned to 0
        double best = -1e300;
        for (double a : actions) {
          const MountainCarState next = mc_step(s, a);
          const double r = mc_at_goal(next) ? 1.0 : 0.0;
          best = std::max(best, r + gamma * table.interpolate(next));
        }
        double& cell = table.values[static_cast<std::size_t>(i) * grid_resolution + j];
        residual = std::max(residual, std::abs(best - cell));
        cell = best;
      }
    }
    if (residual < kTolerance) return table;
  }
  throw DiagnosticError("mc_value_table: value iteration did not converge");
}

McPotentialFn mc_value_potential(double gamma, int grid_resolution) {
  auto table = std::make_shared<McValueTable>(mc_value_table(gamma, grid_resolution));
  return [table](const MountainCarState& s) { return table->interpolate(s); };
}

}  // namespace rlens
