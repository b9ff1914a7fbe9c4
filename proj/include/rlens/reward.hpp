#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "rlens/grid.hpp"
#include "rlens/mountain_car.hpp"

namespace rlens {

// Evaluatable reward function r(s, a, s'). Only batch evaluation is required;
// nothing about how the values are produced is assumed.
template <typename T>
class RewardSource {
 public:
  virtual ~RewardSource() = default;

  virtual void evaluate(std::span<const T> batch, std::span<double> out) const = 0;

  std::vector<double> evaluate_all(std::span<const T> batch) const {
    std::vector<double> out(batch.size());
    evaluate(batch, std::span<double>(out));
    return out;
  }

  double evaluate_one(const T& t) const {
    double out = 0.0;
    evaluate(std::span<const T>(&t, 1), std::span<double>(&out, 1));
    return out;
  }
};

using GridRewardSource = RewardSource<Transition>;
using McRewardSource = RewardSource<McTransition>;

// Discount factors live in [0, 1); shaping recovery divides by gamma - 1.
inline void validate_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InputError("gamma must be in [0, 1)");
}

// Dense per-transition table over a grid enumeration, in enumeration order.
struct TabularReward {
  int width = 0;
  int height = 0;
  double gamma = 0.99;
  std::vector<Transition> transitions;  // enumeration order, s-major
  std::vector<double> values;           // parallel to transitions

  double value(int s, int a) const { return values[s * kNumGridActions + a]; }
  double value(const Transition& t) const { return value(t.s, t.a); }
  int num_states() const { return width * height; }

  static TabularReward from_source(const GridSpec& spec, const GridRewardSource& r, double gamma);
};

class TabularRewardSource final : public GridRewardSource {
 public:
  explicit TabularRewardSource(TabularReward table) : table_(std::move(table)) {}
  void evaluate(std::span<const Transition> batch, std::span<double> out) const override;
  const TabularReward& table() const { return table_; }

 private:
  TabularReward table_;
};

// r(s,a,s') = 1 on entering the goal cell, 0 elsewhere.
TabularReward goal_reward(const GridSpec& spec, double gamma = 0.99);

// +1 on the moves of the alternating right/up staircase from (0,0) to the
// goal, -0.2 on every other transition. Square grids only.
TabularReward path_reward(const GridSpec& spec, double gamma = 0.99);

// The staircase cells of the path reward, start to goal.
std::vector<Cell> path_cells(const GridSpec& spec);

// --- grid potentials (plain per-state tables) ---

std::vector<double> manhattan_potential(const GridSpec& spec, int sign);
std::vector<double> random_potential(const GridSpec& spec, std::uint64_t seed, double scale);

// --- shaping and noise wrappers ---

// r(s,a,s') + gamma * phi[s'] - phi[s], exact.
class ShapedGridReward final : public GridRewardSource {
 public:
  ShapedGridReward(std::shared_ptr<const GridRewardSource> base, std::vector<double> phi,
                   double gamma);
  void evaluate(std::span<const Transition> batch, std::span<double> out) const override;
  const std::vector<double>& phi() const { return phi_; }
  double gamma() const { return gamma_; }

 private:
  std::shared_ptr<const GridRewardSource> base_;
  std::vector<double> phi_;
  double gamma_;
};

std::shared_ptr<const GridRewardSource> apply_shaping(std::shared_ptr<const GridRewardSource> base,
                                                      std::vector<double> phi, double gamma);

// Zero-mean Gaussian noise per transition, keyed by (seed, transition) so the
// same transition always gets the same draw.
class NoisyGridReward final : public GridRewardSource {
 public:
  NoisyGridReward(std::shared_ptr<const GridRewardSource> base, double sigma, std::uint64_t seed);
  void evaluate(std::span<const Transition> batch, std::span<double> out) const override;

 private:
  std::shared_ptr<const GridRewardSource> base_;
  double sigma_;
  std::uint64_t seed_;
};

std::shared_ptr<const GridRewardSource> add_noise(std::shared_ptr<const GridRewardSource> base,
                                                  double sigma, std::uint64_t seed);

// --- mountain car rewards and potentials ---

// 1 on reaching the goal threshold, 0 elsewhere.
class McGroundTruthReward final : public McRewardSource {
 public:
  void evaluate(std::span<const McTransition> batch, std::span<double> out) const override;
};

std::shared_ptr<const McRewardSource> mc_ground_truth();

class ShapedMcReward final : public McRewardSource {
 public:
  ShapedMcReward(std::shared_ptr<const McRewardSource> base, McPotentialFn phi, double gamma);
  void evaluate(std::span<const McTransition> batch, std::span<double> out) const override;

 private:
  std::shared_ptr<const McRewardSource> base_;
  McPotentialFn phi_;
  double gamma_;
};

std::shared_ptr<const McRewardSource> apply_shaping_mc(std::shared_ptr<const McRewardSource> base,
                                                       McPotentialFn phi, double gamma);

class NoisyMcReward final : public McRewardSource {
 public:
  NoisyMcReward(std::shared_ptr<const McRewardSource> base, double sigma, std::uint64_t seed);
  void evaluate(std::span<const McTransition> batch, std::span<double> out) const override;

 private:
  std::shared_ptr<const McRewardSource> base_;
  double sigma_;
  std::uint64_t seed_;
};

std::shared_ptr<const McRewardSource> add_noise_mc(std::shared_ptr<const McRewardSource> base,
                                                   double sigma, std::uint64_t seed);

// Phi(s) = c_p * position + c_v * velocity on the raw state.
McPotentialFn mc_linear_potential(double c_p, double c_v);

// Optimal state values on a discretized (position x velocity) grid, queried
// by bilinear interpolation. Goal states are pinned to 0.
struct McValueTable {
  int resolution = 0;
  double gamma = 0.99;
  std::vector<double> values;  // resolution x resolution, position-major

  double node_position(int i) const;
  double node_velocity(int j) const;
  double interpolate(const MountainCarState& s) const;
};

// Value iteration with actions {-1, 0, 1} until the max Bellman residual is
// below 1e-6. Throws DiagnosticError if the iteration cap is exceeded.
McValueTable mc_value_table(double gamma, int grid_resolution);

McPotentialFn mc_value_potential(double gamma, int grid_resolution);

// --- persistence ---

void save_tabular(const TabularReward& r, const std::filesystem::path& path);
TabularReward load_tabular(const std::filesystem::path& path);

}  // namespace rlens
