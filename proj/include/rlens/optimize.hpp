#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rlens/costs.hpp"
#include "rlens/potential_model.hpp"
#include "rlens/reward.hpp"

namespace rlens {

enum class OptimizerKind { Sgd, Adam };

const char* optimizer_kind_name(OptimizerKind k);
OptimizerKind optimizer_kind_from_name(const std::string& name);

struct OptimizeConfig {
  int steps = 2000;
  int batch_size = 0;  // 0 = full batch
  double learning_rate = 0.05;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
  int log_every = 50;

  void validate() const;
};

// sgd or adam(0.9, 0.999, 1e-8) with bias correction.
class OptimizerState {
 public:
  OptimizerState(OptimizerKind kind, std::size_t n_params);

  void step(std::span<double> params, std::span<const double> grad, double lr);

 private:
  OptimizerKind kind_;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

template <typename T>
struct PreprocessResult {
  std::shared_ptr<PotentialModel> potential;
  std::shared_ptr<const RewardSource<T>> preprocessed;  // base + trained shaping, exact
  std::vector<std::pair<int, double>> cost_trace;       // (step, batch cost)
  double final_cost = 0.0;                              // full-distribution cost at the end
};

using GridPreprocessResult = PreprocessResult<Transition>;
using McPreprocessResult = PreprocessResult<McTransition>;

// Minimizes the cost of r + gamma * Phi(s') - Phi(s) over the potential's
// parameters. The base reward is evaluated once up front and treated as a
// constant black box; gradients flow only through the shaping term.
GridPreprocessResult preprocess_grid(std::shared_ptr<const GridRewardSource> r,
                                     const GridSpec& spec, std::unique_ptr<PotentialModel> model,
                                     double gamma, const CostSpec& cost,
                                     const OptimizeConfig& cfg);

// Same, over transitions pooled from trajectories.
McPreprocessResult preprocess_mc(std::shared_ptr<const McRewardSource> r,
                                 std::span<const McTrajectory> trajectories,
                                 std::unique_ptr<PotentialModel> model, double gamma,
                                 const CostSpec& cost, const OptimizeConfig& cfg);

// Compares the assembled dJ/dtheta against central differences of the cost
// computed through the public shaping + cost path, at n_probes random
// parameter coordinates. Returns the max relative error.
double finite_difference_audit_grid(std::shared_ptr<const GridRewardSource> r,
                                    const GridSpec& spec, PotentialModel& model, double gamma,
                                    const CostSpec& cost, int n_probes, std::uint64_t seed);

double finite_difference_audit_mc(std::shared_ptr<const McRewardSource> r,
                                  std::span<const McTrajectory> trajectories,
                                  PotentialModel& model, double gamma, const CostSpec& cost,
                                  int n_probes, std::uint64_t seed);

// Full-distribution cost of a reward source under the tabular-uniform (grid)
// distribution.
double grid_cost(const GridRewardSource& r, const GridSpec& spec, const CostSpec& cost);

// Full-pool cost over trajectory transitions.
double mc_cost(const McRewardSource& r, std::span<const McTrajectory> trajectories,
               const CostSpec& cost);

}  // namespace rlens
