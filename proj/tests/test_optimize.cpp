#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rlens/equivalence.hpp"
#include "rlens/optimize.hpp"
#include "rlens/policy.hpp"
#include "test_util.hpp"

using namespace rlens;

namespace {

class NanReward final : public GridRewardSource {
 public:
  void evaluate(std::span<const Transition> batch, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), std::numeric_limits<double>::quiet_NaN());
  }
};

OptimizeConfig tabular_config(int steps, double lr, std::uint64_t seed) {
  OptimizeConfig cfg;
  cfg.steps = steps;
  cfg.batch_size = 0;
  cfg.learning_rate = lr;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.seed = seed;
  cfg.log_every = 10;
  return cfg;
}

void randomize(PotentialModel& m, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  for (double& p : m.params()) {
    p = scale * (2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0);
  }
}

}  // namespace

TEST_CASE("optimizer step rules") {
  std::vector<double> params{1.0, -2.0};
  std::vector<double> grad{0.0, 0.0};

  OptimizerState sgd(OptimizerKind::Sgd, 2);
  sgd.step(params, grad, 0.1);
  CHECK(params == std::vector<double>{1.0, -2.0});  // zero gradient, no move

  grad = {0.5, -0.25};
  sgd.step(params, grad, 0.1);
  CHECK(params[0] == doctest::Approx(1.0 - 0.05).epsilon(1e-12));
  CHECK(params[1] == doctest::Approx(-2.0 + 0.025).epsilon(1e-12));

  // adam's bias-corrected first step moves by ~lr against the gradient sign
  OptimizerState adam(OptimizerKind::Adam, 2);
  params = {0.0, 0.0};
  grad = {3.0, -0.001};
  adam.step(params, grad, 0.05);
  CHECK(params[0] == doctest::Approx(-0.05).epsilon(1e-6));
  CHECK(params[1] == doctest::Approx(0.05).epsilon(1e-4));

  std::vector<double> bad{1.0};
  CHECK_THROWS_AS(adam.step(params, bad, 0.1), InputError);
}

TEST_CASE("zero reward is a fixed point") {
  const GridSpec spec = testutil::default_grid();
  TabularReward zero = goal_reward(spec);
  std::fill(zero.values.begin(), zero.values.end(), 0.0);

  auto result = preprocess_grid(std::make_shared<TabularRewardSource>(zero), spec,
                                std::make_unique<TabularPotential>(spec.num_states()), 0.99,
                                {CostFamily::Sparse, PenaltyKind::L1}, tabular_config(50, 0.05, 1));
  for (double p : result.potential->params()) CHECK(p == 0.0);
  for (const auto& [step, j] : result.cost_trace) CHECK(j == 0.0);
  CHECK(result.final_cost == 0.0);
}

TEST_CASE("goal reward is already sparse: potential stays near zero") {
  const GridSpec spec = testutil::default_grid();
  const TabularReward goal = goal_reward(spec);
  auto src = std::make_shared<TabularRewardSource>(goal);
  const CostSpec cost{CostFamily::Sparse, PenaltyKind::L1};

  const double initial = grid_cost(*src, spec, cost);
  auto result = preprocess_grid(src, spec,
                                std::make_unique<TabularPotential>(spec.num_states()), 0.99, cost,
                                tabular_config(2000, 0.1, 2));
  CHECK(result.final_cost <= initial);
  double max_abs = 0.0;
  for (double p : result.potential->params()) max_abs = std::max(max_abs, std::abs(p));
  CHECK(max_abs < 0.05);
}

TEST_CASE("preprocessing strips manhattan shaping off the goal reward") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  auto base = std::make_shared<TabularRewardSource>(goal_reward(spec, gamma));
  auto shaped = apply_shaping(base, manhattan_potential(spec, 1), gamma);
  const CostSpec cost{CostFamily::Sparse, PenaltyKind::L1};

  auto result = preprocess_grid(shaped, spec,
                                std::make_unique<TabularPotential>(spec.num_states()), gamma,
                                cost, tabular_config(20000, 0.05, 3));

  CHECK(result.final_cost == doctest::Approx(0.01).epsilon(0.05));

  // the preprocessed source is exactly shaping-equivalent to its input
  const TabularReward input = TabularReward::from_source(spec, *shaped, gamma);
  const TabularReward output = TabularReward::from_source(spec, *result.preprocessed, gamma);
  const auto [ok, residual] = check_shaping_equiv(input, output, gamma, 1e-9);
  CHECK(ok);
  CHECK(residual < 1e-9);
}

TEST_CASE("smoothed cost trace trends downward") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  auto base = std::make_shared<TabularRewardSource>(goal_reward(spec, gamma));
  auto shaped = apply_shaping(base, random_potential(spec, 4, 5.0), gamma);

  OptimizeConfig cfg = tabular_config(800, 0.05, 4);
  cfg.log_every = 1;
  auto result = preprocess_grid(shaped, spec,
                                std::make_unique<TabularPotential>(spec.num_states()), gamma,
                                {CostFamily::Sparse, PenaltyKind::L1}, cfg);

  const auto& trace = result.cost_trace;
  REQUIRE(trace.size() > 100);
  constexpr std::size_t kWindow = 50;
  double prev = 1e300;
  for (std::size_t i = 0; i + kWindow <= trace.size(); i += kWindow) {
    double avg = 0.0;
    for (std::size_t k = i; k < i + kWindow; ++k) avg += trace[k].second / kWindow;
    CHECK(avg <= prev + 1e-6);
    prev = avg;
  }
}

TEST_CASE("full-batch runs are deterministic; divergence is reported") {
  const GridSpec spec = testutil::default_grid();
  auto base = std::make_shared<TabularRewardSource>(path_reward(spec));
  const CostSpec cost{CostFamily::Smooth, PenaltyKind::Log1pAbs};

  auto run = [&](std::uint64_t seed) {
    auto result = preprocess_grid(base, spec,
                                  std::make_unique<TabularPotential>(spec.num_states()), 0.99,
                                  cost, tabular_config(200, 0.05, seed));
    return std::vector<double>(result.potential->params().begin(),
                               result.potential->params().end());
  };
  CHECK(run(7) == run(7));

  CHECK_THROWS_AS(preprocess_grid(std::make_shared<NanReward>(), spec,
                                  std::make_unique<TabularPotential>(spec.num_states()), 0.99,
                                  {CostFamily::Sparse, PenaltyKind::L1},
                                  tabular_config(10, 0.05, 0)),
                  DivergenceError);
}

TEST_CASE("early stop cuts a converged run short") {
  const GridSpec spec = testutil::default_grid();
  auto base = std::make_shared<TabularRewardSource>(goal_reward(spec));

  OptimizeConfig cfg = tabular_config(50000, 0.05, 5);
  auto result = preprocess_grid(base, spec,
                                std::make_unique<TabularPotential>(spec.num_states()), 0.99,
                                {CostFamily::Sparse, PenaltyKind::L1}, cfg);
  CHECK(result.cost_trace.back().first < 50000);  // plateau fired
  CHECK(result.final_cost <= 0.0105);
}

TEST_CASE("stochastic mountain-car runs are seed deterministic") {
  const auto trajectories = mc_rollout(mc_expert, 4, 200, 55);
  const auto gt = mc_ground_truth();
  const auto shaped = apply_shaping_mc(gt, mc_linear_potential(1.0, 0.0), 0.99);

  OptimizeConfig cfg;
  cfg.steps = 300;
  cfg.batch_size = 64;
  cfg.learning_rate = 0.01;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.seed = 9;
  cfg.log_every = 50;

  auto run = [&] {
    auto result = preprocess_mc(shaped, trajectories, std::make_unique<LinearPotential>(2), 0.99,
                                {CostFamily::Sparse, PenaltyKind::Log1pAbs}, cfg);
    return std::vector<double>(result.potential->params().begin(),
                               result.potential->params().end());
  };
  CHECK(run() == run());

  OptimizeConfig bad = cfg;
  bad.batch_size = 100000;
  CHECK_THROWS_AS(preprocess_mc(shaped, trajectories, std::make_unique<LinearPotential>(2), 0.99,
                                {CostFamily::Sparse, PenaltyKind::Log1pAbs}, bad),
                  InputError);
}

TEST_CASE("finite difference audits validate the assembled gradient") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  auto base = std::make_shared<TabularRewardSource>(goal_reward(spec, gamma));
  auto shaped = apply_shaping(base, manhattan_potential(spec, 1), gamma);

  // tabular, sparse-l1, parameters pushed away from the kinks
  TabularPotential tab(spec.num_states());
  randomize(tab, 21, 0.35);
  const double tab_err = finite_difference_audit_grid(
      shaped, spec, tab, gamma, {CostFamily::Sparse, PenaltyKind::L1}, 100, 77);
  CHECK(tab_err < 1e-4);

  // mlp, smooth-log, over a trajectory pool
  const auto trajectories = mc_rollout(mc_expert, 3, 160, 71);
  const auto mc_shaped = apply_shaping_mc(mc_ground_truth(), mc_linear_potential(1.0, 2.0), gamma);
  MlpPotential mlp({2, 16, 16, 1}, 13);
  randomize(mlp, 22, 0.4);
  const double mlp_err = finite_difference_audit_mc(
      mc_shaped, trajectories, mlp, gamma, {CostFamily::Smooth, PenaltyKind::Log1pAbs}, 100, 78);
  CHECK(mlp_err < 1e-3);

  // zero potential on the zero reward: both routes are exactly zero
  const GridSpec tiny{3, 3, {2, 2}, {}, 10};
  TabularReward zero = goal_reward(tiny);
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  TabularPotential flat(tiny.num_states());
  const double zero_err = finite_difference_audit_grid(
      std::make_shared<TabularRewardSource>(zero), tiny, flat, gamma,
      {CostFamily::Sparse, PenaltyKind::L1}, 25, 79);
  CHECK(zero_err == 0.0);
}
