#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rlens/costs.hpp"
#include "rlens/policy.hpp"
#include "test_util.hpp"

using namespace rlens;

namespace {

class ConstantGridReward final : public GridRewardSource {
 public:
  explicit ConstantGridReward(double v) : v_(v) {}
  void evaluate(std::span<const Transition> batch, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), v_);
  }

 private:
  double v_;
};

class ScaledReward final : public GridRewardSource {
 public:
  ScaledReward(std::shared_ptr<const GridRewardSource> base, double k)
      : base_(std::move(base)), k_(k) {}
  void evaluate(std::span<const Transition> batch, std::span<double> out) const override {
    base_->evaluate(batch, out);
    for (double& v : out) v *= k_;
  }

 private:
  std::shared_ptr<const GridRewardSource> base_;
  double k_;
};

}  // namespace

TEST_CASE("penalty closed forms") {
  CHECK(penalty(PenaltyKind::L1, -2.0).value == 2.0);
  CHECK(penalty(PenaltyKind::L1, -2.0).derivative == -1.0);
  CHECK(penalty(PenaltyKind::L1, 0.0).value == 0.0);
  CHECK(penalty(PenaltyKind::L1, 0.0).derivative == 0.0);  // subgradient choice

  CHECK(penalty(PenaltyKind::Log1pAbs, 0.0).value == 0.0);
  CHECK(penalty(PenaltyKind::Log1pAbs, 0.0).derivative == 0.0);
  const double x = std::exp(1.0) - 1.0;
  CHECK(penalty(PenaltyKind::Log1pAbs, x).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(penalty(PenaltyKind::Log1pAbs, x).derivative ==
        doctest::Approx(1.0 / std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("penalty derivatives match central differences") {
  std::mt19937_64 gen(5);
  auto uniform = [&gen](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
  };
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    double x = uniform(-4.0, 4.0);
    if (std::abs(x) < 1e-3) x += 0.01;  // keep clear of the kink
    for (PenaltyKind kind : {PenaltyKind::L1, PenaltyKind::Log1pAbs}) {
      const double fd = (penalty(kind, x + h).value - penalty(kind, x - h).value) / (2.0 * h);
      CHECK(std::abs(fd - penalty(kind, x).derivative) < 1e-6);
    }
  }
}

TEST_CASE("sparsity cost of the goal reward") {
  const GridSpec spec = testutil::default_grid();
  const TabularRewardSource r(goal_reward(spec));
  const auto transitions = enumerate_transitions(spec);

  const SparsityCost cost =
      sparsity_cost(r, std::span<const Transition>(transitions), PenaltyKind::L1);
  CHECK(cost.j == doctest::Approx(0.01).epsilon(1e-12));  // 5 unit entries / 500

  // oracle recount through the raw table
  double oracle = 0.0;
  for (const Transition& t : transitions) {
    oracle += std::abs(r.table().value(t)) / transitions.size();
  }
  CHECK(cost.j == doctest::Approx(oracle).epsilon(1e-12));

  // upstream derivatives: f'(r)/n
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const double expected = (r.table().values[i] > 0 ? 1.0 : 0.0) / 500.0;
    CHECK(cost.per_item[i] == expected);
  }

  CHECK_THROWS_AS(sparsity_cost(r, std::span<const Transition>(), PenaltyKind::L1), InputError);
}

TEST_CASE("sparsity cost is positively homogeneous and order invariant") {
  const GridSpec spec = testutil::default_grid();
  auto base = std::make_shared<TabularRewardSource>(path_reward(spec));
  auto transitions = enumerate_transitions(spec);

  const double j1 =
      sparsity_cost(*base, std::span<const Transition>(transitions), PenaltyKind::L1).j;
  const ScaledReward doubled(base, 2.0);
  const ScaledReward tenfold(base, 10.0);
  CHECK(sparsity_cost(doubled, std::span<const Transition>(transitions), PenaltyKind::L1).j ==
        doctest::Approx(2.0 * j1).epsilon(1e-12));
  CHECK(sparsity_cost(tenfold, std::span<const Transition>(transitions), PenaltyKind::L1).j ==
        doctest::Approx(10.0 * j1).epsilon(1e-12));

  std::reverse(transitions.begin(), transitions.end());
  CHECK(sparsity_cost(*base, std::span<const Transition>(transitions), PenaltyKind::L1).j ==
        doctest::Approx(j1).epsilon(1e-12));
}

TEST_CASE("smoothness cost over the exhaustive pair enumeration") {
  const GridSpec spec = testutil::default_grid();
  const TabularRewardSource r(goal_reward(spec));
  const auto pairs = enumerate_adjacent_pairs(spec);

  const SmoothnessCost cost = smoothness_cost(
      r, std::span<const std::pair<Transition, Transition>>(pairs), PenaltyKind::L1);

  // oracle: mean |r(t1) - r(t2)| with goal-entry indicators computed inline
  const int goal = spec.state_index(spec.goal);
  double oracle = 0.0;
  for (const auto& [t1, t2] : pairs) {
    const double r1 = t1.s_next == goal ? 1.0 : 0.0;
    const double r2 = t2.s_next == goal ? 1.0 : 0.0;
    oracle += std::abs(r1 - r2) / pairs.size();
  }
  CHECK(cost.j == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(cost.j == doctest::Approx(0.008).epsilon(1e-12));  // 20 mismatched pairs / 2500

  // constant rewards are perfectly smooth
  const ConstantGridReward flat(3.7);
  CHECK(smoothness_cost(flat, std::span<const std::pair<Transition, Transition>>(pairs),
                        PenaltyKind::L1)
            .j == 0.0);
  CHECK(smoothness_cost(flat, std::span<const std::pair<Transition, Transition>>(pairs),
                        PenaltyKind::Log1pAbs)
            .j == 0.0);

  // self-loop chains contribute nothing
  const std::pair<Transition, Transition> self{{0, 0, 0}, {0, 0, 0}};
  const auto single = smoothness_cost(
      r, std::span<const std::pair<Transition, Transition>>(&self, 1), PenaltyKind::L1);
  CHECK(single.j == 0.0);

  const std::pair<Transition, Transition> broken{{0, 4, 1}, {2, 0, 2}};
  CHECK_THROWS_AS(smoothness_cost(r, std::span<const std::pair<Transition, Transition>>(&broken, 1),
                                  PenaltyKind::L1),
                  InputError);
}

TEST_CASE("zero reward has zero sparsity cost") {
  const GridSpec spec = testutil::default_grid();
  const ConstantGridReward zero(0.0);
  const auto transitions = enumerate_transitions(spec);
  CHECK(sparsity_cost(zero, std::span<const Transition>(transitions), PenaltyKind::L1).j == 0.0);
  CHECK(sparsity_cost(zero, std::span<const Transition>(transitions), PenaltyKind::Log1pAbs).j ==
        0.0);
}

TEST_CASE("trajectory batches partition the pool per epoch") {
  const auto trajectories = mc_rollout(mc_expert, 3, 60, 13);

  // one short trajectory: length L gives L transitions and L-1 pairs
  McTrajectory tiny;
  tiny.states = {{-0.5, 0.0}, {-0.51, -0.01}, {-0.52, -0.012}, {-0.53, -0.013}};
  tiny.actions = {-1.0, -1.0, -1.0};
  const auto tiny_pairs = pool_adjacent_pairs(std::span<const McTrajectory>(&tiny, 1));
  CHECK(tiny_pairs.size() == 2);

  auto batches = sparse_trajectory_batches(trajectories, 16, 3);
  const std::size_t pool_size = batches.pool().size();
  REQUIRE(pool_size > 16);

  // collect one epoch: every pooled transition appears exactly once
  std::vector<McTransition> seen;
  while (seen.size() < pool_size) {
    const auto& batch = batches.next_batch();
    seen.insert(seen.end(), batch.begin(), batch.end());
  }
  CHECK(seen.size() == pool_size);
  auto key = [](const McTransition& t) {
    return std::make_tuple(t.s.position, t.s.velocity, t.a, t.s_next.position, t.s_next.velocity);
  };
  std::vector<std::tuple<double, double, double, double, double>> a, b;
  for (const auto& t : seen) a.push_back(key(t));
  for (const auto& t : batches.pool()) b.push_back(key(t));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);

  // seeded reproducibility
  auto batches2 = sparse_trajectory_batches(trajectories, 16, 3);
  CHECK(batches2.next_batch() == sparse_trajectory_batches(trajectories, 16, 3).next_batch());

  CHECK_THROWS_AS(sparse_trajectory_batches(trajectories, pool_size + 1, 0), InputError);
  CHECK_THROWS_AS(sparse_trajectory_batches({}, 4, 0), InputError);
}

TEST_CASE("smoothness pairs from trajectories are chained") {
  const auto trajectories = mc_rollout(mc_expert, 2, 80, 29);
  auto batches = smooth_trajectory_batches(trajectories, 8, 1);
  for (int i = 0; i < 5; ++i) {
    for (const auto& [t1, t2] : batches.next_batch()) {
      CHECK(t1.s_next == t2.s);
    }
  }
}
