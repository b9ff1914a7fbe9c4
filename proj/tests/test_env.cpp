#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "rlens/mountain_car.hpp"
#include "rlens/policy.hpp"
#include "test_util.hpp"

using namespace rlens;

TEST_CASE("grid_step clips at walls and absorbs at terminals") {
  const GridSpec spec = testutil::default_grid();
  CHECK(grid_step(spec, {0, 0}, GridAction::Left) == Cell{0, 0});
  CHECK(grid_step(spec, {5, 5}, GridAction::Up) == Cell{5, 6});
  CHECK(grid_step(spec, {5, 5}, GridAction::Stay) == Cell{5, 5});
  CHECK(grid_step(spec, {9, 9}, GridAction::Right) == Cell{9, 9});  // corner clip

  const GridSpec terminal = testutil::terminal_goal_grid();
  CHECK(grid_step(terminal, {9, 9}, GridAction::Left) == Cell{9, 9});  // absorbing
  CHECK(grid_step(terminal, {9, 9}, GridAction::Down) == Cell{9, 9});

  CHECK_THROWS_AS(grid_step(spec, {10, 0}, GridAction::Stay), InputError);
  CHECK_THROWS_AS(grid_step_index(spec, -1, 0), InputError);
  CHECK_THROWS_AS(grid_step_index(spec, 0, 7), InputError);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(GridSpec({0, 3, {0, 0}, {}, 5}).validate(), InputError);
  CHECK_THROWS_AS(GridSpec({3, 3, {5, 0}, {}, 5}).validate(), InputError);
  CHECK_THROWS_AS(GridSpec({3, 3, {0, 0}, {{4, 4}}, 5}).validate(), InputError);
  CHECK_THROWS_AS(GridSpec({3, 3, {0, 0}, {}, 0}).validate(), InputError);
  CHECK_NOTHROW(testutil::default_grid().validate());
}

TEST_CASE("enumerate_transitions covers every state-action pair once") {
  const GridSpec spec = testutil::default_grid();
  const auto transitions = enumerate_transitions(spec);
  REQUIRE(transitions.size() == 500);

  // transition closure against the independent stepper, exhaustive
  std::set<std::pair<int, int>> seen;
  for (const Transition& t : transitions) {
    const Cell c = spec.cell(t.s);
    const auto [nx, ny] = testutil::ref_step(spec.width, spec.height, c.x, c.y, t.a);
    CHECK(t.s_next == spec.state_index({nx, ny}));
    seen.insert({t.s, t.a});
  }
  CHECK(seen.size() == 500);

  // transitions into the goal corner: stay/up/right clipped at the corner
  // plus the two entering moves
  const int goal = spec.state_index(spec.goal);
  int oracle_count = 0;
  for (int s = 0; s < 100; ++s) {
    for (int a = 0; a < 5; ++a) {
      const Cell c = spec.cell(s);
      const auto [nx, ny] = testutil::ref_step(spec.width, spec.height, c.x, c.y, a);
      if (spec.state_index({nx, ny}) == goal) ++oracle_count;
    }
  }
  CHECK(oracle_count == 5);
  int count = 0;
  for (const Transition& t : transitions) {
    if (t.s_next == goal) ++count;
  }
  CHECK(count == oracle_count);
}

TEST_CASE("degenerate 1x1 grid") {
  const GridSpec spec{1, 1, {0, 0}, {}, 5};
  const auto transitions = enumerate_transitions(spec);
  REQUIRE(transitions.size() == 5);
  for (const Transition& t : transitions) {
    CHECK(t.s == 0);
    CHECK(t.s_next == 0);
  }
  const auto pairs = enumerate_adjacent_pairs(spec);
  CHECK(pairs.size() == 25);
  for (const auto& [t1, t2] : pairs) {
    CHECK(t1.s_next == 0);
    CHECK(t2.s == 0);
  }
}

TEST_CASE("adjacent pairs chain through the middle state") {
  const GridSpec spec = testutil::default_grid();
  const auto pairs = enumerate_adjacent_pairs(spec);
  REQUIRE(pairs.size() == 2500);
  for (const auto& [t1, t2] : pairs) {
    CHECK(t1.s_next == t2.s);
  }
}

TEST_CASE("mc_step matches the dynamics formula") {
  // direct evaluation of the update rule
  const MountainCarState s{-0.5, 0.0};
  const MountainCarState next = mc_step(s, 0.0);
  const double expected_v = -0.0025 * std::cos(-1.5);
  CHECK(next.velocity == doctest::Approx(expected_v).epsilon(1e-12));
  CHECK(next.position == doctest::Approx(-0.5 + expected_v).epsilon(1e-12));

  // left wall clamps the position and zeroes the velocity
  const MountainCarState wall = mc_step({-1.2, -0.05}, 0.0);
  CHECK(wall.position == -1.2);
  CHECK(wall.velocity == 0.0);

  // speed cap
  const MountainCarState fast = mc_step({0.5, 0.07}, 1.0);
  CHECK(fast.velocity == 0.07);

  CHECK_THROWS_AS(mc_step({0.0, 0.0}, 1.5), InputError);
  CHECK_THROWS_AS(mc_step({0.0, 0.0}, -2.0), InputError);
}

TEST_CASE("mc state bounds always hold") {
  std::mt19937_64 gen(99);
  auto uniform = [&gen](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
  };
  for (int i = 0; i < 5000; ++i) {
    MountainCarState s{uniform(-1.2, 0.6), uniform(-0.07, 0.07)};
    s = mc_step(s, uniform(-1.0, 1.0));
    CHECK(s.position >= -1.2);
    CHECK(s.position <= 0.6);
    CHECK(s.velocity >= -0.07);
    CHECK(s.velocity <= 0.07);
  }
}

TEST_CASE("expert rollouts reach the goal and are reproducible") {
  const auto trajectories = mc_rollout(mc_expert, 5, 200, 7);
  REQUIRE(trajectories.size() == 5);
  for (const auto& traj : trajectories) {
    CHECK(traj.terminated_at_goal);
    CHECK(traj.states.size() == traj.actions.size() + 1);
    CHECK(traj.states.back().position >= kMcGoalPosition);
    CHECK(traj.states.front().position >= -0.6);
    CHECK(traj.states.front().position <= -0.4);
    CHECK(traj.states.front().velocity == 0.0);
  }

  CHECK(mc_rollout(mc_expert, 0, 200, 7).empty());

  const auto again = mc_rollout(mc_expert, 5, 200, 7);
  for (std::size_t e = 0; e < 5; ++e) {
    REQUIRE(again[e].states.size() == trajectories[e].states.size());
    for (std::size_t t = 0; t < again[e].states.size(); ++t) {
      CHECK(again[e].states[t] == trajectories[e].states[t]);
    }
  }
}

TEST_CASE("trajectory csv export") {
  const auto trajectories = mc_rollout(mc_expert, 2, 50, 3);
  std::ostringstream os;
  write_trajectories_csv(trajectories, os);
  const std::string csv = os.str();
  CHECK(csv.rfind("episode,t,position,velocity,action\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 1 + trajectories[0].length() + trajectories[1].length());
}
