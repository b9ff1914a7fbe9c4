#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rlens/equivalence.hpp"
#include "test_util.hpp"

using namespace rlens;

TEST_CASE("identical rewards recover the zero potential") {
  const GridSpec spec = testutil::default_grid();
  const TabularReward r = goal_reward(spec);
  const auto phi = recover_potential(r, r, 0.99);
  for (double v : phi) CHECK(v == 0.0);
  const auto [ok, residual] = check_shaping_equiv(r, r, 0.99, 1e-12);
  CHECK(ok);
  CHECK(residual == 0.0);
}

TEST_CASE("construct-then-recover round trip is exact") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  const TabularReward base = goal_reward(spec, gamma);
  const auto phi = manhattan_potential(spec, 1);
  const auto shaped_src = apply_shaping(std::make_shared<TabularRewardSource>(base), phi, gamma);
  const TabularReward shaped = TabularReward::from_source(spec, *shaped_src, gamma);

  const auto recovered = recover_potential(base, shaped, gamma);
  for (int s = 0; s < spec.num_states(); ++s) {
    CHECK(recovered[s] == doctest::Approx(phi[s]).epsilon(1e-10));
  }
  const auto [ok, residual] = check_shaping_equiv(base, shaped, gamma, 1e-12);
  CHECK(ok);
  CHECK(residual < 1e-12);
}

TEST_CASE("round trip holds for any potential with pinned terminals") {
  const GridSpec spec = testutil::terminal_goal_grid();
  const double gamma = 0.97;
  const TabularReward base = goal_reward(spec, gamma);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto phi = random_potential(spec, seed, 7.0);
    const auto shaped_src = apply_shaping(std::make_shared<TabularRewardSource>(base), phi, gamma);
    const TabularReward shaped = TabularReward::from_source(spec, *shaped_src, gamma);
    const auto [ok, residual] = check_shaping_equiv(base, shaped, gamma, 1e-12);
    CHECK(ok);
    CHECK(residual < 1e-12);
  }
}

TEST_CASE("a constant offset is itself a valid shaping") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  const TabularReward base = goal_reward(spec, gamma);
  TabularReward offset = base;
  for (double& v : offset.values) v += 1.0;

  const auto phi = recover_potential(base, offset, gamma);
  for (double v : phi) CHECK(v == doctest::Approx(1.0 / (gamma - 1.0)).epsilon(1e-12));
  // gamma*c - c = 1 holds for c = 1/(gamma-1), so the residual check passes
  const auto [ok, residual] = check_shaping_equiv(base, offset, gamma, 1e-9);
  CHECK(ok);
  CHECK(residual < 1e-9);
}

TEST_CASE("single bumped entries are detected") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  const TabularReward base = goal_reward(spec, gamma);

  TabularReward bumped = base;
  bumped.values[137] += 0.5;
  const auto [ok, residual] = check_shaping_equiv(base, bumped, gamma, 1e-6);
  CHECK_FALSE(ok);
  CHECK(residual >= 0.45);

  // any single perturbation beyond 2x the tolerance flips the verdict
  std::mt19937_64 gen(8);
  const double tol = 1e-6;
  for (int rep = 0; rep < 50; ++rep) {
    TabularReward r = base;
    const std::size_t idx = gen() % r.values.size();
    const double eps = 2.5 * tol * ((gen() & 1) ? 1.0 : -1.0);
    r.values[idx] += eps;
    CHECK_FALSE(check_shaping_equiv(base, r, gamma, tol).first);
  }
}

TEST_CASE("noise is not shaping-equivalent and its residual has the noise scale") {
  const GridSpec spec = testutil::default_grid();
  const double sigma = 0.1;
  const TabularReward base_raw = goal_reward(spec, 0.5);

  // The self-loop closed form divides stay-noise by (gamma - 1), so the
  // residual scale is ~ sigma * (1 + gamma) / (1 - gamma).
  for (double gamma : {0.5, 0.99}) {
    TabularReward base = base_raw;
    base.gamma = gamma;
    const auto noisy_src = add_noise(std::make_shared<TabularRewardSource>(base), sigma, 77);
    const TabularReward noisy = TabularReward::from_source(spec, *noisy_src, gamma);
    const auto [ok, residual] = check_shaping_equiv(base, noisy, gamma, 1e-6);
    CHECK_FALSE(ok);
    CHECK(residual > 0.5 * sigma);
    const double amplification = (1.0 + gamma) / (1.0 - gamma);
    CHECK(residual < 8.0 * sigma * amplification);
  }
}

TEST_CASE("return invariance telescopes exactly") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  const TabularReward base = path_reward(spec, gamma);
  const auto phi = random_potential(spec, 12, 6.0);
  const auto shaped_src = apply_shaping(std::make_shared<TabularRewardSource>(base), phi, gamma);
  const TabularReward shaped = TabularReward::from_source(spec, *shaped_src, gamma);

  std::mt19937_64 gen(3);
  std::vector<GridTrajectory> trajectories;
  for (int i = 0; i < 100; ++i) {
    trajectories.push_back(testutil::random_trajectory(spec, 20, gen));
  }
  CHECK(return_invariance_check(base, shaped, trajectories, gamma) < 1e-9);

  // identical rewards: returns agree exactly
  CHECK(return_invariance_check(base, base, trajectories, gamma) == 0.0);
}

TEST_CASE("return invariance for mountain car uses the supplied potential") {
  const double gamma = 0.99;
  const auto gt = mc_ground_truth();
  const auto phi = mc_linear_potential(1.5, -2.0);
  const auto shaped = apply_shaping_mc(gt, phi, gamma);
  const auto trajectories = mc_rollout(mc_expert, 6, 220, 41);
  CHECK(return_invariance_check_mc(*gt, *shaped, trajectories, phi, gamma) < 1e-9);
}

TEST_CASE("optimal policies survive shaping but not reward swaps") {
  const GridSpec spec = testutil::default_grid();
  const double gamma = 0.99;
  const TabularReward goal = goal_reward(spec, gamma);
  const auto shaped_src = apply_shaping(std::make_shared<TabularRewardSource>(goal),
                                        manhattan_potential(spec, 1), gamma);
  const TabularReward shaped = TabularReward::from_source(spec, *shaped_src, gamma);

  const PolicyCheck same = optimal_policy_check(goal, shaped, spec, gamma);
  CHECK(same.match);
  CHECK(same.q_gap < 1e-6);

  const PolicyCheck self = optimal_policy_check(goal, goal, spec, gamma);
  CHECK(self.match);
  CHECK(self.q_gap == 0.0);

  const TabularReward path = path_reward(spec, gamma);
  const PolicyCheck swapped = optimal_policy_check(goal, path, spec, gamma);
  CHECK_FALSE(swapped.match);
}

TEST_CASE("gamma = 1 is rejected") {
  const GridSpec spec = testutil::default_grid();
  const TabularReward r = goal_reward(spec);
  CHECK_THROWS_AS(recover_potential(r, r, 1.0), InputError);
}

TEST_CASE("equivalence reports serialize") {
  namespace fs = std::filesystem;
  const GridSpec spec = testutil::default_grid();
  const TabularReward base = goal_reward(spec);
  const auto shaped_src = apply_shaping(std::make_shared<TabularRewardSource>(base),
                                        manhattan_potential(spec, -1), 0.99);
  const TabularReward shaped = TabularReward::from_source(spec, *shaped_src, 0.99);

  EquivalenceReport report = certify_equivalence(base, shaped, spec, 0.99, 1e-6, true);
  CHECK(report.is_equivalent);
  REQUIRE(report.policy_match.has_value());
  CHECK(*report.policy_match);

  const fs::path path = fs::temp_directory_path() / "rlens_report.json";
  save_report(report, path);
  std::ifstream is(path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"is_equivalent\": true") != std::string::npos);
  CHECK(text.find("recovered_potential") != std::string::npos);
  fs::remove(path);
}
