"""End-to-end smoke tests for the python bindings."""

import pytest

import reward_lens as rl


@pytest.fixture(scope="module")
def spec():
    return rl.GridSpec(width=10, height=10, goal=(9, 9))


def test_enumeration_and_goal_reward(spec):
    transitions = rl.enumerate_transitions(spec)
    assert len(transitions) == 500
    goal = rl.goal_reward(spec)
    assert sum(goal.values) == 5.0
    assert rl.sparsity_cost(goal, "l1") == pytest.approx(0.01)


def test_shaping_roundtrip(spec):
    goal = rl.goal_reward(spec)
    phi = rl.manhattan_potential(spec, sign=1)
    shaped = rl.apply_shaping(goal, phi, gamma=0.99)
    ok, residual = rl.check_shaping_equiv(goal, shaped, gamma=0.99, tol=1e-9)
    assert ok and residual < 1e-9
    recovered = rl.recover_potential(goal, shaped, gamma=0.99)
    assert recovered == pytest.approx(phi)


def test_preprocess_strips_shaping(spec):
    goal = rl.goal_reward(spec)
    shaped = rl.apply_shaping(goal, rl.manhattan_potential(spec, 1), gamma=0.99)
    result = rl.preprocess(shaped, spec, family="sparse", penalty="l1",
                           steps=20000, learning_rate=0.05, seed=7)
    assert result["final_cost"] <= 0.0105
    assert rl.goal_mass_fraction(result["preprocessed"], spec) >= 0.9
    ok, _ = rl.check_shaping_equiv(shaped, result["preprocessed"], gamma=0.99, tol=1e-6)
    assert ok
    # greedy behaviour is untouched
    assert rl.greedy_policy(spec, goal) == rl.greedy_policy(spec, result["preprocessed"])


def test_noise_is_not_equivalent(spec):
    goal = rl.goal_reward(spec)
    noisy = rl.add_noise(goal, sigma=0.1, seed=3)
    ok, residual = rl.check_shaping_equiv(goal, noisy, gamma=0.99, tol=1e-6)
    assert not ok and residual > 0.01


def test_rollouts_and_rendering(spec, tmp_path):
    episodes = rl.mc_rollout_expert(n_episodes=3, max_steps=250, seed=5)
    assert len(episodes) == 3
    for ep in episodes:
        positions = [s[0] for s in ep]
        assert all(-1.2 <= p <= 0.6 for p in positions)

    svg, csv = rl.heatmap_svg(rl.goal_reward(spec), spec)
    assert svg.startswith("<svg") and "</svg>" in svg
    assert csv.splitlines()[0] == "s_index,a_index,s_next_index,value"

    rewards = [[0.0] * len(ep) for ep in episodes]
    tsvg, tcsv = rl.timeline_svg(rewards, label="flat")
    assert tsvg.count("<svg") == 1 and len(tcsv.splitlines()) == 1 + sum(len(e) for e in rewards)


def test_tabular_file_roundtrip(spec, tmp_path):
    path = str(tmp_path / "reward.json")
    goal = rl.goal_reward(spec)
    rl.save_tabular(goal, path)
    loaded = rl.load_tabular(path)
    assert loaded.values == goal.values
    with pytest.raises(OSError):
        rl.load_tabular(str(tmp_path / "missing.json"))
