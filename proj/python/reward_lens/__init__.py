"""Preprocess reward functions into simpler, shaping-equivalent ones.

The heavy lifting lives in the C++ extension; this package re-exports the
operations most useful from python: building gridworld rewards, shaping and
noising them, optimizing a potential against sparsity/smoothness costs, and
checking equivalence of the result.
"""

from reward_lens._core import (
    DiagnosticError,
    DivergenceError,
    GridSpec,
    InputError,
    IoError,
    ParseError,
    TabularReward,
    Transition,
    ValidationError,
    add_noise,
    apply_shaping,
    check_shaping_equiv,
    enumerate_transitions,
    goal_mass_fraction,
    goal_reward,
    greedy_policy,
    heatmap_svg,
    load_tabular,
    manhattan_potential,
    mc_rollout_expert,
    path_reward,
    preprocess,
    random_potential,
    recover_potential,
    save_tabular,
    smoothness_cost,
    sparsity_cost,
    timeline_svg,
)

__all__ = [
    "DiagnosticError",
    "DivergenceError",
    "GridSpec",
    "InputError",
    "IoError",
    "ParseError",
    "TabularReward",
    "Transition",
    "ValidationError",
    "add_noise",
    "apply_shaping",
    "check_shaping_equiv",
    "enumerate_transitions",
    "goal_mass_fraction",
    "goal_reward",
    "greedy_policy",
    "heatmap_svg",
    "load_tabular",
    "manhattan_potential",
    "mc_rollout_expert",
    "path_reward",
    "preprocess",
    "random_potential",
    "recover_potential",
    "save_tabular",
    "smoothness_cost",
    "sparsity_cost",
    "timeline_svg",
]

__version__ = "0.1.0"
