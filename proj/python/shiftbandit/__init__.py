"""Piecewise-stationary bandit policies, change detectors and regret harness."""

from ._core import (
    Scenario,
    bernoulli_kl,
    builtin_names,
    cli,
    dynamic_regret,
    exploration_starts,
    glr_beta,
    glr_stat,
    initial_u,
    mucb_stat,
    mucb_threshold,
    mucb_window,
    next_u,
    policy_names,
    run,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Scenario",
    "bernoulli_kl",
    "builtin_names",
    "cli",
    "dynamic_regret",
    "exploration_starts",
    "glr_beta",
    "glr_stat",
    "initial_u",
    "mucb_stat",
    "mucb_threshold",
    "mucb_window",
    "next_u",
    "policy_names",
    "run",
    "validate",
]
