"""Shared instance generators for the test suite.

All generators are driven by a caller-supplied numpy Generator so every test
controls its own seed and stays reproducible in isolation.
"""

import numpy as np

import rwgame as rw
from rwgame.core import distortion
from rwgame.noncoop import (
    coordinate_zero_levels,
    strategy_from_alpha,
    strategy_from_beta,
)


def random_cover_cost(rng, l, n=1000, p_hi=0.45, ratio_hi=2.5):
    """Random cover plus a compatible non-increasing cost vector."""
    p = tuple(sorted(float(x) for x in rng.uniform(0.005, p_hi, l)))
    rho = tuple(sorted((float(x) for x in rng.uniform(0.5, ratio_hi, l)),
                       reverse=True))
    return rw.CoverSpec(n, p), rw.CostModel(rho)


def unclamped_noncoop_config(rng, l, n=1000):
    """Instance whose equilibrium keeps every coordinate strictly interior.

    The budget is placed inside the window where neither player's level
    search can clamp a coordinate at 0 or 1, so the proportionality
    conditions bind on every index.  Moderate p and cost ratios keep the
    inverse-entropy conditioning benign.
    """
    while True:
        cover, cost = random_cover_cost(rng, l, n=n, p_hi=0.40)
        hi = min(coordinate_zero_levels(cover, cost))
        d_low = max(
            distortion(strategy_from_alpha(hi, cover, cost), n, cost),
            distortion(strategy_from_beta(hi, cover, cost), n, cost),
        )
        d_high = distortion(strategy_from_beta(0.0, cover, cost), n, cost)
        if d_low < 0.8 * d_high:
            d = float(d_low + rng.uniform(0.15, 0.85) * (d_high - d_low))
            return rw.GameConfig(cover, cost, d, "noncoop")


def random_shared_config(rng, l, n=1000, u_span=(0.05, 1.05)):
    """Random shared-key instance; budgets span undersubscribed to saturated."""
    cover, cost = random_cover_cost(rng, l)
    full_cost = 0.25 * n * sum(cost.rho)
    d = float(rng.uniform(*u_span) * full_cost)
    return rw.GameConfig(cover, cost, d, "coop-shared-key")


def random_nokey_config(rng, l, n=1000, u_span=(0.05, 1.1)):
    """Random no-key cooperative instance with a mid-range budget."""
    cover, cost = random_cover_cost(rng, l)
    d_max = 0.5 * n * sum(cost.rho)
    d = float(rng.uniform(*u_span) * d_max)
    return rw.GameConfig(cover, cost, d, "coop-no-key")


def random_profile(rng, l):
    """Uniform strategy profile over the full box, no feasibility pruning."""
    return rw.StrategyProfile(
        rw.Strategy(tuple(float(x) for x in rng.uniform(0.0, 1.0, l))),
        rw.Strategy(tuple(float(x) for x in rng.uniform(0.0, 1.0, l))),
    )
