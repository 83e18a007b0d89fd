"""Cooperative variants of the two-encoder embedding game.

With a shared key the players never collide, interference vanishes, and the
joint problem is a single continuous knapsack over the combined overwrite
fractions w_i = s_i + t_i.  Without a shared key the interference stays and
the bargaining solution maximizes the worse of the two payoffs over the
proportional level families, subject to both distortion budgets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EquilibriumReport,
    GameConfig,
    Strategy,
    StrategyProfile,
    alice_rate_coefficients,
    binary_entropy,
    bob_rate_coefficients,
    build_report,
    distortion,
    shared_key_payoffs,
    total_payoffs,
)
from .noncoop import (
    BUDGET_MAX_ITER,
    budget_tolerance,
    coordinate_zero_levels,
    strategy_from_alpha,
    strategy_from_beta,
)


@dataclass(frozen=True)
class KnapsackSolution:
    """Solution of the combined-fraction fill problem.

    w holds the combined overwrite fractions, objective the joint payoff in
    bits, budget_used the distortion spent.  fractional_index is the single
    coordinate strictly inside (0, 1) when there is exactly one, else None.
    """

    w: tuple[float, ...]
    objective: float
    budget_used: float
    fractional_index: int | None


def _knapsack_coefficients(cfg: GameConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-unit-w objective and cost vectors of the shared-key fill problem."""
    n = cfg.cover.n
    unit_value = np.array([0.5 * n * (1.0 - binary_entropy(p)) for p in cfg.cover.p])
    unit_cost = np.array([0.25 * n * r for r in cfg.cost.rho])
    return unit_value, unit_cost


def _greedy_fill(unit_value: np.ndarray, unit_cost: np.ndarray, budget: float) -> tuple[list[float], int | None]:
    """Greedy continuous-knapsack fill, best value-per-cost first.

    Ties go to the lower index.  At most one coordinate ends up strictly
    inside (0, 1).
    """
    l = len(unit_value)
    order = sorted(range(l), key=lambda i: (-unit_value[i] / unit_cost[i], i))
    w = [0.0] * l
    remaining = budget
    frac = None
    for i in order:
        c = unit_cost[i]
        if c <= remaining + 1e-12 * (1.0 + c):
            w[i] = 1.0
            remaining -= c
        elif remaining > 0.0:
            w[i] = remaining / c
            frac = i
            remaining = 0.0
    return w, frac


def greedy_knapsack(cfg: GameConfig) -> KnapsackSolution:
    """Exact solution of the shared-key fill problem by greedy ratio order."""
    unit_value, unit_cost = _knapsack_coefficients(cfg)
    w, frac = _greedy_fill(unit_value, unit_cost, cfg.d)
    w_arr = np.asarray(w)
    return KnapsackSolution(tuple(float(x) for x in w), float(w_arr @ unit_value),
                            float(w_arr @ unit_cost), frac)


def solve_coop_shared(cfg: GameConfig) -> EquilibriumReport:
    """Jointly optimal profile when the encoders share key material.

    The combined fractions w* come from the greedy knapsack; splitting them
    evenly (s* = t* = w*/2) gives both players the same interference-free
    payoff.  When the budget exceeds the full-fill spend the solution
    saturates and is flagged.
    """
    if cfg.mode != "coop-shared-key":
        raise ValueError(f"solve_coop_shared requires mode 'coop-shared-key', got {cfg.mode!r}")
    ks = greedy_knapsack(cfg)
    half = Strategy(tuple(0.5 * x for x in ks.w))
    flags = ()
    if all(x >= 1.0 for x in ks.w) and cfg.d > ks.budget_used + 1e-9 * (1.0 + cfg.d):
        flags = ("budget_saturated",)
    return build_report(
        cfg, StrategyProfile(half, half), flags=flags,
        diagnostics={
            "w": list(ks.w),
            "fractional_index": ks.fractional_index,
            "knapsack_objective": ks.objective,
            "budget_used": ks.budget_used,
        })


def lp_oracle(cfg: GameConfig, grid: int) -> KnapsackSolution:
    """Exact optimum of the fill problem restricted to the uniform grid
    {0, 1/grid, ..., 1}^l.

    Splits the coordinates in two halves, enumerates each half, and matches
    them through a sorted prefix-maximum, which reproduces the full grid
    enumeration exactly without materializing (grid+1)^l combinations.
    Limited to l <= 4 to keep the halves enumerable.
    """
    if cfg.cover.l > 4:
        raise ValueError("dimension too large for the grid oracle (needs l <= 4)")
    if grid < 1:
        raise ValueError("grid must be >= 1")
    unit_value, unit_cost = _knapsack_coefficients(cfg)
    l = cfg.cover.l
    levels = np.linspace(0.0, 1.0, grid + 1)
    left = list(range((l + 1) // 2))
    right = list(range((l + 1) // 2, l))

    def enumerate_half(idxs: list[int]):
        if not idxs:
            return np.zeros(1), np.zeros(1), np.zeros((1, 0))
        axes = np.meshgrid(*([levels] * len(idxs)), indexing="ij")
        combos = np.stack([a.ravel() for a in axes], axis=1)
        return combos @ unit_cost[idxs], combos @ unit_value[idxs], combos

    cost_a, val_a, combos_a = enumerate_half(left)
    cost_b, val_b, combos_b = enumerate_half(right)
    order = np.argsort(cost_b, kind="stable")
    cost_b = cost_b[order]
    val_b = val_b[order]
    prefix_best = np.maximum.accumulate(val_b)
    # index of the combo achieving each prefix maximum
    is_new_best = val_b >= prefix_best
    prefix_arg = np.maximum.accumulate(np.where(is_new_best, np.arange(len(val_b)), 0))

    slack = cfg.d + 1e-9
    feasible = cost_a <= slack
    pos = np.searchsorted(cost_b, slack - cost_a[feasible], side="right") - 1
    totals = val_a[feasible] + prefix_best[pos]
    k = int(np.argmax(totals))
    a_idx = np.flatnonzero(feasible)[k]
    b_idx = order[prefix_arg[pos[k]]]

    w = np.zeros(l)
    w[left] = combos_a[a_idx]
    w[right] = combos_b[b_idx]
    interior = [i for i, x in enumerate(w) if 0.0 < x < 1.0]
    return KnapsackSolution(tuple(float(x) for x in w), float(w @ unit_value),
                            float(w @ unit_cost),
                            interior[0] if len(interior) == 1 else None)


def _nokey_payoff_tables(levels_a: np.ndarray, levels_b: np.ndarray, cfg: GameConfig):
    """min(P_A, P_B) on the level grid levels_a x levels_b, via the
    separable structure: payoffs are bilinear in (fractions, rates)."""
    cover, cost = cfg.cover, cfg.cost
    n = cover.n
    s_rows = [strategy_from_alpha(a, cover, cost) for a in levels_a]
    t_rows = [strategy_from_beta(b, cover, cost) for b in levels_b]
    s_mat = np.array([s.v for s in s_rows])
    t_mat = np.array([t.v for t in t_rows])
    bob_rates = np.array([bob_rate_coefficients(cover, s) for s in s_rows])
    alice_rates = np.array([alice_rate_coefficients(cover, t) for t in t_rows])
    pa = n * (s_mat @ alice_rates.T)
    pb = n * (bob_rates @ t_mat.T)
    return np.minimum(pa, pb)


def solve_coop_nokey(cfg: GameConfig, tol_distortion: float | None = None) -> EquilibriumReport:
    """Bargaining solution without a shared key: maximize the worse payoff.

    Search space is the proportional level box [alpha_min, 1] x [beta_min, 1]
    where the lower edges are the smallest levels meeting the distortion
    budget (so every point in the box is budget-feasible).  The search runs
    an alternating per-coordinate ternary descent with a 16-point
    unimodality probe, plus an unconditional multi-round grid refinement:
    the objective has a payoff-balance ridge on which single-coordinate
    moves cannot improve, so the alternation alone can stall there.
    """
    if cfg.mode != "coop-no-key":
        raise ValueError(f"solve_coop_nokey requires mode 'coop-no-key', got {cfg.mode!r}")
    cover, cost = cfg.cover, cfg.cost
    n = cover.n
    tol = budget_tolerance(cfg.d) if tol_distortion is None else tol_distortion
    level_zero = max(coordinate_zero_levels(cover, cost))

    def min_level(strategy_of) -> float:
        if distortion(strategy_of(0.0), n, cost) <= cfg.d:
            return 0.0
        lo, hi = 0.0, level_zero
        for _ in range(BUDGET_MAX_ITER):
            if hi - lo <= 1e-15 * max(1.0, level_zero):
                break
            mid = 0.5 * (lo + hi)
            dm = distortion(strategy_of(mid), n, cost)
            if dm > cfg.d:
                lo = mid
            else:
                hi = mid
                if cfg.d - dm <= tol:
                    break
        # upper endpoint: its distortion is certified <= d
        return hi

    a_min = min_level(lambda x: strategy_from_alpha(x, cover, cost))
    b_min = min_level(lambda x: strategy_from_beta(x, cover, cost))
    a_box = (a_min, max(1.0, a_min))
    b_box = (b_min, max(1.0, b_min))

    def value(a: float, b: float) -> float:
        profile = StrategyProfile(strategy_from_alpha(a, cover, cost),
                                  strategy_from_beta(b, cover, cost))
        return min(total_payoffs(cfg, profile))

    probe_ok = True

    def ternary_slice(g, lo: float, hi: float) -> float:
        nonlocal probe_ok
        xs = np.linspace(lo, hi, 16)
        ys = [g(x) for x in xs]
        k = int(np.argmax(ys))
        noise = 1e-7 * (max(abs(y) for y in ys) + 1.0)
        if not (all(ys[i + 1] >= ys[i] - noise for i in range(k))
                and all(ys[i + 1] <= ys[i] + noise for i in range(k, 15))):
            probe_ok = False
        while hi - lo > 1e-6:
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if g(m1) < g(m2):
                lo = m1
            else:
                hi = m2
        return 0.5 * (lo + hi)

    def alternate(a: float, b: float) -> tuple[float, float, int]:
        rounds = 0
        for rounds in range(1, 61):
            a_new = ternary_slice(lambda x: value(x, b), *a_box)
            b_new = ternary_slice(lambda y: value(a_new, y), *b_box)
            done = abs(a_new - a) < 1e-6 and abs(b_new - b) < 1e-6
            a, b = a_new, b_new
            if done:
                break
        return a, b, rounds

    def grid_refine(rounds: int = 3, m: int = 129) -> tuple[float, float]:
        la, ha = a_box
        lb, hb = b_box
        best = (a_box[0], b_box[0])
        for _ in range(rounds):
            axis_a = np.linspace(la, ha, m)
            axis_b = np.linspace(lb, hb, m)
            table = _nokey_payoff_tables(axis_a, axis_b, cfg)
            i, j = np.unravel_index(int(np.argmax(table)), table.shape)
            best = (float(axis_a[i]), float(axis_b[j]))
            da = 2.0 * (ha - la) / (m - 1)
            db = 2.0 * (hb - lb) / (m - 1)
            la, ha = max(a_box[0], best[0] - da), min(a_box[1], best[0] + da)
            lb, hb = max(b_box[0], best[1] - db), min(b_box[1], best[1] + db)
        return best

    seed_axis_a = np.linspace(a_box[0], a_box[1], 33)
    seed_axis_b = np.linspace(b_box[0], b_box[1], 33)
    seed_table = _nokey_payoff_tables(seed_axis_a, seed_axis_b, cfg)
    i, j = np.unravel_index(int(np.argmax(seed_table)), seed_table.shape)

    cand_a, cand_b, rounds = alternate(float(seed_axis_a[i]), float(seed_axis_b[j]))
    ga, gb = grid_refine()
    ga, gb, _ = alternate(ga, gb)
    candidates = [(value(cand_a, cand_b), cand_a, cand_b), (value(ga, gb), ga, gb)]
    best_value, best_a, best_b = max(candidates)

    flags = () if probe_ok else ("unimodality_fallback",)
    profile = StrategyProfile(strategy_from_alpha(best_a, cover, cost),
                              strategy_from_beta(best_b, cover, cost))
    pa, pb = total_payoffs(cfg, profile)
    return build_report(
        cfg, profile, alpha=best_a, beta=best_b,
        iterations={"alternation_rounds": rounds}, flags=flags,
        diagnostics={
            "objective": best_value,
            "balance_gap": abs(pa - pb),
            "alpha_min": a_min,
            "beta_min": b_min,
        })


@dataclass(frozen=True)
class CoopCheckReport:
    """Deviation audit of a cooperative profile.

    max_min_gain is the best improvement of the worse payoff over all
    sampled unilateral deviations (stage 1); max_tiebreak_gain the best
    improvement of the better payoff among deviations that keep the worse
    payoff within a tie tolerance of the base (stage 2).
    """

    base_value: float
    base_max: float
    max_min_gain: float
    max_min_gain_family: float
    max_tiebreak_gain: float
    samples_per_player: int


def coop_equilibrium_check(cfg: GameConfig, profile: StrategyProfile, grid: int,
                           seed: int = 0) -> CoopCheckReport:
    """Sample unilateral deviations and score the two-stage objective.

    Mode selects the payoff functional: interference-free rates for
    coop-shared-key (where deviations also respect the slot partition
    s_i + t_i <= 1), sequential payoffs for coop-no-key.  All deviations are
    rescaled onto the deviating player's distortion budget.
    """
    if grid < 1:
        raise ValueError("grid must be >= 1")
    if profile.l != cfg.cover.l:
        raise ValueError("profile length does not match cover")
    if cfg.mode == "noncoop":
        raise ValueError("coop_equilibrium_check requires a cooperative mode")
    rng = np.random.default_rng(seed)
    cover, cost = cfg.cover, cfg.cost
    n = cover.n
    l = cover.l
    half_cost = 0.5 * n * np.asarray(cost.rho)
    shared = cfg.mode == "coop-shared-key"
    payoffs_of = shared_key_payoffs if shared else total_payoffs

    base_pa, base_pb = payoffs_of(cfg, profile)
    base_value = min(base_pa, base_pb)
    base_max = max(base_pa, base_pb)
    tie_tol = 1e-9 * (1.0 + abs(base_value))

    level_zero = max(coordinate_zero_levels(cover, cost))
    levels = np.linspace(0.0, level_zero, min(grid, 65))

    def rescale(vec: np.ndarray, cap: np.ndarray) -> np.ndarray:
        vec = np.minimum(vec, cap)
        spend = float(vec @ half_cost)
        if spend > cfg.d:
            vec = vec * (cfg.d / spend)
        return vec

    def audit(candidates: list[tuple[np.ndarray, bool]], is_alice: bool):
        gains = []
        for vec, from_family in candidates:
            strat = Strategy(tuple(vec))
            dev = StrategyProfile(strat, profile.t) if is_alice else StrategyProfile(profile.s, strat)
            pa, pb = payoffs_of(cfg, dev)
            gains.append((min(pa, pb) - base_value, max(pa, pb), from_family))
        return gains

    results = []
    for is_alice in (True, False):
        own = np.asarray((profile.s if is_alice else profile.t).v)
        other = np.asarray((profile.t if is_alice else profile.s).v)
        cap = np.minimum(1.0, 1.0 - other) if shared else np.ones(l)
        family_of = strategy_from_alpha if is_alice else strategy_from_beta
        candidates = [(rescale(rng.random(l) * cap, cap), False) for _ in range(grid)]
        # family deviations stay inside the level family: only levels whose
        # own spend already fits the budget qualify (rescaling would leave
        # the family)
        for x in levels:
            vec = np.minimum(np.array(family_of(x, cover, cost).v), cap)
            if float(vec @ half_cost) <= cfg.d * (1.0 + 1e-12) + 1e-12:
                candidates.append((vec, True))
        candidates += [(np.zeros(l), False), (rescale(np.ones(l), cap), False)]
        candidates.append((own.copy(), False))
        results.extend(audit(candidates, is_alice))

    max_min_gain = max(g for g, _, _ in results)
    family_gains = [g for g, _, fam in results if fam]
    max_min_gain_family = max(family_gains) if family_gains else 0.0
    ties = [mx for g, mx, _ in results if g >= -tie_tol]
    max_tiebreak_gain = (max(ties) - base_max) if ties else 0.0
    samples = len(results) // 2
    return CoopCheckReport(base_value, base_max, max_min_gain,
                           max_min_gain_family, max_tiebreak_gain, samples)
