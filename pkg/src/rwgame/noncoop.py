"""Non-cooperative equilibrium solvers for the two-encoder embedding game.

Both players' best responses collapse onto one-parameter families: a level
alpha pins Alice's fractions through Bob's rate coefficients, a level beta
pins Bob's through Alice's, and in each family the distortion budget is met
by a one-dimensional bisection.  The two searches are independent because
Alice's distortion depends only on s and Bob's only on t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CostModel,
    CoverSpec,
    EquilibriumReport,
    GameConfig,
    Strategy,
    StrategyProfile,
    alice_rate_coefficients,
    binary_entropy,
    bob_rate_coefficients,
    build_report,
    distortion,
    inverse_binary_entropy,
    overwritten_marginal,
    ratio_residual,
)

BUDGET_MAX_ITER = 200


def budget_tolerance(d: float) -> float:
    """Distortion-residual tolerance used by the budget bisections."""
    return max(1e-9, 1e-9 * d)


@dataclass(frozen=True)
class AlphaBeta:
    """Level pair for the proportional strategy families.

    alpha scales Bob's rate coefficients S_i = alpha * rho_i / rho_1, beta
    scales Alice's T_i likewise; each determines a full strategy vector.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha {self.alpha} outside [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta {self.beta} outside [0, 1]")


def strategy_from_alpha(alpha: float, cover: CoverSpec, cost: CostModel) -> Strategy:
    """Alice's strategy at level alpha.

    Coordinate i is chosen so the post-embedding marginal gives Bob the rate
    alpha * rho_i / rho_1 on sub-cover i; coordinates clamp to [0, 1] where
    that rate is unreachable.  Levels above 1 are accepted (the clamps extend
    the family continuously down to the all-zero strategy).
    """
    if alpha < -1e-12:
        raise ValueError(f"level alpha {alpha} must be >= 0")
    rho1 = cost.rho[0]
    out = []
    for p_i, rho_i in zip(cover.p, cost.rho):
        half_gap = 0.5 - p_i
        if half_gap <= 1e-15:
            out.append(0.0)
            continue
        arg = 1.0 - alpha * rho_i / rho1
        marginal = inverse_binary_entropy(min(1.0, max(0.0, arg)))
        out.append(min(1.0, max(0.0, (marginal - p_i) / half_gap)))
    return Strategy(tuple(out))


def strategy_from_beta(beta: float, cover: CoverSpec, cost: CostModel) -> Strategy:
    """Bob's strategy at level beta.

    Coordinate i satisfies 1 - H(t_i/2) - H(p_i) = beta * rho_i / rho_1 where
    reachable, clamping at 0 otherwise.  Every beta >= 0 keeps Alice's rate
    coefficients non-negative, so the fairness floor 1 - H(t_i/2) >= H(p_i)
    holds by construction.
    """
    if beta < -1e-12:
        raise ValueError(f"level beta {beta} must be >= 0")
    rho1 = cost.rho[0]
    out = []
    for p_i, rho_i in zip(cover.p, cost.rho):
        arg = 1.0 - binary_entropy(p_i) - beta * rho_i / rho1
        out.append(min(1.0, 2.0 * inverse_binary_entropy(min(1.0, max(0.0, arg)))))
    return Strategy(tuple(out))


def profile_from_levels(levels: AlphaBeta, cover: CoverSpec, cost: CostModel) -> StrategyProfile:
    """The strategy pair induced by a level pair."""
    return StrategyProfile(strategy_from_alpha(levels.alpha, cover, cost),
                           strategy_from_beta(levels.beta, cover, cost))


def coordinate_zero_levels(cover: CoverSpec, cost: CostModel) -> tuple[float, ...]:
    """Level at which each coordinate of either family clamps to zero:
    (1 - H(p_i)) * rho_1 / rho_i.  Both families share these thresholds."""
    rho1 = cost.rho[0]
    return tuple((1.0 - binary_entropy(p_i)) * rho1 / rho_i
                 for p_i, rho_i in zip(cover.p, cost.rho))


def _level_for_budget(strategy_of, n: int, cost: CostModel, d: float, tol: float):
    """Bisect the level so the induced distortion meets min(d, level-0 value).

    Distortion is non-increasing in the level, maximal at level 0.  Returns
    (level, iterations, flags); flags mark an unreachable budget (level
    capped at 1) or bisection running out of iterations.
    """
    full = distortion(strategy_of(0.0), n, cost)
    if d >= full:
        return 0.0, 0, ()
    target = d
    if distortion(strategy_of(1.0), n, cost) > target + tol:
        return 1.0, 0, ("budget_boundary",)
    lo, hi = 0.0, 1.0
    x = 1.0
    for iters in range(1, BUDGET_MAX_ITER + 1):
        x = 0.5 * (lo + hi)
        dx = distortion(strategy_of(x), n, cost)
        if abs(dx - target) <= tol:
            return x, iters, ()
        if dx > target:
            lo = x
        else:
            hi = x
    return x, BUDGET_MAX_ITER, ("no_convergence",)


def solve_noncoop(cfg: GameConfig, tol_distortion: float | None = None) -> EquilibriumReport:
    """Subgame-perfect equilibrium of the sequential embedding game.

    Runs the two independent budget bisections (alpha for Alice, beta for
    Bob) and reports the induced profile.  A 'budget_boundary' flag on either
    side means the budget is below what the level-1 strategy already spends,
    so the returned profile is the closest the family gets.
    """
    if cfg.mode != "noncoop":
        raise ValueError(f"solve_noncoop requires mode 'noncoop', got {cfg.mode!r}")
    tol = budget_tolerance(cfg.d) if tol_distortion is None else tol_distortion
    cover, cost = cfg.cover, cfg.cost
    n = cover.n
    alpha, it_a, fl_a = _level_for_budget(
        lambda x: strategy_from_alpha(x, cover, cost), n, cost, cfg.d, tol)
    beta, it_b, fl_b = _level_for_budget(
        lambda x: strategy_from_beta(x, cover, cost), n, cost, cfg.d, tol)
    profile = StrategyProfile(strategy_from_alpha(alpha, cover, cost),
                              strategy_from_beta(beta, cover, cost))
    flags = tuple(f"alpha_{f}" for f in fl_a) + tuple(f"beta_{f}" for f in fl_b)
    return build_report(cfg, profile, alpha=alpha, beta=beta,
                        iterations={"alpha": it_a, "beta": it_b}, flags=flags)


def solve_l1(cfg: GameConfig) -> EquilibriumReport:
    """Closed form for a single sub-cover: both players overwrite the same
    fraction p_max = min(1, 2d / (n * rho_1)), spending the whole budget."""
    if cfg.cover.l != 1:
        raise ValueError("closed form requires exactly one sub-cover")
    p_max = min(1.0, 2.0 * cfg.d / (cfg.cover.n * cfg.cost.rho[0]))
    strat = Strategy((p_max,))
    return build_report(cfg, StrategyProfile(strat, strat),
                        diagnostics={"p_max": p_max})


@dataclass(frozen=True)
class TraceRow:
    """One joint sample of the two proportional loci at grid value x:
    (s1, s2) with s1 = x and (t1, t2) with t1 = x."""

    s1: float
    s2: float
    t1: float
    t2: float
    payoff_alice: float
    payoff_bob: float
    distortion_alice: float
    distortion_bob: float
    residual_s: float
    residual_t: float


@dataclass(frozen=True)
class TraceResult:
    rows: tuple[TraceRow, ...]
    equilibrium: StrategyProfile
    budget_point: TraceRow
    flags: tuple[str, ...]


def trace_l2(cfg: GameConfig, steps: int, tol_distortion: float | None = None) -> TraceResult:
    """Trace the two-sub-cover proportional loci on a uniform grid.

    For each grid value x the s-locus pairs s1 = x with the s2 matching
    Bob's rate ratio (clamping at 0 where the ratio is unreachable), and the
    t-locus pairs t1 = x with the proportional t2.  The t-locus ends where
    1 - H(t1/2) - H(p_1) = 0, the fairness cap; rows stop there.  The budget
    point is found by bisecting each locus to the distortion bound and is
    also returned as a TraceRow.
    """
    if cfg.cover.l != 2:
        raise ValueError("trace requires exactly two sub-covers")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    cover, cost = cfg.cover, cfg.cost
    n = cover.n
    p1, p2 = cover.p
    r1, r2 = cost.rho
    tol = budget_tolerance(cfg.d) if tol_distortion is None else tol_distortion

    def s_partner(s1: float) -> float:
        needed = (1.0 - binary_entropy(overwritten_marginal(p1, s1))) * r2 / r1
        marginal = inverse_binary_entropy(min(1.0, max(0.0, 1.0 - needed)))
        half_gap = 0.5 - p2
        if half_gap <= 1e-15:
            return 0.0
        return min(1.0, max(0.0, (marginal - p2) / half_gap))

    def t_partner(t1: float) -> float | None:
        own_rate = 1.0 - binary_entropy(0.5 * t1) - binary_entropy(p1)
        if own_rate < -1e-12:
            return None
        arg = 1.0 - binary_entropy(p2) - max(0.0, own_rate) * r2 / r1
        return min(1.0, 2.0 * inverse_binary_entropy(min(1.0, max(0.0, arg))))

    def make_row(s1: float, s2: float, t1: float, t2: float) -> TraceRow:
        pa = sum(n * s * (1.0 - binary_entropy(0.5 * t) - binary_entropy(p))
                 for p, s, t in zip((p1, p2), (s1, s2), (t1, t2)))
        pb = sum(n * t * (1.0 - binary_entropy(overwritten_marginal(p, s)))
                 for p, s, t in zip((p1, p2), (s1, s2), (t1, t2)))
        s_strat = Strategy((s1, s2))
        t_strat = Strategy((t1, t2))
        res_s = ratio_residual(bob_rate_coefficients(cover, s_strat),
                               cost.rho, (True, True))
        res_t = ratio_residual(alice_rate_coefficients(cover, t_strat),
                               cost.rho, (True, True))
        return TraceRow(s1, s2, t1, t2, pa, pb,
                        distortion(s_strat, n, cost), distortion(t_strat, n, cost),
                        res_s, res_t)

    rows = []
    for k in range(steps):
        x = k / (steps - 1)
        t2 = t_partner(x)
        if t2 is None:
            break
        rows.append(make_row(x, s_partner(x), x, t2))

    flags: list[str] = []

    def locus_budget(partner, x_hi: float) -> float:
        def spend(x: float) -> float:
            return distortion(Strategy((x, partner(x))), n, cost)

        target = min(cfg.d, spend(x_hi))
        if spend(0.0) > target + tol:
            flags.append("trace_budget_boundary")
            return 0.0
        lo, hi = 0.0, x_hi
        x = x_hi
        for _ in range(BUDGET_MAX_ITER):
            x = 0.5 * (lo + hi)
            if abs(spend(x) - target) <= tol:
                return x
            if spend(x) > target:
                hi = x
            else:
                lo = x
        flags.append("trace_no_convergence")
        return x

    # fairness cap for t1: largest t1 with a non-negative own rate
    t1_cap = min(1.0, 2.0 * inverse_binary_entropy(1.0 - binary_entropy(p1)))
    x_s = locus_budget(s_partner, 1.0)
    x_t = locus_budget(lambda x: t_partner(x) or 0.0, t1_cap)
    t2_eq = t_partner(x_t)
    budget_row = make_row(x_s, s_partner(x_s), x_t, 0.0 if t2_eq is None else t2_eq)
    profile = StrategyProfile(Strategy((budget_row.s1, budget_row.s2)),
                              Strategy((budget_row.t1, budget_row.t2)))
    return TraceResult(tuple(rows), profile, budget_row, tuple(flags))


@dataclass(frozen=True)
class DeviationReport:
    """Result of a best-response search around a candidate profile."""

    max_gain_alice: float
    max_gain_bob: float
    best_alice: Strategy
    best_bob: Strategy
    samples_per_player: int


def verify_equilibrium(cfg: GameConfig, profile: StrategyProfile, grid: int,
                       seed: int = 0) -> DeviationReport:
    """Search for profitable unilateral deviations at a candidate profile.

    Each player's payoff is linear in their own fractions once the opponent
    is fixed, so candidate strategies are scored in bulk: `grid` random box
    points, the player's own proportional family on a level grid, and the
    box corners, every candidate rescaled onto the distortion budget.
    Returns the largest payoff improvement found for each player.
    """
    if grid < 1:
        raise ValueError("grid must be >= 1")
    if profile.l != cfg.cover.l:
        raise ValueError("profile length does not match cover")
    rng = np.random.default_rng(seed)
    cover, cost = cfg.cover, cfg.cost
    n = cover.n
    l = cover.l
    half_cost = 0.5 * n * np.asarray(cost.rho)
    levels = np.linspace(0.0, 1.0, min(grid, 65))

    def best_candidate(family_of, fixed_rates):
        cands = [rng.random((grid, l)),
                 np.array([family_of(x).v for x in levels]),
                 np.zeros((1, l)), np.ones((1, l))]
        mat = np.vstack(cands)
        spend = mat @ half_cost
        factor = np.where(spend > 0.0, np.minimum(1.0, cfg.d / np.where(spend > 0.0, spend, 1.0)), 1.0)
        mat = mat * factor[:, None]
        payoffs = n * (mat @ np.asarray(fixed_rates))
        k = int(np.argmax(payoffs))
        return float(payoffs[k]), Strategy(tuple(mat[k])), mat.shape[0]

    rates_for_alice = alice_rate_coefficients(cover, profile.t)
    rates_for_bob = bob_rate_coefficients(cover, profile.s)
    base_alice = n * float(np.dot(profile.s.v, rates_for_alice))
    base_bob = n * float(np.dot(profile.t.v, rates_for_bob))

    best_pa, best_s, count = best_candidate(
        lambda x: strategy_from_alpha(x, cover, cost), rates_for_alice)
    best_pb, best_t, _ = best_candidate(
        lambda x: strategy_from_beta(x, cover, cost), rates_for_bob)
    return DeviationReport(best_pa - base_alice, best_pb - base_bob,
                           best_s, best_t, count)


def sweep_pmax(p1: float, n: int, steps: int = 101) -> list[tuple[float, float, float]]:
    """Per-bit payoffs along the single-sub-cover family s = t = p_max.

    Returns (p_max, payoff_alice / n, payoff_bob / n) for p_max on a uniform
    [0, 1] grid; n is accepted for interface symmetry but the per-bit values
    do not depend on it.
    """
    if not 0.0 < p1 <= 0.5:
        raise ValueError(f"sub-cover probability {p1} outside (0, 1/2]")
    if n <= 0:
        raise ValueError("cover length n must be a positive bit count")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    hp = binary_entropy(p1)
    rows = []
    for k in range(steps):
        x = k / (steps - 1)
        pa = x * (1.0 - binary_entropy(0.5 * x) - hp)
        pb = x * (1.0 - binary_entropy(overwritten_marginal(p1, x)))
        rows.append((x, pa, pb))
    return rows
