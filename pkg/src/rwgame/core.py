"""Core types and payoff functionals for the two-encoder embedding game.

A cover is a tuple of disjoint binary sub-sequences ("sub-covers"), each of
length n, where sub-cover i carries minority-bit probability p_i.  Two
encoders embed in sequence by overwriting a per-sub-cover fraction of
positions with compressed-original-plus-payload bits: Alice first (fractions
s), Bob second (fractions t).  Payoffs are net embeddable bits; distortion is
the expected weighted flip count.  Everything downstream (equilibrium
solvers, cooperative variants, the Monte-Carlo validator) is built on the
functionals defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DOMAIN_SLACK = 1e-12

MODES = ("noncoop", "coop-shared-key", "coop-no-key")


def binary_entropy(p: float) -> float:
    """Binary entropy in bits, with the 0*log(0) = 0 convention.

    Arguments within 1e-12 outside [0, 1] are clamped; anything further out
    raises ValueError.
    """
    if p < 0.0:
        if p < -DOMAIN_SLACK:
            raise ValueError(f"probability out of range [0, 1]: {p}")
        p = 0.0
    elif p > 1.0:
        if p > 1.0 + DOMAIN_SLACK:
            raise ValueError(f"probability out of range [0, 1]: {p}")
        p = 1.0
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def inverse_binary_entropy(h: float) -> float:
    """Lower-branch inverse of binary_entropy.

    Returns the unique p in [0, 1/2] with H(p) = h, located by bisection to
    1e-12 absolute tolerance in p (at most 50 halvings).
    """
    if h < 0.0:
        if h < -DOMAIN_SLACK:
            raise ValueError(f"entropy out of range [0, 1]: {h}")
        return 0.0
    if h >= 1.0:
        if h > 1.0 + DOMAIN_SLACK:
            raise ValueError(f"entropy out of range [0, 1]: {h}")
        return 0.5
    if h == 0.0:
        return 0.0
    lo, hi = 0.0, 0.5
    for _ in range(50):
        if hi - lo <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def overwritten_marginal(p: float, fraction: float) -> float:
    """Bit marginal after overwriting `fraction` of positions with fair coin
    flips: p + fraction/2 - p*fraction."""
    return p + 0.5 * fraction - p * fraction


@dataclass(frozen=True)
class CoverSpec:
    """The embedding channel: l disjoint binary sub-covers of n bits each.

    Sub-cover i has minority-bit probability p[i].  Probabilities must lie in
    (0, 1/2] and be non-decreasing, so the first sub-cover is always the most
    compressible one.
    """

    n: int
    p: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if self.n <= 0:
            raise ValueError("cover length n must be a positive bit count")
        if not self.p:
            raise ValueError("cover needs at least one sub-cover")
        for x in self.p:
            if not 0.0 < x <= 0.5:
                raise ValueError(f"sub-cover probability {x} outside (0, 1/2]")
        if any(a > b for a, b in zip(self.p, self.p[1:])):
            raise ValueError(
                "p must be non-decreasing so that H(p_1) <= ... <= H(p_l)"
            )

    @property
    def l(self) -> int:
        return len(self.p)

    def entropies(self) -> tuple[float, ...]:
        return tuple(binary_entropy(x) for x in self.p)


@dataclass(frozen=True)
class CostModel:
    """Per-position flip costs, one per sub-cover.

    Costs are positive and non-increasing: flips in better-compressible
    sub-covers are at least as expensive as flips in noisier ones.
    """

    rho: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", tuple(float(x) for x in self.rho))
        if not self.rho:
            raise ValueError("cost model needs at least one sub-cover")
        for x in self.rho:
            if not (x > 0.0 and math.isfinite(x)):
                raise ValueError(f"flip cost {x} must be positive and finite")
        if any(a < b for a, b in zip(self.rho, self.rho[1:])):
            raise ValueError("rho must be non-increasing across sub-covers")


def default_cost(cover: CoverSpec, scale: float = 1.0) -> CostModel:
    """Entropy-reciprocal cost model rho_i = scale / H(p_i).

    Rarer minority bits mean a more compressible, statistically cleaner
    sub-cover, so flips there are costlier.  With scale = H(p_1) the first
    sub-cover is normalized to unit cost.
    """
    if not (scale > 0.0 and math.isfinite(scale)):
        raise ValueError(f"cost scale {scale} must be positive and finite")
    return CostModel(tuple(scale / binary_entropy(x) for x in cover.p))


@dataclass(frozen=True)
class Strategy:
    """Per-sub-cover embedding fractions, each in [0, 1]."""

    v: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "v", tuple(float(x) for x in self.v))
        if not self.v:
            raise ValueError("strategy needs at least one coordinate")
        cleaned = []
        for x in self.v:
            if not -DOMAIN_SLACK <= x <= 1.0 + DOMAIN_SLACK:
                raise ValueError(f"embedding fraction {x} outside [0, 1]")
            cleaned.append(min(1.0, max(0.0, x)))
        object.__setattr__(self, "v", tuple(cleaned))

    def __len__(self) -> int:
        return len(self.v)


@dataclass(frozen=True)
class StrategyProfile:
    """A pure strategy pair: Alice's fractions s, Bob's fractions t."""

    s: Strategy
    t: Strategy

    def __post_init__(self) -> None:
        if len(self.s) != len(self.t):
            raise ValueError("strategy lengths differ between players")

    @property
    def l(self) -> int:
        return len(self.s)


@dataclass(frozen=True)
class GameConfig:
    """A complete game instance: channel, costs, distortion budget, mode."""

    cover: CoverSpec
    cost: CostModel
    d: float
    mode: str = "noncoop"

    def __post_init__(self) -> None:
        if len(self.cost.rho) != self.cover.l:
            raise ValueError(
                f"cost model has {len(self.cost.rho)} sub-covers, cover has {self.cover.l}"
            )
        if not (self.d >= 0.0 and math.isfinite(self.d)):
            raise ValueError(f"distortion budget {self.d} must be finite and >= 0")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")


def alice_subpayoff(n: int, p_i: float, s_i: float, t_i: float) -> float:
    """Net embeddable bits for the first encoder on one sub-cover.

    The second encoder later overwrites fraction t_i of all positions with
    coin flips, which acts on Alice's bits as a BSC(t_i/2); her n*s_i slots
    each carry 1 - H(t_i/2) - H(p_i) net bits.  Negative once Bob's channel
    noise eats more than the compression savings.
    """
    return n * s_i * (1.0 - binary_entropy(0.5 * t_i) - binary_entropy(p_i))


def bob_subpayoff(n: int, p_i: float, s_i: float, t_i: float) -> float:
    """Net embeddable bits for the second encoder on one sub-cover.

    Bob compresses what he sees after Alice, whose overwrites lift the
    marginal to p_i + s_i/2 - p_i*s_i; nobody writes after him.
    """
    return n * t_i * (1.0 - binary_entropy(overwritten_marginal(p_i, s_i)))


def total_payoffs(cfg: GameConfig, profile: StrategyProfile) -> tuple[float, float]:
    """Sequential-game payoff pair (Alice, Bob), summed over sub-covers."""
    if profile.l != cfg.cover.l:
        raise ValueError("profile length does not match cover")
    n = cfg.cover.n
    pa = 0.0
    pb = 0.0
    for p_i, s_i, t_i in zip(cfg.cover.p, profile.s.v, profile.t.v):
        pa += alice_subpayoff(n, p_i, s_i, t_i)
        pb += bob_subpayoff(n, p_i, s_i, t_i)
    return pa, pb


def shared_key_payoffs(cfg: GameConfig, profile: StrategyProfile) -> tuple[float, float]:
    """Payoff pair when both encoders share key material.

    Each knows the other's positions, so nobody destroys anybody's bits and
    each slot carries the interference-free rate 1 - H(p_i).  Meaningful for
    partitioned profiles (s_i + t_i <= 1)."""
    if profile.l != cfg.cover.l:
        raise ValueError("profile length does not match cover")
    n = cfg.cover.n
    pa = 0.0
    pb = 0.0
    for p_i, s_i, t_i in zip(cfg.cover.p, profile.s.v, profile.t.v):
        rate = 1.0 - binary_entropy(p_i)
        pa += n * s_i * rate
        pb += n * t_i * rate
    return pa, pb


def distortion(strategy: Strategy, n: int, cost: CostModel) -> float:
    """Expected weighted flip count: overwriting fraction v_i flips n*v_i/2
    positions on average, each at cost rho_i."""
    if len(strategy) != len(cost.rho):
        raise ValueError("strategy length does not match cost model")
    return sum(n * v * 0.5 * r for v, r in zip(strategy.v, cost.rho))


def payoff_upper_bounds(cfg: GameConfig, profile: StrategyProfile) -> tuple[float, float]:
    """Interference-free payoff caps sum_i n*v_i*(1 - H(p_i)) per player."""
    if profile.l != cfg.cover.l:
        raise ValueError("profile length does not match cover")
    n = cfg.cover.n
    rates = [1.0 - binary_entropy(p_i) for p_i in cfg.cover.p]
    ua = sum(n * s_i * r for s_i, r in zip(profile.s.v, rates))
    ub = sum(n * t_i * r for t_i, r in zip(profile.t.v, rates))
    return ua, ub


def bob_rate_coefficients(cover: CoverSpec, s: Strategy) -> tuple[float, ...]:
    """Bob's per-fraction payoff rates S_i = 1 - H(p_i + s_i/2 - p_i*s_i)."""
    return tuple(
        1.0 - binary_entropy(overwritten_marginal(p_i, s_i))
        for p_i, s_i in zip(cover.p, s.v)
    )


def alice_rate_coefficients(cover: CoverSpec, t: Strategy) -> tuple[float, ...]:
    """Alice's per-fraction payoff rates T_i = 1 - H(t_i/2) - H(p_i)."""
    return tuple(
        1.0 - binary_entropy(0.5 * t_i) - binary_entropy(p_i)
        for p_i, t_i in zip(cover.p, t.v)
    )


def ratio_residual(values: tuple[float, ...], rho: tuple[float, ...],
                   active: tuple[bool, ...]) -> float:
    """Largest violation of the proportionality condition v_j/v_k = rho_j/rho_k
    over active (interior) index pairs.

    Pairs whose denominator rate is below 1e-9 are skipped: both players sit
    on a payoff boundary there and the ratio carries no information.
    """
    worst = 0.0
    idx = [i for i, a in enumerate(active) if a]
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            j, k = idx[a], idx[b]
            if abs(values[k]) < 1e-9:
                continue
            worst = max(worst, abs(values[j] / values[k] - rho[j] / rho[k]))
    return worst


@dataclass(frozen=True)
class SubcoverBreakdown:
    """Per-sub-cover slice of an equilibrium report."""

    alice_bits: float
    bob_bits: float
    distortion_alice: float
    distortion_bob: float


@dataclass
class EquilibriumReport:
    """Solver output: the profile plus everything needed to audit it.

    alpha/beta are the solver's level parameters when the solution came from
    the proportional family, else None.  flags carry non-convergence and
    boundary markers; converged is True when no such marker is present.
    """

    profile: StrategyProfile
    payoff_alice: float
    payoff_bob: float
    distortion_alice: float
    distortion_bob: float
    alpha: float | None = None
    beta: float | None = None
    per_subcover: tuple[SubcoverBreakdown, ...] = ()
    clamped_s: tuple[bool, ...] = ()
    clamped_t: tuple[bool, ...] = ()
    ratio_residual_s: float = 0.0
    ratio_residual_t: float = 0.0
    iterations: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def ratio_residual(self) -> float:
        return max(self.ratio_residual_s, self.ratio_residual_t)

    @property
    def converged(self) -> bool:
        return not any("boundary" in f or "no_convergence" in f for f in self.flags)

    def to_dict(self) -> dict:
        return {
            "s": list(self.profile.s.v),
            "t": list(self.profile.t.v),
            "payoff_alice": self.payoff_alice,
            "payoff_bob": self.payoff_bob,
            "distortion_alice": self.distortion_alice,
            "distortion_bob": self.distortion_bob,
            "alpha": self.alpha,
            "beta": self.beta,
            "per_subcover": [
                {
                    "alice_bits": b.alice_bits,
                    "bob_bits": b.bob_bits,
                    "distortion_alice": b.distortion_alice,
                    "distortion_bob": b.distortion_bob,
                }
                for b in self.per_subcover
            ],
            "clamped_s": list(self.clamped_s),
            "clamped_t": list(self.clamped_t),
            "ratio_residual_s": self.ratio_residual_s,
            "ratio_residual_t": self.ratio_residual_t,
            "iterations": dict(self.iterations),
            "flags": list(self.flags),
            "converged": self.converged,
            "diagnostics": dict(self.diagnostics),
        }


def build_report(cfg: GameConfig, profile: StrategyProfile,
                 alpha: float | None = None, beta: float | None = None,
                 iterations: dict | None = None, flags: tuple[str, ...] = (),
                 diagnostics: dict | None = None) -> EquilibriumReport:
    """Assemble a full report for a profile under cfg's payoff semantics.

    Modes with key interference (noncoop, coop-no-key) use the sequential
    payoffs; coop-shared-key uses the interference-free rates.
    """
    n = cfg.cover.n
    shared = cfg.mode == "coop-shared-key"
    rows = []
    for p_i, s_i, t_i, r_i in zip(cfg.cover.p, profile.s.v, profile.t.v, cfg.cost.rho):
        if shared:
            rate = 1.0 - binary_entropy(p_i)
            a_bits = n * s_i * rate
            b_bits = n * t_i * rate
        else:
            a_bits = alice_subpayoff(n, p_i, s_i, t_i)
            b_bits = bob_subpayoff(n, p_i, s_i, t_i)
        rows.append(SubcoverBreakdown(a_bits, b_bits,
                                      n * s_i * 0.5 * r_i, n * t_i * 0.5 * r_i))
    clamped_s = tuple(v <= 0.0 or v >= 1.0 for v in profile.s.v)
    clamped_t = tuple(v <= 0.0 or v >= 1.0 for v in profile.t.v)
    res_s = ratio_residual(bob_rate_coefficients(cfg.cover, profile.s),
                           cfg.cost.rho, tuple(not c for c in clamped_s))
    res_t = ratio_residual(alice_rate_coefficients(cfg.cover, profile.t),
                           cfg.cost.rho, tuple(not c for c in clamped_t))
    return EquilibriumReport(
        profile=profile,
        payoff_alice=sum(r.alice_bits for r in rows),
        payoff_bob=sum(r.bob_bits for r in rows),
        distortion_alice=sum(r.distortion_alice for r in rows),
        distortion_bob=sum(r.distortion_bob for r in rows),
        alpha=alpha,
        beta=beta,
        per_subcover=tuple(rows),
        clamped_s=clamped_s,
        clamped_t=clamped_t,
        ratio_residual_s=res_s,
        ratio_residual_t=res_t,
        iterations=dict(iterations or {}),
        flags=tuple(flags),
        diagnostics=dict(diagnostics or {}),
    )
