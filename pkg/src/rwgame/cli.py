"""Command-line front end.

Subcommands: solve a game instance (JSON in, JSON out), sweep the
single-sub-cover payoff curves (CSV), trace the two-sub-cover proportional
loci (CSV), run a Monte-Carlo embedding simulation (JSON), and audit a
solution against the sampling oracle (JSON).  All floating-point output is
printed at 12 significant digits and every command is deterministic given
its inputs and seed.

Exit codes: 0 on success, 2 on invalid configuration, 3 when a solver or
check reports non-convergence (diagnostic output is still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .coop import coop_equilibrium_check, solve_coop_nokey, solve_coop_shared
from .core import (
    CostModel,
    CoverSpec,
    GameConfig,
    Strategy,
    StrategyProfile,
    binary_entropy,
    default_cost,
)
from .noncoop import solve_noncoop, sweep_pmax, trace_l2, verify_equilibrium
from .simulate import simulate_two_layer

SWEEP_HEADER = "p_max,payoff_alice_per_n,payoff_bob_per_n"
TRACE_HEADER = "s1,s2,t1,t2,PA,PB,DA,DB"


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation parameters shared by the subcommands."""

    command: str
    input: Path | None = None
    output: Path | None = None
    seed: int = 0
    steps: int = 101
    grid: int = 1000
    tol_distortion: float | None = None
    tol_ratio: float = 1e-8
    p1: float | None = None
    n: int | None = None
    mode: str | None = None

    def __post_init__(self) -> None:
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if self.grid < 1:
            raise ValueError("grid must be >= 1")
        if self.tol_distortion is not None and self.tol_distortion <= 0:
            raise ValueError("tol-distortion must be positive")
        if self.tol_ratio <= 0:
            raise ValueError("tol-ratio must be positive")
        if self.input is not None and not self.input.is_file():
            raise ValueError(f"input file not found: {self.input}")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _round_floats(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(_fmt(x=obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _emit_json(payload: dict, output: Path | None) -> None:
    _emit(json.dumps(_round_floats(payload), indent=2, sort_keys=True) + "\n", output)


def _load_game(run: RunConfig) -> tuple[GameConfig, dict]:
    if run.input is None:
        raise ValueError("--input is required for this command")
    try:
        raw = json.loads(run.input.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON in {run.input}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    missing = [k for k in ("n", "p", "d") if k not in raw]
    if missing:
        raise ValueError(f"config missing required keys: {', '.join(missing)}")
    cover = CoverSpec(int(raw["n"]), tuple(raw["p"]))
    mode = run.mode or raw.get("mode")
    if mode is None:
        raise ValueError("config missing 'mode' (or pass --mode)")
    if raw.get("rho") is not None:
        cost = CostModel(tuple(raw["rho"]))
    else:
        cost = default_cost(cover, scale=binary_entropy(cover.p[0]))
    return GameConfig(cover, cost, float(raw["d"]), mode), raw


def _solve(cfg: GameConfig, run: RunConfig):
    if cfg.mode == "noncoop":
        return solve_noncoop(cfg, run.tol_distortion)
    if cfg.mode == "coop-shared-key":
        return solve_coop_shared(cfg)
    return solve_coop_nokey(cfg, run.tol_distortion)


def _cmd_solve(run: RunConfig) -> int:
    cfg, _ = _load_game(run)
    report = _solve(cfg, run)
    payload = report.to_dict()
    payload["mode"] = cfg.mode
    _emit_json(payload, run.output)
    return 0 if report.converged else 3


def _cmd_sweep(run: RunConfig) -> int:
    if run.p1 is None or run.n is None:
        raise ValueError("sweep-pmax requires --p1 and --n")
    rows = sweep_pmax(run.p1, run.n, run.steps)
    lines = [SWEEP_HEADER]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _emit("\n".join(lines) + "\n", run.output)
    return 0


def _cmd_trace(run: RunConfig) -> int:
    cfg, _ = _load_game(run)
    result = trace_l2(cfg, run.steps, run.tol_distortion)
    lines = [TRACE_HEADER]

    def row_csv(row) -> str:
        return ",".join(_fmt(v) for v in (
            row.s1, row.s2, row.t1, row.t2, row.payoff_alice, row.payoff_bob,
            row.distortion_alice, row.distortion_bob))

    for row in result.rows:
        if max(row.residual_s, row.residual_t) <= run.tol_ratio:
            lines.append(row_csv(row))
    lines.append(row_csv(result.budget_point))
    _emit("\n".join(lines) + "\n", run.output)
    return 0 if not result.flags else 3


def _profile_from_raw(cfg: GameConfig, raw: dict, run: RunConfig) -> StrategyProfile:
    if "s" in raw or "t" in raw:
        if "s" not in raw or "t" not in raw:
            raise ValueError("config must give both 's' and 't', or neither")

        def as_strategy(x) -> Strategy:
            return Strategy(tuple(x) if isinstance(x, (list, tuple)) else (float(x),))

        return StrategyProfile(as_strategy(raw["s"]), as_strategy(raw["t"]))
    base = GameConfig(cfg.cover, cfg.cost, cfg.d, "noncoop")
    return solve_noncoop(base, run.tol_distortion).profile


def _cmd_simulate(run: RunConfig) -> int:
    cfg, raw = _load_game(run)
    profile = _profile_from_raw(cfg, raw, run)
    report = simulate_two_layer(cfg, profile, run.seed)
    _emit_json(report.to_dict(), run.output)
    return 0 if report.restored_ok and report.payload_ok else 3


def _cmd_oracle(run: RunConfig) -> int:
    cfg, _ = _load_game(run)
    report = _solve(cfg, run)
    if cfg.mode == "noncoop":
        dev = verify_equilibrium(cfg, report.profile, run.grid, run.seed)
        payload = {
            "mode": cfg.mode,
            "payoff_alice": report.payoff_alice,
            "payoff_bob": report.payoff_bob,
            "max_gain_alice": dev.max_gain_alice,
            "max_gain_bob": dev.max_gain_bob,
            "samples_per_player": dev.samples_per_player,
        }
    else:
        chk = coop_equilibrium_check(cfg, report.profile, run.grid, run.seed)
        payload = {
            "mode": cfg.mode,
            "base_value": chk.base_value,
            "base_max": chk.base_max,
            "max_min_gain": chk.max_min_gain,
            "max_min_gain_family": chk.max_min_gain_family,
            "max_tiebreak_gain": chk.max_tiebreak_gain,
            "samples_per_player": chk.samples_per_player,
        }
    _emit_json(payload, run.output)
    return 0 if report.converged else 3


_COMMANDS = {
    "solve": _cmd_solve,
    "sweep-pmax": _cmd_sweep,
    "trace-l2": _cmd_trace,
    "simulate": _cmd_simulate,
    "oracle": _cmd_oracle,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rwgame",
        description="Equilibrium solvers and Monte-Carlo validation for the "
                    "two-encoder reversible-embedding game.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, with_input: bool) -> None:
        if with_input:
            p.add_argument("--input", type=Path, required=True,
                           help="JSON game config: n, p, d, mode, optional rho")
        p.add_argument("--output", type=Path, default=None,
                       help="write result here instead of stdout")

    p = sub.add_parser("solve", help="solve one game instance")
    add_common(p, with_input=True)
    p.add_argument("--mode", choices=("noncoop", "coop-shared-key", "coop-no-key"))
    p.add_argument("--tol-distortion", type=float, default=None)

    p = sub.add_parser("sweep-pmax", help="single-sub-cover payoff curves")
    add_common(p, with_input=False)
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=101)

    p = sub.add_parser("trace-l2", help="trace the two-sub-cover loci")
    add_common(p, with_input=True)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--tol-distortion", type=float, default=None)
    p.add_argument("--tol-ratio", type=float, default=1e-8)

    p = sub.add_parser("simulate", help="two-layer Monte-Carlo embedding run")
    add_common(p, with_input=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-distortion", type=float, default=None)

    p = sub.add_parser("oracle", help="solve, then audit against deviations")
    add_common(p, with_input=True)
    p.add_argument("--mode", choices=("noncoop", "coop-shared-key", "coop-no-key"))
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-distortion", type=float, default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    fields = ("input", "output", "seed", "steps", "grid", "tol_distortion",
              "tol_ratio", "p1", "n", "mode")
    kwargs = {f: getattr(args, f) for f in fields if getattr(args, f, None) is not None}
    try:
        run = RunConfig(command=args.command, **kwargs)
        return _COMMANDS[args.command](run)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
