"""Solvers and Monte-Carlo validation for the two-encoder rate-distortion
game of content-adaptive reversible watermarking."""

from .coder import compress_bits, compressed_size_bits, decompress_bits
from .coop import (
    CoopCheckReport,
    KnapsackSolution,
    coop_equilibrium_check,
    greedy_knapsack,
    lp_oracle,
    solve_coop_nokey,
    solve_coop_shared,
)
from .core import (
    MODES,
    CostModel,
    CoverSpec,
    EquilibriumReport,
    GameConfig,
    Strategy,
    StrategyProfile,
    SubcoverBreakdown,
    alice_rate_coefficients,
    alice_subpayoff,
    binary_entropy,
    bob_rate_coefficients,
    bob_subpayoff,
    build_report,
    default_cost,
    distortion,
    inverse_binary_entropy,
    overwritten_marginal,
    payoff_upper_bounds,
    shared_key_payoffs,
    total_payoffs,
)
from .noncoop import (
    AlphaBeta,
    DeviationReport,
    TraceResult,
    TraceRow,
    coordinate_zero_levels,
    profile_from_levels,
    solve_l1,
    solve_noncoop,
    strategy_from_alpha,
    strategy_from_beta,
    sweep_pmax,
    trace_l2,
    verify_equilibrium,
)
from .simulate import (
    EmbedResult,
    PositionSet,
    SimulationReport,
    embed_layer,
    extract_layer,
    generate_cover,
    select_positions,
    simulate_two_layer,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaBeta",
    "CoopCheckReport",
    "CostModel",
    "CoverSpec",
    "DeviationReport",
    "EmbedResult",
    "EquilibriumReport",
    "GameConfig",
    "KnapsackSolution",
    "MODES",
    "PositionSet",
    "SimulationReport",
    "Strategy",
    "StrategyProfile",
    "SubcoverBreakdown",
    "TraceResult",
    "TraceRow",
    "alice_rate_coefficients",
    "alice_subpayoff",
    "binary_entropy",
    "bob_rate_coefficients",
    "bob_subpayoff",
    "build_report",
    "compress_bits",
    "compressed_size_bits",
    "coop_equilibrium_check",
    "coordinate_zero_levels",
    "decompress_bits",
    "default_cost",
    "distortion",
    "embed_layer",
    "extract_layer",
    "generate_cover",
    "greedy_knapsack",
    "inverse_binary_entropy",
    "lp_oracle",
    "overwritten_marginal",
    "payoff_upper_bounds",
    "profile_from_levels",
    "select_positions",
    "shared_key_payoffs",
    "simulate_two_layer",
    "solve_coop_nokey",
    "solve_coop_shared",
    "solve_l1",
    "solve_noncoop",
    "strategy_from_alpha",
    "strategy_from_beta",
    "sweep_pmax",
    "total_payoffs",
    "trace_l2",
    "verify_equilibrium",
]
