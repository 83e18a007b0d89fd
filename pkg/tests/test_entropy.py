"""Numerical kernel: binary entropy, its lower-branch inverse, overwrite map."""

import math

import numpy as np
import pytest

from rwgame import binary_entropy, inverse_binary_entropy, overwritten_marginal

# Reference values computed with 50-digit arithmetic and rounded to double.
ENTROPY_TABLE = {
    0.005: 0.0454146923337941,
    0.05: 0.286396957115956,
    0.11: 0.499915958164528,
    0.25: 0.8112781244591328,
    0.2525: 0.815216538916813,
    0.5: 1.0,
}


def test_entropy_reference_points():
    for p, h in ENTROPY_TABLE.items():
        assert binary_entropy(p) == pytest.approx(h, abs=1e-12)


def test_entropy_endpoints_use_zero_log_zero():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0


def test_entropy_clamps_tiny_domain_overshoot():
    # bisection iterates can land a hair outside [0, 1]
    assert binary_entropy(-1e-13) == 0.0
    assert binary_entropy(1.0 + 1e-13) == 0.0


def test_entropy_symmetry():
    rng = np.random.default_rng(11)
    for u in rng.uniform(0.0, 1.0, 2000):
        assert abs(binary_entropy(u) - binary_entropy(1.0 - u)) <= 1e-12


def test_entropy_monotone_on_lower_branch():
    grid = np.linspace(0.0, 0.5, 2001)
    values = [binary_entropy(x) for x in grid]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_inverse_entropy_reference_points():
    assert inverse_binary_entropy(0.0) == 0.0
    assert inverse_binary_entropy(1.0) == pytest.approx(0.5, abs=1e-12)
    assert inverse_binary_entropy(0.5) == pytest.approx(0.11002786443836, abs=1e-10)
    assert inverse_binary_entropy(0.811278124459) == pytest.approx(0.25, abs=1e-10)


def test_inverse_entropy_roundtrip():
    rng = np.random.default_rng(12)
    for h in rng.uniform(0.0, 1.0, 2000):
        assert abs(binary_entropy(inverse_binary_entropy(h)) - h) <= 1e-10


def test_inverse_entropy_returns_lower_branch():
    rng = np.random.default_rng(13)
    for p in rng.uniform(0.0, 0.5, 500):
        assert abs(inverse_binary_entropy(binary_entropy(p)) - p) <= 1e-10


def test_inverse_entropy_rejects_out_of_range():
    with pytest.raises(ValueError):
        inverse_binary_entropy(1.0 + 1e-6)
    with pytest.raises(ValueError):
        inverse_binary_entropy(-1e-6)


def test_overwritten_marginal_formula():
    assert overwritten_marginal(0.3, 0.0) == 0.3
    assert overwritten_marginal(0.3, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert overwritten_marginal(0.005, 0.5) == pytest.approx(0.2525, abs=1e-15)


def test_overwritten_marginal_moves_toward_half():
    rng = np.random.default_rng(14)
    for _ in range(500):
        p = rng.uniform(0.0, 0.5)
        f = rng.uniform(0.0, 1.0)
        m = overwritten_marginal(p, f)
        assert p - 1e-15 <= m <= 0.5 + 1e-15
        # overwriting a larger fraction never sharpens the marginal
        assert overwritten_marginal(p, min(1.0, f + 0.1)) >= m - 1e-15


def test_entropy_of_overwritten_marginal_is_subadditive():
    # ground for the second mover's payoff advantage at equal fractions
    for p in np.linspace(0.005, 0.5, 34):
        for f in np.linspace(0.0, 1.0, 41):
            lhs = binary_entropy(overwritten_marginal(p, f))
            rhs = binary_entropy(f / 2.0) + binary_entropy(p)
            assert lhs <= rhs + 1e-12


def test_entropy_matches_direct_formula_interior():
    rng = np.random.default_rng(15)
    for p in rng.uniform(1e-6, 1.0 - 1e-6, 500):
        direct = -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)
        assert binary_entropy(p) == pytest.approx(direct, abs=1e-14)
