"""Monte-Carlo embedding pipeline: cover sampling, keyed selection,
overwrite embedding, restoration, and the two-layer audit report."""

import numpy as np
import pytest

import rwgame as rw
from rwgame.simulate import (
    embed_layer,
    extract_layer,
    generate_cover,
    select_positions,
    simulate_two_layer,
)
from rwgame.simulate import _z_score


def l1_config(n=100000, p=0.005, d=1e9):
    return rw.GameConfig(rw.CoverSpec(n, (p,)), rw.CostModel((1.0,)), d, "noncoop")


def profile(s, t):
    return rw.StrategyProfile(rw.Strategy((s,)), rw.Strategy((t,)))


class TestGenerateCover:
    def test_deterministic_and_degenerate_endpoints(self):
        a = generate_cover(1000, 0.3, seed=1)
        b = generate_cover(1000, 0.3, seed=1)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, generate_cover(1000, 0.3, seed=2))
        assert not generate_cover(500, 0.0, seed=3).any()
        assert generate_cover(500, 1.0, seed=3).all()

    def test_mean_within_binomial_band(self):
        n = 1_000_000
        cover = generate_cover(n, 0.11, seed=4)
        se = np.sqrt(0.11 * 0.89 / n)
        assert abs(cover.mean() - 0.11) <= 4 * se


class TestSelectPositions:
    def test_size_endpoints_and_order(self):
        assert select_positions(1000, 0.0, key=1).size == 0
        assert select_positions(1000, 1.0, key=1).size == 1000
        ps = select_positions(1000, 0.25, key=2)
        assert ps.size == 250
        idx = ps.indices
        assert (idx[1:] > idx[:-1]).all()
        assert idx[0] >= 0 and idx[-1] < 1000

    def test_size_rounds_to_nearest(self):
        assert select_positions(10, 0.26, key=1).size == 3

    def test_key_determinism_and_overlap_statistics(self):
        n, f = 100000, 0.5
        a = select_positions(n, f, key=10)
        assert np.array_equal(a.indices, select_positions(n, f, key=10).indices)
        b = select_positions(n, f, key=11)
        overlap = np.intersect1d(a.indices, b.indices).size
        # two independent half-subsets meet in about a quarter of positions
        assert abs(overlap - 25000) <= 4 * np.sqrt(n * 0.25 * 0.75)


class TestEmbedExtract:
    def test_zero_fraction_is_identity(self):
        cover = generate_cover(400, 0.2, seed=5)
        res = embed_layer(cover, 0.0, key=1, payload=np.zeros(0, dtype=np.uint8))
        assert np.array_equal(res.marked, cover)
        assert res.capacity == 0 and res.compressed == b""

    def test_roundtrip_restores_cover_and_payload(self):
        rng = np.random.default_rng(6)
        cover = generate_cover(20000, 0.05, seed=7)
        probe = embed_layer(cover, 0.4, key=3, payload=np.zeros(0, dtype=np.uint8))
        payload = rng.integers(0, 2, probe.capacity // 2, dtype=np.uint8)
        res = embed_layer(cover, 0.4, key=3, payload=payload)
        assert res.payload_bits == payload.size
        restored, got = extract_layer(res.marked, 0.4, key=3,
                                      payload_bits=payload.size)
        assert np.array_equal(restored, cover)
        assert np.array_equal(got, payload)

    def test_untouched_positions_never_change(self):
        cover = generate_cover(5000, 0.3, seed=8)
        res = embed_layer(cover, 0.3, key=4, payload=np.zeros(0, dtype=np.uint8))
        mask = np.ones(5000, dtype=bool)
        mask[res.positions.indices] = False
        assert np.array_equal(res.marked[mask], cover[mask])

    def test_capacity_accounting_and_overflow_error(self):
        cover = generate_cover(10000, 0.05, seed=9)
        probe = embed_layer(cover, 0.5, key=5, payload=np.zeros(0, dtype=np.uint8))
        k = probe.positions.size
        assert probe.capacity == k - 8 * len(probe.compressed)
        too_big = np.zeros(probe.capacity + 1, dtype=np.uint8)
        with pytest.raises(ValueError, match="deficit 1"):
            embed_layer(cover, 0.5, key=5, payload=too_big)

    def test_marked_positions_look_uniform(self):
        cover = generate_cover(1_000_000, 0.005, seed=10)
        res = embed_layer(cover, 0.5, key=6, payload=np.zeros(0, dtype=np.uint8))
        marginal = res.marked.mean()
        # 0.005 + 0.25 - 0.0025, within 4 binomial sigma
        assert abs(marginal - 0.2525) <= 4 * np.sqrt(0.2525 * 0.7475 / 1_000_000)


class TestZScore:
    def test_regular_and_degenerate_cases(self):
        assert _z_score(0.3, 0.25, 10000) == pytest.approx(
            0.05 / np.sqrt(0.25 * 0.75 / 10000))
        assert _z_score(0.0, 0.0, 100) == 0.0
        assert _z_score(0.25, 0.25, 0) == 0.0
        assert _z_score(0.3, 0.0, 100) == np.inf
        assert _z_score(0.0, 1.0, 100) == -np.inf


class TestSimulateTwoLayer:
    def test_report_is_consistent_and_reversible(self):
        rep = simulate_two_layer(l1_config(), profile(0.5, 0.5), seed=0)
        assert rep.restored_ok and rep.payload_ok
        assert abs(rep.z_cover) <= 6
        assert abs(rep.z_marginal) <= 6
        assert abs(rep.z_flip) <= 6
        assert rep.alice_payload_bits > 0 and rep.bob_payload_bits > 0
        d = rep.to_dict()
        assert d["n"] == 100000 and d["s"] == 0.5

    def test_no_second_layer_means_no_flips(self):
        rep = simulate_two_layer(l1_config(), profile(0.5, 0.0), seed=1)
        assert rep.flip_rate == 0.0
        assert rep.predicted_flip_rate == 0.0
        assert rep.bob_compressed_bits == 0

    def test_no_first_layer_keeps_cover_marginal(self):
        rep = simulate_two_layer(l1_config(), profile(0.0, 0.5), seed=2)
        assert rep.marginal_after_alice == rep.empirical_p
        assert rep.predicted_marginal == rep.p

    def test_deterministic_in_seed(self):
        a = simulate_two_layer(l1_config(), profile(0.4, 0.3), seed=5)
        b = simulate_two_layer(l1_config(), profile(0.4, 0.3), seed=5)
        assert a == b
        c = simulate_two_layer(l1_config(), profile(0.4, 0.3), seed=6)
        assert a.marginal_after_alice != c.marginal_after_alice

    def test_compressed_length_tracks_model(self):
        rep = simulate_two_layer(l1_config(n=500000), profile(0.5, 0.5), seed=3)
        # per-slot rate within one percentage point of H(p)
        ns = rep.n * rep.s
        assert abs(rep.alice_compressed_bits - rep.predicted_alice_compressed_bits) <= 0.01 * ns
        nt = rep.n * rep.t
        assert abs(rep.bob_compressed_bits - rep.predicted_bob_compressed_bits) <= 0.01 * nt

    def test_capacity_estimates_near_model_values(self):
        rep = simulate_two_layer(l1_config(n=1_000_000, p=0.005), profile(0.5, 0.5),
                                 seed=1)
        assert rep.alice_model_capacity == pytest.approx(71653.59160353653, abs=1e-6)
        assert rep.bob_model_capacity == pytest.approx(92391.7305415935, abs=1e-6)
        assert abs(rep.alice_capacity_estimate - rep.alice_model_capacity) <= (
            0.02 * rep.alice_model_capacity)
        assert abs(rep.bob_capacity_estimate - rep.bob_model_capacity) <= (
            0.02 * rep.bob_model_capacity)

    def test_requires_single_subcover(self):
        cfg = rw.GameConfig(rw.CoverSpec(1000, (0.05, 0.1)), rw.CostModel((1.0, 1.0)),
                            10.0, "noncoop")
        with pytest.raises(ValueError):
            simulate_two_layer(cfg, rw.StrategyProfile(rw.Strategy((0.1, 0.1)),
                                                       rw.Strategy((0.1, 0.1))), 0)
