"""Monte-Carlo validation of the statistical embedding model.

The solvers treat sub-covers as memoryless bit sources and each encoder as
an overwriting channel.  This module actually runs the pipeline on sampled
covers: select keyed positions, compress the original bits there, overwrite
the positions with compressed-stream + payload + keyed filler, and later
invert everything in reverse embedding order.  simulate_two_layer scores the
measurements (marginals, flip rates, compressed lengths, net capacities)
against the model predictions with binomial standard errors.

Bit sequences are plain numpy uint8 arrays of 0/1 values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coder import compress_bits, compressed_size_bits, decompress_bits
from .core import (
    GameConfig,
    StrategyProfile,
    alice_subpayoff,
    binary_entropy,
    bob_subpayoff,
    overwritten_marginal,
)


def generate_cover(n: int, p: float, seed: int) -> np.ndarray:
    """Sample an i.i.d. Bernoulli(p) bit sequence of length n."""
    if n <= 0:
        raise ValueError("cover length n must be a positive bit count")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"bit probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    return (rng.random(n) < p).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class PositionSet:
    """Sorted distinct position indices selected by a keyed permutation."""

    indices: np.ndarray

    def __post_init__(self) -> None:
        if self.indices.ndim != 1:
            raise ValueError("position indices must be 1-D")
        if self.indices.size > 1 and not (np.diff(self.indices) > 0).all():
            raise ValueError("position indices must be strictly increasing")

    @property
    def size(self) -> int:
        return int(self.indices.size)


def select_positions(n: int, fraction: float, key: int) -> PositionSet:
    """Choose round(n * fraction) distinct positions via the keyed
    permutation prefix, returned in sorted order."""
    if n <= 0:
        raise ValueError("cover length n must be a positive bit count")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"embedding fraction {fraction} outside [0, 1]")
    k = int(round(n * fraction))
    rng = np.random.default_rng([key, 0])
    idx = rng.permutation(n)[:k]
    idx.sort()
    return PositionSet(idx.astype(np.int64))


@dataclass(frozen=True, eq=False)
class EmbedResult:
    """One embedding layer: the marked sequence plus what went into it."""

    marked: np.ndarray
    positions: PositionSet
    compressed: bytes
    capacity: int
    payload_bits: int


def embed_layer(cover: np.ndarray, fraction: float, key: int,
                payload: np.ndarray) -> EmbedResult:
    """Reversibly overwrite a keyed fraction of the cover.

    The selected original bits are compressed; the positions are overwritten
    with compressed-stream bits, then the payload, then keyed filler coin
    flips.  Capacity is the selected count minus the stream length; a longer
    payload (or an incompressible selection, where capacity goes negative)
    raises ValueError with the deficit.
    """
    cover = np.ascontiguousarray(cover, dtype=np.uint8)
    payload = np.asarray(payload, dtype=np.uint8)
    positions = select_positions(cover.size, fraction, key)
    k = positions.size
    if k == 0:
        if payload.size:
            raise ValueError(f"payload too large: capacity 0 bits, payload {payload.size} bits (deficit {payload.size})")
        return EmbedResult(cover.copy(), positions, b"", 0, 0)
    blob = compress_bits(cover[positions.indices])
    stream_bits = compressed_size_bits(blob)
    capacity = k - stream_bits
    if payload.size > capacity:
        deficit = payload.size - capacity
        raise ValueError(f"payload too large: capacity {capacity} bits, payload {payload.size} bits (deficit {deficit})")
    filler = np.random.default_rng([key, 1]).integers(
        0, 2, capacity - payload.size, dtype=np.uint8)
    marked = cover.copy()
    marked[positions.indices] = np.concatenate(
        [np.unpackbits(np.frombuffer(blob, dtype=np.uint8)), payload, filler])
    return EmbedResult(marked, positions, blob, capacity, int(payload.size))


def extract_layer(marked: np.ndarray, fraction: float, key: int,
                  payload_bits: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Invert embed_layer: restore the original sequence and read back the
    first payload_bits of payload.

    The stream carried at the key's positions is self-framing: its header
    gives the original bit count and recompressing the decoded bits locates
    the payload offset.
    """
    marked = np.ascontiguousarray(marked, dtype=np.uint8)
    positions = select_positions(marked.size, fraction, key)
    k = positions.size
    if k == 0:
        if payload_bits:
            raise ValueError("no positions selected, nothing to extract")
        return marked.copy(), np.zeros(0, dtype=np.uint8)
    carried = marked[positions.indices]
    original = decompress_bits(np.packbits(carried).tobytes(), expected_bits=k)
    offset = compressed_size_bits(compress_bits(original))
    if payload_bits < 0 or offset + payload_bits > k:
        raise ValueError(f"payload of {payload_bits} bits does not fit the carried stream")
    payload = carried[offset:offset + payload_bits].copy()
    restored = marked.copy()
    restored[positions.indices] = original
    return restored, payload


def _z_score(measured: float, predicted: float, samples: int) -> float:
    if samples <= 0 or not 0.0 < predicted < 1.0:
        if measured == predicted:
            return 0.0
        return math.copysign(math.inf, measured - predicted)
    se = math.sqrt(predicted * (1.0 - predicted) / samples)
    return (measured - predicted) / se


@dataclass
class SimulationReport:
    """Measured-versus-predicted summary of one two-layer simulation run."""

    n: int
    p: float
    s: float
    t: float
    seed: int
    empirical_p: float
    z_cover: float
    marginal_after_alice: float
    predicted_marginal: float
    z_marginal: float
    flip_rate: float
    predicted_flip_rate: float
    z_flip: float
    alice_compressed_bits: int
    predicted_alice_compressed_bits: float
    bob_compressed_bits: int
    predicted_bob_compressed_bits: float
    alice_payload_bits: int
    bob_payload_bits: int
    alice_capacity_estimate: float
    alice_model_capacity: float
    bob_capacity_estimate: float
    bob_model_capacity: float
    restored_ok: bool
    payload_ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def simulate_two_layer(cfg: GameConfig, profile: StrategyProfile, seed: int = 0) -> SimulationReport:
    """Run both embedding layers on a sampled cover and audit the model.

    Requires a single sub-cover.  Payloads fill each layer's capacity with
    seeded coin flips.  Restoration runs in reverse order (Bob's layer off
    first, then Alice's) and must reproduce the cover bit-for-bit.
    """
    if cfg.cover.l != 1:
        raise ValueError("simulation requires exactly one sub-cover")
    if profile.l != 1:
        raise ValueError("profile length does not match cover")
    n = cfg.cover.n
    p = cfg.cover.p[0]
    s = profile.s.v[0]
    t = profile.t.v[0]
    state = np.random.SeedSequence(seed).generate_state(5, np.uint64)
    cover_seed, alice_key, bob_key, pay_a, pay_b = (int(x) for x in state)

    cover = generate_cover(n, p, cover_seed)

    def run_layer(base: np.ndarray, fraction: float, key: int, pay_seed: int):
        empty = np.zeros(0, dtype=np.uint8)
        if round(n * fraction) == 0:
            return embed_layer(base, fraction, key, empty), empty
        probe = embed_layer(base, fraction, key, empty)
        payload = np.random.default_rng(pay_seed).integers(
            0, 2, probe.capacity, dtype=np.uint8)
        return embed_layer(base, fraction, key, payload), payload

    alice, alice_sent = run_layer(cover, s, alice_key, pay_a)
    bob, bob_sent = run_layer(alice.marked, t, bob_key, pay_b)

    # reverse-order restoration, checking payload recovery along the way
    mid, bob_payload = extract_layer(bob.marked, t, bob_key, bob.payload_bits)
    restored, alice_payload = extract_layer(mid, s, alice_key, alice.payload_bits)
    restored_ok = bool(np.array_equal(restored, cover))
    payload_ok = bool(
        np.array_equal(mid, alice.marked)
        and np.array_equal(bob_payload, bob_sent)
        and np.array_equal(alice_payload, alice_sent))

    empirical_p = float(cover.mean())
    marginal = float(alice.marked.mean())
    predicted_marginal = overwritten_marginal(p, s)

    k_alice = alice.positions.size
    if k_alice:
        flips = bob.marked[alice.positions.indices] != alice.marked[alice.positions.indices]
        flip_rate = float(flips.mean())
    else:
        flip_rate = 0.0
    predicted_flip = 0.5 * t

    la = compressed_size_bits(alice.compressed)
    lb = compressed_size_bits(bob.compressed)
    marg_entropy = binary_entropy(predicted_marginal)
    report = SimulationReport(
        n=n, p=p, s=s, t=t, seed=seed,
        empirical_p=empirical_p,
        z_cover=_z_score(empirical_p, p, n),
        marginal_after_alice=marginal,
        predicted_marginal=predicted_marginal,
        z_marginal=_z_score(marginal, predicted_marginal, n),
        flip_rate=flip_rate,
        predicted_flip_rate=predicted_flip,
        z_flip=_z_score(flip_rate, predicted_flip, k_alice),
        alice_compressed_bits=la,
        predicted_alice_compressed_bits=n * s * binary_entropy(p),
        bob_compressed_bits=lb,
        predicted_bob_compressed_bits=n * t * marg_entropy,
        alice_payload_bits=alice.payload_bits,
        bob_payload_bits=bob.payload_bits,
        alice_capacity_estimate=n * s * (1.0 - binary_entropy(flip_rate)) - la,
        alice_model_capacity=alice_subpayoff(n, p, s, t),
        # Bob has no channel term: nobody writes after him, so his pure
        # capacity is just his slots net of the compressed-stream overhead
        bob_capacity_estimate=n * t - lb,
        bob_model_capacity=bob_subpayoff(n, p, s, t),
        restored_ok=restored_ok,
        payload_ok=payload_ok,
    )
    return report
