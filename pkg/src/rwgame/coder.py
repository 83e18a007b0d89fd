"""Adaptive binary arithmetic coder used by the embedding simulator.

Stream format (stable across versions): an 8-byte big-endian source bit
count, then the arithmetic-coded payload, zero-padded to a byte boundary.
The probability model is a Laplace-smoothed running bit frequency (both
counts start at 1) updated after every coded bit, so encoder and decoder
stay in lockstep without side information.  Coder state is the classic
32-bit low/high register pair with pending-bit carry resolution.
"""

from __future__ import annotations

import struct

import numpy as np
from numba import njit

_STATE_BITS = 32
_FULL = (1 << _STATE_BITS) - 1
_HALF = 1 << (_STATE_BITS - 1)
_QUARTER = 1 << (_STATE_BITS - 2)
_THREE_QUARTER = _HALF + _QUARTER
# cap the model total so range * count stays well inside int64
_MAX_TOTAL = 1 << (_STATE_BITS - 2)

HEADER_BYTES = 8


@njit(cache=True)
def _encode_core(bits, out):
    low = 0
    high = _FULL
    pending = 0
    c0 = 1
    c1 = 1
    m = 0
    for idx in range(bits.shape[0]):
        total = c0 + c1
        span = high - low + 1
        split = low + (span * c0) // total - 1
        if bits[idx] == 0:
            high = split
            c0 += 1
        else:
            low = split + 1
            c1 += 1
        if c0 + c1 >= _MAX_TOTAL:
            c0 = (c0 + 1) >> 1
            c1 = (c1 + 1) >> 1
        while True:
            if high < _HALF:
                out[m] = 0
                m += 1
                while pending > 0:
                    out[m] = 1
                    m += 1
                    pending -= 1
            elif low >= _HALF:
                out[m] = 1
                m += 1
                while pending > 0:
                    out[m] = 0
                    m += 1
                    pending -= 1
                low -= _HALF
                high -= _HALF
            elif low >= _QUARTER and high < _THREE_QUARTER:
                pending += 1
                low -= _QUARTER
                high -= _QUARTER
            else:
                break
            low = low << 1
            high = (high << 1) | 1
    # final disambiguation: one quarter-selector bit plus pending carries
    pending += 1
    if low < _QUARTER:
        out[m] = 0
        m += 1
        while pending > 0:
            out[m] = 1
            m += 1
            pending -= 1
    else:
        out[m] = 1
        m += 1
        while pending > 0:
            out[m] = 0
            m += 1
            pending -= 1
    return m


@njit(cache=True)
def _decode_core(code, n, out):
    low = 0
    high = _FULL
    c0 = 1
    c1 = 1
    ncode = code.shape[0]
    value = 0
    pos = 0
    for _ in range(_STATE_BITS):
        b = code[pos] if pos < ncode else 0
        value = (value << 1) | b
        pos += 1
    for idx in range(n):
        total = c0 + c1
        span = high - low + 1
        split = low + (span * c0) // total - 1
        if value <= split:
            out[idx] = 0
            high = split
            c0 += 1
        else:
            out[idx] = 1
            low = split + 1
            c1 += 1
        if c0 + c1 >= _MAX_TOTAL:
            c0 = (c0 + 1) >> 1
            c1 = (c1 + 1) >> 1
        while True:
            if high < _HALF:
                pass
            elif low >= _HALF:
                low -= _HALF
                high -= _HALF
                value -= _HALF
            elif low >= _QUARTER and high < _THREE_QUARTER:
                low -= _QUARTER
                high -= _QUARTER
                value -= _QUARTER
            else:
                break
            low = low << 1
            high = (high << 1) | 1
            b = code[pos] if pos < ncode else 0
            value = (value << 1) | b
            pos += 1
    return pos


def _as_bit_array(bits) -> np.ndarray:
    arr = np.ascontiguousarray(bits, dtype=np.uint8)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("bit sequence must be a non-empty 1-D array")
    if arr.max() > 1:
        raise ValueError("bit sequence must contain only 0 and 1")
    return arr


def compress_bits(bits) -> bytes:
    """Compress a 0/1 sequence into the framed stream format."""
    arr = _as_bit_array(bits)
    # worst case is one code bit per source bit plus log-factor model cost
    out = np.empty(2 * arr.size + 128, dtype=np.uint8)
    m = _encode_core(arr, out)
    return struct.pack(">Q", arr.size) + np.packbits(out[:m]).tobytes()


def decompress_bits(blob: bytes, expected_bits: int | None = None) -> np.ndarray:
    """Invert compress_bits.  The source length comes from the stream header;
    expected_bits, when given, is cross-checked against it."""
    if len(blob) < HEADER_BYTES:
        raise ValueError("stream shorter than its header")
    (n,) = struct.unpack(">Q", blob[:HEADER_BYTES])
    if expected_bits is not None and expected_bits != n:
        raise ValueError(f"stream header says {n} bits, expected {expected_bits}")
    if n == 0:
        raise ValueError("stream encodes an empty bit sequence")
    code = np.unpackbits(np.frombuffer(blob[HEADER_BYTES:], dtype=np.uint8))
    out = np.empty(n, dtype=np.uint8)
    _decode_core(code, n, out)
    return out


def compressed_size_bits(blob: bytes) -> int:
    """Total stream length in bits, header and byte padding included."""
    return 8 * len(blob)
