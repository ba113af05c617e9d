"""Distributions mapping raw stream outputs to test domains.

uniform01 maps a raw output v to (v - min) / (max - min + 1), so 1.0 is
unattainable.  uniform_int uses rejection sampling over the largest
multiple of the target range fitting the stream range; it never maps by
modulo alone, so every value in [a, b] is exactly equiprobable.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from ..errors import ConfigurationError, StreamExhausted
from .base import RandomStream


def uniform01(stream: RandomStream) -> float:
    """One draw in [0, 1)."""
    u = (stream.next() - stream.min_value) / stream.range_size
    return u if u < 1.0 else np.nextafter(1.0, 0.0)


def uniform01_block(stream: RandomStream, n: int) -> np.ndarray:
    """n draws in [0, 1) as a float64 array."""
    raw = stream.next_block(n)
    u = (raw.astype(np.float64) - stream.min_value) / stream.range_size
    if stream.range_size > 2**53:
        np.minimum(u, np.nextafter(1.0, 0.0), out=u)
    return u


def _int_params(stream: RandomStream, a: int, b: int) -> tuple[int, int]:
    if a > b:
        raise ConfigurationError(f"empty integer interval [{a}, {b}]")
    m = b - a + 1
    if m > stream.range_size:
        raise ConfigurationError(
            f"interval of size {m} exceeds stream range {stream.range_size}"
        )
    limit = stream.range_size - stream.range_size % m
    return m, limit


def uniform_int(stream: RandomStream, a: int, b: int) -> int:
    """One unbiased draw from {a, ..., b}."""
    m, limit = _int_params(stream, a, b)
    while True:
        w = stream.next() - stream.min_value
        if w < limit:
            return a + w % m


def uniform_int_block(stream: RandomStream, a: int, b: int, n: int) -> np.ndarray:
    """n unbiased draws from {a, ..., b} as an int64 array.

    Consumes raw outputs exactly through the one yielding the n-th
    accepted value; any over-read block tail is pushed back.
    """
    m, limit = _int_params(stream, a, b)
    lo = stream.min_value
    parts = []
    need = n
    while need > 0:
        size = min(max(1024, need + (need >> 1) + 16), 1 << 20)
        while True:
            try:
                raw = stream.next_block(size)
                break
            except StreamExhausted:
                # finite source: shrink toward the minimum that could
                # still satisfy the request (one raw per value)
                if size <= need:
                    raise
                size = max(need, size // 2)
        w = raw.astype(np.int64) - lo
        acc = np.flatnonzero(w < limit)
        if acc.size >= need:
            cut = int(acc[need - 1])
            parts.append(a + w[acc[:need]] % m)
            stream.unread(raw[cut + 1:])
            need = 0
        else:
            parts.append(a + w[acc] % m)
            need -= acc.size
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


class Distribution:
    """Lazy mapper from a raw stream to a target codomain."""

    def map(self, stream: RandomStream) -> Iterator:
        raise NotImplementedError


class Uniform01(Distribution):
    def map(self, stream: RandomStream) -> Iterator[float]:
        while True:
            yield uniform01(stream)


class UniformInt(Distribution):
    def __init__(self, a: int, b: int):
        if a > b:
            raise ConfigurationError(f"empty integer interval [{a}, {b}]")
        self.a = a
        self.b = b

    def map(self, stream: RandomStream) -> Iterator[int]:
        while True:
            yield uniform_int(stream, self.a, self.b)
