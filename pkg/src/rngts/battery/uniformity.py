"""Digit- and uniform-based tests: frequency, gap, serial, poker, coupon
collector, permutation, runs, max-of-t, serial correlation.

Tests that scan a data-dependent number of draws read raw blocks, map
them to uniforms themselves, and push unconsumed raw outputs back onto
the stream, so every draw is accounted for exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import ConfigurationError, TestAborted
from ..genkit.base import RandomStream
from ..genkit.distributions import uniform01_block, uniform_int_block
from .base import TestCase, chi_square_result, gaussian_result, ks_result
from .kernels import coupon_kernel, runs_kernel

_MAX_BLOCK = 1 << 22


def _uniforms(raw: np.ndarray, stream: RandomStream) -> np.ndarray:
    # same map as distributions.uniform01_block, applied to a raw block
    u = (raw.astype(np.float64) - stream.min_value) / stream.range_size
    if stream.range_size > 2**53:
        np.minimum(u, np.nextafter(1.0, 0.0), out=u)
    return u


def _stalled(block: int, progressed: bool) -> int:
    """Next block size for a scanner; abort if already maxed out."""
    if progressed:
        return block
    if block >= _MAX_BLOCK:
        raise TestAborted("scanner made no progress at maximum buffer size")
    return min(block * 2, _MAX_BLOCK)


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


class ChisqrUniformityTest(TestCase):
    """Chi-square of uniform01 draws binned into k equal cells."""

    test_name = "Chi-Square-Uniformity-Test"

    def __init__(self, n: int = 100000, k: int = 256):
        if k < 2:
            raise ConfigurationError("need at least 2 cells")
        if n < 5 * k:
            raise ConfigurationError(
                f"{n} draws into {k} cells leaves expected counts below 5"
            )
        self.n = n
        self.k = k

    def parameters(self):
        return [("Number of Numbers", self.n), ("Number of Classes", self.k)]

    def run(self, stream: RandomStream):
        """Consumes exactly n draws."""
        u = uniform01_block(stream, self.n)
        cells = (u * self.k).astype(np.int64)
        counts = np.bincount(cells, minlength=self.k)
        probs = np.full(self.k, 1.0 / self.k)
        return [chi_square_result(counts, probs, self.n)]


class KsUniformityTest(TestCase):
    """KS of uniform01 draws against F(x) = x; reports both one-sided p's."""

    test_name = "KS-Uniformity-Test"

    def __init__(self, n: int = 100000):
        if n < 1:
            raise ConfigurationError("need at least 1 draw")
        self.n = n

    def parameters(self):
        return [("Number of Numbers", self.n)]

    def run(self, stream: RandomStream):
        """Consumes exactly n draws."""
        u = uniform01_block(stream, self.n)
        return [ks_result(u, lambda x: x)]


class GapTest(TestCase):
    """Lengths of gaps between hits of [alpha, beta) in a uniform01 scan."""

    test_name = "Gap-Test"

    _GAP_CAP = 1_000_000

    def __init__(self, alpha: float = 0.0, beta: float = 0.5,
                 t: int = 16, n_gaps: int = 10000):
        p = beta - alpha
        if not (0.0 < p < 1.0) or alpha < 0.0 or beta > 1.0:
            raise ConfigurationError(
                f"hit range [{alpha}, {beta}) must be a proper subinterval of [0, 1)"
            )
        if t < 1:
            raise ConfigurationError("maximum gap length must be at least 1")
        if n_gaps < 1:
            raise ConfigurationError("need at least 1 gap")
        self.alpha = alpha
        self.beta = beta
        self.t = t
        self.n_gaps = n_gaps

    def parameters(self):
        return [
            ("Alpha", self.alpha),
            ("Beta", self.beta),
            ("Maximum Gap Length", self.t),
            ("Number of Gaps", self.n_gaps),
        ]

    def cell_probabilities(self) -> np.ndarray:
        p = self.beta - self.alpha
        r = np.arange(self.t, dtype=np.float64)
        probs = p * (1.0 - p) ** r
        return np.concatenate([probs, [(1.0 - p) ** self.t]])

    def run(self, stream: RandomStream):
        """Consumes through the hit closing the n_gaps-th gap."""
        counts = np.zeros(self.t + 1, dtype=np.int64)
        carry = 0
        remaining = self.n_gaps
        block = 65536
        while remaining > 0:
            raw = stream.next_block(block)
            u = _uniforms(raw, stream)
            hits = np.flatnonzero((u >= self.alpha) & (u < self.beta))
            final = hits.size >= remaining
            if final:
                hits = hits[:remaining]
                consumed = int(hits[-1]) + 1
                stream.unread(raw[consumed:])
            if hits.size:
                gaps = np.concatenate(
                    [[carry + int(hits[0])], np.diff(hits) - 1]
                )
                counts += np.bincount(
                    np.minimum(gaps, self.t), minlength=self.t + 1
                )
                remaining -= hits.size
                carry = 0 if final else raw.size - (int(hits[-1]) + 1)
            else:
                carry += raw.size
            if carry > self._GAP_CAP:
                raise TestAborted(
                    f"open gap exceeded {self._GAP_CAP} draws without a hit"
                )
            block = _stalled(block, hits.size > 0)
        return [chi_square_result(counts, self.cell_probabilities(),
                                  self.n_gaps)]


class SerialTest(TestCase):
    """Chi-square of non-overlapping digit pairs over all d^2 cells."""

    test_name = "Serial-Test"

    def __init__(self, d: int = 64, n_pairs: int = 25000):
        if d < 2:
            raise ConfigurationError("alphabet size must be at least 2")
        if n_pairs < 5 * d * d:
            raise ConfigurationError(
                f"{n_pairs} pairs over {d * d} cells leaves expected counts below 5"
            )
        self.d = d
        self.n_pairs = n_pairs

    def parameters(self):
        return [("Alphabet Size", self.d), ("Number of Pairs", self.n_pairs)]

    def run(self, stream: RandomStream):
        """Consumes raw draws through the one yielding digit 2*n_pairs."""
        digits = uniform_int_block(stream, 0, self.d - 1, 2 * self.n_pairs)
        pairs = digits.reshape(self.n_pairs, 2)
        cells = pairs[:, 0] * self.d + pairs[:, 1]
        counts = np.bincount(cells, minlength=self.d * self.d)
        probs = np.full(self.d * self.d, 1.0 / (self.d * self.d))
        return [chi_square_result(counts, probs, self.n_pairs)]


class PokerTest(TestCase):
    """Distinct-digit count in 5-digit hands vs the partition distribution."""

    test_name = "Poker-Test"

    def __init__(self, d: int = 16, n_hands: int = 10000):
        if d < 2:
            raise ConfigurationError(
                "alphabet size 1 admits a single hand category"
            )
        if n_hands < 1:
            raise ConfigurationError("need at least 1 hand")
        self.d = d
        self.n_hands = n_hands

    def parameters(self):
        return [("Alphabet Size", self.d), ("Number of Hands", self.n_hands)]

    def cell_probabilities(self) -> np.ndarray:
        # P(r distinct) = S(5, r) * d(d-1)...(d-r+1) / d^5; r > d impossible
        d = self.d
        probs = []
        for r in range(1, min(5, d) + 1):
            ff = Fraction(1)
            for i in range(r):
                ff *= d - i
            probs.append(float(_stirling2(5, r) * ff / d**5))
        return np.asarray(probs)

    def run(self, stream: RandomStream):
        """Consumes raw draws through the one yielding digit 5*n_hands."""
        digits = uniform_int_block(stream, 0, self.d - 1, 5 * self.n_hands)
        hands = np.sort(digits.reshape(self.n_hands, 5), axis=1)
        distinct = 1 + (np.diff(hands, axis=1) != 0).sum(axis=1)
        rmax = min(5, self.d)
        counts = np.bincount(distinct - 1, minlength=rmax)[:rmax]
        return [chi_square_result(counts, self.cell_probabilities(),
                                  self.n_hands)]


class CouponCollectorTest(TestCase):
    """Segment lengths needed to see all d digit values at least once."""

    test_name = "Coupon-Collector-Test"

    _SEGMENT_CAP = 1_000_000

    def __init__(self, d: int = 8, t: int = 30, n_segments: int = 5000):
        if d < 2:
            raise ConfigurationError("alphabet size must be at least 2")
        if t <= d:
            raise ConfigurationError(
                f"maximum segment length {t} must exceed alphabet size {d}"
            )
        if n_segments < 1:
            raise ConfigurationError("need at least 1 segment")
        self.d = d
        self.t = t
        self.n_segments = n_segments

    def parameters(self):
        return [
            ("Alphabet Size", self.d),
            ("Maximum Segment Length", self.t),
            ("Number of Segments", self.n_segments),
        ]

    def cell_probabilities(self) -> np.ndarray:
        # P(r) = d!/d^r * S(r-1, d-1) for r = d..t-1, plus the complement tail
        d, t = self.d, self.t
        dfact = math.factorial(d)
        probs = [
            float(Fraction(dfact, d**r) * _stirling2(r - 1, d - 1))
            for r in range(d, t)
        ]
        tail = 1.0 - float(
            Fraction(dfact, d ** (t - 1)) * _stirling2(t - 1, d)
        )
        return np.asarray(probs + [tail])

    def run(self, stream: RandomStream):
        """Consumes through the draw completing the last segment."""
        lo = stream.min_value
        limit = stream.range_size - stream.range_size % self.d
        counts = np.zeros(self.t - self.d + 1, dtype=np.int64)
        remaining = self.n_segments
        block = 65536
        while remaining > 0:
            raw = stream.next_block(block)
            w = raw.astype(np.int64) - lo
            done, consumed, aborted = coupon_kernel(
                w, limit, self.d, self.t, counts, remaining, self._SEGMENT_CAP
            )
            if aborted:
                raise TestAborted(
                    f"coupon segment exceeded {self._SEGMENT_CAP} draws"
                )
            if consumed < raw.size:
                stream.unread(raw[consumed:])
            remaining -= done
            block = _stalled(block, done > 0)
        return [chi_square_result(counts, self.cell_probabilities(),
                                  self.n_segments)]


class PermutationTest(TestCase):
    """Order patterns of non-overlapping groups of t draws vs uniform on t!."""

    test_name = "Permutation-Test"

    def __init__(self, t: int = 5, n_groups: int = 12000):
        if t < 2:
            raise ConfigurationError("group size must be at least 2")
        if t > 8:
            raise ConfigurationError(
                f"group size {t} yields {math.factorial(t)} cells; limit is 8"
            )
        if n_groups < 1:
            raise ConfigurationError("need at least 1 group")
        self.t = t
        self.n_groups = n_groups

    def parameters(self):
        return [("Group Size", self.t), ("Number of Groups", self.n_groups)]

    @staticmethod
    def pattern_index(group: np.ndarray) -> int:
        """Rank one group's order pattern; ties resolve to the later draw."""
        return int(PermutationTest._rank_groups(
            np.asarray(group, dtype=np.float64).reshape(1, -1))[0])

    @staticmethod
    def _rank_groups(g: np.ndarray) -> np.ndarray:
        g = g.copy()
        n, t = g.shape
        rows = np.arange(n)
        f = np.zeros(n, dtype=np.int64)
        for r in range(t, 1, -1):
            seg = g[:, :r]
            # last position of the maximum: earlier draws compare smaller
            s = r - 1 - seg[:, ::-1].argmax(axis=1)
            f = f * r + s
            tmp = g[rows, s].copy()
            g[rows, s] = g[:, r - 1]
            g[:, r - 1] = tmp
        return f

    def run(self, stream: RandomStream):
        """Consumes exactly t * n_groups draws."""
        u = uniform01_block(stream, self.t * self.n_groups)
        f = self._rank_groups(u.reshape(self.n_groups, self.t))
        cells = math.factorial(self.t)
        counts = np.bincount(f, minlength=cells)
        probs = np.full(cells, 1.0 / cells)
        return [chi_square_result(counts, probs, self.n_groups)]


class RunsTest(TestCase):
    """Lengths of maximal ascending runs, one draw discarded after each."""

    test_name = "Run-Test"

    _RUN_CAP = 1000

    _PROBS = np.array(
        [1 / math.factorial(r) - 1 / math.factorial(r + 1) for r in range(1, 6)]
        + [1 / math.factorial(6)]
    )

    def __init__(self, n_runs: int = 10000):
        if n_runs < 1:
            raise ConfigurationError("need at least 1 run")
        self.n_runs = n_runs

    def parameters(self):
        return [("Number of Runs", self.n_runs)]

    def run(self, stream: RandomStream):
        """Consumes through the draw breaking the last run."""
        counts = np.zeros(6, dtype=np.int64)
        remaining = self.n_runs
        block = 65536
        while remaining > 0:
            raw = stream.next_block(block)
            u = _uniforms(raw, stream)
            done, consumed, aborted = runs_kernel(
                u, counts, remaining, self._RUN_CAP
            )
            if aborted:
                raise TestAborted(
                    f"ascending run exceeded {self._RUN_CAP} draws"
                )
            if consumed < raw.size:
                stream.unread(raw[consumed:])
            remaining -= done
            block = _stalled(block, done > 0)
        return [chi_square_result(counts, self._PROBS, self.n_runs)]


class MaxOfTTest(TestCase):
    """V = (max of t draws)^t is uniform under the null; KS against that."""

    test_name = "Maximum-of-t-Test"

    def __init__(self, t: int = 8, n_groups: int = 10000):
        if t < 1:
            raise ConfigurationError("group size must be at least 1")
        if n_groups < 1:
            raise ConfigurationError("need at least 1 group")
        self.t = t
        self.n_groups = n_groups

    def parameters(self):
        return [("Group Size", self.t), ("Number of Groups", self.n_groups)]

    def run(self, stream: RandomStream):
        """Consumes exactly t * n_groups draws."""
        u = uniform01_block(stream, self.t * self.n_groups)
        v = u.reshape(self.n_groups, self.t).max(axis=1) ** self.t
        return [ks_result(v, lambda x: x)]


class SerialCorrelationTest(TestCase):
    """Circular lag-1 serial correlation standardized to a Gaussian."""

    test_name = "Serial-Correlation-Test"

    def __init__(self, n: int = 100000):
        if n < 10:
            raise ConfigurationError("need at least 10 draws")
        self.n = n

    def parameters(self):
        return [("Number of Numbers", self.n)]

    def run(self, stream: RandomStream):
        """Consumes exactly n draws."""
        n = self.n
        u = uniform01_block(stream, n)
        s1 = float(u.sum())
        s2 = float((u * u).sum())
        circ = float((u * np.roll(u, -1)).sum())
        denom = n * s2 - s1 * s1
        if denom == 0.0:
            raise TestAborted(
                "zero variance in the draw sequence; correlation undefined"
            )
        c = (n * circ - s1 * s1) / denom
        mu = -1.0 / (n - 1)
        sigma = math.sqrt(n * (n - 3.0) / (n + 1.0)) / (n - 1)
        return [gaussian_result((c - mu) / sigma)]
