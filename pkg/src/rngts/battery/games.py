"""Game-like and entropy tests: squeeze, craps, repetition time, gcd,
Maurer's universal statistic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import ConfigurationError, TestAborted
from ..genkit.adapters import bit_extract
from ..genkit.base import RandomStream
from ..genkit.bits import BitReader
from ..genkit.distributions import uniform_int_block
from .base import TestCase, chi_square_result, gaussian_result
from .kernels import craps_kernel, gcd_kernel, maurer_kernel, \
    repetition_kernel, squeeze_kernel

_MAX_BLOCK = 1 << 22


def _stalled(block: int, progressed: bool) -> int:
    if progressed:
        return block
    if block >= _MAX_BLOCK:
        raise TestAborted("scanner made no progress at maximum buffer size")
    return min(block * 2, _MAX_BLOCK)


# Iteration-count frequencies for cells 6..48 from a 10^8-game
# calibration run (count-down from 2^31 by k = ceil(k*u)); cells below 6
# and above 48 are folded into the edge cells.
_SQUEEZE_COUNTS = (
    2077, 5773, 17596, 46803, 111279, 237777, 463436, 830920,
    1370312, 2108299, 3036077, 4103306, 5237823, 6324417, 7245817,
    7909938, 8258487, 8237138, 7889491, 7262811, 6436430, 5504038,
    4542701, 3634356, 2812454, 2116322, 1547642, 1100421, 762569,
    515830, 338569, 218216, 138284, 85795, 51967, 30765, 17909,
    10358, 5772, 3267, 1795, 970, 1167,
)

SQUEEZE_CELL_PROBS = np.asarray(_SQUEEZE_COUNTS, dtype=np.float64)
SQUEEZE_CELL_PROBS /= SQUEEZE_CELL_PROBS.sum()
SQUEEZE_CELL_PROBS.flags.writeable = False


class SqueezeTest(TestCase):
    """Iterations to squeeze 2^31 down to 1 by k = ceil(k*u), per game."""

    test_name = "Squeeze-Test"

    _GAME_CAP = 10000

    def __init__(self, games: int = 100000):
        if games < 1:
            raise ConfigurationError("need at least 1 game")
        self.games = games

    def parameters(self):
        return [("Number of Games", self.games)]

    def run(self, stream: RandomStream):
        """Consumes through the draw finishing the last game."""
        counts = np.zeros(SQUEEZE_CELL_PROBS.size, dtype=np.int64)
        remaining = self.games
        block = 65536
        lo = stream.min_value
        rng = stream.range_size
        while remaining > 0:
            raw = stream.next_block(block)
            u = (raw.astype(np.float64) - lo) / rng
            done, consumed, aborted = squeeze_kernel(
                u, counts, remaining, self._GAME_CAP
            )
            if aborted:
                raise TestAborted(
                    f"squeeze game exceeded {self._GAME_CAP} iterations"
                )
            if consumed < raw.size:
                stream.unread(raw[consumed:])
            remaining -= done
            block = _stalled(block, done > 0)
        return [chi_square_result(counts, SQUEEZE_CELL_PROBS, self.games)]


def craps_win_probability() -> Fraction:
    """Exact win probability of the shooter, from the come-out table."""
    ways = {s: 6 - abs(s - 7) for s in range(2, 13)}
    p = Fraction(ways[7] + ways[11], 36)
    for point in (4, 5, 6, 8, 9, 10):
        w = ways[point]
        p += Fraction(w, 36) * Fraction(w, w + 6)
    return p


def craps_throw_probabilities(cells: int = 21) -> np.ndarray:
    """P(game lasts exactly n throws) for n = 1..cells-1 plus the tail.

    A game ends on throw 1 with probability 12/36; with a point
    established, each later throw resolves with the point's own odds,
    giving a geometric continuation.
    """
    ways = {s: 6 - abs(s - 7) for s in range(2, 13)}
    probs = [Fraction(ways[7] + ways[11] + ways[2] + ways[3] + ways[12], 36)]
    for n in range(2, cells):
        p = Fraction(0)
        for point in (4, 5, 6, 8, 9, 10):
            w = ways[point]
            resolve = Fraction(w + 6, 36)
            p += Fraction(w, 36) * (1 - resolve) ** (n - 2) * resolve
        probs.append(p)
    tail = 1 - sum(probs)
    return np.asarray([float(p) for p in probs] + [float(tail)])


class CrapsTest(TestCase):
    """Craps games: win rate as a Gaussian, throw counts as a chi-square.

    Dice are 1 + uniform_int(0, 5); both reference laws are computed
    exactly at run time from the dice-sum table.
    """

    test_name = "Craps-Test"

    _THROW_CAP = 10000
    _CELLS = 21

    def __init__(self, games: int = 200000):
        if games < 1:
            raise ConfigurationError("need at least 1 game")
        self.games = games

    def parameters(self):
        return [("Number of Games", self.games)]

    def run(self, stream: RandomStream):
        """Consumes through the draw deciding the last game."""
        lo = stream.min_value
        limit = stream.range_size - stream.range_size % 6
        throws = np.zeros(self._CELLS, dtype=np.int64)
        wins = 0
        remaining = self.games
        block = 65536
        while remaining > 0:
            raw = stream.next_block(block)
            w = raw.astype(np.int64) - lo
            done, won, consumed, aborted = craps_kernel(
                w, limit, throws, remaining, self._THROW_CAP
            )
            if aborted:
                raise TestAborted(
                    f"craps game exceeded {self._THROW_CAP} throws"
                )
            if consumed < raw.size:
                stream.unread(raw[consumed:])
            wins += won
            remaining -= done
            block = _stalled(block, done > 0)
        p_w = float(craps_win_probability())
        z = (wins - self.games * p_w) / math.sqrt(
            self.games * p_w * (1.0 - p_w)
        )
        self._last_wins = wins
        return [
            gaussian_result(z),
            chi_square_result(throws, craps_throw_probabilities(self._CELLS),
                              self.games),
        ]

    def _diagnostics(self):
        if hasattr(self, "_last_wins"):
            return [("Games Won", self._last_wins)]
        return []


def repetition_pmf(bits: int, coverage: float = 1.0 - 1e-9) -> np.ndarray:
    """P(T = t) for t = 0..tmax of the first-repeat time among 2^bits
    values; extends until the cdf reaches `coverage`.  Entries 0 and 1
    are zero (a repeat needs two draws)."""
    m = float(2**bits)
    tmax = int(6.0 * math.sqrt(m)) + 10
    while True:
        # survival S[j] = P(first j+1 draws all distinct), j = 0..
        fall = 1.0 - np.arange(1, tmax, dtype=np.float64) / m
        np.maximum(fall, 0.0, out=fall)
        surv = np.concatenate([[1.0], np.cumprod(fall)])
        pmf = np.zeros(tmax + 1)
        t = np.arange(2, tmax + 1, dtype=np.float64)
        pmf[2:] = surv[: tmax - 1] * (t - 1.0) / m
        if pmf.sum() >= coverage or tmax > 64 * int(math.sqrt(m) + 2):
            return pmf
        tmax *= 2


def repetition_bins(bits: int, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Quantile bin edges and exact bin probabilities for the repeat time.

    Bin i covers t in (edges[i-1], edges[i]]; a final open bin catches
    the tail when it has mass.  Laws with short support yield fewer bins.
    """
    pmf = repetition_pmf(bits)
    cdf = np.cumsum(pmf)
    edges = []
    probs = []
    prev_cum = 0.0
    target = 1.0 / n_bins
    for t in range(2, pmf.size):
        if cdf[t] + 1e-15 >= target and pmf[t] > 0.0:
            edges.append(t)
            probs.append(cdf[t] - prev_cum)
            prev_cum = cdf[t]
            while target <= cdf[t] + 1e-15:
                target += 1.0 / n_bins
            if target > 1.0 - 1e-12:
                break
    tail = 1.0 - prev_cum
    if tail > 1e-12:
        probs.append(tail)
    if len(probs) < 2:
        raise ConfigurationError(
            "repeat-time law too concentrated for the requested bins"
        )
    return np.asarray(edges, dtype=np.int64), np.asarray(probs)


class RepetitionTest(TestCase):
    """Draws until the first repeated b-bit value, binned at the exact
    law's quantiles.

    Values are the high b bits of each raw output.  Words buffered past
    the final repetition are discarded, not returned to the stream.
    """

    test_name = "Repetition-Test"

    def __init__(self, bits: int = 20, reps: int = 500):
        if bits < 1:
            raise ConfigurationError("field width must be at least 1 bit")
        if bits > 30:
            raise ConfigurationError(
                f"field width {bits} needs a {2**bits}-entry table; limit is 30"
            )
        if reps < 10:
            raise ConfigurationError("need at least 10 repetitions")
        self.bits = bits
        self.reps = reps

    def parameters(self):
        return [("Field Width", self.bits), ("Repetitions", self.reps)]

    def run(self, stream: RandomStream):
        if stream.bit_width < self.bits:
            raise ConfigurationError(
                f"stream outputs have {stream.bit_width} bits; "
                f"cannot extract {self.bits}"
            )
        sub = bit_extract(stream, stream.bit_width - 1,
                          stream.bit_width - self.bits)
        epoch = np.zeros(2**self.bits, dtype=np.int64)
        ts = np.empty(self.reps, dtype=np.int64)
        done = 0
        tag = 0
        block = 65536
        while done < self.reps:
            vals = sub.next_block(block).astype(np.int64)
            prev = done
            done, consumed, tag = repetition_kernel(
                vals, epoch, tag, ts, done, self.reps
            )
            if consumed < vals.size:
                sub.unread(vals[consumed:])
            block = _stalled(block, done > prev)
        n_bins = max(10, min(30, self.reps // 25))
        edges, probs = repetition_bins(self.bits, n_bins)
        cells = np.searchsorted(edges, ts, side="left")
        counts = np.bincount(cells, minlength=probs.size)[: probs.size]
        return [chi_square_result(counts, probs, self.reps)]


class GcdTest(TestCase):
    """gcd of uniform integer pairs vs P(g = j) proportional to 1/j^2."""

    test_name = "GCD-Test"

    _TOP = 50

    def __init__(self, pairs: int = 100000):
        if pairs < 1:
            raise ConfigurationError("need at least 1 pair")
        self.pairs = pairs

    def parameters(self):
        return [("Number of Pairs", self.pairs)]

    def cell_probabilities(self) -> np.ndarray:
        j = np.arange(1, self._TOP + 1, dtype=np.float64)
        probs = (6.0 / math.pi**2) / (j * j)
        return np.concatenate([probs, [1.0 - probs.sum()]])

    def run(self, stream: RandomStream):
        """Consumes raw draws through the one yielding integer 2*pairs."""
        vals = uniform_int_block(stream, 1, 2**31 - 1, 2 * self.pairs)
        a = np.ascontiguousarray(vals[0::2])
        b = np.ascontiguousarray(vals[1::2])
        gs = np.empty(self.pairs, dtype=np.int64)
        steps = np.empty(self.pairs, dtype=np.int64)
        gcd_kernel(a, b, gs, steps)
        counts = np.bincount(
            np.minimum(gs, self._TOP + 1) - 1, minlength=self._TOP + 1
        )
        self._steps_mean = float(steps.mean())
        self._steps_max = int(steps.max())
        return [chi_square_result(counts, self.cell_probabilities(),
                                  self.pairs)]

    def _diagnostics(self):
        if hasattr(self, "_steps_mean"):
            return [
                ("Mean Division Steps", self._steps_mean),
                ("Max Division Steps", self._steps_max),
            ]
        return []


@lru_cache(maxsize=32)
def maurer_reference(L: int) -> tuple[float, float]:
    """Expected value and variance of log2 distance between block
    recurrences for random L-bit blocks.

    E = sum over i >= 1 of q(1-q)^(i-1) log2 i with q = 2^-L; the
    variance uses the matching second moment.  The geometric series is
    summed in chunks until the remaining tail is negligible.
    """
    q = 2.0**-L
    e = 0.0
    m2 = 0.0
    start = 1
    chunk = 1 << 16
    while True:
        i = np.arange(start, start + chunk, dtype=np.float64)
        w = q * (1.0 - q) ** (i - 1.0)
        lg = np.log2(i)
        e += float(w @ lg)
        m2 += float(w @ (lg * lg))
        start += chunk
        tail_weight = (1.0 - q) ** (start - 1.0)
        bound = tail_weight * math.log2(start + 64.0 / q) ** 2
        if bound < 1e-12 * max(m2, 1e-300):
            break
        if start > (1 << 28):
            break
    return e, m2 - e * e


class MaurersUniversalTest(TestCase):
    """Maurer's universal statistic over L-bit blocks of the bit stream."""

    test_name = "Maurers-Universal-Test"

    def __init__(self, L: int = 8, Q: int = 2560, K: int = 256000):
        if L < 1 or L > 24:
            raise ConfigurationError("block width must be in 1..24 bits")
        if Q < 10 * 2**L:
            raise ConfigurationError(
                f"{Q} initialization blocks cannot cover a {2**L}-entry "
                f"table; need at least {10 * 2**L}"
            )
        if K < 1:
            raise ConfigurationError("need at least 1 test block")
        self.L = L
        self.Q = Q
        self.K = K

    def parameters(self):
        return [
            ("Block Bits", self.L),
            ("Initialization Blocks", self.Q),
            ("Test Blocks", self.K),
        ]

    def run(self, stream: RandomStream):
        """Consumes ceil((Q+K)*L / width) raw draws via bits."""
        reader = BitReader(stream)
        vals = np.ascontiguousarray(
            reader.read_values(self.Q + self.K, self.L)
        )
        table = np.zeros(2**self.L, dtype=np.int64)
        total = float(maurer_kernel(vals, self.Q, self.K, table))
        f = total / self.K
        e, var = maurer_reference(self.L)
        c = (0.7 - 0.8 / self.L
             + (4.0 + 32.0 / self.L) * self.K ** (-3.0 / self.L) / 15.0)
        sigma = c * math.sqrt(var / self.K)
        self._last_f = f
        return [gaussian_result((f - e) / sigma)]

    def _diagnostics(self):
        if hasattr(self, "_last_f"):
            return [("Statistic f", self._last_f)]
        return []
