"""Occupancy, spacing, and geometry tests: collision, birthday spacings,
binary rank, parking lot, minimum distance, random walk, monkey words.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import ConfigurationError
from ..genkit.base import RandomStream
from ..genkit.bits import BitReader
from ..genkit.distributions import uniform01_block, uniform_int_block
from ..stats import StatKind, StatisticResult
from .base import TestCase, chi_square_result, gaussian_result, ks_result
from .kernels import mindist_brute_kernel, mindist_grid_kernel, \
    parking_kernel, rank_kernel


@lru_cache(maxsize=8)
def collision_null_distribution(m: int, n: int) -> tuple:
    """Exact distribution of the collision count for n balls in m urns.

    Returns (pmf, cdf) over c = 0..n; built by the occupancy recurrence
    over the number of occupied urns, one ball at a time.
    """
    p = np.zeros(n + 1)
    p[0] = 1.0
    occ = np.arange(n + 1, dtype=np.float64)
    stay = occ / m
    grow = (m - occ) / m
    for _ in range(n):
        shifted = (p * grow)[:-1]
        p = p * stay
        p[1:] += shifted
    # p[occ] = P(occupied == occ); collisions c = n - occ
    pmf = p[::-1].copy()
    cdf = np.cumsum(pmf)
    pmf.flags.writeable = False
    cdf.flags.writeable = False
    return pmf, cdf


class CollisionTest(TestCase):
    """Number of urn collisions against its exact sparse-occupancy law."""

    test_name = "Collision-Test"

    def __init__(self, m: int = 2**20, n: int = 2**14):
        if m < 2:
            raise ConfigurationError("need at least 2 urns")
        if n < 1:
            raise ConfigurationError("need at least 1 ball")
        if n >= m:
            raise ConfigurationError(
                f"{n} balls into {m} urns is not sparse; need n < m"
            )
        self.m = m
        self.n = n

    def parameters(self):
        return [("Number of Urns", self.m), ("Number of Balls", self.n)]

    def run(self, stream: RandomStream):
        """Consumes exactly n draws."""
        u = uniform01_block(stream, self.n)
        urns = (u * self.m).astype(np.int64)
        c = self.n - np.unique(urns).size
        pmf, cdf = collision_null_distribution(self.m, self.n)
        lower = float(cdf[c])                         # P(C <= c)
        upper = float(cdf[c - 1]) if c > 0 else 0.0   # 1 - P(C >= c)
        return [StatisticResult(
            kind=StatKind.GAUSSIAN,
            statistic_value=float(c),
            p_values={"lower": min(lower, 1.0), "upper": min(upper, 1.0)},
        )]


class BirthdaySpacingsTest(TestCase):
    """Duplicate spacings among sorted birthdays vs a Poisson law."""

    test_name = "Birthday-Spacings-Test"

    def __init__(self, m: int = 2**24, n: int = 512, reps: int = 200):
        if m < 2 or n < 3:
            raise ConfigurationError("need at least 2 days and 3 birthdays")
        if reps < 10:
            raise ConfigurationError("need at least 10 repetitions")
        lam = n**3 / (4.0 * m)
        if lam > 100.0:
            raise ConfigurationError(
                f"Poisson rate {lam:.1f} too large; the asymptotic law "
                "needs n^3/(4m) <= 100"
            )
        self.m = m
        self.n = n
        self.reps = reps
        self.lam = lam

    def parameters(self):
        return [
            ("Number of Days", self.m),
            ("Number of Birthdays", self.n),
            ("Repetitions", self.reps),
        ]

    def run(self, stream: RandomStream):
        """Consumes raw draws through the one yielding birthday n*reps."""
        vals = uniform_int_block(stream, 0, self.m - 1, self.n * self.reps)
        days = np.sort(vals.reshape(self.reps, self.n), axis=1)
        spacings = np.sort(np.diff(days, axis=1), axis=1)
        y = (spacings[:, 1:] == spacings[:, :-1]).sum(axis=1)
        ycap = int(self.lam + 10.0 * math.sqrt(self.lam) + 15.0)
        pmf = np.empty(ycap + 1)
        pmf[0] = math.exp(-self.lam)
        for k in range(1, ycap):
            pmf[k] = pmf[k - 1] * self.lam / k
        pmf[ycap] = max(0.0, 1.0 - pmf[:ycap].sum())
        counts = np.bincount(np.minimum(y, ycap), minlength=ycap + 1)
        return [chi_square_result(counts, pmf, self.reps)]


def rank_distribution(rows: int, cols: int) -> list:
    """Exact P(rank = r) for random GF(2) matrices, as Fractions."""
    full = min(rows, cols)
    out = []
    for r in range(full + 1):
        prob = Fraction(1, 2 ** (rows * cols - r * (rows + cols - r)))
        for i in range(r):
            prob *= 1 - Fraction(1, 2 ** (rows - i))
            prob *= 1 - Fraction(1, 2 ** (cols - i))
            prob /= 1 - Fraction(1, 2 ** (r - i))
        out.append(prob)
    return out


class BinaryRankTest(TestCase):
    """GF(2) rank census of random bit matrices.

    Categories are full rank, full-1, full-2, and everything below,
    matching where the analytic law still has mass.
    """

    test_name = "Binary-Rank-Test"

    def __init__(self, rows: int = 32, cols: int = 32,
                 n_matrices: int = 4000):
        if rows < 1 or cols < 1:
            raise ConfigurationError("matrix dimensions must be positive")
        if rows > 64 or cols > 64:
            raise ConfigurationError(
                "matrix dimensions beyond 64 do not fit packed words"
            )
        if n_matrices < 1:
            raise ConfigurationError("need at least 1 matrix")
        self.rows = rows
        self.cols = cols
        self.n_matrices = n_matrices

    def parameters(self):
        return [
            ("Rows", self.rows),
            ("Columns", self.cols),
            ("Number of Matrices", self.n_matrices),
        ]

    def _categories(self) -> tuple[list, np.ndarray]:
        """Ranks listed per category (descending) plus a pooled-low tail."""
        dist = rank_distribution(self.rows, self.cols)
        full = min(self.rows, self.cols)
        named = [full - i for i in range(min(3, full + 1))]
        probs = [float(dist[r]) for r in named]
        tail = 1.0 - float(sum(dist[r] for r in named))
        if len(named) <= full:
            probs.append(tail)
        return named, np.asarray(probs)

    def run(self, stream: RandomStream):
        """Consumes ceil(n_matrices*rows*cols / width) raw draws via bits."""
        reader = BitReader(stream)
        bits = reader.read(self.n_matrices * self.rows * self.cols)
        weights = np.left_shift(
            np.uint64(1), np.arange(self.cols - 1, -1, -1, dtype=np.uint64)
        )
        rows_packed = (bits.reshape(-1, self.cols).astype(np.uint64)
                       * weights).sum(axis=1, dtype=np.uint64)
        mats = np.ascontiguousarray(rows_packed.reshape(self.n_matrices,
                                                        self.rows))
        rank_counts = np.zeros(min(self.rows, self.cols) + 1, dtype=np.int64)
        rank_kernel(mats, self.rows, self.cols, rank_counts)
        named, probs = self._categories()
        counts = [int(rank_counts[r]) for r in named]
        if len(probs) > len(named):
            counts.append(int(self.n_matrices - sum(counts)))
        return [chi_square_result(np.asarray(counts), probs,
                                  self.n_matrices)]


class ParkingLotTest(TestCase):
    """Sequential parking on a square; success count vs its calibrated law.

    The reference constants (mean 3523, deviation 21.9) are calibrated
    for the default geometry of 12000 attempts on side 100.
    """

    test_name = "Parking-Lot-Test"

    _MEAN = 3523.0
    _SIGMA = 21.9

    def __init__(self, attempts: int = 12000, side: float = 100.0):
        if attempts < 1:
            raise ConfigurationError("need at least 1 attempt")
        if side <= 1.0:
            raise ConfigurationError("side must exceed the crash distance 1")
        self.attempts = attempts
        self.side = float(side)

    def parameters(self):
        return [("Attempts", self.attempts), ("Side Length", self.side)]

    def park(self, stream: RandomStream) -> int:
        """Park up to `attempts` cars; returns the success count."""
        u = uniform01_block(stream, 2 * self.attempts)
        xs = np.ascontiguousarray(u[0::2] * self.side)
        ys = np.ascontiguousarray(u[1::2] * self.side)
        ncells = int(math.ceil(self.side))
        grid = np.full((ncells + 2, ncells + 2), -1, dtype=np.int64)
        px = np.empty(self.attempts)
        py = np.empty(self.attempts)
        return int(parking_kernel(xs, ys, grid, px, py))

    def run(self, stream: RandomStream):
        """Consumes exactly 2 * attempts draws."""
        k = self.park(stream)
        z = (k - self._MEAN) / self._SIGMA
        result = gaussian_result(z)
        self._last_k = k
        return [result]

    def _diagnostics(self):
        if hasattr(self, "_last_k"):
            return [("Cars Parked", self._last_k)]
        return []


class MinimumDistanceTest(TestCase):
    """Minimum pairwise distance of random points, repeated; KS on the
    transformed statistic U = 1 - exp(-d^2 / 0.995)."""

    test_name = "Minimum-Distance-Test"

    _SCALE = 0.995

    def __init__(self, points: int = 8000, side: float = 10000.0,
                 reps: int = 100):
        if points < 2:
            raise ConfigurationError("need at least 2 points per repetition")
        if side <= 0.0:
            raise ConfigurationError("side must be positive")
        if reps < 1:
            raise ConfigurationError("need at least 1 repetition")
        self.points = points
        self.side = float(side)
        self.reps = reps

    def parameters(self):
        return [
            ("Number of Points", self.points),
            ("Side Length", self.side),
            ("Repetitions", self.reps),
        ]

    def minimum_squared_distance(self, stream: RandomStream) -> float:
        u = uniform01_block(stream, 2 * self.points)
        xs = np.ascontiguousarray(u[0::2] * self.side)
        ys = np.ascontiguousarray(u[1::2] * self.side)
        ncells = max(1, int(math.sqrt(self.points / 2.0)))
        cell = self.side / ncells
        head = np.full((ncells, ncells), -1, dtype=np.int64)
        nxt = np.empty(self.points, dtype=np.int64)
        best = float(mindist_grid_kernel(xs, ys, cell, ncells, head, nxt))
        if best >= cell * cell:
            # pairs farther than a cell may span non-adjacent cells
            best = float(mindist_brute_kernel(xs, ys))
        return best

    def run(self, stream: RandomStream):
        """Consumes exactly 2 * points * reps draws."""
        us = np.empty(self.reps)
        for i in range(self.reps):
            d2 = self.minimum_squared_distance(stream)
            us[i] = 1.0 - math.exp(-d2 / self._SCALE)
        return [ks_result(us, lambda x: x)]


class RandomWalkTest(TestCase):
    """Final quadrants of diagonal random walks vs uniform.

    Each step moves (+-1, +-1); two stream bits choose the signs, the
    first bit driving x, with bit 0 mapping to +1.  An odd step count
    keeps both final coordinates off the axes.
    """

    test_name = "Random-Walk-Test"

    def __init__(self, walkers: int = 10000, steps: int = 101):
        if walkers < 1:
            raise ConfigurationError("need at least 1 walker")
        if steps < 1 or steps % 2 == 0:
            raise ConfigurationError(
                f"step count {steps} must be odd so no walk ends on an axis"
            )
        self.walkers = walkers
        self.steps = steps

    def parameters(self):
        return [
            ("Number of Walkers", self.walkers),
            ("Number of Steps", self.steps),
        ]

    def run(self, stream: RandomStream):
        """Consumes ceil(2*walkers*steps / width) raw draws via bits."""
        reader = BitReader(stream)
        bits = reader.read(2 * self.walkers * self.steps)
        moves = 1 - 2 * bits.reshape(self.walkers, self.steps, 2).astype(
            np.int64
        )
        finals = moves.sum(axis=1)
        x = finals[:, 0]
        y = finals[:, 1]
        quadrant = 2 * (x < 0) + (y < 0)
        counts = np.bincount(quadrant, minlength=4)
        probs = np.full(4, 0.25)
        return [chi_square_result(counts, probs, self.walkers)]


class Monkey20BitTest(TestCase):
    """Missing 20-bit words among 2^21 overlapping windows of a bit stream.

    The window slides one bit per step; the deviation scale 428 is a
    calibration constant, the mean 2^20 * e^-2 is computed here.
    """

    test_name = "Monkey-20bit-Test"

    _WORD_BITS = 20
    _N_WORDS = 2**21
    _SIGMA = 428.0

    def __init__(self):
        pass

    def parameters(self):
        return []

    def run(self, stream: RandomStream):
        """Consumes ceil((2^21 + 19) / width) raw draws via bits."""
        reader = BitReader(stream)
        bits = reader.read(self._N_WORDS + self._WORD_BITS - 1)
        words = np.zeros(self._N_WORDS, dtype=np.int64)
        for j in range(self._WORD_BITS):
            words = (words << 1) | bits[j:j + self._N_WORDS]
        occupied = np.bincount(words, minlength=2**self._WORD_BITS)
        missing = int((occupied == 0).sum())
        mean = 2.0**self._WORD_BITS * math.exp(-2.0)
        z = (missing - mean) / self._SIGMA
        self._last_missing = missing
        return [gaussian_result(z)]

    def _diagnostics(self):
        if hasattr(self, "_last_missing"):
            return [("Missing Words", self._last_missing)]
        return []
