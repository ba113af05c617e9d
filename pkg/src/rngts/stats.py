"""Statistical backends: chi-square, Kolmogorov-Smirnov, Gaussian.

All p-values follow the upper-tail convention: small p means the statistic
landed improbably high under the null hypothesis of a perfect random source.
The special functions (erf, regularized incomplete gamma) are implemented
here directly so the suite carries its own numerics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError

_SQRT_PI = 1.7724538509055160273
_SQRT_2 = math.sqrt(2.0)
_MAX_ITER = 500


class StatKind(enum.Enum):
    CHI_SQUARE = "ChiSquare"
    KOLMOGOROV_SMIRNOV = "KolmogorovSmirnov"
    GAUSSIAN = "Gaussian"


class KsSide(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"
    TWO_SIDED = "TwoSided"


# ---------------------------------------------------------------------------
# special functions


def erf(z: float) -> float:
    """Error function, absolute error below 1e-12 for |z| <= 6.

    Positive-term series for |z| < 2, continued fraction for the
    complement beyond.  Odd symmetry is exact by construction.
    """
    if not math.isfinite(z):
        raise ConfigurationError("erf requires a finite argument")
    if z == 0.0:
        return 0.0
    sign = -1.0 if z < 0.0 else 1.0
    x = abs(z)
    if x < 2.0:
        # erf(x) = 2x e^{-x^2}/sqrt(pi) * sum (2x^2)^n / (1*3*...*(2n+1))
        twoxx = 2.0 * x * x
        term = 1.0
        total = 1.0
        n = 0
        while term > total * 1e-17:
            n += 1
            term *= twoxx / (2.0 * n + 1.0)
            total += term
            if n > _MAX_ITER:
                raise RuntimeError("erf series did not converge")
        return sign * 2.0 * x * math.exp(-x * x) / _SQRT_PI * total
    return sign * (1.0 - _erfc_cf(x))


def _erfc_cf(x: float) -> float:
    # erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
    # evaluated by the modified Lentz method
    tiny = 1e-300
    f = x
    c = f
    d = 0.0
    for k in range(1, _MAX_ITER + 1):
        a = k / 2.0
        d = x + a * d
        if d == 0.0:
            d = tiny
        c = x + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-17:
            return math.exp(-x * x) / _SQRT_PI / f
    raise RuntimeError("erfc continued fraction did not converge")


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a).

    Series expansion for x < a + 1, continued fraction otherwise.
    Absolute error below 1e-10 across the battery's operating range.
    """
    if not (math.isfinite(a) and math.isfinite(x)):
        raise ConfigurationError("regularized_gamma_q requires finite arguments")
    if a <= 0.0:
        raise ConfigurationError("regularized_gamma_q requires a > 0")
    if x < 0.0:
        raise ConfigurationError("regularized_gamma_q requires x >= 0")
    if x == 0.0:
        return 1.0
    log_prefix = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # series for the lower function P; Q = 1 - P
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(_MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                p = total * math.exp(log_prefix)
                return min(1.0, max(0.0, 1.0 - p))
        raise RuntimeError("incomplete gamma series did not converge")
    # Lentz continued fraction for Q directly
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if d == 0.0:
            d = tiny
        c = b + an / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            q = h * math.exp(log_prefix)
            return min(1.0, max(0.0, q))
    raise RuntimeError("incomplete gamma continued fraction did not converge")


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class ChiSquareInput:
    observed_counts: Sequence[int]
    cell_probabilities: Sequence[float]
    sample_size: int

    def __post_init__(self):
        k = len(self.observed_counts)
        if k != len(self.cell_probabilities) or k < 2:
            raise ConfigurationError(
                "chi-square needs matching count/probability cells, at least 2"
            )
        if any(c < 0 for c in self.observed_counts):
            raise ConfigurationError("observed counts must be non-negative")
        if self.sample_size <= 0:
            raise ConfigurationError("sample size must be positive")
        if sum(self.observed_counts) != self.sample_size:
            raise ConfigurationError("observed counts must sum to the sample size")
        if any(not (0.0 < p <= 1.0) for p in self.cell_probabilities):
            raise ConfigurationError("cell probabilities must lie in (0, 1]")
        if abs(math.fsum(self.cell_probabilities) - 1.0) > 1e-9:
            raise ConfigurationError("cell probabilities must sum to 1 within 1e-9")


@dataclass(frozen=True)
class KsInput:
    samples: Sequence[float]
    theoretical_cdf: Callable[[float], float]

    def __post_init__(self):
        if len(self.samples) == 0:
            raise ConfigurationError("KS needs a non-empty sample")


@dataclass(frozen=True)
class KsStatistic:
    k_plus: float
    k_minus: float
    n: int

    def __post_init__(self):
        if self.n <= 0:
            raise ConfigurationError("KS statistic needs a positive sample size")
        root = math.sqrt(self.n)
        if not (0.0 <= self.k_plus <= root and 0.0 <= self.k_minus <= root):
            raise ConfigurationError("KS statistics must lie in [0, sqrt(n)]")


@dataclass(frozen=True)
class StatisticResult:
    kind: StatKind
    statistic_value: float
    p_values: dict[str, float]
    dof: Optional[int] = None

    def __post_init__(self):
        if not self.p_values:
            raise ConfigurationError("a statistic result needs at least one p-value")
        for name, p in self.p_values.items():
            if not (0.0 <= p <= 1.0):
                raise ConfigurationError(f"p-value {name!r} outside [0, 1]: {p}")
        if (self.dof is not None) != (self.kind is StatKind.CHI_SQUARE):
            raise ConfigurationError("dof is present exactly for chi-square results")


@dataclass(frozen=True)
class KsStatisticResult(StatisticResult):
    """KS result carrying both one-sided statistics for reporting."""

    k_plus: float = 0.0
    k_minus: float = 0.0


@dataclass(frozen=True)
class MetaStatisticResult(StatisticResult):
    """Result of a second-order test over repeated inner-test p-values.

    meta_kind names the aggregation ("KS" for a uniformity fit of the
    p sample, "COUNT_FAILS" for per-level failure counting).
    """

    meta_kind: str = "KS"


# ---------------------------------------------------------------------------
# operations


def chi_square_statistic(inp: ChiSquareInput) -> tuple[float, int]:
    observed = np.asarray(inp.observed_counts, dtype=np.float64)
    expected = np.asarray(inp.cell_probabilities, dtype=np.float64) * inp.sample_size
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    return chi2, len(inp.observed_counts) - 1


def chi_square_pvalue(chi2: float, dof: int) -> float:
    if not math.isfinite(chi2):
        raise ConfigurationError("chi2 must be finite")
    if chi2 < 0.0:
        raise ConfigurationError("chi2 must be non-negative")
    if dof <= 0:
        raise ConfigurationError("dof must be positive")
    return regularized_gamma_q(dof / 2.0, chi2 / 2.0)


def ks_statistic(inp: KsInput) -> KsStatistic:
    xs = np.sort(np.asarray(inp.samples, dtype=np.float64))
    n = xs.size
    f = inp.theoretical_cdf
    try:
        fx = np.asarray(f(xs), dtype=np.float64)
        if fx.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        fx = np.array([f(x) for x in xs], dtype=np.float64)
    if np.any(np.diff(fx) < 0.0):
        raise ConfigurationError("theoretical CDF is not non-decreasing on the sample")
    i = np.arange(1, n + 1, dtype=np.float64)
    root = math.sqrt(n)
    k_plus = root * max(0.0, float((i / n - fx).max()))
    k_minus = root * max(0.0, float((fx - (i - 1.0) / n).max()))
    return KsStatistic(k_plus=k_plus, k_minus=k_minus, n=n)


def _ks_one_sided_pvalue(t: float, n: int) -> float:
    p = math.exp(-2.0 * t * t) * (1.0 - 2.0 * t / (3.0 * math.sqrt(n)))
    return min(1.0, max(0.0, p))


def ks_two_sided_pvalue(t: float) -> float:
    if t <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 10000):
        term = math.exp(-2.0 * j * j * t * t)
        total += sign * term
        sign = -sign
        if term < 1e-12:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_pvalue(stat: KsStatistic, side: KsSide) -> float:
    if side is KsSide.PLUS:
        return _ks_one_sided_pvalue(stat.k_plus, stat.n)
    if side is KsSide.MINUS:
        return _ks_one_sided_pvalue(stat.k_minus, stat.n)
    return ks_two_sided_pvalue(max(stat.k_plus, stat.k_minus))


def gaussian_pvalue(x: float) -> float:
    if not math.isfinite(x):
        raise ConfigurationError("gaussian_pvalue requires a finite argument")
    return 0.5 - 0.5 * erf(x / _SQRT_2)
