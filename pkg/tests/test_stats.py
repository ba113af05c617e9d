"""Statistical backend checks against independently computed constants.

Reference values were computed with mpmath at 30 significant digits
(erf, regularized incomplete gamma, Kolmogorov distribution) and frozen
here; property tests cover symmetry, monotonicity, and input policing.
"""

import math

import pytest
from hypothesis import given, strategies as st

from rngts.errors import ConfigurationError
from rngts.stats import (
    ChiSquareInput,
    KsInput,
    KsSide,
    KsStatistic,
    KsStatisticResult,
    MetaStatisticResult,
    StatKind,
    StatisticResult,
    chi_square_pvalue,
    chi_square_statistic,
    erf,
    gaussian_pvalue,
    ks_pvalue,
    ks_statistic,
    ks_two_sided_pvalue,
    regularized_gamma_q,
)

finite = st.floats(allow_nan=False, allow_infinity=False,
                   min_value=-30.0, max_value=30.0)


class TestErf:
    # mpmath: erf(x) at 30 digits
    @pytest.mark.parametrize("x, expected", [
        (1.0, 0.84270079294971486934),
        (2.0, 0.99532226501895273416),
        (0.5, 0.52049987781304653768),
        (3.7, 0.99999983284894209085),
        (5.5, 0.99999999999999264215),
    ])
    def test_reference_values(self, x, expected):
        assert erf(x) == pytest.approx(expected, abs=1e-14)

    def test_zero(self):
        assert erf(0.0) == 0.0

    def test_large_saturates(self):
        assert erf(10.0) == pytest.approx(1.0, abs=1e-15)
        assert erf(-10.0) == pytest.approx(-1.0, abs=1e-15)

    @given(finite)
    def test_odd_symmetry(self, x):
        assert erf(-x) == pytest.approx(-erf(x), abs=1e-15)

    @given(finite, finite)
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert erf(lo) <= erf(hi) + 1e-15


class TestRegularizedGammaQ:
    # mpmath: gammainc(a, x, inf, regularized=True)
    @pytest.mark.parametrize("a, x, expected", [
        (0.3, 7.1, 0.000064271313101467325026),
        (127.5, 121.165, 0.70573168495254333164),
    ])
    def test_reference_values(self, a, x, expected):
        assert regularized_gamma_q(a, x) == pytest.approx(expected, rel=1e-12)

    def test_at_zero(self):
        assert regularized_gamma_q(2.5, 0.0) == 1.0

    def test_integer_shape_closed_form(self):
        # a = 1: Q(1, x) = exp(-x)
        for x in (0.1, 1.0, 3.0, 12.0):
            assert regularized_gamma_q(1.0, x) == pytest.approx(
                math.exp(-x), rel=1e-12)

    @given(st.floats(min_value=0.1, max_value=200.0),
           st.floats(min_value=0.0, max_value=500.0))
    def test_in_unit_interval(self, a, x):
        q = regularized_gamma_q(a, x)
        assert 0.0 <= q <= 1.0


class TestChiSquarePvalue:
    def test_dof_two_closed_form(self):
        # dof = 2 reduces to exp(-x / 2)
        for x in (0.1, 1.0, 5.0, 20.0):
            assert chi_square_pvalue(x, 2) == pytest.approx(
                math.exp(-x / 2.0), abs=1e-10)

    # mpmath: gammainc(dof/2, chi2/2, inf, regularized=True)
    @pytest.mark.parametrize("chi2, dof, expected, rel", [
        (242.33, 255, 0.70573168495254333164, 1e-12),
        (299.592, 255, 0.028777844797996083682, 1e-12),
        (12.0, 3, 0.007383160505359769743, 1e-12),
        (0.5, 5, 0.99212329323262959221, 1e-12),
        (1000.0, 255, 9.3784773436583980501e-89, 1e-9),
        (8.0, 1, 0.0046777349810472658379, 1e-12),
    ])
    def test_reference_values(self, chi2, dof, expected, rel):
        assert chi_square_pvalue(chi2, dof) == pytest.approx(expected, rel=rel)

    def test_rejects_bad_input(self):
        with pytest.raises(ConfigurationError):
            chi_square_pvalue(-1.0, 5)
        with pytest.raises(ConfigurationError):
            chi_square_pvalue(1.0, 0)
        with pytest.raises(ConfigurationError):
            chi_square_pvalue(float("nan"), 5)

    @given(st.floats(min_value=0.0, max_value=2000.0),
           st.floats(min_value=0.0, max_value=2000.0),
           st.integers(min_value=1, max_value=400))
    def test_monotone_in_chi2(self, a, b, dof):
        lo, hi = sorted((a, b))
        assert chi_square_pvalue(lo, dof) >= chi_square_pvalue(hi, dof) - 1e-12


class TestChiSquareStatistic:
    def test_hand_computed(self):
        # counts (30, 70) vs fair halves of 100: (20^2 + 20^2) / 50 = 16
        inp = ChiSquareInput(observed_counts=(30, 70),
                             cell_probabilities=(0.5, 0.5),
                             sample_size=100)
        chi2, dof = chi_square_statistic(inp)
        assert chi2 == pytest.approx(16.0)
        assert dof == 1

    def test_perfect_fit_is_zero(self):
        inp = ChiSquareInput(observed_counts=(25, 25, 25, 25),
                             cell_probabilities=(0.25,) * 4,
                             sample_size=100)
        chi2, dof = chi_square_statistic(inp)
        assert chi2 == 0.0
        assert dof == 3

    def test_input_validation(self):
        with pytest.raises(ConfigurationError):
            ChiSquareInput((10,), (1.0,), 10)  # one cell
        with pytest.raises(ConfigurationError):
            ChiSquareInput((5, 6), (0.5, 0.5), 10)  # counts mismatch
        with pytest.raises(ConfigurationError):
            ChiSquareInput((5, 5), (0.5, 0.6), 10)  # probs exceed 1
        with pytest.raises(ConfigurationError):
            ChiSquareInput((-1, 11), (0.5, 0.5), 10)  # negative count
        with pytest.raises(ConfigurationError):
            ChiSquareInput((5, 5), (1.0, -0.0), 10)  # zero probability


class TestGaussianPvalue:
    def test_center(self):
        assert gaussian_pvalue(0.0) == pytest.approx(0.5, abs=1e-12)

    # mpmath: erfc(x / sqrt(2)) / 2
    def test_reference_values(self):
        assert gaussian_pvalue(1.0) == pytest.approx(
            0.15865525393145705141, abs=1e-14)
        assert gaussian_pvalue(-2.5) == pytest.approx(
            0.99379033467422386483, abs=1e-14)

    def test_rejects_nan(self):
        with pytest.raises(ConfigurationError):
            gaussian_pvalue(float("nan"))

    @given(finite)
    def test_complement(self, x):
        assert gaussian_pvalue(x) + gaussian_pvalue(-x) == pytest.approx(
            1.0, abs=1e-12)

    @given(finite, finite)
    def test_monotone_decreasing(self, a, b):
        lo, hi = sorted((a, b))
        assert gaussian_pvalue(lo) >= gaussian_pvalue(hi) - 1e-15


class TestKs:
    def test_two_sided_reference_values(self):
        # mpmath: 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 t^2)
        assert ks_two_sided_pvalue(1.0) == pytest.approx(
            0.2699996716773545212, abs=1e-12)
        assert ks_two_sided_pvalue(0.5) == pytest.approx(
            0.96394524366487509439, abs=1e-12)

    def test_at_one_sided_median(self):
        # at t = sqrt(ln 2 / 2) the leading exp(-2 t^2) term is exactly
        # 1/2; the full alternating series gives 0.87887... (mpmath)
        t = 0.58870501125773734551
        assert ks_two_sided_pvalue(t) == pytest.approx(
            0.87887579199741949754, abs=1e-12)
        big = KsStatistic(k_plus=t, k_minus=t, n=10**12)
        assert ks_pvalue(big, KsSide.PLUS) == pytest.approx(0.5, abs=1e-5)

    def test_two_sided_edges(self):
        assert ks_two_sided_pvalue(0.0) == 1.0
        assert ks_two_sided_pvalue(-1.0) == 1.0
        assert ks_two_sided_pvalue(10.0) == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(min_value=0.0, max_value=5.0),
           st.floats(min_value=0.0, max_value=5.0))
    def test_two_sided_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert ks_two_sided_pvalue(lo) >= ks_two_sided_pvalue(hi) - 1e-12

    def test_one_sided_formula(self):
        # p = exp(-2 t^2) (1 - 2t / (3 sqrt(n))), clamped to [0, 1]
        stat = KsStatistic(k_plus=1.2, k_minus=0.3, n=100)
        expected_plus = math.exp(-2 * 1.2**2) * (1 - 2 * 1.2 / 30.0)
        expected_minus = math.exp(-2 * 0.3**2) * (1 - 2 * 0.3 / 30.0)
        assert ks_pvalue(stat, KsSide.PLUS) == pytest.approx(expected_plus)
        assert ks_pvalue(stat, KsSide.MINUS) == pytest.approx(expected_minus)
        assert ks_pvalue(stat, KsSide.TWO_SIDED) == pytest.approx(
            ks_two_sided_pvalue(1.2))

    def test_statistic_known_sample(self):
        # n = 4 uniform sample; empirical steps at 1/4 ... 4/4
        inp = KsInput(samples=(0.1, 0.2, 0.3, 0.9),
                      theoretical_cdf=lambda x: x)
        stat = ks_statistic(inp)
        # K+ = sqrt(4) max(i/n - F) = 2 * (3/4 - 0.3) = 0.9
        assert stat.k_plus == pytest.approx(0.9)
        # K- = sqrt(4) max(F - (i-1)/n) = 2 * (0.9 - 3/4) = 0.3
        assert stat.k_minus == pytest.approx(0.3)
        assert stat.n == 4

    def test_statistic_unsorted_input(self):
        a = ks_statistic(KsInput((0.9, 0.1, 0.3, 0.2), lambda x: x))
        b = ks_statistic(KsInput((0.1, 0.2, 0.3, 0.9), lambda x: x))
        assert (a.k_plus, a.k_minus) == (b.k_plus, b.k_minus)

    def test_statistic_rejects_decreasing_cdf(self):
        with pytest.raises(ConfigurationError):
            ks_statistic(KsInput((0.1, 0.9), lambda x: -x))

    def test_statistic_rejects_empty(self):
        with pytest.raises(ConfigurationError):
            KsInput((), lambda x: x)

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0),
                    min_size=1, max_size=60))
    def test_statistic_bounds(self, xs):
        stat = ks_statistic(KsInput(xs, lambda x: x))
        root = math.sqrt(len(xs))
        assert 0.0 <= stat.k_plus <= root
        assert 0.0 <= stat.k_minus <= root


class TestResultTypes:
    def test_dof_only_for_chi_square(self):
        StatisticResult(StatKind.CHI_SQUARE, 1.0, {"p": 0.5}, dof=3)
        with pytest.raises(ConfigurationError):
            StatisticResult(StatKind.CHI_SQUARE, 1.0, {"p": 0.5})
        with pytest.raises(ConfigurationError):
            StatisticResult(StatKind.GAUSSIAN, 1.0, {"p": 0.5}, dof=3)

    def test_p_value_range_enforced(self):
        with pytest.raises(ConfigurationError):
            StatisticResult(StatKind.GAUSSIAN, 1.0, {"p": 1.5})
        with pytest.raises(ConfigurationError):
            StatisticResult(StatKind.GAUSSIAN, 1.0, {})

    def test_ks_result_carries_sides(self):
        r = KsStatisticResult(StatKind.KOLMOGOROV_SMIRNOV, 0.9,
                              {"plus": 0.2, "minus": 0.8},
                              k_plus=0.9, k_minus=0.3)
        assert r.k_plus == 0.9 and r.k_minus == 0.3

    def test_meta_result_kind_string(self):
        r = MetaStatisticResult(StatKind.KOLMOGOROV_SMIRNOV, 0.5,
                                {"p": 0.4})
        assert r.meta_kind == "KS"

    def test_ks_statistic_bounds_enforced(self):
        with pytest.raises(ConfigurationError):
            KsStatistic(k_plus=3.0, k_minus=0.0, n=4)  # above sqrt(4)
        with pytest.raises(ConfigurationError):
            KsStatistic(k_plus=0.5, k_minus=0.5, n=0)
