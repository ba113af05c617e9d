"""Second-order (meta) test machinery.

Binomial reference values were frozen from an independent exact
computation; a Fraction-based recount cross-checks the log-space
implementation over a whole small-n range.  Inner-test repetition is
driven by scripted inners so collection, abort accounting, and level
bookkeeping are all observable.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from rngts.battery.base import TestCase as BatteryCase
from rngts.battery.uniformity import ChisqrUniformityTest
from rngts.errors import ConfigurationError, TestAborted as AbortedError
from rngts.genkit.engines import Mt19937
from rngts.meta import (
    CountFailsTestCase,
    IterateTestCase,
    binomial_two_sided_pvalue,
    count_fails_test,
    iterate_test,
    ks_of_pvalues,
)
from rngts.stats import StatKind, StatisticResult


class PInner(BatteryCase):
    """Inner test emitting scripted p-values, one draw per run."""

    test_name = "Scripted-P-Test"

    def __init__(self, ps, abort_on=()):
        self.ps = list(ps)
        self.abort_on = set(abort_on)
        self.calls = 0

    def parameters(self):
        return [("Scripted", len(self.ps))]

    def run(self, stream):
        i = self.calls
        self.calls += 1
        stream.next()
        if i in self.abort_on:
            raise AbortedError("scripted abort")
        return [StatisticResult(
            kind=StatKind.GAUSSIAN,
            statistic_value=0.0,
            p_values={"p": self.ps[i % len(self.ps)]},
        )]


class TwoResultInner(BatteryCase):
    test_name = "Two-Result-Test"

    def parameters(self):
        return []

    def run(self, stream):
        stream.next()
        return [
            StatisticResult(kind=StatKind.KOLMOGOROV_SMIRNOV,
                            statistic_value=1.0,
                            p_values={"plus": 0.4, "minus": 0.6}),
            StatisticResult(kind=StatKind.GAUSSIAN,
                            statistic_value=0.0,
                            p_values={"p": 0.25}),
        ]


class TestBinomialPvalue:
    def test_frozen_references(self):
        # the mode observation covers everything: p = 1 up to summation noise
        assert binomial_two_sided_pvalue(5, 100, 0.05) == pytest.approx(
            1.0, abs=1e-12)
        assert binomial_two_sided_pvalue(2, 40, 0.05) == pytest.approx(
            1.0, abs=1e-12)
        # all successes at rate 0.05: only that outcome is as unlikely
        assert binomial_two_sided_pvalue(20, 20, 0.05) == pytest.approx(
            9.536743164062511e-27, rel=1e-9)
        assert binomial_two_sided_pvalue(0, 60, 0.05) == pytest.approx(
            0.07576390094183538, rel=1e-9)

    def test_exact_recount_small_n(self):
        n, rate = 10, 0.25
        pmf = [
            Fraction(math.comb(n, k)) * Fraction(1, 4) ** k
            * Fraction(3, 4) ** (n - k)
            for k in range(n + 1)
        ]
        for observed in range(n + 1):
            exact = sum(p for p in pmf if p <= pmf[observed])
            got = binomial_two_sided_pvalue(observed, n, rate)
            assert got == pytest.approx(min(1.0, float(exact)), rel=1e-10)

    def test_symmetric_rate(self):
        assert binomial_two_sided_pvalue(3, 6, 0.5) == 1.0
        a = binomial_two_sided_pvalue(1, 6, 0.5)
        b = binomial_two_sided_pvalue(5, 6, 0.5)
        assert a == pytest.approx(b, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            binomial_two_sided_pvalue(7, 6, 0.5)
        with pytest.raises(ConfigurationError):
            binomial_two_sided_pvalue(-1, 6, 0.5)
        with pytest.raises(ConfigurationError):
            binomial_two_sided_pvalue(3, 6, 0.0)
        with pytest.raises(ConfigurationError):
            binomial_two_sided_pvalue(3, 6, 1.0)


class TestKsOfPvalues:
    def test_degenerate_sample_rejected_hard(self):
        res = ks_of_pvalues([0.5] * 100)
        assert res.meta_kind == "KS"
        assert res.kind == StatKind.KOLMOGOROV_SMIRNOV
        # all mass at 0.5: sup gap is 0.5, scaled by sqrt(100)
        assert res.statistic_value == pytest.approx(5.0, abs=1e-12)
        assert res.p_values["p"] < 1e-20

    def test_uniform_sample_plausible(self):
        rng = np.random.default_rng(42)
        res = ks_of_pvalues(rng.random(500).tolist())
        assert 0.001 < res.p_values["p"] < 0.999


class TestIterate:
    def test_continues_stream_without_reseeding(self):
        reps, seed = 20, 310
        inner = PInner([0.5] * reps)
        out = iterate_test(inner, reps, Mt19937(seed))
        # each run consumed exactly one draw, in stream order
        assert inner.calls == reps
        assert out.repetitions == reps
        assert out.aborted_runs == 0 and out.aborted is None
        assert out.p_name == "p"
        assert out.inner_test_name == "Scripted-P-Test"
        assert out.per_run_p == tuple([0.5] * reps)
        assert out.meta_result.p_values["p"] == \
            ks_of_pvalues([0.5] * reps).p_values["p"]

    def test_matches_direct_ks(self):
        ps = [0.1, 0.7, 0.3, 0.9, 0.2, 0.5, 0.4, 0.8, 0.6, 0.15]
        out = iterate_test(PInner(ps), 10, Mt19937(1))
        assert out.per_run_p == tuple(ps)
        direct = ks_of_pvalues(ps)
        assert out.meta_result.statistic_value == direct.statistic_value
        assert out.meta_result.p_values == direct.p_values

    def test_default_p_name_takes_first(self):
        out = iterate_test(TwoResultInner(), 10, Mt19937(2))
        assert out.p_name == "plus"
        assert out.per_run_p == tuple([0.4] * 10)

    def test_named_p_searched_across_results(self):
        out = iterate_test(TwoResultInner(), 10, Mt19937(2), p_name="p")
        assert out.p_name == "p"
        assert out.per_run_p == tuple([0.25] * 10)

    def test_unknown_p_name_lists_available(self):
        with pytest.raises(ConfigurationError) as exc:
            iterate_test(TwoResultInner(), 10, Mt19937(2), p_name="zeta")
        msg = str(exc.value)
        assert "zeta" in msg and "minus" in msg and "plus" in msg

    def test_too_few_repetitions(self):
        with pytest.raises(ConfigurationError):
            iterate_test(PInner([0.5]), 9, Mt19937(1))

    def test_aborts_within_allowance_are_skipped(self):
        reps = 20  # allowance: int(0.1 * 20) = 2
        inner = PInner([0.5] * reps, abort_on={3, 7})
        out = iterate_test(inner, reps, Mt19937(3))
        assert out.aborted is None
        assert out.aborted_runs == 2
        assert out.repetitions == 18
        assert len(out.per_run_p) == 18

    def test_excess_aborts_fail_the_meta_run(self):
        inner = PInner([0.5] * 20, abort_on={1, 2, 3})
        out = iterate_test(inner, 20, Mt19937(3))
        assert out.meta_result is None
        assert out.aborted_runs == 3
        assert "3 of 20 inner runs aborted" in out.aborted
        assert "scripted abort" in out.aborted


class TestCountFails:
    def test_counts_per_level(self):
        # 3 runs at p = 0.01 fail 0.05; none fail 0.95
        ps = [0.01] * 3 + [0.5] * 17
        out = count_fails_test(PInner(ps), 20, [0.05, 0.95], Mt19937(4))
        assert out.fail_counts == {"0.05": 3, "0.95": 0}
        meta = out.meta_result
        assert meta.meta_kind == "COUNT_FAILS"
        assert meta.kind == StatKind.GAUSSIAN
        assert meta.statistic_value == 3.0  # count at the first level
        assert meta.p_values["0.05"] == binomial_two_sided_pvalue(3, 20, 0.05)
        assert meta.p_values["0.95"] == binomial_two_sided_pvalue(0, 20, 0.05)

    def test_upper_level_counts_large_ps(self):
        ps = [0.99] * 4 + [0.5] * 16
        out = count_fails_test(PInner(ps), 20, [0.95], Mt19937(5))
        assert out.fail_counts == {"0.95": 4}

    def test_level_validation(self):
        with pytest.raises(ConfigurationError):
            count_fails_test(PInner([0.5]), 10, [], Mt19937(1))
        with pytest.raises(ConfigurationError):
            count_fails_test(PInner([0.5]), 10, [1.2], Mt19937(1))

    def test_abort_overflow(self):
        inner = PInner([0.5] * 10, abort_on={0, 1})
        out = count_fails_test(inner, 10, [0.05], Mt19937(6))
        assert out.meta_result is None and out.fail_counts is None
        assert out.aborted_runs == 2


class TestAdapters:
    def test_iterate_case_wraps_inner(self):
        case = IterateTestCase(ChisqrUniformityTest(n=2000, k=64),
                               repetitions=12)
        out = case.execute(Mt19937(77), [0.05, 0.95])
        assert out.test_name == "Iterate-Chi-Square-Uniformity-Test"
        params = dict(out.parameters)
        assert params["Inner Test"] == "Chi-Square-Uniformity-Test"
        assert params["Repetitions"] == 12
        assert params["Number of Classes"] == 64
        assert out.results[0].meta_kind == "KS"
        assert 0.0 <= out.results[0].p_values["p"] <= 1.0
        assert ("Successful Repetitions", 12) in out.diagnostics
        assert not out.aborted

    def test_count_fails_case_wraps_inner(self):
        case = CountFailsTestCase(ChisqrUniformityTest(n=2000, k=64),
                                  repetitions=12, levels=[0.05, 0.95])
        out = case.execute(Mt19937(78), [0.05, 0.95])
        assert out.test_name == "Count-Fails-Chi-Square-Uniformity-Test"
        params = dict(out.parameters)
        assert params["Counted Levels"] == "0.05 0.95"
        assert out.results[0].meta_kind == "COUNT_FAILS"
        diag = dict(out.diagnostics)
        assert "Failures at 0.05" in diag and "Failures at 0.95" in diag

    def test_adapter_propagates_meta_abort(self):
        inner = PInner([0.5] * 20, abort_on={0, 1, 2})
        case = IterateTestCase(inner, repetitions=20)
        out = case.execute(Mt19937(9), [0.05])
        assert out.aborted and "inner runs aborted" in out.aborted
        assert out.results == ()

    def test_adapter_repetition_floor(self):
        with pytest.raises(ConfigurationError):
            IterateTestCase(PInner([0.5]), repetitions=5)
        with pytest.raises(ConfigurationError):
            CountFailsTestCase(PInner([0.5]), repetitions=5, levels=[0.05])
