import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hphc.exact import SizeBoundError
from hphc.oracle import dp_return_prob
from hphc.returnprob import (
    LogProb,
    asymptotic_return_prob,
    convergence_summary,
    exact_return_prob,
    log_return_prob,
    return_prob_sequence,
    scaled_convergence_table,
)


class TestExactReturnProbability:
    def test_anchor(self):
        assert exact_return_prob(1) == Fraction(5, 16)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            exact_return_prob(0)

    @pytest.mark.parametrize("N", range(1, 9))
    def test_matches_dp_oracle(self, N):
        assert exact_return_prob(N) == dp_return_prob(N)

    def test_size_bound(self):
        with pytest.raises(SizeBoundError):
            exact_return_prob(100_000)
        with pytest.raises(SizeBoundError):
            exact_return_prob(20, bound=10)
        assert exact_return_prob(20, bound=20) > 0

    def test_decreasing(self):
        vals = [exact_return_prob(N) for N in range(1, 40)]
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestLogDomain:
    @settings(deadline=None, max_examples=15)
    @given(st.integers(1, 150))
    def test_agrees_with_exact(self, N):
        exact = exact_return_prob(N)
        lp = log_return_prob(N)
        assert isinstance(lp, LogProb)
        assert abs(lp.value / float(exact) - 1) < 1e-12

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            log_return_prob(0)

    def test_size_bound(self):
        with pytest.raises(SizeBoundError):
            log_return_prob(100_001)

    def test_sequence_matches_exact(self):
        seq = return_prob_sequence(60)
        assert seq[0] == 1.0
        for N in (1, 2, 17, 60):
            assert seq[N] == pytest.approx(float(exact_return_prob(N)), rel=1e-13)

    def test_asymptotic(self):
        assert asymptotic_return_prob(10) == pytest.approx(2 / (math.pi * 10))


class TestConvergenceTable:
    def test_auto_mode_fills_exact_for_small_N(self):
        recs = scaled_convergence_table([1, 10, 100], mode="auto")
        assert recs[0].exact == Fraction(5, 16)
        assert recs[2].exact is None
        assert recs[0].scaled == pytest.approx(math.pi * 5 / 32)

    def test_scaled_approaches_one(self):
        recs = scaled_convergence_table([10, 100, 1000], mode="log")
        s = convergence_summary(recs)
        assert s["decreasing"]
        assert s["rate"] < 0

    @pytest.mark.parametrize("bad", [[], [10, 10], [100, 10]])
    def test_grid_validation(self, bad):
        with pytest.raises(ValueError):
            scaled_convergence_table(bad)

    def test_exact_mode_respects_bound(self):
        with pytest.raises(SizeBoundError):
            scaled_convergence_table([600], mode="exact")

    def test_log_and_exact_scaled_columns_agree(self):
        a = scaled_convergence_table([5, 50], mode="exact")
        b = scaled_convergence_table([5, 50], mode="log")
        assert np.allclose([r.scaled for r in a], [r.scaled for r in b], rtol=1e-12)
