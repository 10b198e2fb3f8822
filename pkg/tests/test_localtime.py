import math
from fractions import Fraction

import numpy as np
import pytest

from hphc.exact import SizeBoundError
from hphc.localtime import (
    InvariantMeasure,
    accumulate_local_time,
    comparison_asymptotics,
    exponential_law_samples,
    float_return_probs,
    green_table,
    green_truncated,
    invariant_residual,
    lil_constant,
    lil_diagnostic,
    periodic_gamma,
    ratio_experiment,
)
from hphc.oracle import dp_return_prob
from hphc.profiles import LatticeSite, PJProfile
from hphc.walk import simulate_kernel


class TestLedger:
    def test_counts_every_time_including_zero(self):
        stream = simulate_kernel(5000, 3, PJProfile.hphc())
        led = accumulate_local_time(stream)
        assert led.total() == 5001
        assert led.steps_taken == 5000
        assert led[(0, 0)] >= 1

    def test_tracked_sites_match_full_ledger(self):
        stream = simulate_kernel(5000, 3, PJProfile.hphc())
        full = accumulate_local_time(stream)
        part = accumulate_local_time(stream, [(0, 0), (0, 1), (5, 5)])
        for s in [(0, 0), (0, 1), (5, 5)]:
            assert part[s] == full[s]

    def test_plain_iterable(self):
        led = accumulate_local_time([(0, 0), (1, 0), (0, 0)])
        assert led[(0, 0)] == 2 and led.steps_taken == 2


class TestGreenFunction:
    def test_small_values_exact(self):
        assert green_truncated(1).g == 1
        assert green_truncated(2).g == 1 + Fraction(5, 16)
        assert green_truncated(5).g == sum(dp_return_prob(k) for k in range(3))

    def test_float_agrees_with_exact(self):
        ex = green_table([40, 200], mode="exact")
        fl = green_table([40, 200], mode="log")
        for a, b in zip(ex, fl):
            assert float(a.g) == pytest.approx(b.g, rel=1e-12)

    def test_bound(self):
        with pytest.raises(SizeBoundError):
            green_table([1000], mode="exact")

    def test_growth_is_logarithmic(self):
        rows = green_table([300, 3000], mode="log")
        slope = (rows[1].g - rows[0].g) / math.log(10)
        # increments lag 2/pi by the same few percent as the scaled return probability
        assert 0.9 * 2 / math.pi < slope < 2 / math.pi


class TestInvariantMeasure:
    @pytest.mark.parametrize("prof", [PJProfile.hphc(), PJProfile.simple(), PJProfile.comb(),
                                      PJProfile.periodic([Fraction(1, 3), Fraction(1, 5), Fraction(1, 2)])])
    def test_inverse_p_is_invariant(self, prof):
        res = invariant_residual(prof, InvariantMeasure.from_profile(prof), 8)
        assert all(v == 0 for v in res.values())

    def test_constant_measure_fails_only_at_the_interface(self):
        res = invariant_residual(PJProfile.hphc(), InvariantMeasure.constant(1), 5)
        bad = {s.j for s, v in res.items() if v != 0}
        assert bad == {-1, 0}
        assert res[LatticeSite(0, 0)] == Fraction(1, 4)
        assert res[LatticeSite(0, -1)] == Fraction(-1, 4)

    def test_constant_is_invariant_for_simple(self):
        res = invariant_residual(PJProfile.simple(), InvariantMeasure.constant(7), 4)
        assert all(v == 0 for v in res.values())


class TestComparisonModels:
    def test_hphc_twice_simple(self):
        assert comparison_asymptotics("hphc", 50) == pytest.approx(2 * comparison_asymptotics("simple", 50))

    def test_periodic_gamma(self):
        prof = PJProfile.periodic([Fraction(1, 4), Fraction(1, 2)])
        assert periodic_gamma(prof) == Fraction(6, 4)

    def test_periodic_reduces_to_simple(self):
        # constant p = 1/4 gives gamma = 2 and the simple-walk constant
        v = comparison_asymptotics("periodic", 100, [Fraction(1, 4)])
        assert v == pytest.approx(comparison_asymptotics("simple", 100))
        assert lil_constant("periodic", [Fraction(1, 4)]) == pytest.approx(lil_constant("simple"))

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            comparison_asymptotics("hexagonal", 10)

    def test_float_dp_matches_exact(self):
        probs = float_return_probs(PJProfile.hphc(), 16)
        for N in range(0, 9):
            assert probs[2 * N] == pytest.approx(float(dp_return_prob(N)), rel=1e-12)

    def test_comb_decay_order(self):
        probs = float_return_probs(PJProfile.comb(), 400)
        Ns = np.array([100, 200])
        vals = probs[2 * Ns]
        slope = math.log(vals[1] / vals[0]) / math.log(2)
        assert slope == pytest.approx(-0.75, abs=0.05)


class TestMonteCarloStatistics:
    def test_ratio_is_reproducible(self):
        a = ratio_experiment((0, 1), (0, -1), 5000, 8, 21)
        b = ratio_experiment((0, 1), (0, -1), 5000, 8, 21, workers=3)
        assert np.array_equal(a.ratios, b.ratios)
        assert a.mean == b.mean and a.ci_lo == b.ci_lo

    def test_ratio_reports_zero_denominators(self):
        st = ratio_experiment((0, 0), (40, 40), 100, 5, 1)
        assert st.zero_denominator_count == 5
        assert st.degenerate and math.isnan(st.mean)

    def test_ratio_rejects_unreachable_site(self):
        with pytest.raises(ValueError):
            ratio_experiment((0, 0), (50, 0), 10, 2, 1)

    def test_exponential_samples(self):
        res = exponential_law_samples(1000, 20, 4)
        assert res.low_power
        assert res.samples.shape == (20,)
        assert 0 <= res.ks_distance <= 1

    def test_lil_running_max(self):
        d = lil_diagnostic([20, 200, 2000], 4, 9)
        assert d.scaled.shape == (4, 3)
        assert np.all(np.diff(d.running_max, axis=1) >= 0)
        assert d.target == pytest.approx(2 / math.pi)
        with pytest.raises(ValueError):
            lil_diagnostic([10], 2, 1)
