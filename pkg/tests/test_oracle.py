import math

import numpy as np
import pytest

from banditsurvey.oracle import (
    GAP_GRID,
    check_vector_inequality,
    exact_rule_stats,
    finite_stop_bound_check,
)


def _dict_rule_stats(p, theta, horizon, smooth):
    """Independent reference enumeration over (round, vote difference)."""
    q = 1 - p
    states = {0: 1.0}
    err = stop_mass = tsum = 0.0
    for t in range(1, horizon + 1):
        nxt = {}
        for d, m in states.items():
            nxt[d + 1] = nxt.get(d + 1, 0.0) + p * m
            nxt[d - 1] = nxt.get(d - 1, 0.0) + q * m
        thr = theta * math.sqrt(t)
        base = math.floor(thr)
        frac = thr - base
        states = {}
        for d, m in nxt.items():
            diff = abs(d)
            if smooth and frac > 0:
                s = 1.0 if diff > base + 1 else ((1 - frac) if diff > base else 0.0)
            else:
                s = 1.0 if diff > thr else 0.0
            if s > 0:
                stop_mass += m * s
                tsum += t * m * s
                if d < 0:
                    err += m * s
            if s < 1:
                states[d] = m * (1 - s)
    return tsum / stop_mass if stop_mass else math.nan, err, stop_mass


class TestExactRuleStats:
    def test_certain_crowd_stops_at_five(self):
        s = exact_rule_stats(1.0, 2.0, 100)
        assert s.expected_stop_time == 5.0  # first t with t > 2*sqrt(t)
        assert s.error_rate == 0.0
        assert s.stop_mass == 1.0

    def test_gap_zero_conditional_error_is_half(self):
        s = exact_rule_stats(0.5, 2.0, 20_000)
        assert s.error_rate / s.stop_mass == pytest.approx(0.5, abs=1e-12)

    def test_pinned_fixture_values(self):
        # frozen from this DP; guards against regressions
        s = exact_rule_stats(0.65, 2.0, 100_000)
        assert s.expected_stop_time == pytest.approx(38.515899571836, rel=1e-9)
        assert s.error_rate == pytest.approx(9.146018058857e-3, rel=1e-9)
        assert s.stop_mass == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize(
        "p,theta,smooth", [(0.8, 1.5, True), (0.65, 2.0, False), (0.6, 0.8, True)]
    )
    def test_matches_independent_enumeration(self, p, theta, smooth):
        horizon = 400
        want = _dict_rule_stats(p, theta, horizon, smooth)
        got = exact_rule_stats(p, theta, horizon, smooth=smooth)
        assert got.expected_stop_time == pytest.approx(want[0], rel=1e-12)
        assert got.error_rate == pytest.approx(want[1], rel=1e-12, abs=1e-15)
        assert got.stop_mass == pytest.approx(want[2], rel=1e-12)

    def test_conservation(self):
        s = exact_rule_stats(0.7, 1.5, 3000)
        assert 0.0 <= s.stop_mass <= 1.0 + 1e-12
        assert 0.0 <= s.error_rate <= s.stop_mass

    def test_monotone_in_p(self):
        errs, taus = [], []
        for p in np.arange(0.55, 0.96, 0.05):
            s = exact_rule_stats(float(p), 2.0, 20_000)
            errs.append(s.error_rate)
            taus.append(s.expected_stop_time)
        assert all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))
        assert all(a >= b - 1e-9 for a, b in zip(taus, taus[1:]))

    def test_adaptive_quality_trend(self):
        # the adaptive schedule trades stop time for error through delta:
        # shrinking delta lowers the error and raises the expected stop time
        errs, taus = [], []
        for delta in (0.4, 0.2, 0.1, 0.05):
            s = exact_rule_stats(0.65, 1.0, 30_000, smooth=True, adaptive_delta=delta)
            errs.append(s.error_rate)
            taus.append(s.expected_stop_time)
        assert all(a >= b for a, b in zip(errs, errs[1:]))
        assert all(a <= b for a, b in zip(taus, taus[1:]))

    def test_smooth_below_one_is_meaningful(self):
        # the deterministic rule with quality < 1 stops at round one; the
        # smooth variant keeps a positive chance of continuing
        det = exact_rule_stats(0.7, 0.5, 200)
        sm = exact_rule_stats(0.7, 0.5, 200, smooth=True)
        assert det.expected_stop_time == 1.0
        assert sm.expected_stop_time > 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            exact_rule_stats(0.4, 1.0)
        with pytest.raises(ValueError):
            exact_rule_stats(0.6, -1.0)
        with pytest.raises(ValueError):
            exact_rule_stats(0.6, 1.0, adaptive_delta=1.5)


class TestVectorInequality:
    def test_equality_case(self):
        assert check_vector_inequality((1, 1), (1, 1), (0.3, 0.7))

    def test_point_mass(self):
        assert check_vector_inequality((2, 5), (3, 0.5), (0, 1))

    def test_random_batch(self):
        rng = np.random.default_rng(13)
        for _ in range(2000):
            k = int(rng.integers(2, 6))
            alpha = rng.uniform(0.05, 10, k)
            beta = rng.uniform(0.05, 10, k)
            x = rng.dirichlet(np.ones(k))
            assert check_vector_inequality(alpha, beta, x)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            check_vector_inequality((1, -1), (1, 1), (0.5, 0.5))
        with pytest.raises(ValueError):
            check_vector_inequality((1, 1), (1, 1), (0.9, 0.9))


class TestFiniteStopBound:
    def test_large_quality_small_masses(self):
        rep = finite_stop_bound_check(4.0, 2000)
        assert rep.stop_mass_gap_zero < 0.01
        assert rep.holds

    def test_grid_definition(self):
        assert GAP_GRID[0] == 0.01 and GAP_GRID[-1] == 0.99 and len(GAP_GRID) == 99
