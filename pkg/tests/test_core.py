import numpy as np
import pytest

from banditsurvey.core import (
    NoSamplesError,
    ProblemInstance,
    ResponseDistribution,
    TallySheet,
    gap,
    induced_gap,
    mix,
)
from helpers import random_instance, random_mu


class TestGap:
    def test_tied_top_two_is_zero(self):
        assert gap(ResponseDistribution((0.5, 0.5))) == 0.0

    def test_three_option_example(self):
        assert gap(ResponseDistribution((0.45, 0.40, 0.15))) == pytest.approx(0.05, abs=1e-12)

    def test_two_option_difference(self):
        assert gap(ResponseDistribution((0.8, 0.2))) == pytest.approx(0.6, abs=1e-12)

    def test_range_and_permutation_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            n = rng.integers(2, 7)
            probs = rng.dirichlet(np.ones(n))
            g = gap(probs)
            assert 0.0 <= g <= 1.0
            perm = rng.permutation(n)
            assert gap(probs[perm]) == pytest.approx(g, abs=1e-12)


class TestResponseDistribution:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            ResponseDistribution((0.6, 0.6))

    def test_rejects_single_option(self):
        with pytest.raises(ValueError):
            ResponseDistribution((1.0,))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ResponseDistribution((1.2, -0.2))

    def test_probs_read_only(self):
        d = ResponseDistribution((0.7, 0.3))
        with pytest.raises(ValueError):
            d.probs[0] = 0.5


class TestProblemInstance:
    def test_rejects_non_maximal_correct_option(self):
        with pytest.raises(ValueError):
            ProblemInstance([ResponseDistribution((0.3, 0.7))], [1.0], correct_option=0)

    def test_allows_tied_maximum(self):
        inst = ProblemInstance([ResponseDistribution((0.5, 0.5))], [1.0], 0)
        assert inst.gaps[0] == 0.0

    def test_rejects_nonpositive_cost(self):
        with pytest.raises(ValueError):
            ProblemInstance([ResponseDistribution((0.6, 0.4))], [0.0], 0)

    def test_rejects_mismatched_option_counts(self):
        with pytest.raises(ValueError):
            ProblemInstance(
                [ResponseDistribution((0.6, 0.4)), ResponseDistribution((0.5, 0.3, 0.2))],
                [1.0, 1.0],
                0,
            )


class TestMix:
    def test_point_mass_returns_that_crowd(self):
        rng = np.random.default_rng(2)
        inst = random_instance(rng, 3, 4)
        got = mix(inst, (0.0, 1.0, 0.0))
        assert np.allclose(got.probs, inst.crowds[1].probs, atol=1e-12)

    def test_three_option_uniform_example(self):
        inst = ProblemInstance(
            [ResponseDistribution((0.45, 0.40, 0.15)), ResponseDistribution((0.45, 0.15, 0.40))],
            [1.0, 1.0],
            0,
        )
        got = mix(inst, (0.5, 0.5))
        assert np.allclose(got.probs, (0.45, 0.275, 0.275), atol=1e-12)

    def test_identical_crowds_any_weighting(self):
        d = ResponseDistribution((0.6, 0.3, 0.1))
        inst = ProblemInstance([d, d], [1.0, 2.0], 0)
        got = mix(inst, (0.3, 0.7))
        assert np.allclose(got.probs, d.probs, atol=1e-12)

    def test_rejects_wrong_length(self):
        rng = np.random.default_rng(3)
        inst = random_instance(rng, 3, 2)
        with pytest.raises(ValueError):
            mix(inst, (0.5, 0.5))


class TestInducedGap:
    def test_uniform_mixture_example(self):
        inst = ProblemInstance(
            [ResponseDistribution((0.45, 0.40, 0.15)), ResponseDistribution((0.45, 0.15, 0.40))],
            [1.0, 1.0],
            0,
        )
        assert induced_gap(inst, (0.5, 0.5)) == pytest.approx(0.175, abs=1e-12)

    def test_point_mass_gives_crowd_gap(self):
        rng = np.random.default_rng(4)
        inst = random_instance(rng, 4, 3)
        for i in range(4):
            mu = np.zeros(4)
            mu[i] = 1.0
            assert induced_gap(inst, mu) == pytest.approx(inst.gaps[i], abs=1e-12)

    def test_two_options_is_weighted_gap(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            inst = random_instance(rng, 3, 2)
            mu = random_mu(rng, 3)
            assert induced_gap(inst, mu) == pytest.approx(float(mu @ inst.gaps), abs=1e-12)

    def test_matches_min_linear_form(self):
        # gap of the mixture equals the smallest margin of the correct option
        # over any other option, linearly in mu
        rng = np.random.default_rng(6)
        for _ in range(200):
            k = int(rng.integers(1, 5))
            n = int(rng.integers(2, 6))
            inst = random_instance(rng, k, n)
            mu = random_mu(rng, k)
            margins = [
                sum(mu[i] * (c.probs[inst.correct_option] - c.probs[x]) for i, c in enumerate(inst.crowds))
                for x in range(n)
                if x != inst.correct_option
            ]
            assert induced_gap(inst, mu) == pytest.approx(min(margins), abs=1e-12)

    def test_concave_and_lipschitz(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(2, 5))
            inst = random_instance(rng, k, n)
            mu, nu = random_mu(rng, k), random_mu(rng, k)
            lam = float(rng.random())
            blend = lam * mu + (1 - lam) * nu
            f_blend = induced_gap(inst, blend)
            f_mu, f_nu = induced_gap(inst, mu), induced_gap(inst, nu)
            assert f_blend >= lam * f_mu + (1 - lam) * f_nu - 1e-12
            assert abs(f_mu - f_nu) <= n * float(np.abs(mu - nu).sum()) + 1e-12


class TestTallySheet:
    def test_single_record(self):
        t = TallySheet(2, 3)
        t.record(0, 1)
        assert t.counts[0][1] == 1
        assert t.round == 1
        assert t.pulls == [1, 0]
        assert t.totals == [0, 1, 0]

    def test_two_records_same_cell(self):
        t = TallySheet(1, 2)
        t.record(0, 0).record(0, 0)
        assert t.counts[0][0] == 2

    def test_conservation_under_random_records(self):
        rng = np.random.default_rng(8)
        t = TallySheet(3, 4)
        for _ in range(500):
            t.record(int(rng.integers(3)), int(rng.integers(4)))
        assert sum(sum(row) for row in t.counts) == t.round == 500
        assert sum(t.pulls) == 500
        assert sum(t.totals) == 500

    def test_empirical_distribution_examples(self):
        t = TallySheet(1, 2)
        for _ in range(3):
            t.record(0, 0)
        t.record(0, 1)
        d = t.empirical_distribution(0)
        assert np.allclose(d.probs, (0.75, 0.25))

        t2 = TallySheet(1, 3)
        for opt, times in ((0, 2), (1, 1), (2, 1)):
            for _ in range(times):
                t2.record(0, opt)
        assert np.allclose(t2.empirical_distribution(0).probs, (0.5, 0.25, 0.25))
        assert t2.empirical_gap(0) == pytest.approx(0.25)

    def test_tie_has_zero_empirical_gap(self):
        t = TallySheet(1, 2)
        for _ in range(5):
            t.record(0, 0)
            t.record(0, 1)
        assert t.empirical_gap(0) == 0.0

    def test_unsampled_crowd_raises(self):
        t = TallySheet(2, 2)
        t.record(0, 0)
        with pytest.raises(NoSamplesError):
            t.empirical_distribution(1)
        with pytest.raises(NoSamplesError):
            t.empirical_gap(1)

    def test_out_of_range_indices(self):
        t = TallySheet(2, 2)
        with pytest.raises(IndexError):
            t.record(2, 0)
        with pytest.raises(IndexError):
            t.record(-1, 0)
        with pytest.raises(IndexError):
            t.record(0, 2)

    def test_record_then_empirical_reflects_count(self):
        t = TallySheet(2, 2)
        t.record(1, 0)
        assert np.allclose(t.empirical_distribution(1).probs, (1.0, 0.0))
