import math

import numpy as np
import pytest

from geneo import (
    GridCircle,
    Group,
    GroupElement,
    act,
    builtin_function,
    identity,
    lower_bound,
    natural_pseudo_distance,
    power_mean,
    precompose,
)
from geneo.approximation import gap_report, random_validated_operator

from conftest import random_function


@pytest.fixture
def f1f2mp(grid360):
    f1 = identity(grid360)
    f2 = precompose(grid360, GroupElement(90))
    return f1, f2, power_mean(1, [f1, f2])


class TestLowerBound:
    def test_identity_family_on_equal_functions(self, abs_sin, grid360):
        value, argmax = lower_bound([identity(grid360)], abs_sin, abs_sin)
        assert value == 0.0
        assert argmax == 0

    def test_plain_operators_cannot_separate(self, abs_sin, sin_sq, f1f2mp):
        f1, f2, _ = f1f2mp
        value, _ = lower_bound([f1, f2], abs_sin, sin_sq)
        assert value <= 1e-9

    def test_mean_operator_attains_known_bound(self, abs_sin, sin_sq,
                                               rotations360, f1f2mp):
        f1, f2, mp = f1f2mp
        value, argmax = lower_bound([f1, f2, mp], abs_sin, sin_sq)
        assert value == pytest.approx((math.sqrt(2) - 1) / 4, abs=1e-9)
        assert argmax == 2
        d_g = natural_pseudo_distance(abs_sin, sin_sq, rotations360)
        assert value <= d_g
        assert d_g == pytest.approx(0.25)

    def test_rejects_unchecked_operators(self, abs_sin, sin_sq, grid360):
        bad = power_mean(0.5, [identity(grid360)], unchecked=True)
        with pytest.raises(ValueError, match="validated"):
            lower_bound([bad], abs_sin, sin_sq)

    def test_rejects_empty_family(self, abs_sin, sin_sq):
        with pytest.raises(ValueError):
            lower_bound([], abs_sin, sin_sq)

    def test_monotone_under_family_growth(self, abs_sin, sin_sq, grid360):
        rng = np.random.default_rng(1)
        family = [random_validated_operator(rng, grid360, 3) for _ in range(8)]
        prev = -1.0
        for size in (1, 2, 4, 8):
            value, _ = lower_bound(family[:size], abs_sin, sin_sq)
            assert value >= prev
            prev = value


class TestGapReport:
    def test_orbit_pair_has_zero_gap(self):
        grid = GridCircle(60)
        group = Group.rotations(grid)
        f = builtin_function("abs_sin", grid)
        corpus = [f, act(f, GroupElement(7))]
        report = gap_report(corpus, group, [1, 3], seed=5)
        for size in report.family_sizes:
            for rec in report.records[size]:
                assert rec.exact == 0.0
                assert rec.bound <= 1e-9
                assert abs(rec.gap) <= 1e-9

    def test_nested_bounds_nondecreasing(self, abs_sin, sin_sq, rotations360):
        report = gap_report([abs_sin, sin_sq], rotations360, [1, 4, 16], seed=2)
        bounds = report.best_bounds((0, 1))
        assert bounds == sorted(bounds)

    def test_gap_with_mean_operator_in_family(self, abs_sin, sin_sq,
                                              rotations360, f1f2mp):
        _, _, mp = f1f2mp
        report = gap_report([abs_sin, sin_sq], rotations360, [4], seed=3,
                            extra_operators=[mp])
        rec = report.records[4][0]
        assert rec.exact == pytest.approx(0.25)
        assert rec.bound >= (math.sqrt(2) - 1) / 4 - 1e-9
        assert rec.gap <= 0.25 - (math.sqrt(2) - 1) / 4 + 1e-9

    def test_soundness_on_random_corpus(self):
        rng = np.random.default_rng(11)
        grid = GridCircle(40)
        group = Group.rotations(grid)
        corpus = [random_function(rng, grid) for _ in range(4)]
        report = gap_report(corpus, group, [2, 6], seed=7)
        for size in report.family_sizes:
            for rec in report.records[size]:
                assert rec.gap >= -1e-9

    def test_serialization(self, abs_sin, sin_sq, rotations360):
        report = gap_report([abs_sin, sin_sq], rotations360, [1, 2], seed=9)
        blob = report.to_json_dict()
        assert blob["seed"] == 9
        assert set(blob["records"]) == {"1", "2"}
        csv = report.to_csv()
        assert csv.splitlines()[0] == \
            "family_size,pair_a,pair_b,exact,bound,argmax_operator,gap"
        assert len(csv.splitlines()) == 3
