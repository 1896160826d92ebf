import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geneo import (
    GridCircle,
    GroupElement,
    bottleneck,
    bottleneck_distance,
    identity,
    power_mean,
    precompose,
    sublevel_diagram,
    sup_distance,
)
from geneo.persistence import PersistenceDiagram

from conftest import random_function
from oracles import exhaustive_bottleneck


def random_diagram(rng, max_points=6, essentials=1):
    pairs = []
    for _ in range(int(rng.integers(0, max_points + 1))):
        b = rng.uniform(0, 1)
        pairs.append((b, b + rng.uniform(1e-3, 1)))
    ess = tuple(rng.uniform(0, 1) for _ in range(essentials))
    return PersistenceDiagram(tuple(pairs), ess)


class TestBottleneck:
    def test_identical_diagrams(self, abs_sin):
        d = sublevel_diagram(abs_sin)
        dist, matching = bottleneck(d, d)
        assert dist == 0.0
        assert matching.cost == 0.0

    def test_single_point_to_diagonal(self):
        d1 = PersistenceDiagram(((0.0, 1.0),), (0.0,))
        d2 = PersistenceDiagram((), (0.0,))
        dist, matching = bottleneck(d1, d2)
        assert dist == pytest.approx(0.5)
        assert matching.finite_pairs == ((0, None),)

    def test_worked_example_distance(self, abs_sin, sin_sq, grid360):
        op = power_mean(1, [identity(grid360), precompose(grid360, GroupElement(90))])
        dist = bottleneck_distance(sublevel_diagram(op(abs_sin)),
                                   sublevel_diagram(op(sin_sq)))
        assert dist == pytest.approx((math.sqrt(2) - 1) / 4, abs=1e-9)

    def test_essential_count_mismatch_is_inf(self):
        d1 = PersistenceDiagram((), (0.0,))
        d2 = PersistenceDiagram((), (0.0, 1.0))
        assert bottleneck_distance(d1, d2) == math.inf

    def test_essential_sorted_matching(self):
        d1 = PersistenceDiagram((), (0.0, 1.0))
        d2 = PersistenceDiagram((), (0.2, 0.9))
        assert bottleneck_distance(d1, d2) == pytest.approx(0.2)

    def test_matching_covers_all_points(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            d1 = random_diagram(rng)
            d2 = random_diagram(rng)
            dist, matching = bottleneck(d1, d2)
            left = [i for i, _ in matching.finite_pairs if i is not None]
            right = [j for _, j in matching.finite_pairs if j is not None]
            assert sorted(left) == list(range(len(d1.finite)))
            assert sorted(right) == list(range(len(d2.finite)))

    def test_matching_cost_is_attained(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            d1 = random_diagram(rng)
            d2 = random_diagram(rng)
            dist, matching = bottleneck(d1, d2)
            costs = []
            for i, j in matching.finite_pairs:
                if i is not None and j is not None:
                    p, q = d1.finite[i], d2.finite[j]
                    costs.append(max(abs(p[0] - q[0]), abs(p[1] - q[1])))
                elif i is not None:
                    b, d = d1.finite[i]
                    costs.append((d - b) / 2)
                else:
                    b, d = d2.finite[j]
                    costs.append((d - b) / 2)
            costs += [abs(a - b) for a, b in matching.essential_pairs]
            assert max(costs, default=0.0) == pytest.approx(dist, abs=1e-15)


class TestMetricProperties:
    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_symmetry_and_triangle(self, seed):
        rng = np.random.default_rng(seed)
        d1, d2, d3 = (random_diagram(rng, max_points=4) for _ in range(3))
        d12 = bottleneck_distance(d1, d2)
        assert d12 == bottleneck_distance(d2, d1)
        assert (bottleneck_distance(d1, d3)
                <= d12 + bottleneck_distance(d2, d3) + 1e-12)

    def test_identity_of_indiscernibles(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            d1 = random_diagram(rng, max_points=4)
            d2 = random_diagram(rng, max_points=4)
            dist = bottleneck_distance(d1, d2)
            if d1 == d2:
                assert dist == 0.0
            if dist == 0.0:
                # equality modulo the diagonal: multisets must agree since we
                # never store zero-persistence points
                assert d1 == d2

    def test_monotone_scaling(self):
        rng = np.random.default_rng(7)
        for s in (0.5, 2.0, 13.0):
            d1 = random_diagram(rng)
            d2 = random_diagram(rng)
            assert bottleneck_distance(d1.scaled(s), d2.scaled(s)) == \
                pytest.approx(s * bottleneck_distance(d1, d2), rel=1e-12)


class TestOracleEquivalence:
    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_matches_exhaustive_matching(self, seed):
        rng = np.random.default_rng(seed)
        d1 = random_diagram(rng, max_points=5)
        d2 = random_diagram(rng, max_points=5)
        assert bottleneck_distance(d1, d2) == pytest.approx(
            exhaustive_bottleneck(d1, d2), abs=1e-15)


class TestStability:
    def test_bounded_by_sup_distance(self):
        rng = np.random.default_rng(9)
        grid = GridCircle(48)
        for _ in range(100):
            f1 = random_function(rng, grid)
            f2 = random_function(rng, grid)
            lhs = bottleneck_distance(sublevel_diagram(f1), sublevel_diagram(f2))
            assert lhs <= sup_distance(f1, f2) + 1e-12
