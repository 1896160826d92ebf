"""Lower bounds for the natural pseudo-distance obtained from finite
operator families, and the gap-vs-family-size experiment around them.

The matching distance after any validated operator never exceeds the
natural pseudo-distance, so the max over a family is a sound lower bound;
the experiment tracks how the gap shrinks as the family grows.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circle import GridCircle, Group, GroupElement, SampledFunction, natural_pseudo_distance
from .matching import bottleneck_distance
from .operators import (
    ConvexCombination,
    GeometricCoefficients,
    MaxMap,
    MinMap,
    Operator,
    RotationFamily,
    TruncationPolicy,
    compose,
    identity,
    lipschitz_combine,
    power_mean,
    precompose,
    series,
)
from .persistence import sublevel_diagram

__all__ = [
    "lower_bound",
    "gap_report",
    "GapReport",
    "PairRecord",
    "random_validated_operator",
]


def lower_bound(family: Sequence[Operator], f1: SampledFunction,
                f2: SampledFunction) -> tuple[float, int]:
    """Best matching-distance lower bound for d_G over a finite family.

    Returns (value, index of the operator attaining it). Every operator must
    be a validated construction; unchecked operators carry no guarantee and
    are rejected.
    """
    family = list(family)
    if not family:
        raise ValueError("need at least one operator")
    if any(not op.checked for op in family):
        raise ValueError("lower bound requires validated operators")
    best, best_i = -1.0, 0
    for i, op in enumerate(family):
        d = bottleneck_distance(sublevel_diagram(op(f1)), sublevel_diagram(op(f2)))
        if d > best:
            best, best_i = d, i
    return best, best_i


def random_validated_operator(rng: np.random.Generator, grid: GridCircle,
                              max_depth: int = 4,
                              series_epsilon: float = 1e-6) -> Operator:
    """Random combinator tree built only from validated constructors."""
    if max_depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return identity(grid)
        return precompose(grid, GroupElement(int(rng.integers(grid.n))))
    kind = rng.choice(["power_mean", "combine", "compose", "series"],
                      p=[0.35, 0.3, 0.25, 0.1])
    if kind == "series":
        r = float(rng.choice([0.3, 0.5]))
        c = (1.0 - r) * float(rng.uniform(0.3, 1.0))
        step = int(rng.integers(1, grid.n))
        return series(GeometricCoefficients(c, r), RotationFamily(grid, step),
                      TruncationPolicy(series_epsilon))
    if kind == "compose":
        return compose(random_validated_operator(rng, grid, max_depth - 1, series_epsilon),
                       random_validated_operator(rng, grid, max_depth - 1, series_epsilon))
    k = int(rng.integers(2, 4))
    children = [random_validated_operator(rng, grid, max_depth - 1, series_epsilon)
                for _ in range(k)]
    if kind == "power_mean":
        return power_mean(float(rng.choice([1.0, 2.0, 3.0])), children)
    lmap = rng.choice(["max", "min", "convex"])
    if lmap == "max":
        return lipschitz_combine(MaxMap(k), children)
    if lmap == "min":
        return lipschitz_combine(MinMap(k), children)
    w = rng.uniform(0.1, 1.0, size=k)
    w = w / w.sum() * float(rng.uniform(0.5, 1.0))
    return lipschitz_combine(ConvexCombination(w), children)


@dataclass(frozen=True)
class PairRecord:
    pair: tuple[int, int]            # indices into the corpus
    exact: float                     # natural pseudo-distance
    bound: float                     # best family lower bound
    argmax_operator: int             # index into the family
    gap: float


@dataclass(frozen=True)
class GapReport:
    seed: int
    family_sizes: tuple[int, ...]
    records: dict[int, tuple[PairRecord, ...]] = field(repr=False)
    operators: tuple[Operator, ...] = field(repr=False)

    def max_gap(self, size: int) -> float:
        return max((r.gap for r in self.records[size]), default=0.0)

    def mean_gap(self, size: int) -> float:
        recs = self.records[size]
        return sum(r.gap for r in recs) / len(recs) if recs else 0.0

    def best_bounds(self, pair: tuple[int, int]) -> list[float]:
        """Best bound for one pair across the nested family sizes."""
        out = []
        for size in self.family_sizes:
            for r in self.records[size]:
                if r.pair == pair:
                    out.append(r.bound)
        return out

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "family_sizes": list(self.family_sizes),
            "operators": [op.to_json() for op in self.operators],
            "records": {
                str(size): [
                    {"pair": list(r.pair), "exact": r.exact, "bound": r.bound,
                     "argmax_operator": r.argmax_operator, "gap": r.gap}
                    for r in recs
                ]
                for size, recs in self.records.items()
            },
            "aggregate": {
                str(size): {"max_gap": self.max_gap(size),
                            "mean_gap": self.mean_gap(size)}
                for size in self.family_sizes
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_csv(self) -> str:
        lines = ["family_size,pair_a,pair_b,exact,bound,argmax_operator,gap"]
        for size in self.family_sizes:
            for r in self.records[size]:
                lines.append(f"{size},{r.pair[0]},{r.pair[1]},{r.exact!r},"
                             f"{r.bound!r},{r.argmax_operator},{r.gap!r}")
        return "\n".join(lines) + "\n"


def gap_report(corpus: Sequence[SampledFunction], group: Group,
               family_sizes: Sequence[int], seed: int = 0,
               extra_operators: Sequence[Operator] = (),
               max_depth: int = 3) -> GapReport:
    """Exact d_G versus family lower bounds over nested random families.

    Families are nested (each size extends the previous), so the best bound
    per pair is non-decreasing in family size. extra_operators are placed
    at the front of the family.
    """
    corpus = list(corpus)
    sizes = sorted(set(int(s) for s in family_sizes))
    if not sizes or sizes[0] < 1:
        raise ValueError("family sizes must be positive")
    rng = np.random.default_rng(seed)
    grid = corpus[0].grid
    ops: list[Operator] = list(extra_operators)
    while len(ops) < sizes[-1]:
        ops.append(random_validated_operator(rng, grid, max_depth))
    ops = ops[:sizes[-1]]

    pairs = [(i, j) for i in range(len(corpus)) for j in range(i + 1, len(corpus))]
    exact = {p: natural_pseudo_distance(corpus[p[0]], corpus[p[1]], group)
             for p in pairs}
    # diagrams cache: operator index -> per-function diagrams
    records: dict[int, tuple[PairRecord, ...]] = {}
    best: dict[tuple[int, int], tuple[float, int]] = {p: (-1.0, 0) for p in pairs}
    done = 0
    for size in sizes:
        for oi in range(done, size):
            diagrams = [sublevel_diagram(ops[oi](f)) for f in corpus]
            for p in pairs:
                d = bottleneck_distance(diagrams[p[0]], diagrams[p[1]])
                if d > best[p][0]:
                    best[p] = (d, oi)
        done = size
        records[size] = tuple(
            PairRecord(p, exact[p], best[p][0], best[p][1], exact[p] - best[p][0])
            for p in pairs)
    return GapReport(seed, tuple(sizes), records, tuple(ops))
