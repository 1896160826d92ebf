"""Equivariant non-expansive operators as immutable combinator trees.

Node kinds: identity, precompose (by a fixed grid map), an n-ary 1-Lipschitz
pointwise combine, power means, truncated coefficient series, composition.
Trees built through the safe constructors are equivariant and non-expansive
by construction; randomized validators check both axioms empirically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .circle import (
    GridCircle,
    Group,
    GroupElement,
    GridMismatchError,
    SampledFunction,
)

__all__ = [
    "Operator",
    "LipschitzMap",
    "MaxMap",
    "MinMap",
    "Projection",
    "ConvexCombination",
    "GeometricCoefficients",
    "OperatorFamily",
    "ConstantFamily",
    "RotationFamily",
    "TruncationPolicy",
    "identity",
    "precompose",
    "lipschitz_combine",
    "power_mean",
    "series",
    "compose",
    "apply",
    "power_mean_values",
    "norm_p",
    "verify_equivariance",
    "verify_nonexpansivity",
    "operator_from_json",
]


def power_mean_values(p: float, v) -> float:
    """Power mean ((1/n) sum |v_i|^p)^(1/p) of a nonempty vector."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("power mean of an empty vector")
    if p <= 0:
        raise ValueError("power mean requires p > 0")
    return float(np.mean(np.abs(v) ** p) ** (1.0 / p))


def norm_p(x, p: float) -> float:
    """p-norm of a vector, p >= 1 or p = inf."""
    x = np.asarray(x, dtype=np.float64)
    if p == math.inf:
        return float(np.max(np.abs(x))) if x.size else 0.0
    if p < 1:
        raise ValueError("norm_p requires p >= 1 or p = inf")
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# 1-Lipschitz pointwise maps (with respect to the max-norm on inputs)

class LipschitzMap:
    """n-ary real map, 1-Lipschitz for the max-norm; vectorized over samples."""

    arity: int
    name: str

    def combine(self, stacked: np.ndarray) -> np.ndarray:
        """Apply to stacked child outputs, shape (arity, ...) -> (...)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MaxMap(LipschitzMap):
    arity: int
    name = "max"

    def combine(self, stacked):
        return np.max(stacked, axis=0)

    def to_json(self):
        return {"map": "max", "arity": self.arity}


@dataclass(frozen=True)
class MinMap(LipschitzMap):
    arity: int
    name = "min"

    def combine(self, stacked):
        return np.min(stacked, axis=0)

    def to_json(self):
        return {"map": "min", "arity": self.arity}


@dataclass(frozen=True)
class Projection(LipschitzMap):
    arity: int
    coordinate: int  # 0-based
    name = "proj"

    def __post_init__(self):
        if not 0 <= self.coordinate < self.arity:
            raise ValueError("projection coordinate out of range")

    def combine(self, stacked):
        return stacked[self.coordinate]

    def to_json(self):
        return {"map": "proj", "arity": self.arity, "coordinate": self.coordinate}


class ConvexCombination(LipschitzMap):
    """Weighted sum with nonnegative weights summing to at most 1."""

    name = "convex"

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=np.float64)
        if w.size == 0 or np.any(w < 0):
            raise ValueError("weights must be nonnegative and nonempty")
        if w.sum() > 1 + 1e-12:
            raise ValueError("weights must sum to at most 1")
        self.weights = w
        self.arity = int(w.size)

    def combine(self, stacked):
        return np.tensordot(self.weights, stacked, axes=(0, 0))

    def to_json(self):
        return {"map": "convex", "weights": list(map(float, self.weights))}

    def __eq__(self, other):
        return (isinstance(other, ConvexCombination)
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash(("convex", self.weights.tobytes()))


def lipschitz_map_from_json(d: dict) -> LipschitzMap:
    kind = d["map"]
    if kind == "max":
        return MaxMap(d["arity"])
    if kind == "min":
        return MinMap(d["arity"])
    if kind == "proj":
        return Projection(d["arity"], d["coordinate"])
    if kind == "convex":
        return ConvexCombination(d["weights"])
    raise ValueError(f"unknown lipschitz map {kind!r}")


# ---------------------------------------------------------------------------
# Coefficient sequences and operator families for series

@dataclass(frozen=True)
class GeometricCoefficients:
    """a_k = c * r^(k-1) for k >= 1; closed-form total and tail sums."""

    c: float
    r: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("geometric coefficients need c > 0")
        if not 0 < self.r < 1:
            raise ValueError("geometric coefficients need 0 < r < 1")

    def coefficient(self, k: int) -> float:
        return self.c * self.r ** (k - 1)

    def total(self) -> float:
        return self.c / (1.0 - self.r)

    def tail(self, K: int) -> float:
        """Sum of a_k for k > K."""
        return self.c * self.r ** K / (1.0 - self.r)

    def to_json(self):
        return {"coeffs": "geometric", "c": self.c, "r": self.r}


class OperatorFamily:
    """Rule producing the k-th operator of a series, k >= 1."""

    def operator(self, k: int) -> "Operator":
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantFamily(OperatorFamily):
    op: "Operator"

    def operator(self, k):
        return self.op

    def to_json(self):
        return {"family": "constant", "operator": self.op.to_json()}


@dataclass(frozen=True)
class RotationFamily(OperatorFamily):
    """F_k precomposes with the rotation by k * step_shift grid steps."""

    grid: GridCircle
    step_shift: int

    def operator(self, k):
        return precompose(self.grid, GroupElement((k * self.step_shift) % self.grid.n))

    def to_json(self):
        return {"family": "rotation", "step_shift": self.step_shift}


@dataclass(frozen=True)
class TruncationPolicy:
    """Caps the sup-norm error of realizing a series by a finite partial sum."""

    epsilon: float = 1e-9

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def choose_order(self, coeffs: GeometricCoefficients, bound: float) -> int:
        """Smallest K with tail(K) * bound <= epsilon."""
        K = 1
        while coeffs.tail(K) * bound > self.epsilon:
            K += 1
            if K > 1_000_000:
                raise ValueError("truncation order does not converge")
        return K


# ---------------------------------------------------------------------------
# Operator tree

class Operator:
    """Immutable combinator-tree node; evaluates functions on a fixed grid.

    checked is True when the constructor guarantees both operator axioms
    (equivariance for the commuting group, non-expansivity).
    """

    kind: str

    def __init__(self, grid: GridCircle, checked: bool):
        self.grid = grid
        self.checked = checked

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        """Evaluate on raw sample arrays of shape (..., n); vectorized."""
        raise NotImplementedError

    def __call__(self, f: SampledFunction) -> SampledFunction:
        if f.grid != self.grid:
            raise GridMismatchError(
                f"operator on n={self.grid.n} applied to function on n={f.grid.n}")
        return SampledFunction(self.grid, self.apply_values(f.values))

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return (type(self) is type(other) and self.grid == other.grid
                and self.to_json() == other.to_json())

    def __hash__(self):
        return hash((self.grid, repr(self.to_json())))

    def __repr__(self):
        return f"<Operator {self.to_json()!r} on n={self.grid.n}>"


def apply(op: Operator, f: SampledFunction) -> SampledFunction:
    """Functional form of operator application."""
    return op(f)


class _Identity(Operator):
    kind = "identity"

    def __init__(self, grid):
        super().__init__(grid, checked=True)

    def apply_values(self, values):
        return values

    def to_json(self):
        return {"kind": "identity"}


class _Precompose(Operator):
    kind = "precompose"

    def __init__(self, grid, element: GroupElement, checked: bool):
        super().__init__(grid, checked)
        self.element = element
        self._indices = element.indices(grid.n)

    def apply_values(self, values):
        return values[..., self._indices]

    def to_json(self):
        return {"kind": "precompose", "shift": self.element.shift,
                "reflect": self.element.reflect}


class _LipschitzCombine(Operator):
    kind = "lipschitz_combine"

    def __init__(self, grid, lmap: LipschitzMap, children: Sequence[Operator],
                 checked: bool):
        super().__init__(grid, checked)
        self.lmap = lmap
        self.children = tuple(children)

    def apply_values(self, values):
        stacked = np.stack([c.apply_values(values) for c in self.children])
        return self.lmap.combine(stacked)

    def to_json(self):
        return {"kind": "lipschitz_combine", "map": self.lmap.to_json(),
                "children": [c.to_json() for c in self.children]}


class _PowerMean(Operator):
    kind = "power_mean"

    def __init__(self, grid, p: float, children: Sequence[Operator], checked: bool):
        super().__init__(grid, checked)
        self.p = p
        self.children = tuple(children)

    def apply_values(self, values):
        stacked = np.stack([c.apply_values(values) for c in self.children])
        return np.mean(np.abs(stacked) ** self.p, axis=0) ** (1.0 / self.p)

    def to_json(self):
        return {"kind": "power_mean", "p": self.p,
                "children": [c.to_json() for c in self.children]}


class _Series(Operator):
    kind = "series"

    def __init__(self, grid, coeffs: GeometricCoefficients, family: OperatorFamily,
                 policy: TruncationPolicy, bound: float, checked: bool):
        super().__init__(grid, checked)
        self.coeffs = coeffs
        self.family = family
        self.policy = policy
        self.bound = bound
        self.order = policy.choose_order(coeffs, bound)
        self._terms = [(coeffs.coefficient(k), family.operator(k))
                       for k in range(1, self.order + 1)]
        for _, op in self._terms:
            if op.grid != grid:
                raise GridMismatchError("series family produced a foreign-grid operator")

    def apply_values(self, values):
        acc = np.zeros_like(values, dtype=np.float64)
        for a_k, op in self._terms:
            acc = acc + a_k * op.apply_values(values)
        return acc

    def truncation_error_bound(self) -> float:
        return self.coeffs.tail(self.order) * self.bound

    def to_json(self):
        return {"kind": "series", **self.coeffs.to_json(),
                "family_spec": self.family.to_json(),
                "epsilon": self.policy.epsilon, "bound": self.bound,
                "order": self.order}


class _Compose(Operator):
    kind = "compose"

    def __init__(self, grid, outer: Operator, inner: Operator, checked: bool):
        super().__init__(grid, checked)
        self.outer = outer
        self.inner = inner

    def apply_values(self, values):
        return self.outer.apply_values(self.inner.apply_values(values))

    def to_json(self):
        return {"kind": "compose", "outer": self.outer.to_json(),
                "inner": self.inner.to_json()}


# ---------------------------------------------------------------------------
# Safe constructors

def identity(grid: GridCircle) -> Operator:
    return _Identity(grid)


def precompose(grid: GridCircle, element: GroupElement,
               group: Optional[Group] = None, unchecked: bool = False) -> Operator:
    """Operator f -> f o element.

    Equivariance for a group G needs element to commute with every member
    of G (automatic for rotations under a cyclic G). If a group is given
    and the element does not commute with it, construction fails unless
    unchecked=True.
    """
    elem = GroupElement(element.shift % grid.n, element.reflect)
    checked = True
    if group is not None:
        commutes = all(elem.commutes_with(g, grid.n) for g in group.elements())
        if not commutes:
            if not unchecked:
                raise ValueError(
                    "precompose element does not commute with the group; "
                    "pass unchecked=True to build anyway")
            checked = False
    elif elem.reflect:
        # A reflection does not commute with generic rotations; only the
        # explicitly-checked path may mark it as a validated constructor.
        checked = False
    return _Precompose(grid, elem, checked)


def lipschitz_combine(lmap: LipschitzMap, ops: Sequence[Operator]) -> Operator:
    """Pointwise 1-Lipschitz combination of operators sharing a grid."""
    ops = list(ops)
    if not ops:
        raise ValueError("lipschitz_combine needs at least one child")
    if lmap.arity != len(ops):
        raise ValueError(f"map arity {lmap.arity} != {len(ops)} children")
    grid = ops[0].grid
    if any(o.grid != grid for o in ops):
        raise GridMismatchError("children live on different grids")
    return _LipschitzCombine(grid, lmap, ops, checked=all(o.checked for o in ops))


def power_mean(p: float, ops: Sequence[Operator],
               unchecked: bool = False) -> Operator:
    """Pointwise power mean of operators; p >= 1 keeps the axioms.

    p in (0, 1) is only a 1-Lipschitz map in each variable separately, not
    jointly, so the safe constructor rejects it; unchecked=True builds the
    operator anyway for counterexample experiments.
    """
    ops = list(ops)
    if not ops:
        raise ValueError("power_mean needs at least one child")
    if p <= 0:
        raise ValueError("power_mean requires p > 0")
    if p < 1 and not unchecked:
        raise ValueError(
            "power_mean with p < 1 is not non-expansive; "
            "use unchecked=True for counterexample experiments")
    grid = ops[0].grid
    if any(o.grid != grid for o in ops):
        raise GridMismatchError("children live on different grids")
    checked = p >= 1 and all(o.checked for o in ops)
    return _PowerMean(grid, p, ops, checked)


def series(coeffs: GeometricCoefficients, family: OperatorFamily,
           policy: TruncationPolicy = TruncationPolicy(),
           bound: float = 1.0) -> Operator:
    """Truncated weighted series sum_k a_k F_k with a certified error bound.

    bound must dominate ||F_k(f)||_inf over the functions the operator will
    see; the truncation order K is the smallest with tail(K) * bound <=
    policy.epsilon. Nonnegative coefficients with total <= 1 make every
    truncation non-expansive exactly, not just in the limit.
    """
    if coeffs.total() > 1 + 1e-12:
        raise ValueError(f"coefficient sum {coeffs.total():g} exceeds 1")
    if bound <= 0:
        raise ValueError("bound must be positive")
    probe = family.operator(1)
    checked = probe.checked
    op = _Series(probe.grid, coeffs, family, policy, bound, checked)
    if not all(t.checked for _, t in op._terms):
        op.checked = False
    return op


def compose(outer: Operator, inner: Operator) -> Operator:
    """Operator composition: apply inner first, then outer."""
    if outer.grid != inner.grid:
        raise GridMismatchError("composed operators live on different grids")
    return _Compose(outer.grid, outer, inner,
                    checked=outer.checked and inner.checked)


def operator_from_json(d: dict, grid: GridCircle) -> Operator:
    """Rebuild an operator tree from its canonical JSON form."""
    kind = d["kind"]
    if kind == "identity":
        return identity(grid)
    if kind == "precompose":
        elem = GroupElement(d["shift"], d.get("reflect", False))
        return precompose(grid, elem, unchecked=elem.reflect)
    if kind == "lipschitz_combine":
        children = [operator_from_json(c, grid) for c in d["children"]]
        return lipschitz_combine(lipschitz_map_from_json(d["map"]), children)
    if kind == "power_mean":
        children = [operator_from_json(c, grid) for c in d["children"]]
        return power_mean(d["p"], children, unchecked=d["p"] < 1)
    if kind == "series":
        coeffs = GeometricCoefficients(d["c"], d["r"])
        fam = d["family_spec"]
        if fam["family"] == "rotation":
            family: OperatorFamily = RotationFamily(grid, fam["step_shift"])
        elif fam["family"] == "constant":
            family = ConstantFamily(operator_from_json(fam["operator"], grid))
        else:
            raise ValueError(f"unknown family {fam['family']!r}")
        return series(coeffs, family, TruncationPolicy(d["epsilon"]),
                      d.get("bound", 1.0))
    if kind == "compose":
        return compose(operator_from_json(d["outer"], grid),
                       operator_from_json(d["inner"], grid))
    raise ValueError(f"unknown operator kind {kind!r}")


# ---------------------------------------------------------------------------
# Probe generation and randomized axiom validators


def random_lipschitz_probe(rng: np.random.Generator, grid: GridCircle,
                           lipschitz: float = 1.0, low: float = 0.0,
                           high: float = 1.0, anchors: int = 5) -> SampledFunction:
    """Random function with the given Lipschitz bound into [low, high].

    Built as the lower Lipschitz envelope of random anchor values, which is
    Lipschitz around the circle by construction; clipping keeps the bound.
    """
    n = grid.n
    pos = rng.integers(0, n, size=anchors)
    val = rng.uniform(low, high, size=anchors)
    i = np.arange(n)
    d = np.abs(i[:, None] - pos[None, :])
    circ = np.minimum(d, n - d) * grid.step
    envelope = np.min(val[None, :] + lipschitz * circ, axis=1)
    return SampledFunction(grid, np.clip(envelope, low, high))


def probe_pairs(rng: np.random.Generator, grid: GridCircle, count: int,
                lipschitz: float = 1.0, low: float = 0.0,
                high: float = 1.0) -> list[tuple[SampledFunction, SampledFunction]]:
    """Probe pairs for non-expansivity search.

    Alternates generic random pairs with valley-anchored perturbations: a
    cone touching the lower bound plus a small bump at its tip, the input
    family on which maps with unbounded partial derivatives blow up.
    """
    n = grid.n
    i = np.arange(n)
    pairs = []
    for j in range(count):
        if j % 2 == 0:
            pairs.append((random_lipschitz_probe(rng, grid, lipschitz, low, high),
                          random_lipschitz_probe(rng, grid, lipschitz, low, high)))
            continue
        i0 = int(rng.integers(n))
        d = np.abs(i - i0)
        circ = np.minimum(d, n - d) * grid.step
        base = np.clip(low + lipschitz * circ, low, high)
        delta = (high - low) * 10.0 ** rng.uniform(-4, -1)
        bumped = base.copy()
        bumped[i0] = min(base[i0] + delta, high)
        pairs.append((SampledFunction(grid, base), SampledFunction(grid, bumped)))
    return pairs

@dataclass(frozen=True)
class EquivarianceReport:
    max_violation: float
    witness_probe: Optional[int]      # index into the probe list
    witness_element: Optional[GroupElement]


@dataclass(frozen=True)
class NonexpansivityReport:
    max_excess: float
    witness_pair: Optional[int]       # index into the pair list


def verify_equivariance(op: Operator, group: Group,
                        probes: Sequence[SampledFunction]) -> EquivarianceReport:
    """Max over probes f and group elements g of ||F(f o g) - F(f) o g||_inf."""
    if not probes:
        raise ValueError("need at least one probe")
    idx = group.index_matrix()          # (|G|, n)
    elements = list(group.elements())
    worst = 0.0
    w_probe, w_elem = None, None
    for pi, f in enumerate(probes):
        if f.grid != op.grid:
            raise GridMismatchError("probe on a different grid")
        rotated = f.values[idx]                      # rows: f o g
        lhs = op.apply_values(rotated)               # F(f o g)
        rhs = op.apply_values(f.values)[idx]         # F(f) o g
        per_g = np.max(np.abs(lhs - rhs), axis=1)
        gi = int(np.argmax(per_g))
        if per_g[gi] > worst:
            worst = float(per_g[gi])
            w_probe, w_elem = pi, elements[gi]
    return EquivarianceReport(worst, w_probe, w_elem)


def verify_nonexpansivity(
        op: Operator,
        pairs: Sequence[tuple[SampledFunction, SampledFunction]],
) -> NonexpansivityReport:
    """Max over pairs of output sup-distance minus input sup-distance."""
    if not pairs:
        raise ValueError("need at least one pair")
    a = np.stack([p[0].values for p in pairs])
    b = np.stack([p[1].values for p in pairs])
    d_in = np.max(np.abs(a - b), axis=1)
    d_out = np.max(np.abs(op.apply_values(a) - op.apply_values(b)), axis=1)
    excess = d_out - d_in
    wi = int(np.argmax(excess))
    worst = float(excess[wi])
    if worst <= 0:
        return NonexpansivityReport(max(worst, 0.0), None)
    return NonexpansivityReport(worst, wi)
