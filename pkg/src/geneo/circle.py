"""Sampled functions on a uniform circular grid, group actions and the
natural pseudo-distance computed by exhaustive search over a finite group."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

import numpy as np

__all__ = [
    "GridCircle",
    "SampledFunction",
    "FunctionSpace",
    "GroupElement",
    "Group",
    "Violation",
    "GridMismatchError",
    "sup_distance",
    "act",
    "natural_pseudo_distance",
    "membership_check",
    "builtin_function",
    "read_function_csv",
    "write_function_csv",
]


class GridMismatchError(ValueError):
    """Raised when two objects live on incompatible grids."""


@dataclass(frozen=True)
class GridCircle:
    """Uniform grid of n sample points on the circle, at angles 2*pi*i/n."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 points, got n={self.n}")

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.n

    def angles(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n) / self.n


@dataclass(frozen=True)
class SampledFunction:
    """Real values sampled at the grid points of a GridCircle."""

    grid: GridCircle
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.grid.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampledFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.grid, self.values.tobytes()))

    def shifted(self, offset: float) -> "SampledFunction":
        return SampledFunction(self.grid, self.values + offset)


@dataclass(frozen=True)
class GroupElement:
    """Grid-preserving homeomorphism: i -> (shift + i) mod n, reflected or not."""

    shift: int
    reflect: bool = False

    def indices(self, n: int) -> np.ndarray:
        """Index map of the action: result[i] is where sample i is read from."""
        i = np.arange(n)
        if self.reflect:
            return (self.shift - i) % n
        return (self.shift + i) % n

    def __call__(self, i: int, n: int) -> int:
        if self.reflect:
            return (self.shift - i) % n
        return (self.shift + i) % n

    def compose(self, other: "GroupElement", n: int) -> "GroupElement":
        """self after other: i -> self(other(i))."""
        if self.reflect:
            shift = (self.shift - other.shift) % n
        else:
            shift = (self.shift + other.shift) % n
        return GroupElement(shift, self.reflect != other.reflect)

    def inverse(self, n: int) -> "GroupElement":
        if self.reflect:
            return self
        return GroupElement((-self.shift) % n, False)

    def commutes_with(self, other: "GroupElement", n: int) -> bool:
        return self.compose(other, n) == other.compose(self, n)


def identity_element() -> GroupElement:
    return GroupElement(0, False)


class Group:
    """Finite group of grid-preserving maps of a GridCircle.

    Kinds: trivial {id}, cyclic (all n rotations), dihedral (rotations and
    reflections), or an explicit element list (closure is verified).
    """

    def __init__(self, kind: str, grid: GridCircle,
                 elements: Optional[Sequence[GroupElement]] = None):
        if kind not in ("trivial", "cyclic", "dihedral", "explicit"):
            raise ValueError(f"unknown group kind {kind!r}")
        self.kind = kind
        self.grid = grid
        n = grid.n
        if kind == "trivial":
            self._elements = [identity_element()]
        elif kind == "cyclic":
            self._elements = [GroupElement(s, False) for s in range(n)]
        elif kind == "dihedral":
            self._elements = ([GroupElement(s, False) for s in range(n)]
                              + [GroupElement(s, True) for s in range(n)])
        else:
            if not elements:
                raise ValueError("explicit group needs a nonempty element list")
            self._elements = [GroupElement(g.shift % n, g.reflect) for g in elements]
            self._verify_closure()

    def _verify_closure(self):
        n = self.grid.n
        elems = set(self._elements)
        if identity_element() not in elems:
            raise ValueError("group must contain the identity")
        for g in elems:
            if g.inverse(n) not in elems:
                raise ValueError(f"group not closed under inverse: {g}")
            for h in elems:
                if g.compose(h, n) not in elems:
                    raise ValueError(f"group not closed under composition: {g}, {h}")

    @classmethod
    def trivial(cls, grid: GridCircle) -> "Group":
        return cls("trivial", grid)

    @classmethod
    def rotations(cls, grid: GridCircle) -> "Group":
        return cls("cyclic", grid)

    @classmethod
    def dihedral(cls, grid: GridCircle) -> "Group":
        return cls("dihedral", grid)

    def elements(self) -> Iterator[GroupElement]:
        return iter(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    def __contains__(self, g: GroupElement) -> bool:
        return GroupElement(g.shift % self.grid.n, g.reflect) in set(self._elements)

    def is_abelian(self) -> bool:
        if self.kind in ("trivial", "cyclic"):
            return True
        n = self.grid.n
        return all(g.commutes_with(h, n)
                   for g in self._elements for h in self._elements)

    def index_matrix(self) -> np.ndarray:
        """Stacked index maps, one row per element (row order = elements())."""
        return np.stack([g.indices(self.grid.n) for g in self._elements])


def _require_same_grid(f1: SampledFunction, f2: SampledFunction):
    if f1.grid != f2.grid:
        raise GridMismatchError(
            f"incompatible grids: n={f1.grid.n} vs n={f2.grid.n}"
        )


def sup_distance(f1: SampledFunction, f2: SampledFunction) -> float:
    """Sup-norm distance max_i |f1(i) - f2(i)|."""
    _require_same_grid(f1, f2)
    return float(np.max(np.abs(f1.values - f2.values)))


def act(f: SampledFunction, g: GroupElement) -> SampledFunction:
    """Right action by composition: result(i) = f(g(i)). Pure index permutation."""
    return SampledFunction(f.grid, f.values[g.indices(f.grid.n)])


def natural_pseudo_distance(f1: SampledFunction, f2: SampledFunction,
                            group: Group) -> float:
    """Exact min over g in the group of ||f1 - f2 o g||_inf."""
    d, _ = natural_pseudo_distance_witness(f1, f2, group)
    return d


def natural_pseudo_distance_witness(
        f1: SampledFunction, f2: SampledFunction,
        group: Group) -> tuple[float, GroupElement]:
    """As natural_pseudo_distance, also returning a minimizing group element."""
    _require_same_grid(f1, f2)
    if group.grid != f1.grid:
        raise GridMismatchError("group acts on a different grid")
    if len(group) == 0:
        raise ValueError("empty group")
    # One row per group element: f2 composed with g.
    composed = f2.values[group.index_matrix()]
    costs = np.max(np.abs(composed - f1.values[None, :]), axis=1)
    best = int(np.argmin(costs))
    return float(costs[best]), list(group.elements())[best]


@dataclass(frozen=True)
class FunctionSpace:
    """Membership constraints for the admissible function space.

    bound caps the sup-norm; lipschitz bounds the discrete difference
    quotient |f(i+1)-f(i)| / (2*pi/n) around the circle; range_low/high
    constrain values to an interval.
    """

    bound: float = math.inf
    lipschitz: Optional[float] = None
    range_low: Optional[float] = None
    range_high: Optional[float] = None

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("bound must be nonnegative")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ValueError("lipschitz must be nonnegative")
        if (self.range_low is not None and self.range_high is not None
                and self.range_high < self.range_low):
            raise ValueError("empty range")

    @classmethod
    def unit_lipschitz(cls) -> "FunctionSpace":
        """1-Lipschitz functions into [0, 1] (the worked-example space)."""
        return cls(bound=1.0, lipschitz=1.0, range_low=0.0, range_high=1.0)

    @property
    def sup_bound(self) -> float:
        """Effective sup-norm cap implied by bound and range."""
        b = self.bound
        if self.range_low is not None and self.range_high is not None:
            b = min(b, max(abs(self.range_low), abs(self.range_high)))
        return b


@dataclass(frozen=True)
class Violation:
    kind: str          # "bound" | "range" | "lipschitz"
    index: int
    detail: str


def membership_check(space: FunctionSpace, f: SampledFunction) -> list[Violation]:
    """All constraint violations of f against the space; empty means member."""
    out: list[Violation] = []
    v = f.values
    if math.isfinite(space.bound):
        bad = np.flatnonzero(np.abs(v) > space.bound)
        if bad.size:
            i = int(bad[np.argmax(np.abs(v[bad]))])
            out.append(Violation("bound", i, f"|f({i})|={abs(v[i]):g} > {space.bound:g}"))
    if space.range_low is not None or space.range_high is not None:
        lo = -math.inf if space.range_low is None else space.range_low
        hi = math.inf if space.range_high is None else space.range_high
        bad = np.flatnonzero((v < lo) | (v > hi))
        if bad.size:
            i = int(bad[0])
            out.append(Violation("range", i, f"f({i})={v[i]:g} outside [{lo:g}, {hi:g}]"))
    if space.lipschitz is not None:
        step = f.grid.step
        diffs = np.abs(np.roll(v, -1) - v) / step
        # small slack for the analytic samples, which meet the bound only up
        # to discretization error
        bad = np.flatnonzero(diffs > space.lipschitz * (1 + 1e-9) + 1e-12)
        if bad.size:
            i = int(bad[np.argmax(diffs[bad])])
            out.append(Violation(
                "lipschitz", i,
                f"slope {diffs[i]:g} between samples {i} and {(i + 1) % f.grid.n} "
                f"exceeds {space.lipschitz:g}"))
    return out


def builtin_function(name: str, grid: GridCircle,
                     param: Optional[float] = None) -> SampledFunction:
    """Sample a named closed form on the grid.

    Names: abs_sin, sin_sq, sin_sq_root (needs p > 0), constant (needs c).
    """
    x = grid.angles()
    if name == "abs_sin":
        return SampledFunction(grid, np.abs(np.sin(x)))
    if name == "sin_sq":
        return SampledFunction(grid, np.sin(x) ** 2)
    if name == "sin_sq_root":
        if param is None or param <= 0:
            raise ValueError("sin_sq_root requires p > 0")
        return SampledFunction(grid, (np.sin(x) ** 2) ** (1.0 / param))
    if name == "constant":
        if param is None:
            raise ValueError("constant requires a value")
        return SampledFunction(grid, np.full(grid.n, float(param)))
    raise ValueError(f"unknown builtin function {name!r}")


def parse_builtin_spec(spec: str, grid: GridCircle) -> SampledFunction:
    """Parse 'name' or 'name:param' builtin specs (CLI and config surface)."""
    name, _, raw = spec.partition(":")
    param = float(raw) if raw else None
    return builtin_function(name.strip(), grid, param)


def read_function_csv(stream: Union[str, io.TextIOBase]) -> SampledFunction:
    """Read the `index,value` CSV format; grid size is the row count."""
    close = False
    if isinstance(stream, str):
        stream = open(stream, "r", encoding="utf-8")
        close = True
    try:
        header = stream.readline().strip()
        if header.replace(" ", "") != "index,value":
            raise ValueError(f"expected header 'index,value', got {header!r}")
        values = []
        for lineno, line in enumerate(stream):
            line = line.strip()
            if not line:
                continue
            idx_s, _, val_s = line.partition(",")
            if int(idx_s) != len(values):
                raise ValueError(f"line {lineno + 2}: expected index {len(values)}")
            values.append(float(val_s))
    finally:
        if close:
            stream.close()
    return SampledFunction(GridCircle(len(values)), np.array(values))


def write_function_csv(f: SampledFunction, stream: Union[str, io.TextIOBase]):
    close = False
    if isinstance(stream, str):
        stream = open(stream, "w", encoding="utf-8")
        close = True
    try:
        stream.write("index,value\n")
        for i, v in enumerate(f.values):
            stream.write(f"{i},{float(v)!r}\n")
    finally:
        if close:
            stream.close()
