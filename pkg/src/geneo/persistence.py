"""Degree-0 sublevel-set persistence of a sampled function on the cycle
graph, computed with a union-find sweep in (value, index) order."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .circle import SampledFunction

__all__ = [
    "PersistenceDiagram",
    "sublevel_diagram",
    "diagram_equal",
    "read_diagram_json",
    "read_diagram_csv",
]

INF = math.inf


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs plus essential births (death = +inf).

    Zero-persistence pairs are never stored; pairs and births are kept
    sorted so diagrams compare as canonical values.
    """

    finite: tuple[tuple[float, float], ...]
    essential: tuple[float, ...]

    def __post_init__(self):
        pairs = tuple(sorted((float(b), float(d)) for b, d in self.finite))
        for b, d in pairs:
            if not b < d:
                raise ValueError(f"finite pair needs birth < death, got ({b}, {d})")
        object.__setattr__(self, "finite", pairs)
        object.__setattr__(self, "essential", tuple(sorted(map(float, self.essential))))

    def translated(self, c: float) -> "PersistenceDiagram":
        return PersistenceDiagram(
            tuple((b + c, d + c) for b, d in self.finite),
            tuple(b + c for b in self.essential))

    def scaled(self, s: float) -> "PersistenceDiagram":
        if s <= 0:
            raise ValueError("scale must be positive")
        return PersistenceDiagram(
            tuple((b * s, d * s) for b, d in self.finite),
            tuple(b * s for b in self.essential))

    def to_json_dict(self) -> dict:
        return {"finite": [[b, d] for b, d in self.finite],
                "essential": list(self.essential)}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    def to_csv(self) -> str:
        lines = ["birth,death"]
        lines += [f"{b!r},{d!r}" for b, d in self.finite]
        lines += [f"{b!r},inf" for b in self.essential]
        return "\n".join(lines) + "\n"


def read_diagram_json(source: Union[str, dict]) -> PersistenceDiagram:
    d = json.loads(source) if isinstance(source, str) else source
    return PersistenceDiagram(tuple((b, dd) for b, dd in d["finite"]),
                              tuple(d["essential"]))


def read_diagram_csv(text: str) -> PersistenceDiagram:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "birth,death":
        raise ValueError("expected header 'birth,death'")
    finite, essential = [], []
    for ln in lines[1:]:
        b_s, _, d_s = ln.partition(",")
        if d_s.strip() == "inf":
            essential.append(float(b_s))
        else:
            finite.append((float(b_s), float(d_s)))
    return PersistenceDiagram(tuple(finite), tuple(essential))


class _UnionFind:
    __slots__ = ("parent", "birth", "birth_vertex")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.birth = [0.0] * n
        self.birth_vertex = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root


def sublevel_diagram(f: SampledFunction) -> PersistenceDiagram:
    """H0 persistence of the sublevel filtration of f on the cycle graph.

    Vertices enter in (value, index) order; a merge kills the younger
    component (elder rule, ties broken by the smaller birth vertex). The
    surviving component is the single essential class.
    """
    v = f.values
    n = f.grid.n
    order = sorted(range(n), key=lambda i: (v[i], i))
    uf = _UnionFind(n)
    added = [False] * n
    pairs: list[tuple[float, float]] = []

    for i in order:
        added[i] = True
        uf.birth[i] = float(v[i])
        uf.birth_vertex[i] = i
        for j in ((i - 1) % n, (i + 1) % n):
            if not added[j]:
                continue
            ri, rj = uf.find(i), uf.find(j)
            if ri == rj:
                continue  # closing the cycle: degree-1 event, out of scope
            # elder rule: keep the component born first
            if (uf.birth[ri], uf.birth_vertex[ri]) <= (uf.birth[rj], uf.birth_vertex[rj]):
                elder, younger = ri, rj
            else:
                elder, younger = rj, ri
            if uf.birth[younger] < v[i]:
                pairs.append((uf.birth[younger], float(v[i])))
            uf.parent[younger] = elder

    root = uf.find(0)
    return PersistenceDiagram(tuple(pairs), (uf.birth[root],))


def diagram_equal(d1: PersistenceDiagram, d2: PersistenceDiagram,
                  tol: float) -> bool:
    """True iff the bottleneck distance between the diagrams is <= tol."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    from .matching import bottleneck
    dist, _ = bottleneck(d1, d2)
    return dist <= tol
