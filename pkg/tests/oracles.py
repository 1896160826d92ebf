"""Independent brute-force oracles used to cross-check the library.

These deliberately avoid the library's algorithms: the diagram oracle
sweeps thresholds and tracks connected components directly, the bottleneck
oracle enumerates every matching.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from geneo.persistence import PersistenceDiagram


def cycle_components(included: np.ndarray) -> list[list[int]]:
    """Connected components of the included vertices on the cycle graph."""
    n = len(included)
    idx = np.flatnonzero(included)
    if idx.size == 0:
        return []
    if idx.size == n:
        return [list(range(n))]
    comps = []
    current: list[int] = []
    for i in idx:
        if current and i == current[-1] + 1:
            current.append(int(i))
        else:
            if current:
                comps.append(current)
            current = [int(i)]
    comps.append(current)
    # wrap-around join
    if len(comps) > 1 and comps[0][0] == 0 and comps[-1][-1] == n - 1:
        comps[0] = comps.pop() + comps[0]
    return comps


def sweep_diagram(values) -> PersistenceDiagram:
    """Threshold-sweep 0-degree sublevel persistence on the cycle graph."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    labels: list = [None] * n
    births: dict[int, float] = {}
    next_id = 0
    pairs = []
    for t in sorted(set(values.tolist())):
        included = values <= t
        new_labels: list = [None] * n
        for comp in cycle_components(included):
            prev = sorted({labels[v] for v in comp if labels[v] is not None})
            if not prev:
                cid = next_id
                next_id += 1
                births[cid] = t
            else:
                cid = min(prev, key=lambda c: (births[c], c))
                for c in prev:
                    if c != cid and births[c] < t:
                        pairs.append((births[c], t))
            for v in comp:
                new_labels[v] = cid
        labels = new_labels
    essential = births[labels[0]]
    return PersistenceDiagram(tuple(pairs), (essential,))


def _linf(p, q) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def _diag(p) -> float:
    return (p[1] - p[0]) / 2.0


def exhaustive_bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Minimum over all matchings of the max assignment cost."""
    if len(d1.essential) != len(d2.essential):
        return math.inf
    e1, e2 = sorted(d1.essential), sorted(d2.essential)
    essential_best = math.inf if e1 else 0.0
    for perm in itertools.permutations(range(len(e2))):
        cost = max((abs(e1[i] - e2[j]) for i, j in enumerate(perm)), default=0.0)
        essential_best = min(essential_best, cost)

    p1, p2 = list(d1.finite), list(d2.finite)
    best = math.inf

    def recurse(i: int, used: set, cost: float):
        nonlocal best
        if cost >= best:
            return
        if i == len(p1):
            rest = max((_diag(p2[j]) for j in range(len(p2)) if j not in used),
                       default=0.0)
            best = min(best, max(cost, rest))
            return
        recurse(i + 1, used, max(cost, _diag(p1[i])))  # diagonal
        for j in range(len(p2)):
            if j not in used:
                recurse(i + 1, used | {j}, max(cost, _linf(p1[i], p2[j])))

    recurse(0, set(), 0.0)
    return max(best, essential_best)
