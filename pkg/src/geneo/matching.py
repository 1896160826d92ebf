"""Bottleneck (matching) distance between persistence diagrams.

Finite points may be matched to each other (L-inf cost) or to the diagonal
(cost (death - birth) / 2); the optimum is found by binary search over the
finite set of candidate costs with a bipartite perfect-matching feasibility
test. Essential points match essential points only, by sorted-order pairing.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .persistence import PersistenceDiagram

__all__ = ["Matching", "bottleneck", "bottleneck_distance"]

INF = math.inf


@dataclass(frozen=True)
class Matching:
    """Optimal assignment realizing the bottleneck cost.

    finite_pairs holds (i, j) index pairs into the diagrams' finite points;
    None on either side means the diagonal. essential_pairs pairs essential
    births in sorted order.
    """

    cost: float
    finite_pairs: tuple[tuple[Optional[int], Optional[int]], ...]
    essential_pairs: tuple[tuple[float, float], ...]

    def to_json_dict(self, d1: PersistenceDiagram, d2: PersistenceDiagram) -> dict:
        def point(diagram, idx):
            return None if idx is None else list(diagram.finite[idx])
        return {
            "cost": self.cost if math.isfinite(self.cost) else "inf",
            "finite": [{"from": point(d1, i), "to": point(d2, j)}
                       for i, j in self.finite_pairs],
            "essential": [{"from": b1, "to": b2} for b1, b2 in self.essential_pairs],
        }

    def to_json(self, d1: PersistenceDiagram, d2: PersistenceDiagram) -> str:
        return json.dumps(self.to_json_dict(d1, d2))


def _diag_costs(points: np.ndarray) -> np.ndarray:
    if points.size == 0:
        return np.empty(0)
    return (points[:, 1] - points[:, 0]) / 2.0


def _perfect_matching(m1: int, m2: int, dist: np.ndarray,
                      diag1: np.ndarray, diag2: np.ndarray,
                      t: float) -> Optional[list[int]]:
    """Perfect matching in the diagram graph at threshold t, or None.

    Left side: m1 points then m2 diagonal slots; right side: m2 points then
    m1 diagonal slots. Returns match_left, where match_left[u] is the right
    node matched to left node u.
    """
    n_left = m1 + m2
    n_right = m2 + m1

    def neighbors(u: int):
        if u < m1:
            for j in range(m2):
                if dist[u, j] <= t:
                    yield j
            if diag1[u] <= t:
                yield from range(m2, n_right)
        else:
            for j in range(m2):
                if diag2[j] <= t:
                    yield j
            yield from range(m2, n_right)  # diagonal-diagonal is free

    match_left = [-1] * n_left
    match_right = [-1] * n_right

    def augment(u: int, seen: list[bool]) -> bool:
        for v in neighbors(u):
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] == -1 or augment(match_right[v], seen):
                match_left[u] = v
                match_right[v] = u
                return True
        return False

    for u in range(n_left):
        if not augment(u, [False] * n_right):
            return None
    return match_left


def bottleneck(d1: PersistenceDiagram,
               d2: PersistenceDiagram) -> tuple[float, Matching]:
    """Bottleneck distance and a witnessing matching.

    Returns +inf (with an empty matching) when the essential multiplicities
    differ; otherwise the max of the finite-part bottleneck and the sorted
    essential-birth mismatch.
    """
    if len(d1.essential) != len(d2.essential):
        return INF, Matching(INF, (), ())
    e1 = sorted(d1.essential)
    e2 = sorted(d2.essential)
    essential_pairs = tuple(zip(e1, e2))
    essential_cost = max((abs(a - b) for a, b in essential_pairs), default=0.0)

    p1 = np.array(d1.finite, dtype=np.float64).reshape(-1, 2)
    p2 = np.array(d2.finite, dtype=np.float64).reshape(-1, 2)
    m1, m2 = len(p1), len(p2)
    diag1 = _diag_costs(p1)
    diag2 = _diag_costs(p2)

    if m1 == 0 and m2 == 0:
        return essential_cost, Matching(essential_cost, (), essential_pairs)

    if m1 and m2:
        dist = np.maximum(np.abs(p1[:, None, 0] - p2[None, :, 0]),
                          np.abs(p1[:, None, 1] - p2[None, :, 1]))
    else:
        dist = np.empty((m1, m2))

    # The optimum always lies in the candidate set of pairwise and diagonal
    # costs, so a discrete binary search is exact.
    candidates = np.unique(np.concatenate([dist.ravel(), diag1, diag2, [0.0]]))
    lo, hi = 0, len(candidates) - 1
    match_at_hi = _perfect_matching(m1, m2, dist, diag1, diag2, candidates[hi])
    assert match_at_hi is not None  # everything fits on the diagonal
    best_match = match_at_hi
    while lo < hi:
        mid = (lo + hi) // 2
        match = _perfect_matching(m1, m2, dist, diag1, diag2, candidates[mid])
        if match is None:
            lo = mid + 1
        else:
            hi = mid
            best_match = match
    finite_cost = float(candidates[lo])

    pairs: list[tuple[Optional[int], Optional[int]]] = []
    for u in range(m1):
        v = best_match[u]
        pairs.append((u, v if v < m2 else None))
    matched_right = {v for v in best_match[:m1] if v < m2}
    for j in range(m2):
        if j not in matched_right:
            pairs.append((None, j))

    cost = max(finite_cost, essential_cost)
    return cost, Matching(cost, tuple(pairs), essential_pairs)


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    return bottleneck(d1, d2)[0]
