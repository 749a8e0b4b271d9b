"""Candidate diversity values for the threshold search.

Three sources: the exact set of pairwise distances, a well-separated pair
decomposition that brackets every pairwise distance within (1 +- eps) using
only O(n / eps^d) values, and a geometric decay schedule started from a
farthest-point upper bound.  All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import EmptyCandidates, NotEnoughPoints, TooFewPoints
from .geometry import points_as_arrays

EXACT_CUTOFF = 4096


@dataclass(frozen=True, slots=True)
class CandidateSet:
    values: np.ndarray  # strictly increasing, all > 0
    mode: str  # "exact" | "wspd" | "decay"


def exact_candidates(points) -> CandidateSet:
    """All distinct nonzero pairwise distances, ascending."""
    if len(points) < 2:
        raise TooFewPoints("need at least two points for pairwise distances")
    coords, _ = points_as_arrays(points)
    values = np.unique(pdist(coords))
    values = values[values > 0.0]
    if len(values) == 0:
        raise EmptyCandidates("all pairwise distances are zero")
    return CandidateSet(values=values, mode="exact")


class _QuadNode:
    __slots__ = ("center", "half", "children", "rep", "radius")

    def __init__(self, center, half, rep):
        self.center = center
        self.half = half  # half side length of the cell
        self.children: list[_QuadNode] = []
        self.rep = rep  # lowest point id in the subtree
        self.radius = 0.0  # ball radius covering the cell (0 for point leaf)


def _build_quadtree(coords: np.ndarray) -> _QuadNode:
    n, d = coords.shape
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    side = float((hi - lo).max())
    if side <= 0.0:
        root = _QuadNode(lo.copy(), 0.0, 0)
        return root
    center = (lo + hi) / 2.0
    half = side / 2.0 * 1.0000001  # guard against points on the boundary
    sqrt_d = float(np.sqrt(d))

    def build(ids: np.ndarray, center: np.ndarray, half: float) -> _QuadNode:
        pts = coords[ids]
        spread = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
        if len(ids) == 1 or spread == 0.0:
            # single point or a group of exact duplicates
            return _QuadNode(pts[0].copy(), 0.0, int(ids.min()))
        # compress: shrink the cell while only one orthant is occupied; points
        # a few ulps apart are grouped once the cell can no longer move
        floor = 1e-13 * (1.0 + float(np.abs(center).max()))
        while True:
            masks = pts >= center  # (m, d) orthant bits
            codes = masks.dot(1 << np.arange(d))
            present = np.unique(codes)
            if len(present) > 1:
                break
            if half <= floor:  # cannot shrink further in float; group the ids
                return _QuadNode(pts[0].copy(), 0.0, int(ids.min()))
            bits = np.array([(present[0] >> t) & 1 for t in range(d)], dtype=float)
            center = center + (bits - 0.5) * half
            half /= 2.0
        node = _QuadNode(center.copy(), half, int(ids.min()))
        node.radius = half * sqrt_d
        for code in present:
            sub = ids[codes == code]
            bits = np.array([(code >> t) & 1 for t in range(d)], dtype=float)
            child_center = center + (bits - 0.5) * half
            node.children.append(build(sub, child_center, half / 2.0))
        return node

    return build(np.arange(n, dtype=np.int64), center, half)


def wspd_candidates(points, epsilon: float) -> CandidateSet:
    """Representative distances from a well-separated pair decomposition.

    Pairs are split until the cell-ball distance is at least (s/2) times the
    larger cell-ball diameter with separation s = 4/eps, which makes every
    representative distance land within (1 +- eps) of every cross distance of
    its pair.  Duplicate values are collapsed.
    """
    if len(points) < 2:
        raise TooFewPoints("need at least two points for pairwise distances")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1]; got {epsilon}")
    coords, _ = points_as_arrays(points)
    root = _build_quadtree(coords)
    s = 4.0 / epsilon
    dists: list[float] = []

    def separated(a: _QuadNode, b: _QuadNode) -> bool:
        gap = float(np.linalg.norm(a.center - b.center)) - a.radius - b.radius
        return gap >= s * max(a.radius, b.radius)

    def pair(a: _QuadNode, b: _QuadNode) -> None:
        if a is b:
            kids = a.children
            for i in range(len(kids)):
                for j in range(i + 1, len(kids)):
                    pair(kids[i], kids[j])
            for kid in kids:
                pair(kid, kid)
            return
        if separated(a, b):
            dist = float(np.linalg.norm(coords[a.rep] - coords[b.rep]))
            if dist > 0.0:
                dists.append(dist)
            return
        if a.radius < b.radius:
            a, b = b, a
        if not a.children:  # two coincident-point leaves
            return
        for kid in a.children:
            pair(kid, b)

    pair(root, root)
    values = np.unique(np.asarray(dists, dtype=float))
    if len(values) == 0:
        raise EmptyCandidates("all pairwise distances are zero")
    return CandidateSet(values=values, mode="wspd")


def default_candidates(points, epsilon: float) -> CandidateSet:
    """Exact distances up to the size cutoff, WSPD beyond it."""
    if len(points) <= EXACT_CUTOFF:
        return exact_candidates(points)
    return wspd_candidates(points, epsilon)


def farthest_point_ids(coords: np.ndarray, k: int, start: int = 0) -> np.ndarray:
    """Greedy farthest-point traversal; returns the ids in selection order."""
    n = coords.shape[0]
    k = min(k, n)
    ids = np.empty(k, dtype=np.int64)
    ids[0] = start
    d2 = np.einsum("ij,ij->i", coords - coords[start], coords - coords[start])
    for t in range(1, k):
        nxt = int(np.argmax(d2))  # ties resolve to the lowest index
        ids[t] = nxt
        diff = coords - coords[nxt]
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)
    return ids


def gonzalez_upper_bound(points, k: int) -> float:
    """Color-blind farthest-point bound on the achievable diversity.

    Runs k rounds of the greedy traversal from point 0 and returns the
    minimum pairwise distance among the selected points; any subset of k or
    more points has diversity no larger than this on typical inputs.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2; got {k}")
    if k > len(points):
        raise NotEnoughPoints(f"k={k} exceeds n={len(points)}")
    coords, _ = points_as_arrays(points)
    ids = farthest_point_ids(coords, k)
    sel = coords[ids]
    return float(np.min(pdist(sel))) if len(sel) > 1 else float("inf")


def decay_schedule(gamma_max: float, factor: float = 0.85, max_steps: int = 200) -> list[float]:
    """Geometric ladder [gamma_max, gamma_max*factor, ...], first-feasible-wins."""
    if gamma_max <= 0:
        raise ValueError(f"gamma_max must be positive; got {gamma_max}")
    if not 0.0 < factor < 1.0:
        raise ValueError(f"factor must lie in (0, 1); got {factor}")
    return [gamma_max * factor**i for i in range(max_steps)]
