"""Median-split spatial tree over colored points.

The tree serves four jobs for the solver: canonical decomposition of a ball
query into disjoint subtrees, additive annotations on those subtrees
(aggregate sums and flow sums), weighted sampling without replacement, and
activity flags for conflict-free rounding.

A canonical query with radius r returns pairwise-disjoint subtrees whose
point set U is sandwiched between the query ball and its inflated version:

    P n B(c, r)  <=  U  <=  P n B(c, (1+eps)*r)

where eps is the inflation factor the index was built with.

Concurrency: building and read-only queries (canonical_nodes, path_sum,
region_free) are safe under concurrent readers once the index is built.  All
annotation mutations require exclusive access (single writer); an index can
be handed between threads but never mutated from two at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyDataset,
    ExhaustedMass,
    InvalidCoordinate,
    InvalidRadius,
    UnknownPoint,
)

MASS_TOL = 1e-12


@dataclass(frozen=True, slots=True, eq=False)
class ColoredPoint:
    """A d-dimensional point with a stable id and a color id."""

    index: int
    coords: np.ndarray
    color: int


@dataclass(frozen=True, slots=True, eq=False)
class BoundingBox:
    lo: np.ndarray
    hi: np.ndarray

    def contains_box(self, other: "BoundingBox") -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))

    def contains_point(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(self.lo <= p) and np.all(p <= self.hi))


def points_as_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    """Stack a ColoredPoint list into (coords, colors) arrays, validating it."""
    if points is None or len(points) == 0:
        raise EmptyDataset("no points supplied")
    try:
        coords = np.asarray([np.asarray(p.coords, dtype=float) for p in points], dtype=float)
    except ValueError:
        raise InvalidCoordinate("points disagree on dimension") from None
    if coords.ndim != 2 or coords.shape[1] < 1:
        raise InvalidCoordinate("points must share one dimension d >= 1")
    if not np.all(np.isfinite(coords)):
        bad = int(np.argwhere(~np.isfinite(coords))[0][0])
        raise InvalidCoordinate(f"non-finite coordinate at point {points[bad].index}")
    colors = np.asarray([p.color for p in points], dtype=np.int64)
    return coords, colors


class SpatialIndex:
    """Array-backed binary tree; nodes are preorder-numbered, root is 0.

    Leaves hold exactly one point id.  ``left/right`` are -1 at leaves and
    ``leaf_point`` is -1 at internal nodes.  Annotation arrays (``agg_sum``,
    ``flow_sum``, ``active``, ``subtree_mass``) are indexed by node id.
    """

    def __init__(self, coords: np.ndarray, epsilon: float):
        n, d = coords.shape
        self.epsilon = float(epsilon)
        self.coords = coords
        self.n = n
        self.dim = d

        n_nodes = 2 * n - 1
        self.left = np.full(n_nodes, -1, dtype=np.int64)
        self.right = np.full(n_nodes, -1, dtype=np.int64)
        self.parent = np.full(n_nodes, -1, dtype=np.int64)
        self.leaf_point = np.full(n_nodes, -1, dtype=np.int64)
        self.box_lo = np.empty((n_nodes, d), dtype=float)
        self.box_hi = np.empty((n_nodes, d), dtype=float)
        self.depth = np.zeros(n_nodes, dtype=np.int64)
        self.leaf_of_point = np.empty(n, dtype=np.int64)
        self.n_nodes = n_nodes

        self._next = 0
        self._build(np.arange(n, dtype=np.int64), -1)
        assert self._next == n_nodes

        # node ids grouped by depth, deepest first; used for bottom-up sweeps
        order = np.argsort(self.depth, kind="stable")
        bounds = np.searchsorted(self.depth[order], np.arange(self.depth.max() + 2))
        self._levels_deep_first = [
            order[bounds[lv] : bounds[lv + 1]] for lv in range(len(bounds) - 1)
        ][::-1]

        self.agg_sum = np.zeros(n_nodes, dtype=float)
        self.flow_sum = np.zeros(n_nodes, dtype=float)
        self.active = np.ones(n_nodes, dtype=bool)
        self.subtree_mass = np.zeros(n_nodes, dtype=float)
        self.point_weight = np.zeros(n, dtype=float)
        self.colors = np.zeros(n, dtype=np.int64)  # filled by build_index

    def _build(self, ids: np.ndarray, parent: int) -> int:
        u = self._next
        self._next += 1
        self.parent[u] = parent
        self.depth[u] = 0 if parent < 0 else self.depth[parent] + 1
        pts = self.coords[ids]
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        self.box_lo[u] = lo
        self.box_hi[u] = hi
        if len(ids) == 1:
            pid = int(ids[0])
            self.leaf_point[u] = pid
            self.leaf_of_point[pid] = u
            return u
        # widest extent wins, ties to the lowest dimension; lower median split,
        # coordinate ties broken toward the lower point id
        dim = int(np.argmax(hi - lo))
        order = np.lexsort((ids, pts[:, dim]))
        mid = (len(ids) - 1) // 2
        self.left[u] = self._build(ids[order[: mid + 1]], u)
        self.right[u] = self._build(ids[order[mid + 1 :]], u)
        return u

    def box(self, node: int) -> BoundingBox:
        return BoundingBox(self.box_lo[node].copy(), self.box_hi[node].copy())

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def height(self) -> int:
        return int(self.depth.max())

    def path_nodes(self, point_id: int) -> list[int]:
        """Node ids on the leaf-to-root path of a point."""
        if not 0 <= point_id < self.n:
            raise UnknownPoint(f"point id {point_id} outside [0, {self.n})")
        u = int(self.leaf_of_point[point_id])
        path = [u]
        while self.parent[u] >= 0:
            u = int(self.parent[u])
            path.append(u)
        return path

    def subtree_points(self, node: int) -> list[int]:
        """Point ids stored below a node (inclusive)."""
        out: list[int] = []
        stack = [node]
        while stack:
            u = stack.pop()
            if self.left[u] < 0:
                out.append(int(self.leaf_point[u]))
            else:
                stack.append(int(self.right[u]))
                stack.append(int(self.left[u]))
        return out


def build_index(points, epsilon: float) -> SpatialIndex:
    """Build the median-split tree; deterministic for a fixed input order.

    Point ids must be unique and dense in [0, n) and are used as the tree's
    point identifiers everywhere downstream.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1]; got {epsilon}")
    coords, colors = points_as_arrays(points)
    ids = sorted(int(p.index) for p in points)
    if ids != list(range(len(points))):
        raise ValueError("point ids must be unique and dense in [0, n)")
    order = np.argsort([p.index for p in points], kind="stable")
    index = SpatialIndex(coords[order], epsilon)
    index.colors = colors[order]
    return index


def _box_dists2(lo, hi, c):
    """Squared min and max distance from a point to an axis-aligned box."""
    below = np.maximum(lo - c, 0.0)
    above = np.maximum(c - hi, 0.0)
    off = below + above
    mind2 = float(np.dot(off, off))
    far = np.maximum(np.abs(c - lo), np.abs(c - hi))
    maxd2 = float(np.dot(far, far))
    return mind2, maxd2


def canonical_nodes(index: SpatialIndex, center, radius: float, *, prune_zero_mass: bool = False) -> list[int]:
    """Disjoint subtrees sandwiching the ball B(center, radius).

    Descent rule: a node is skipped when its box misses the inflated ball
    B(center, (1+eps)*radius); it is emitted when its box lies entirely
    inside the inflated ball; otherwise it is split.  Leaf boxes are single
    points, so every leaf resolves to emit-or-skip and the descent is finite.

    With ``prune_zero_mass`` the descent additionally skips subtrees whose
    ``subtree_mass`` is (numerically) zero, so consumed regions are invisible.
    """
    if radius < 0:
        raise InvalidRadius(f"radius must be nonnegative; got {radius}")
    c = np.asarray(center, dtype=float)
    if c.shape != (index.dim,):
        raise InvalidCoordinate(f"center dimension {c.shape} does not match index d={index.dim}")
    r_inf = (1.0 + index.epsilon) * radius
    r2 = r_inf * r_inf
    out: list[int] = []
    stack = [0]
    while stack:
        u = stack.pop()
        if prune_zero_mass and index.subtree_mass[u] <= MASS_TOL:
            continue
        mind2, maxd2 = _box_dists2(index.box_lo[u], index.box_hi[u], c)
        if mind2 > r2:
            continue
        if maxd2 <= r2:
            out.append(u)
            continue
        stack.append(int(index.right[u]))
        stack.append(int(index.left[u]))
    return out


def canonical_nodes_batch(index: SpatialIndex, centers: np.ndarray, radius: float):
    """Canonical nodes for many query centers at once.

    Returns (owners, nodes): flat arrays where ``nodes[t]`` is canonical for
    the query ``owners[t]``, sorted by owner.  Vectorized level-by-level
    descent; emits the same node sets as ``canonical_nodes`` per query.
    """
    if radius < 0:
        raise InvalidRadius(f"radius must be nonnegative; got {radius}")
    centers = np.asarray(centers, dtype=float)
    nq = centers.shape[0]
    r_inf = (1.0 + index.epsilon) * radius
    r2 = r_inf * r_inf

    q = np.arange(nq, dtype=np.int64)
    u = np.zeros(nq, dtype=np.int64)
    out_q: list[np.ndarray] = []
    out_u: list[np.ndarray] = []
    while len(q):
        lo = index.box_lo[u]
        hi = index.box_hi[u]
        c = centers[q]
        off = np.maximum(lo - c, 0.0) + np.maximum(c - hi, 0.0)
        mind2 = np.einsum("ij,ij->i", off, off)
        far = np.maximum(np.abs(c - lo), np.abs(c - hi))
        maxd2 = np.einsum("ij,ij->i", far, far)
        keep = mind2 <= r2
        emit = keep & (maxd2 <= r2)
        if emit.any():
            out_q.append(q[emit])
            out_u.append(u[emit])
        rec = keep & ~emit  # only internal nodes can land here
        qr = q[rec]
        ur = u[rec]
        q = np.concatenate([qr, qr])
        u = np.concatenate([index.left[ur], index.right[ur]])
    if not out_q:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    owners = np.concatenate(out_q)
    nodes = np.concatenate(out_u)
    order = np.argsort(owners, kind="stable")
    return owners[order], nodes[order]


def covered_points(index: SpatialIndex, center, radius: float) -> set[int]:
    """Materialize the point ids spanned by a canonical query."""
    out: set[int] = set()
    for u in canonical_nodes(index, center, radius):
        out.update(index.subtree_points(u))
    return out


def clear_annotations(index: SpatialIndex) -> None:
    """Reset all node annotations and sampling weights; idempotent."""
    index.agg_sum[:] = 0.0
    index.flow_sum[:] = 0.0
    index.active[:] = True
    index.subtree_mass[:] = 0.0
    index.point_weight[:] = 0.0


def add_to_canonical(index: SpatialIndex, center, radius: float, value: float) -> None:
    """Add ``value`` to agg_sum of every canonical node of the ball."""
    nodes = canonical_nodes(index, center, radius)
    index.agg_sum[nodes] += value


def path_sum(index: SpatialIndex, point_id: int) -> float:
    """Sum agg_sum over the point's leaf-to-root path.

    By disjointness of canonical decompositions this equals the total value
    accumulated by every prior add_to_canonical whose covered set contains
    the point.
    """
    total = 0.0
    for u in index.path_nodes(point_id):
        total += index.agg_sum[u]
    return float(total)


def add_along_path(index: SpatialIndex, point_id: int, value: float) -> None:
    """Add ``value`` to flow_sum on the point's leaf-to-root path."""
    for u in index.path_nodes(point_id):
        index.flow_sum[u] += value


def canonical_flow_sum(index: SpatialIndex, center, radius: float) -> float:
    """Sum flow_sum over the canonical nodes of the ball.

    Equals the total path-loaded mass of points inside the covered set.
    """
    total = 0.0
    for u in canonical_nodes(index, center, radius):
        total += index.flow_sum[u]
    return float(total)


def init_sampling(index: SpatialIndex, weights) -> None:
    """Load per-point sampling weights; subtree_mass becomes subtree sums."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (index.n,):
        raise ValueError(f"weights must have length {index.n}")
    if np.any(w < 0):
        raise ValueError("sampling weights must be nonnegative")
    index.point_weight[:] = w
    mass = index.subtree_mass
    mass[:] = 0.0
    leaf_mask = index.leaf_point >= 0
    mass[leaf_mask] = w[index.leaf_point[leaf_mask]]
    for level in index._levels_deep_first:
        internal = level[index.left[level] >= 0]
        if len(internal):
            mass[internal] = mass[index.left[internal]] + mass[index.right[internal]]


def sample_remove(index: SpatialIndex, rng: np.random.Generator) -> int:
    """Draw a live point with probability weight / remaining total, remove it.

    Descends the tree choosing a child with probability proportional to its
    subtree mass, then subtracts the drawn point's weight along its path.
    """
    if index.subtree_mass[0] <= MASS_TOL:
        raise ExhaustedMass("no sampling mass left")
    u = 0
    while index.left[u] >= 0:
        ml = index.subtree_mass[index.left[u]]
        mr = index.subtree_mass[index.right[u]]
        if ml <= 0.0 and mr <= 0.0:  # numerical dust: force the larger side
            u = int(index.left[u] if ml >= mr else index.right[u])
            continue
        draw = rng.random() * (ml + mr)
        u = int(index.left[u] if draw < ml else index.right[u])
    pid = int(index.leaf_point[u])
    w = index.point_weight[pid]
    index.point_weight[pid] = 0.0
    while u >= 0:
        index.subtree_mass[u] = max(index.subtree_mass[u] - w, 0.0)
        u = int(index.parent[u])
    return pid


def region_free(index: SpatialIndex, center, radius: float) -> bool:
    """True iff every canonical node of the ball is still active."""
    return all(index.active[u] for u in canonical_nodes(index, center, radius))


def deactivate_path(index: SpatialIndex, point_id: int) -> None:
    """Mark the point's leaf-to-root path inactive."""
    for u in index.path_nodes(point_id):
        index.active[u] = False


def euclidean(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(math.sqrt(np.dot(a - b, a - b)))
