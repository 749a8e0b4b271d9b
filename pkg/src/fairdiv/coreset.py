"""Per-color k-center coresets that preserve the fair diversity value.

Running any constant-factor k-center routine per color and keeping the
centers yields a small subset that still contains a near-optimal fair
selection; the solver then runs on the coreset instead of the full input.
Per-color runs are independent and could execute concurrently.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDataset, SpecUnsatisfiableOnCoreset
from .candidates import farthest_point_ids
from .geometry import ColoredPoint, points_as_arrays
from .solver import FairnessSpec, MwuParams, Solution, mfd


@dataclass(frozen=True, slots=True)
class KCenterResult:
    center_ids: list[int]  # original point ids
    radius: float  # realized covering radius over the input


def gonzalez_kcenter(points, k_prime: int) -> KCenterResult:
    """Farthest-point traversal from the first point; 2-approximate centers.

    Runs min(k', n) rounds and reports the realized covering radius.
    """
    if len(points) == 0:
        raise EmptyDataset("k-center needs at least one point")
    if k_prime < 1:
        raise ValueError(f"k_prime must be positive; got {k_prime}")
    coords, _ = points_as_arrays(points)
    ids = [int(p.index) for p in points]
    picked = farthest_point_ids(coords, min(k_prime, len(points)))
    centers = coords[picked]
    d2 = np.full(len(points), np.inf)
    for c in centers:
        diff = coords - c
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)
    return KCenterResult(
        center_ids=[ids[i] for i in picked],
        radius=float(np.sqrt(d2.max())),
    )


def optimal_kcenter(points, k_prime: int) -> KCenterResult:
    """Exhaustive discrete k-center; tiny inputs only.  Plug-in alternative
    used to show the coreset is routine-agnostic."""
    from itertools import combinations

    from scipy.spatial.distance import cdist

    if len(points) == 0:
        raise EmptyDataset("k-center needs at least one point")
    coords, _ = points_as_arrays(points)
    ids = [int(p.index) for p in points]
    n = len(points)
    if k_prime >= n:
        return KCenterResult(center_ids=list(ids), radius=0.0)
    dmat = cdist(coords, coords)
    best_r = np.inf
    best: tuple[int, ...] = tuple(range(k_prime))
    for centers in combinations(range(n), k_prime):
        r = float(dmat[:, centers].min(axis=1).max())
        if r < best_r:
            best_r = r
            best = centers
    return KCenterResult(center_ids=[ids[i] for i in best], radius=best_r)


def build_coreset(points, spec: FairnessSpec, k_prime_per_color: int,
                  kcenter_fn=gonzalez_kcenter) -> list[ColoredPoint]:
    """Union of per-color center sets, ordered by original id.

    Every coreset point keeps its original id and color so downstream
    selections refer to the source dataset.
    """
    if k_prime_per_color < max(spec.per_color):
        raise SpecUnsatisfiableOnCoreset(
            f"center budget {k_prime_per_color} is below the largest quota "
            f"{max(spec.per_color)}"
        )
    by_color: dict[int, list[ColoredPoint]] = {}
    for p in sorted(points, key=lambda p: p.index):
        by_color.setdefault(int(p.color), []).append(p)
    keep: list[ColoredPoint] = []
    for j in sorted(by_color):
        members = by_color[j]
        result = kcenter_fn(members, k_prime_per_color)
        lookup = {p.index: p for p in members}
        keep.extend(lookup[i] for i in result.center_ids)
    keep.sort(key=lambda p: p.index)
    return keep


def mfd_with_coreset(points, spec: FairnessSpec, epsilon: float | None = None,
                     params: MwuParams | None = None,
                     rng: np.random.Generator | int | None = None,
                     k_prime_per_color: int | None = None,
                     search_mode: str = "decay",
                     kcenter_fn=gonzalez_kcenter) -> Solution:
    """Coreset construction followed by the solver on the coreset.

    The default center budget is the total quota per color, so the coreset
    holds at most m*k points.  Selected ids refer to the original dataset.
    """
    if params is None:
        params = MwuParams(epsilon=0.25 if epsilon is None else epsilon)
    if k_prime_per_color is None:
        k_prime_per_color = max(spec.total, max(spec.per_color))
    t0 = time.perf_counter()
    core = build_coreset(points, spec, k_prime_per_color, kcenter_fn)
    t_core = time.perf_counter() - t0

    original_ids = [p.index for p in core]
    local = [ColoredPoint(t, p.coords, p.color) for t, p in enumerate(core)]
    sol = mfd(local, spec, params=params, search_mode=search_mode, rng=rng)
    sol.selected = sorted(original_ids[i] for i in sol.selected)
    sol.timings = {"coreset": t_core, **sol.timings}
    return sol
