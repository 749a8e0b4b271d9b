"""Independent brute-force references for desk-scale verification.

Everything here favors obviousness over speed and is guarded to stay
tractable: exhaustive fair-diversity search, exhaustive discrete k-center,
and direct O(n^2) evaluations of the cover weights and feasibility rows that
the tree-based solver computes implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial.distance import cdist, squareform, pdist

from .errors import OracleTooLarge, SpecUnsatisfiable
from .geometry import SpatialIndex, build_index, covered_points, points_as_arrays

FAIRDIV_GUARD = 18
KCENTER_GUARD = 12


def brute_force_fairdiv(points, spec) -> tuple[float, set[int]]:
    """Exact optimum of the fair diversification problem by enumeration.

    Walks candidate thresholds downward and backtracks for a subset meeting
    every color quota with all pairwise distances >= threshold, pruning
    branches whose remaining color populations cannot fill the quotas.
    Returns (optimal diversity, one witness).  Diversity is +inf when the
    total quota is one point.
    """
    n = len(points)
    if n > FAIRDIV_GUARD:
        raise OracleTooLarge(f"brute force fair diversity is guarded at n <= {FAIRDIV_GUARD}")
    coords, colors = points_as_arrays(points)
    quotas = list(spec.per_color)
    pops = np.bincount(colors, minlength=len(quotas))
    for j, kj in enumerate(quotas):
        if kj > pops[j]:
            raise SpecUnsatisfiable(f"color {j} has {pops[j]} points but quota {kj}")
    k = sum(quotas)
    if k <= 1:
        j = next((j for j, kj in enumerate(quotas) if kj == 1), None)
        pick = 0 if j is None else int(np.flatnonzero(colors == j)[0])
        return float("inf"), {pick}

    dmat = squareform(pdist(coords))
    # remaining points of each color at or after position i
    suffix = np.zeros((n + 1, len(quotas)), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1]
        suffix[i, colors[i]] += 1

    def feasible_at(gamma: float) -> set[int] | None:
        chosen: list[int] = []
        need = quotas.copy()

        def rec(i: int) -> bool:
            if all(c <= 0 for c in need):
                return True
            if i == n:
                return False
            if any(need[j] > suffix[i, j] for j in range(len(need))):
                return False
            c = colors[i]
            ok = all(dmat[i, q] >= gamma for q in chosen)
            if ok:
                chosen.append(i)
                need[c] -= 1
                if rec(i + 1):
                    return True
                need[c] += 1
                chosen.pop()
            return rec(i + 1)

        return set(chosen) if rec(0) else None

    values = np.unique(dmat[np.triu_indices(n, 1)])[::-1]
    for gamma in values:
        witness = feasible_at(float(gamma))
        if witness is not None:
            return float(gamma), witness
    raise SpecUnsatisfiable("no subset meets the quotas")  # unreachable given the checks


def brute_force_kcenter(points, k: int) -> float:
    """Optimal discrete k-center radius by enumerating all center subsets."""
    n = len(points)
    if n > KCENTER_GUARD:
        raise OracleTooLarge(f"brute force k-center is guarded at n <= {KCENTER_GUARD}")
    if k >= n:
        return 0.0
    coords, _ = points_as_arrays(points)
    dmat = cdist(coords, coords)
    best = float("inf")
    for centers in combinations(range(n), k):
        radius = float(dmat[:, centers].min(axis=1).max())
        if radius < best:
            best = radius
    return best


def materialized_covers(index: SpatialIndex, coords: np.ndarray, radius: float) -> list[set[int]]:
    """The covered point set of every point's canonical query, by id."""
    return [covered_points(index, coords[i], radius) for i in range(len(coords))]


def reference_cover_weights(points, h, gamma: float, epsilon: float) -> np.ndarray:
    """O(n^2) recomputation of the oracle's aggregated weights.

    Materializes each query's covered set and sums h over the queries whose
    cover contains each point; validates the tree's path accumulation.
    """
    coords, _ = points_as_arrays(points)
    index = build_index(points, epsilon)
    radius = gamma / (2.0 * (1.0 + epsilon))
    h = np.asarray(h, dtype=float)
    w = np.zeros(len(points))
    for ell, cover in enumerate(materialized_covers(index, coords, radius)):
        for i in cover:
            w[i] += h[ell]
    return w


@dataclass
class VerificationReport:
    """Direct evaluation of every feasibility row on a fractional vector."""

    color_slacks: list[float]  # mass minus quota per color; negative = violated
    per_color_mass: list[float]
    cover_sums: np.ndarray
    max_cover_violation: float  # max cover sum minus (1 + epsilon); <= tol when ok
    box_ok: bool
    passed: bool
    details: dict = field(default_factory=dict)

    FAIRNESS_TOL = 1e-6
    COVER_TOL = 1e-6
    BOX_TOL = 1e-9


def verify_fractional(points, x_hat, spec, gamma: float, epsilon: float) -> VerificationReport:
    """Check fairness rows, cover rows, and box bounds of a fractional vector."""
    coords, colors = points_as_arrays(points)
    x = np.asarray(x_hat, dtype=float)
    index = build_index(points, epsilon)
    radius = gamma / (2.0 * (1.0 + epsilon))

    per_color_mass = [float(x[colors == j].sum()) for j in range(len(spec.per_color))]
    color_slacks = [m - kj for m, kj in zip(per_color_mass, spec.per_color)]

    cover_sums = np.array(
        [sum(x[i] for i in cover) for cover in materialized_covers(index, coords, radius)]
    )
    max_cover_violation = float(cover_sums.max() - (1.0 + epsilon)) if len(cover_sums) else 0.0
    box_ok = bool(np.all(x >= -VerificationReport.BOX_TOL) and np.all(x <= 1.0 + VerificationReport.BOX_TOL))

    passed = (
        all(s >= -VerificationReport.FAIRNESS_TOL for s in color_slacks)
        and max_cover_violation <= VerificationReport.COVER_TOL
        and box_ok
    )
    return VerificationReport(
        color_slacks=color_slacks,
        per_color_mass=per_color_mass,
        cover_sums=cover_sums,
        max_cover_violation=max_cover_violation,
        box_ok=box_ok,
        passed=passed,
    )
