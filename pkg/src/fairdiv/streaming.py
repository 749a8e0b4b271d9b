"""Streaming synopsis for fair diversification.

One pass over the stream maintains, per color, a small center set under the
doubling rule: centers live at pairwise distance > 2r, the radius doubles on
overflow, and nearby centers merge.  Every streamed point stays within a
small multiple of the final radius of some kept center, so the synopsis is a
k-center-style coreset and a query is just the offline solver run on it.

StreamState is single-writer; a query snapshots the synopsis so later
inserts do not disturb it.
"""

from __future__ import annotations

import numpy as np

from .errors import SpecUnsatisfiableOnSynopsis, UnknownColor
from .geometry import ColoredPoint
from .solver import FairnessSpec, MwuParams, Solution, mfd


class ColorCenters:
    """Doubling-rule center set for one color."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.centers: list[ColoredPoint] = []
        self.radius = 0.0
        self._coords = np.empty((0, 0))

    def _sync(self) -> None:
        self._coords = (
            np.asarray([c.coords for c in self.centers], dtype=float)
            if self.centers
            else np.empty((0, 0))
        )

    def _min_dist(self, coords: np.ndarray) -> float:
        if len(self.centers) == 0:
            return float("inf")
        diff = self._coords - coords
        return float(np.sqrt(np.einsum("ij,ij->i", diff, diff).min()))

    def _min_pairwise(self) -> float:
        best = float("inf")
        for i in range(len(self.centers)):
            for j in range(i + 1, len(self.centers)):
                d = float(np.linalg.norm(self._coords[i] - self._coords[j]))
                best = min(best, d)
        return best

    def _merge_overflow(self) -> None:
        while len(self.centers) > self.capacity:
            if self.radius == 0.0:
                self.radius = self._min_pairwise() / 2.0
            else:
                self.radius *= 2.0
            kept: list[ColoredPoint] = []
            kept_coords: list[np.ndarray] = []
            for c in self.centers:  # stored order; keep what stays far apart
                coords = np.asarray(c.coords, dtype=float)
                if all(
                    float(np.linalg.norm(coords - kc)) > 2.0 * self.radius
                    for kc in kept_coords
                ):
                    kept.append(c)
                    kept_coords.append(coords)
            self.centers = kept
            self._sync()

    def insert(self, p: ColoredPoint) -> None:
        coords = np.asarray(p.coords, dtype=float)
        if self.radius == 0.0:
            if self._min_dist(coords) == 0.0:
                return  # exact duplicate of a kept center
            self.centers.append(p)
            self._sync()
            self._merge_overflow()
            return
        if self._min_dist(coords) > 2.0 * self.radius:
            self.centers.append(p)
            self._sync()
            self._merge_overflow()


class StreamState:
    """Per-color doubling synopses plus arrival tallies."""

    def __init__(self, num_colors: int, capacity: int):
        self.num_colors = num_colors
        self.capacity = capacity
        self.per_color = {j: ColorCenters(capacity) for j in range(num_colors)}
        self.seen_counts = [0] * num_colors

    def stored_total(self) -> int:
        return sum(len(cc.centers) for cc in self.per_color.values())

    def snapshot(self) -> list[ColoredPoint]:
        """The synopsis as one list, ordered by original stream id."""
        out: list[ColoredPoint] = []
        for cc in self.per_color.values():
            out.extend(cc.centers)
        out.sort(key=lambda p: p.index)
        return out


def stream_insert(state: StreamState, p: ColoredPoint) -> None:
    """Feed one point through its color's doubling rule."""
    if not 0 <= p.color < state.num_colors:
        raise UnknownColor(f"color {p.color} outside [0, {state.num_colors})")
    state.seen_counts[p.color] += 1
    state.per_color[p.color].insert(p)


def stream_query(state: StreamState, spec: FairnessSpec,
                 epsilon: float | None = None,
                 params: MwuParams | None = None,
                 rng: np.random.Generator | int | None = None,
                 search_mode: str = "decay") -> Solution:
    """Run the solver on a snapshot of the synopsis.

    Selected ids are original stream ids.  A query may run while later
    inserts continue, since it only touches its own snapshot.
    """
    if params is None:
        params = MwuParams(epsilon=0.25 if epsilon is None else epsilon)
    synopsis = state.snapshot()
    counts = np.zeros(spec.num_colors, dtype=int)
    for p in synopsis:
        if p.color < spec.num_colors:
            counts[p.color] += 1
    for j, kj in enumerate(spec.per_color):
        if counts[j] < kj:
            raise SpecUnsatisfiableOnSynopsis(
                f"color {j} holds {int(counts[j])} centers but quota is {kj}"
            )
    original_ids = [p.index for p in synopsis]
    local = [ColoredPoint(t, p.coords, p.color) for t, p in enumerate(synopsis)]
    sol = mfd(local, spec, params=params, search_mode=search_mode, rng=rng)
    sol.selected = sorted(original_ids[i] for i in sol.selected)
    return sol
