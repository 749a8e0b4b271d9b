"""Multiplicative-weights feasibility solver for fair diversification.

For a diversity threshold gamma, the feasibility system asks for a
fractional selection x in [0,1]^n with at least k_j mass on every color and
at most unit mass on every point's tree cover at radius gamma/(2(1+eps)).
The quota rows live in the "easy" polytope handled exactly by the oracle;
the cover rows are driven by multiplicative weight updates and end up
satisfied within an additive eps.  Randomized rounding then turns the
fractional vector into a point set whose minimum pairwise distance is at
least the cover radius, with every color quota met within 1/(1+eps) in
expectation.

One solve owns its index exclusively (annotations are mutated throughout);
independent solves on independent indices may run concurrently.  All
randomness flows through an explicit generator argument.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from . import _kernels
from .candidates import decay_schedule, default_candidates, gonzalez_upper_bound
from .errors import ColorDeficit, EmptyCandidates, FailedAfterRepeats, NoFeasibleGamma
from .geometry import (
    MASS_TOL,
    SpatialIndex,
    add_along_path,
    add_to_canonical,
    build_index,
    canonical_flow_sum,
    canonical_nodes,
    canonical_nodes_batch,
    clear_annotations,
    deactivate_path,
    init_sampling,
    path_sum,
    points_as_arrays,
    region_free,
    sample_remove,
)

log = logging.getLogger("fairdiv")


@dataclass(frozen=True)
class FairnessSpec:
    """Per-color minimum counts; the total is the output size target."""

    per_color: tuple[int, ...]

    def __post_init__(self):
        if any(int(k) != k or k < 0 for k in self.per_color):
            raise ValueError("per-color quotas must be nonnegative integers")
        object.__setattr__(self, "per_color", tuple(int(k) for k in self.per_color))
        if self.total < 1:
            raise ValueError("at least one color must have a positive quota")

    @property
    def total(self) -> int:
        return int(sum(self.per_color))

    @property
    def num_colors(self) -> int:
        return len(self.per_color)


@dataclass(frozen=True)
class MwuParams:
    """Knobs of the feasibility loop.

    ``iterations`` follows T = ceil(g * (c*k/eps^2) * ln n) with c = 8; the
    early-stop fraction g trades the cover guarantee for speed (g = 1 keeps
    the full guarantee).
    """

    epsilon: float = 0.25
    g: float = 0.3
    t_constant: float = 8.0
    feasibility_tol: float = 1e-9
    decay_factor: float = 0.85
    max_decay_steps: int = 200

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1]; got {self.epsilon}")
        if not 0.0 < self.g <= 1.0:
            raise ValueError(f"g must lie in (0, 1]; got {self.g}")

    def iterations(self, k: int, n: int) -> int:
        budget = self.g * (self.t_constant * k / self.epsilon**2) * math.log(max(n, 2))
        return max(1, math.ceil(budget))


@dataclass
class Solution:
    """A rounded selection with its certificate and bookkeeping."""

    selected: list[int]
    gamma: float
    diversity: float
    per_color_counts: list[int]
    iterations_used: int = 0
    timings: dict[str, float] = field(default_factory=dict)


def uniform_probability(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def _check_quotas(colors: np.ndarray, spec: FairnessSpec) -> None:
    pops = np.bincount(colors, minlength=spec.num_colors)
    if colors.size and int(colors.max()) >= spec.num_colors:
        raise ColorDeficit(
            f"point color {int(colors.max())} outside the {spec.num_colors} declared colors"
        )
    for j, kj in enumerate(spec.per_color):
        if kj > pops[j]:
            raise ColorDeficit(f"color {j} has {int(pops[j])} points but quota {kj}")


def _color_id_lists(colors: np.ndarray, m: int) -> list[np.ndarray]:
    return [np.flatnonzero(colors == j) for j in range(m)]


def select_min_weight(w: np.ndarray, color_ids: list[np.ndarray], quotas) -> tuple[np.ndarray, float]:
    """Per color, the quota-many smallest-weight points; ties to lower ids.

    Returns (selected ids ascending within color blocks, total weight).  This
    is the minimizer of sum(w_i x_i) over 0/1 vectors meeting the quotas.
    """
    chunks = []
    total = 0.0
    for ids, kj in zip(color_ids, quotas):
        if kj == 0:
            continue
        order = np.argsort(w[ids], kind="stable")[:kj]
        chosen = ids[order]
        chunks.append(chosen)
        total += float(w[chosen].sum())
    sel = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    return sel, total


# ---------------------------------------------------------------------------
# cover plans: flat-array form of the canonical structure for one radius
# ---------------------------------------------------------------------------


def _flat_path_arrays(index: SpatialIndex):
    """Leaf-to-root path node ids of every point, flattened; cached per index."""
    cached = getattr(index, "_flat_paths", None)
    if cached is not None:
        return cached
    nodes: list[int] = []
    offsets = [0]
    maxlen = 0
    per_point: list[list[int]] = []
    for i in range(index.n):
        path = index.path_nodes(i)
        per_point.append(path)
        nodes.extend(path)
        offsets.append(len(nodes))
        maxlen = max(maxlen, len(path))
    padded = np.full((index.n, maxlen), index.n_nodes, dtype=np.int64)
    for i, path in enumerate(per_point):
        padded[i, : len(path)] = path
    cached = (
        np.asarray(nodes, dtype=np.int64),
        np.asarray(offsets, dtype=np.int64),
        padded,
    )
    index._flat_paths = cached
    return cached


class CoverPlan:
    """Canonical node lists of every point's ball at one radius.

    The canonical sets depend only on (index, radius), so one plan serves
    every iteration of a feasibility run at that threshold.  All heavy
    per-iteration work reduces to the two flat kernels.
    """

    def __init__(self, index: SpatialIndex, radius: float):
        self.index = index
        self.radius = radius
        owners, nodes = canonical_nodes_batch(index, index.coords, radius)
        self.cover_owner = owners
        self.cover_nodes = nodes
        lengths = np.bincount(owners, minlength=index.n)
        self.cover_offsets = np.concatenate(
            [np.zeros(1, dtype=np.int64), np.cumsum(lengths, dtype=np.int64)]
        )
        self.path_nodes, self.path_offsets, self.path_padded = _flat_path_arrays(index)
        self.n_nodes = index.n_nodes

    def weights(self, h: np.ndarray) -> np.ndarray:
        """w_i = sum of h over queries whose cover contains point i."""
        node_sums = _kernels.scatter_add(h, self.cover_owner, self.cover_nodes, self.n_nodes)
        return _kernels.segment_sums(node_sums, self.path_nodes, self.path_offsets)

    def cover_loads(self, values: np.ndarray, support: np.ndarray) -> np.ndarray:
        """R_l = sum of values over the cover of point l; values live on ``support``."""
        width = self.path_padded.shape[1]
        flat_nodes = self.path_padded[support].ravel()
        flat_owner = np.repeat(support, width)
        flow = _kernels.scatter_add(values, flat_owner, flat_nodes, self.n_nodes + 1)[:-1]
        return _kernels.segment_sums(flow, self.cover_nodes, self.cover_offsets)


def build_cover_plan(index: SpatialIndex, gamma: float, epsilon: float) -> CoverPlan:
    return CoverPlan(index, gamma / (2.0 * (1.0 + epsilon)))


# ---------------------------------------------------------------------------
# oracle and update, in their annotation-driven form
# ---------------------------------------------------------------------------


def oracle_weights(index: SpatialIndex, h, gamma: float, epsilon: float) -> np.ndarray:
    """Aggregated weights via annotation sums: accumulate h over every
    point's ball, then read each point's root-to-leaf path sum."""
    h = np.asarray(h, dtype=float)
    radius = gamma / (2.0 * (1.0 + epsilon))
    clear_annotations(index)
    for ell in range(index.n):
        add_to_canonical(index, index.coords[ell], radius, h[ell])
    return np.array([path_sum(index, i) for i in range(index.n)])


def oracle(index: SpatialIndex, h, gamma: float, epsilon: float, spec: FairnessSpec,
           feasibility_tol: float = 1e-9):
    """One aggregated-constraint solve: pick the per-color cheapest points.

    Returns the 0/1 vector when its total weight stays within the unit
    budget, or None when even the minimizer exceeds it (proof that the full
    system is infeasible at this gamma).
    """
    h = np.asarray(h, dtype=float)
    if abs(float(h.sum()) - 1.0) > 1e-6:
        raise ValueError("h must be a probability vector")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    _check_quotas(index.colors, spec)
    w = oracle_weights(index, h, gamma, epsilon)
    sel, total = select_min_weight(w, _color_id_lists(index.colors, spec.num_colors), spec.per_color)
    if total > 1.0 + feasibility_tol:
        return None
    xbar = np.zeros(index.n)
    xbar[sel] = 1.0
    return xbar


def update(index: SpatialIndex, xbar, gamma: float, epsilon: float, h) -> np.ndarray:
    """Reweight the cover rows by their load under the oracle's selection.

    Loads R_l flow through path annotations; each row's weight is scaled by
    (1 + eps/4 * (R_l - 1)/k) and the vector is renormalized to sum 1.
    """
    xbar = np.asarray(xbar, dtype=float)
    h = np.asarray(h, dtype=float)
    k = int(round(float(xbar.sum())))
    radius = gamma / (2.0 * (1.0 + epsilon))
    index.flow_sum[:] = 0.0
    for i in np.flatnonzero(xbar > 0):
        add_along_path(index, int(i), float(xbar[i]))
    loads = np.array(
        [canonical_flow_sum(index, index.coords[ell], radius) for ell in range(index.n)]
    )
    delta = (loads - 1.0) / max(k, 1)
    scaled = h * (1.0 + 0.25 * epsilon * delta)
    return scaled / scaled.sum()


# ---------------------------------------------------------------------------
# the feasibility loop
# ---------------------------------------------------------------------------


def _solve_on_plan(plan: CoverPlan, spec: FairnessSpec, params: MwuParams):
    """Run the full iteration budget on a prebuilt plan.

    Returns (x_hat, iterations) on completion or (None, iterations) as soon
    as one aggregated solve proves the system infeasible.
    """
    index = plan.index
    n = index.n
    k = spec.total
    color_ids = _color_id_lists(index.colors, spec.num_colors)
    T = params.iterations(k, n)
    h = uniform_probability(n)
    x_acc = np.zeros(n)
    eta = 0.25 * params.epsilon
    for t in range(T):
        w = plan.weights(h)
        sel, total = select_min_weight(w, color_ids, spec.per_color)
        if total > 1.0 + params.feasibility_tol:
            return None, t + 1
        x_acc[sel] += 1.0
        loads = plan.cover_loads(np.ones(n), sel)
        delta = (loads - 1.0) / k
        h = h * (1.0 + eta * delta)
        h /= h.sum()
    return x_acc / T, T


def solve_feasibility(index: SpatialIndex, gamma: float, epsilon: float,
                      spec: FairnessSpec, params: MwuParams | None = None):
    """Feasibility of the cover system at one threshold.

    Returns the averaged fractional vector when every iteration's aggregated
    solve stays within budget, else None.  Deterministic.
    """
    if params is None:
        params = MwuParams(epsilon=epsilon)
    elif params.epsilon != epsilon:
        raise ValueError("epsilon argument conflicts with params.epsilon")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    _check_quotas(index.colors, spec)
    plan = build_cover_plan(index, gamma, epsilon)
    x_hat, _ = _solve_on_plan(plan, spec, params)
    return x_hat


# ---------------------------------------------------------------------------
# rounding
# ---------------------------------------------------------------------------


def _rounding_pass(index: SpatialIndex, weights: np.ndarray, radius: float,
                   rng: np.random.Generator) -> set[int]:
    """Sample without replacement by mass; keep a point iff its ball region
    is untouched; every sampled point retires its path either way."""
    clear_annotations(index)
    init_sampling(index, weights)
    chosen: set[int] = set()
    while index.subtree_mass[0] > MASS_TOL:
        pid = sample_remove(index, rng)
        if region_free(index, index.coords[pid], radius):
            chosen.add(pid)
        deactivate_path(index, pid)
    return chosen


def round_solution(index: SpatialIndex, x_hat, gamma: float, epsilon: float,
                   rng: np.random.Generator | int | None = None) -> set[int]:
    """Round a fractional vector into a conflict-free point set.

    The output's minimum pairwise distance is at least gamma/(2(1+eps)); each
    color keeps at least quota/(1+eps) members in expectation when x_hat
    satisfies the feasibility rows.
    """
    rng = np.random.default_rng(rng)
    weights = np.asarray(x_hat, dtype=float)
    radius = gamma / (2.0 * (1.0 + epsilon))
    return _rounding_pass(index, weights, radius, rng)


def _diversity(coords: np.ndarray, selected) -> float:
    ids = sorted(selected)
    if len(ids) <= 1:
        return float("inf")
    return float(np.min(pdist(coords[ids])))


def _degenerate_selection(colors: np.ndarray, spec: FairnessSpec) -> list[int]:
    """Lowest-id points meeting each quota; used when the optimum is zero
    or a single point."""
    out: list[int] = []
    for j, kj in enumerate(spec.per_color):
        if kj:
            out.extend(int(i) for i in np.flatnonzero(colors == j)[:kj])
    return sorted(out)


# ---------------------------------------------------------------------------
# threshold search
# ---------------------------------------------------------------------------


def _binary_search(index, spec, params, values):
    """Largest candidate whose feasibility run completes, together with the
    fractional vector certified there and total iterations spent."""
    lo, hi = 0, len(values) - 1
    best = None  # (idx, x_hat)
    spent = 0
    while lo < hi:
        mid = math.ceil((lo + hi) / 2)
        plan = build_cover_plan(index, float(values[mid]), params.epsilon)
        x_hat, used = _solve_on_plan(plan, spec, params)
        spent += used
        log.info("bisect threshold %.6g: %s after %d iterations",
                 values[mid], "feasible" if x_hat is not None else "infeasible", used)
        if x_hat is not None:
            best = (mid, x_hat)
            lo = mid
        else:
            hi = mid - 1
    if best is None or best[0] != lo:
        # the bisection endpoint was never certified; walk down until one is
        for idx in range(lo, -1, -1):
            plan = build_cover_plan(index, float(values[idx]), params.epsilon)
            x_hat, used = _solve_on_plan(plan, spec, params)
            spent += used
            if x_hat is not None:
                best = (idx, x_hat)
                break
            if best is not None and idx <= best[0]:
                break
    if best is None:
        return None, None, spent
    return float(values[best[0]]), best[1], spent


def _decay_search(index, spec, params, gamma_max):
    spent = 0
    for gamma in decay_schedule(gamma_max, params.decay_factor, params.max_decay_steps):
        plan = build_cover_plan(index, gamma, params.epsilon)
        x_hat, used = _solve_on_plan(plan, spec, params)
        spent += used
        log.info("decay threshold %.6g: %s after %d iterations",
                 gamma, "feasible" if x_hat is not None else "infeasible", used)
        if x_hat is not None:
            return gamma, x_hat, spent
    return None, None, spent


def mfd(points, spec: FairnessSpec, epsilon: float | None = None,
        search_mode: str = "decay", params: MwuParams | None = None,
        rng: np.random.Generator | int | None = None) -> Solution:
    """End-to-end fair diversification: search the threshold ladder, solve
    the feasibility system, round.

    ``binary`` mode bisects the candidate distances for the largest
    completing threshold; ``decay`` walks a geometric ladder down from the
    farthest-point bound and takes the first completion.  The rounded set
    always has diversity at least gamma/(2(1+eps)) for the certified gamma.
    """
    if params is None:
        params = MwuParams(epsilon=0.25 if epsilon is None else epsilon)
    elif epsilon is not None and epsilon != params.epsilon:
        raise ValueError("epsilon argument conflicts with params.epsilon")
    eps = params.epsilon
    if search_mode not in ("binary", "decay"):
        raise ValueError(f"unknown search mode {search_mode!r}")
    rng = np.random.default_rng(rng)

    coords, colors = points_as_arrays(points)
    _check_quotas(colors, spec)

    t0 = time.perf_counter()
    if spec.total == 1:
        sel = _degenerate_selection(colors, spec)
        return Solution(
            selected=sel,
            gamma=float("inf"),
            diversity=float("inf"),
            per_color_counts=_count_colors(colors, sel, spec.num_colors),
            iterations_used=0,
            timings={"solve": 0.0, "round": 0.0},
        )

    index = build_index(points, eps)
    gamma = x_hat = None
    spent = 0
    degenerate = False
    if search_mode == "binary":
        try:
            values = default_candidates(points, eps).values
        except EmptyCandidates:
            degenerate = True
        else:
            gamma, x_hat, spent = _binary_search(index, spec, params, values)
            if x_hat is None:
                degenerate = True  # only mutual duplicates block every threshold
    else:
        gamma_max = gonzalez_upper_bound(points, spec.total)
        if gamma_max <= 0.0:
            degenerate = True
        else:
            gamma, x_hat, spent = _decay_search(index, spec, params, gamma_max)
            if x_hat is None:
                raise NoFeasibleGamma(
                    f"no threshold in {params.max_decay_steps} decay steps was feasible"
                )
    t_solve = time.perf_counter() - t0

    if degenerate:
        log.info("degenerate instance: certifying zero diversity")
        sel = _degenerate_selection(colors, spec)
        return Solution(
            selected=sel,
            gamma=0.0,
            diversity=_diversity(coords, sel),
            per_color_counts=_count_colors(colors, sel, spec.num_colors),
            iterations_used=spent,
            timings={"solve": t_solve, "round": 0.0},
        )

    t1 = time.perf_counter()
    chosen = round_solution(index, x_hat, gamma, eps, rng)
    t_round = time.perf_counter() - t1
    sel = sorted(chosen)
    return Solution(
        selected=sel,
        gamma=float(gamma),
        diversity=_diversity(coords, sel),
        per_color_counts=_count_colors(colors, sel, spec.num_colors),
        iterations_used=spent,
        timings={"solve": t_solve, "round": t_round},
    )


def _count_colors(colors: np.ndarray, selected, m: int) -> list[int]:
    ids = list(selected)
    if not ids:
        return [0] * m
    return np.bincount(colors[ids], minlength=m).astype(int).tolist()


# ---------------------------------------------------------------------------
# high-probability variant
# ---------------------------------------------------------------------------


def build_color_index_family(points, epsilon: float) -> dict[int, tuple[SpatialIndex, np.ndarray]]:
    """One re-indexed spatial tree per color, with local-to-global id maps."""
    from .geometry import ColoredPoint  # local import to avoid cycle noise

    _, colors = points_as_arrays(points)
    by_id = sorted(points, key=lambda p: p.index)
    family: dict[int, tuple[SpatialIndex, np.ndarray]] = {}
    for j in sorted(set(int(c) for c in colors)):
        members = [p for p in by_id if p.color == j]
        local = [ColoredPoint(t, p.coords, p.color) for t, p in enumerate(members)]
        gids = np.asarray([p.index for p in members], dtype=np.int64)
        family[j] = (build_index(local, epsilon), gids)
    return family


def sparsify_high_prob(points, x_hat, gamma: float, epsilon: float,
                       color_family=None) -> np.ndarray:
    """Concentrate fractional mass onto well-separated same-color points.

    Visits positive-mass points in ascending id order; each visited point
    absorbs the remaining mass of its color's cover at radius
    gamma/(3(1+eps)^2), and the absorbed subtrees turn inert so later visits
    skip them.  Per-color mass is conserved and any two surviving points of
    one color end up at least that radius apart.
    """
    x = np.asarray(x_hat, dtype=float)
    if color_family is None:
        color_family = build_color_index_family(points, epsilon)
    radius = gamma / (3.0 * (1.0 + epsilon) ** 2)
    y = np.zeros_like(x)
    for j in sorted(color_family):
        index, gids = color_family[j]
        local_x = x[gids]
        init_sampling(index, local_x)
        mass = index.subtree_mass
        for li in range(index.n):
            if local_x[li] <= MASS_TOL:
                continue
            if any(mass[u] <= MASS_TOL for u in index.path_nodes(li)):
                continue  # already absorbed by an earlier visit
            absorbed = 0.0
            for u in canonical_nodes(index, index.coords[li], radius, prune_zero_mass=True):
                mu = float(mass[u])
                if mu <= MASS_TOL:
                    continue
                absorbed += mu
                v = int(index.parent[u])
                while v >= 0:
                    mass[v] = max(mass[v] - mu, 0.0)
                    v = int(index.parent[v])
                mass[u] = 0.0
            y[gids[li]] = absorbed
    return y


def high_prob_quota_floor(epsilon: float, m: int) -> float:
    """Quota size under which the concentration guarantee loses force."""
    return 3.0 * (1.0 + epsilon) / epsilon**2 * math.log(2 * m)


def round_high_prob(index: SpatialIndex, y_hat, gamma: float, epsilon: float,
                    delta: float, spec: FairnessSpec,
                    rng: np.random.Generator | int | None = None) -> Solution:
    """Repeat the rounding until every color clears its concentration floor.

    Uses the tighter insertion radius gamma/(6(1+eps)^3) and accepts the
    first draw with every color count at least (1-eps)*quota/(1+eps); after
    ceil(log2(1/delta)) misses the attempt fails.
    """
    rng = np.random.default_rng(rng)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1); got {delta}")
    floor = high_prob_quota_floor(epsilon, spec.num_colors)
    small = [j for j, kj in enumerate(spec.per_color) if 0 < kj < floor]
    if small:
        warnings.warn(
            f"colors {small} have quotas below {floor:.1f}; the success probability "
            "guarantee is weakened",
            stacklevel=2,
        )
    weights = np.asarray(y_hat, dtype=float)
    radius = gamma / (6.0 * (1.0 + epsilon) ** 3)
    thresholds = [(1.0 - epsilon) * kj / (1.0 + epsilon) for kj in spec.per_color]
    reps = max(1, math.ceil(math.log2(1.0 / delta)))
    for _ in range(reps):
        chosen = _rounding_pass(index, weights, radius, rng)
        counts = _count_colors(index.colors, sorted(chosen), spec.num_colors)
        if all(c >= t - 1e-12 for c, t in zip(counts, thresholds)):
            sel = sorted(chosen)
            return Solution(
                selected=sel,
                gamma=float(gamma),
                diversity=_diversity(index.coords, sel),
                per_color_counts=counts,
            )
    raise FailedAfterRepeats(f"no rounding met the color floors in {reps} repetitions")


def mfd_high_prob(points, spec: FairnessSpec, epsilon: float | None = None,
                  delta: float = 0.1, search_mode: str = "decay",
                  params: MwuParams | None = None,
                  rng: np.random.Generator | int | None = None) -> Solution:
    """Threshold search, sparsification, and repeated rounding in one call."""
    if params is None:
        params = MwuParams(epsilon=0.25 if epsilon is None else epsilon)
    eps = params.epsilon
    rng = np.random.default_rng(rng)
    coords, colors = points_as_arrays(points)
    _check_quotas(colors, spec)
    if spec.total == 1:
        return mfd(points, spec, params=params, rng=rng)

    t0 = time.perf_counter()
    index = build_index(points, eps)
    if search_mode == "binary":
        values = default_candidates(points, eps).values
        gamma, x_hat, spent = _binary_search(index, spec, params, values)
    else:
        gamma_max = gonzalez_upper_bound(points, spec.total)
        gamma, x_hat, spent = _decay_search(index, spec, params, gamma_max)
    if x_hat is None:
        raise NoFeasibleGamma("no threshold was feasible")
    y_hat = sparsify_high_prob(points, x_hat, gamma, eps)
    t_solve = time.perf_counter() - t0

    t1 = time.perf_counter()
    sol = round_high_prob(index, y_hat, gamma, eps, delta, spec, rng)
    sol.iterations_used = spent
    sol.timings = {"solve": t_solve, "round": time.perf_counter() - t1}
    return sol
