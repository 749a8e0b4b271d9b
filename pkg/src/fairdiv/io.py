"""Dataset ingestion, quota construction, run orchestration, serialization.

The JSON document written by ``emit`` has two top-level keys: ``runs`` (one
object per seeded run, keys matching RunResult fields) and ``aggregate``
(mean diversity and mean shortfalls).  An optional companion CSV carries
``k,diversity,runtime_s,shortfall_total`` rows for plot tooling.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .coreset import mfd_with_coreset
from .errors import EmptyDataset, FairDivError, InvalidCoordinate
from .geometry import ColoredPoint
from .solver import FairnessSpec, MwuParams, Solution, mfd, mfd_high_prob  # noqa: F401 (Solution is API)
from .streaming import StreamState, stream_insert, stream_query

MODES = ("offline", "coreset", "stream", "highprob")
SEARCHES = ("binary", "decay")


def load_csv(path, color_column: str) -> list[ColoredPoint]:
    """Read a header-ed CSV into colored points.

    The color column may hold arbitrary strings; they are mapped to color
    ids in first-appearance order.  Every other column must parse as a
    finite real.  Row order defines point ids.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty") from None
        if color_column not in header:
            raise ValueError(f"{path}: color column {color_column!r} not in header {header}")
        cidx = header.index(color_column)
        feature_cols = [(i, name) for i, name in enumerate(header) if i != cidx]
        if not feature_cols:
            raise InvalidCoordinate(f"{path}: no feature columns besides {color_column!r}")

        color_ids: dict[str, int] = {}
        points: list[ColoredPoint] = []
        for row_no, row in enumerate(reader, start=2):  # 1-based, after header
            if len(row) != len(header):
                raise InvalidCoordinate(
                    f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}"
                )
            coords = np.empty(len(feature_cols))
            for t, (i, name) in enumerate(feature_cols):
                try:
                    value = float(row[i])
                except ValueError:
                    raise InvalidCoordinate(
                        f"{path}: row {row_no}, column {name!r}: {row[i]!r} is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise InvalidCoordinate(
                        f"{path}: row {row_no}, column {name!r}: non-finite value {row[i]!r}"
                    )
                coords[t] = value
            label = row[cidx]
            color = color_ids.setdefault(label, len(color_ids))
            points.append(ColoredPoint(len(points), coords, color))
    if not points:
        raise EmptyDataset(f"{path}: no data rows")
    return points


def make_spec(populations, mode: str, k: int,
              explicit: list[int] | None = None) -> FairnessSpec:
    """Build per-color quotas totalling k.

    ``equal`` gives floor(k/m) each with the remainder going to the earliest
    colors; ``proportional`` floors k*pop_j/n and hands the remainder to the
    largest fractional parts (ties to the lower color id); ``explicit``
    passes the given list through.
    """
    populations = [int(p) for p in populations]
    m = len(populations)
    if mode == "explicit":
        if explicit is None or len(explicit) != m:
            raise ValueError(f"explicit quotas must list {m} values")
        return FairnessSpec(tuple(int(q) for q in explicit))
    if k <= 0:
        raise ValueError(f"k must be positive; got {k}")
    if mode == "equal":
        base, rem = divmod(k, m)
        return FairnessSpec(tuple(base + (1 if j < rem else 0) for j in range(m)))
    if mode == "proportional":
        n = sum(populations)
        raw = [k * p / n for p in populations]
        quotas = [math.floor(x) for x in raw]
        rem = k - sum(quotas)
        order = sorted(range(m), key=lambda j: (-(raw[j] - quotas[j]), j))
        for j in order[:rem]:
            quotas[j] += 1
        return FairnessSpec(tuple(quotas))
    raise ValueError(f"unknown spec mode {mode!r}")


def generate_synthetic(seed: int, n: int, d: int, m: int,
                       clusters_per_color: int = 3, spread: float = 100.0,
                       sigma: float = 3.0,
                       proportions: list[float] | None = None) -> list[ColoredPoint]:
    """Seeded Gaussian mixture per color; deterministic per seed.

    Per-color counts follow ``proportions`` exactly (largest-remainder
    split), defaulting to an even split.
    """
    rng = np.random.default_rng(seed)
    if proportions is None:
        proportions = [1.0 / m] * m
    raw = [n * p / sum(proportions) for p in proportions]
    counts = [math.floor(x) for x in raw]
    rem = n - sum(counts)
    order = sorted(range(m), key=lambda j: (-(raw[j] - counts[j]), j))
    for j in order[:rem]:
        counts[j] += 1

    labels = np.repeat(np.arange(m), counts)
    rng.shuffle(labels)
    centers = {
        j: rng.uniform(0.0, spread, size=(clusters_per_color, d)) for j in range(m)
    }
    points: list[ColoredPoint] = []
    for i, j in enumerate(labels):
        c = centers[int(j)][rng.integers(clusters_per_color)]
        points.append(ColoredPoint(i, c + rng.normal(0.0, sigma, size=d), int(j)))
    return points


@dataclass
class RunConfig:
    """Everything one invocation needs; CLI flags map onto these fields."""

    input: str | None = None
    color_column: str = "color"
    k: int = 10
    spec_mode: str = "equal"  # equal | proportional | explicit
    explicit_quotas: list[int] | None = None
    epsilon: float = 0.25
    g: float = 0.3
    delta: float = 0.1
    mode: str = "coreset"  # offline | coreset | stream | highprob
    search: str = "decay"  # binary | decay
    seed: int = 0
    repeat: int = 1
    out: str | None = None
    plot_csv: str | None = None
    points: list[ColoredPoint] | None = None  # programmatic alternative to input

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}; got {self.mode!r}")
        if self.search not in SEARCHES:
            raise ValueError(f"search must be one of {SEARCHES}; got {self.search!r}")


@dataclass
class RunResult:
    """Serialized form of one seeded run."""

    selected: list[int]
    gamma: float
    diversity: float
    required_counts: list[int]
    realized_counts: list[int]
    shortfalls: list[int]
    iterations: int
    timings: dict[str, float]
    seed: int

    @classmethod
    def from_solution(cls, sol: Solution, spec: FairnessSpec, seed: int) -> "RunResult":
        shortfalls = [max(0, kj - c) for kj, c in zip(spec.per_color, sol.per_color_counts)]
        timings = {"coreset": 0.0, "solve": 0.0, "round": 0.0}
        timings.update(sol.timings)
        return cls(
            selected=list(sol.selected),
            gamma=float(sol.gamma),
            diversity=float(sol.diversity),
            required_counts=list(spec.per_color),
            realized_counts=list(sol.per_color_counts),
            shortfalls=shortfalls,
            iterations=int(sol.iterations_used),
            timings=timings,
            seed=int(seed),
        )


@dataclass
class RunBatch:
    runs: list[RunResult]
    aggregate: dict = field(default_factory=dict)


def _aggregate(runs: list[RunResult]) -> dict:
    m = len(runs[0].shortfalls)
    return {
        "mean_diversity": float(np.mean([r.diversity for r in runs])),
        "mean_shortfalls": [
            float(np.mean([r.shortfalls[j] for r in runs])) for j in range(m)
        ],
        "mean_shortfall_total": float(np.mean([sum(r.shortfalls) for r in runs])),
    }


def _single_run(points, spec: FairnessSpec, config: RunConfig, seed: int) -> RunResult:
    params = MwuParams(epsilon=config.epsilon, g=config.g)
    if config.mode == "offline":
        sol = mfd(points, spec, params=params, search_mode=config.search, rng=seed)
    elif config.mode == "coreset":
        sol = mfd_with_coreset(
            points, spec, params=params, search_mode=config.search, rng=seed
        )
    elif config.mode == "highprob":
        sol = mfd_high_prob(
            points, spec, delta=config.delta, params=params,
            search_mode=config.search, rng=seed,
        )
    else:  # stream: replay rows in order, then one query
        capacity = max(spec.total, max(spec.per_color))
        state = StreamState(spec.num_colors, capacity)
        t0 = time.perf_counter()
        for p in points:
            stream_insert(state, p)
        t_stream = time.perf_counter() - t0
        sol = stream_query(state, spec, params=params, rng=seed, search_mode=config.search)
        sol.timings = {"coreset": t_stream, **sol.timings}
    return RunResult.from_solution(sol, spec, seed)


def run(config: RunConfig) -> RunBatch:
    """Load, dispatch by mode, repeat with seeds seed+i, aggregate."""
    points = config.points
    if points is None:
        if config.input is None:
            raise ValueError("config needs either an input path or points")
        points = load_csv(config.input, config.color_column)
    m = max(p.color for p in points) + 1
    populations = np.bincount([p.color for p in points], minlength=m)
    spec = make_spec(populations, config.spec_mode, config.k, config.explicit_quotas)
    runs = [
        _single_run(points, spec, config, config.seed + i) for i in range(config.repeat)
    ]
    return RunBatch(runs=runs, aggregate=_aggregate(runs))


def emit(batch: RunBatch, path, plot_csv: str | None = None) -> None:
    """Write the JSON document (and the optional plot-data CSV)."""
    doc = {"runs": [asdict(r) for r in batch.runs], "aggregate": batch.aggregate}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    if plot_csv:
        with open(plot_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "diversity", "runtime_s", "shortfall_total"])
            for r in batch.runs:
                writer.writerow(
                    [
                        sum(r.required_counts),
                        r.diversity,
                        sum(r.timings.values()),
                        sum(r.shortfalls),
                    ]
                )


def load_result(path) -> RunBatch:
    """Parse an emitted JSON document back; inverse of emit."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    runs = [RunResult(**entry) for entry in doc["runs"]]
    return RunBatch(runs=runs, aggregate=doc["aggregate"])


def error_object(exc: Exception) -> dict:
    """Machine-readable error envelope; paired with a nonzero exit."""
    kind = type(exc).__name__ if isinstance(exc, FairDivError) else "Error"
    return {"error": {"type": kind, "message": str(exc)}}


def filter_rectangle(points, lo, hi) -> list[ColoredPoint]:
    """Points inside an axis-aligned rectangle, original ids kept."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return [
        p for p in points if bool(np.all(lo <= p.coords) and np.all(p.coords <= hi))
    ]


def mfd_in_rectangle(points, lo, hi, spec: FairnessSpec,
                     epsilon: float | None = None,
                     params: MwuParams | None = None,
                     rng=None) -> Solution:
    """Rectangle-restricted query: filter, then solve on what remains.

    Plumbing only; this scans the whole input per query (no sublinear-time
    structure).  Selected ids refer to the original dataset.
    """
    inside = filter_rectangle(points, lo, hi)
    if not inside:
        raise EmptyDataset("no points inside the query rectangle")
    original_ids = [p.index for p in inside]
    local = [ColoredPoint(t, p.coords, p.color) for t, p in enumerate(inside)]
    sol = mfd_with_coreset(local, spec, epsilon=epsilon, params=params, rng=rng)
    sol.selected = sorted(original_ids[i] for i in sol.selected)
    return sol
