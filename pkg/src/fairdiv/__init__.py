"""Fair max-min diversification of colored point sets.

Pick a subset holding at least a per-color minimum number of points while
maximizing the minimum pairwise Euclidean distance.  The solver searches a
ladder of diversity thresholds with a multiplicative-weights feasibility
loop over spatial-tree ball covers, then rounds the fractional answer by
weighted sampling; coreset and streaming front-ends scale it to large and
online inputs.
"""

from ._kernels import HAVE_COMPILED, IMPLEMENTATION
from .candidates import (
    CandidateSet,
    decay_schedule,
    default_candidates,
    exact_candidates,
    gonzalez_upper_bound,
    wspd_candidates,
)
from .coreset import KCenterResult, build_coreset, gonzalez_kcenter, mfd_with_coreset, optimal_kcenter
from .errors import *  # noqa: F401,F403 - the error taxonomy is part of the API
from .geometry import BoundingBox, ColoredPoint, SpatialIndex, build_index, canonical_nodes
from .io import (
    RunBatch,
    RunConfig,
    RunResult,
    emit,
    filter_rectangle,
    generate_synthetic,
    load_csv,
    load_result,
    make_spec,
    mfd_in_rectangle,
    run,
)
from .solver import (
    FairnessSpec,
    MwuParams,
    Solution,
    mfd,
    mfd_high_prob,
    oracle,
    round_high_prob,
    round_solution,
    solve_feasibility,
    sparsify_high_prob,
    update,
)
from .streaming import ColorCenters, StreamState, stream_insert, stream_query

__version__ = "0.1.0"
