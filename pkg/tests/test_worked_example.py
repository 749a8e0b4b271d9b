"""A documented six-point walkthrough, frozen as regression fixtures.

The walkthrough fixes six points p1..p6 (ids 0..5 here), two blue then four
red, a threshold of 5 and inflation 1, and traces the whole pipeline:
aggregated weights, the oracle's selection, the update loads, and a full
rounding pass.  The published cover table is asymmetric, which no
deterministic ball-shaped cover can produce, so the weight algebra is tested
against the explicit table while two engineered planar layouts reproduce the
canonical-cover row, the update loads, and the rounding trace through the
real tree machinery.
"""

import numpy as np
import pytest

from fairdiv import FairnessSpec, build_index
from fairdiv.geometry import (
    add_along_path,
    canonical_flow_sum,
    clear_annotations,
    covered_points,
    deactivate_path,
    init_sampling,
    region_free,
    sample_remove,
)
from fairdiv.solver import round_solution, select_min_weight, update

from conftest import make_points

GAMMA = 5.0
EPS = 1.0
RADIUS = GAMMA / (2 * (1 + EPS))  # 1.25, inflated to 2.5

# the walkthrough's cover table, 0-based: COVER_TABLE[l] = points covered by
# the query around point l
COVER_TABLE = [
    {0, 1, 2},
    {0, 1, 2, 5},
    {0, 1, 2, 4, 5},
    {0, 3},
    {2, 4},
    {1, 2, 5},
]
H = np.array([0.1, 0.1, 0.1, 0.1, 0.4, 0.2])
EXPECTED_W = [0.4, 0.5, 0.9, 0.1, 0.5, 0.4]
COLORS = [0, 0, 1, 1, 1, 1]  # two blue, four red
QUOTAS = (1, 2)

# planar layout realizing the rounding trace and the canonical-cover row
LAYOUT_ROUND = [(0.0, 0.0), (2.2, 0.0), (-1.0, -2.2), (-4.6, 1.4), (-1.3, -4.6), (4.3, 0.9)]
ROUND_WEIGHTS = np.array([0.2, 0.2, 0.05, 0.15, 0.25, 0.15])
ROUND_ORDER = [1, 5, 4, 2, 3, 0]  # p2, p6, p5, p3, p4, p1
ROUND_KEPT = {1, 4, 3}  # p2, p5, p4
ROUND_SEED = 1814  # drives sample_remove through ROUND_ORDER exactly

# planar layout realizing the update walkthrough's loads
LAYOUT_UPDATE = [(0.0, 0.0), (2.1, -1.1), (0.0, -2.3), (-2.3, 0.6), (0.4, -4.7), (-1.9, -3.4)]
UPDATE_SELECTION = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 0.0])  # p1, p3, p5
EXPECTED_LOADS = [2.0, 2.0, 3.0, 1.0, 2.0, 1.0]  # delta * k pattern [1,1,2,0,1,0]


def table_weights(cover_table, h):
    w = np.zeros(len(h))
    for ell, cover in enumerate(cover_table):
        for i in cover:
            w[i] += h[ell]
    return w


def test_cover_table_reproduces_weight_vector():
    assert table_weights(COVER_TABLE, H).tolist() == pytest.approx(EXPECTED_W)


def test_oracle_selection_on_walkthrough_weights():
    w = np.array(EXPECTED_W)
    colors = np.array(COLORS)
    sel, total = select_min_weight(
        w, [np.flatnonzero(colors == j) for j in range(2)], QUOTAS
    )
    assert sorted(sel.tolist()) == [0, 3, 5]  # p1, p4, p6
    assert total == pytest.approx(0.9)
    assert total < 1.0  # feasible


def test_update_loads_on_engineered_layout():
    pts = make_points(LAYOUT_UPDATE, COLORS)
    idx = build_index(pts, EPS)
    for i in np.flatnonzero(UPDATE_SELECTION > 0):
        add_along_path(idx, int(i), 1.0)
    loads = [canonical_flow_sum(idx, idx.coords[l], RADIUS) for l in range(6)]
    assert loads == pytest.approx(EXPECTED_LOADS)
    h = update(idx, UPDATE_SELECTION, GAMMA, EPS, np.full(6, 1 / 6))
    k = int(UPDATE_SELECTION.sum())
    delta = (np.array(EXPECTED_LOADS) - 1.0) / k
    expected = (1 + 0.25 * EPS * delta) / 6
    expected /= expected.sum()
    assert h.tolist() == pytest.approx(expected.tolist(), abs=1e-12)


def test_canonical_cover_row_on_round_layout():
    pts = make_points(LAYOUT_ROUND, COLORS)
    idx = build_index(pts, EPS)
    assert covered_points(idx, idx.coords[0], RADIUS) == {0, 1, 2}


def test_round_trace_forced_order():
    pts = make_points(LAYOUT_ROUND, COLORS)
    idx = build_index(pts, EPS)
    clear_annotations(idx)
    kept = []
    for pid in ROUND_ORDER:
        if region_free(idx, idx.coords[pid], RADIUS):
            kept.append(pid)
        deactivate_path(idx, pid)
    assert kept == [1, 4, 3]


def test_round_trace_through_sampler():
    pts = make_points(LAYOUT_ROUND, COLORS)
    idx = build_index(pts, EPS)
    rng = np.random.default_rng(ROUND_SEED)
    clear_annotations(idx)
    init_sampling(idx, ROUND_WEIGHTS)
    order = []
    while idx.subtree_mass[0] > 1e-12:
        order.append(sample_remove(idx, rng))
    assert order == ROUND_ORDER

    got = round_solution(idx, ROUND_WEIGHTS, GAMMA, EPS, ROUND_SEED)
    assert got == ROUND_KEPT
    spec = FairnessSpec(QUOTAS)
    counts = np.bincount(np.array(COLORS)[sorted(got)], minlength=2)
    assert counts[0] >= 1 and counts[1] >= 2
