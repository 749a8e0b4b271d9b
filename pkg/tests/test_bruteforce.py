import numpy as np
import pytest

from fairdiv import FairnessSpec, build_index
from fairdiv.bruteforce import (
    brute_force_fairdiv,
    brute_force_kcenter,
    reference_cover_weights,
    verify_fractional,
)
from fairdiv.errors import OracleTooLarge, SpecUnsatisfiable

from conftest import make_points, random_instance


def test_fairdiv_fix_a(fix_a, fix_a_spec):
    gamma, witness = brute_force_fairdiv(fix_a, fix_a_spec)
    assert gamma == 6.0
    assert witness == {0, 3}
    gamma2, witness2 = brute_force_fairdiv(fix_a, FairnessSpec((2, 2)))
    assert gamma2 == 1.0
    assert witness2 == {0, 1, 2, 3}


def test_fairdiv_singleton():
    gamma, witness = brute_force_fairdiv(make_points([[3.0]]), FairnessSpec((1,)))
    assert gamma == float("inf")
    assert witness == {0}


def test_fairdiv_guard_and_unsatisfiable():
    pts = make_points([[float(i)] for i in range(19)])
    with pytest.raises(OracleTooLarge):
        brute_force_fairdiv(pts, FairnessSpec((1,)))
    with pytest.raises(SpecUnsatisfiable):
        brute_force_fairdiv(make_points([[0.0], [1.0]], [0, 0]), FairnessSpec((3,)))


def test_fairdiv_permutation_invariant_gamma():
    rng = np.random.default_rng(0)
    coords = rng.uniform(0, 10, (10, 2))
    colors = [0, 1] * 5
    spec = FairnessSpec((2, 2))
    g1, _ = brute_force_fairdiv(make_points(coords, colors), spec)
    perm = rng.permutation(10)
    g2, _ = brute_force_fairdiv(make_points(coords[perm], [colors[i] for i in perm]), spec)
    assert g1 == pytest.approx(g2)


def test_kcenter_examples(fix_a):
    assert brute_force_kcenter(fix_a, 4) == 0.0
    assert brute_force_kcenter(fix_a, 2) == 1.0
    assert brute_force_kcenter(make_points([[0.0], [10.0]]), 1) == 10.0
    with pytest.raises(OracleTooLarge):
        brute_force_kcenter(make_points([[float(i)] for i in range(13)]), 2)


def test_reference_weights_fix_a(fix_a):
    w = reference_cover_weights(fix_a, [0.25] * 4, 6.0, 0.5)
    assert w.tolist() == pytest.approx([0.5] * 4)
    assert reference_cover_weights(fix_a, [0.0] * 4, 6.0, 0.5).tolist() == [0.0] * 4


def test_verify_fractional_examples(fix_a, fix_a_spec):
    good = verify_fractional(fix_a, [1.0, 0.0, 1.0, 0.0], fix_a_spec, 6.0, 0.5)
    assert good.passed
    toomuch = verify_fractional(fix_a, [1.0] * 4, fix_a_spec, 6.0, 0.5)
    assert not toomuch.passed
    assert toomuch.max_cover_violation == pytest.approx(2.0 - 1.5)
    empty = verify_fractional(fix_a, [0.0] * 4, fix_a_spec, 6.0, 0.5)
    assert not empty.passed
    assert all(s < 0 for s in empty.color_slacks)


def test_fairdiv_beats_any_random_subset():
    rng = np.random.default_rng(3)
    pts = random_instance(rng, 11, 2, 2)
    spec = FairnessSpec((2, 1))
    gamma, witness = brute_force_fairdiv(pts, spec)
    colors = np.array([p.color for p in pts])
    coords = np.array([p.coords for p in pts])
    counts = np.bincount(colors[list(witness)], minlength=2)
    assert counts[0] >= 2 and counts[1] >= 1
    for _ in range(200):
        pick = rng.choice(11, 3, replace=False)
        c = np.bincount(colors[pick], minlength=2)
        if c[0] >= 2 and c[1] >= 1 and len(pick) > 1:
            from scipy.spatial.distance import pdist

            assert np.min(pdist(coords[pick])) <= gamma + 1e-9
