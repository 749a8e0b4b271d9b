import sys
from pathlib import Path

try:
    import fairdiv  # noqa: F401
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np
import pytest

from fairdiv import ColoredPoint, FairnessSpec


def make_points(coords, colors=None):
    colors = colors if colors is not None else [0] * len(coords)
    return [
        ColoredPoint(i, np.atleast_1d(np.asarray(c, dtype=float)), int(col))
        for i, (c, col) in enumerate(zip(coords, colors))
    ]


def random_instance(rng, n, d, m, spread=100.0):
    """Uniform points with every color present at least once."""
    coords = rng.uniform(0.0, spread, (n, d))
    colors = rng.integers(0, m, n)
    colors[:m] = np.arange(m)
    return make_points(coords, colors)


@pytest.fixture
def fix_a():
    """Four collinear points, two colors; covers are forced at gamma=6, eps=0.5."""
    return make_points([[0.0], [1.0], [5.0], [6.0]], [0, 0, 1, 1])


@pytest.fixture
def fix_a_spec():
    return FairnessSpec((1, 1))
