"""Pure-numpy kernels for the solver's flat segment arrays.

Mirrors the compiled module in fairdiv._speedups; either one is selected at
import time by fairdiv._kernels.  Both iterate segments in flat order so the
two implementations agree to within summation-order rounding.
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "python"


def scatter_add(values: np.ndarray, owners: np.ndarray, nodes: np.ndarray, out_size: int) -> np.ndarray:
    """out[nodes[t]] += values[owners[t]] over all flat slots t."""
    if len(nodes) == 0:
        return np.zeros(out_size)
    return np.bincount(nodes, weights=values[owners], minlength=out_size).astype(float, copy=False)


def segment_sums(node_values: np.ndarray, nodes: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """sums[s] = sum of node_values[nodes[t]] for t in [offsets[s], offsets[s+1])."""
    n_seg = len(offsets) - 1
    out = np.zeros(n_seg)
    if len(nodes) == 0:
        return out
    vals = node_values[nodes]
    starts = offsets[:-1]
    ends = offsets[1:]
    nonempty = starts < ends
    if nonempty.any():
        out[nonempty] = np.add.reduceat(vals, starts[nonempty])
    return out
