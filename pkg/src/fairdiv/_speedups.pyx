# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the solver's flat segment arrays.

Same contract as fairdiv._kernels_py; selected automatically at import when
this extension was built.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "compiled"


def scatter_add(cnp.float64_t[::1] values, cnp.int64_t[::1] owners,
                cnp.int64_t[::1] nodes, Py_ssize_t out_size):
    out_arr = np.zeros(out_size, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t t, m = nodes.shape[0]
    for t in range(m):
        out[nodes[t]] += values[owners[t]]
    return out_arr


def segment_sums(cnp.float64_t[::1] node_values, cnp.int64_t[::1] nodes,
                 cnp.int64_t[::1] offsets):
    cdef Py_ssize_t n_seg = offsets.shape[0] - 1
    out_arr = np.zeros(n_seg, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t s, t
    cdef cnp.float64_t acc
    for s in range(n_seg):
        acc = 0.0
        for t in range(offsets[s], offsets[s + 1]):
            acc += node_values[nodes[t]]
        out[s] = acc
    return out_arr
