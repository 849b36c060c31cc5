# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for scalar jet arithmetic.

Same contract as _jetcore_py for 1-D float64 coefficient arrays; the
dispatcher in jets.py falls back to the numpy kernels for array-valued
coefficients.
"""

import numpy as np

from . import _jettables as tables

BACKEND = "compiled"


def jet_mul(double[::1] a, double[::1] b, int order):
    ia_arr, ib_arr, io_arr = tables.mul_triples(order)
    cdef int[::1] ia = ia_arr
    cdef int[::1] ib = ib_arr
    cdef int[::1] io = io_arr
    out_arr = np.zeros(tables.term_count(order))
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, n = ia.shape[0]
    for k in range(n):
        out[io[k]] += a[ia[k]] * b[ib[k]]
    return out_arr


def jet_div(double[::1] a, double[::1] b, int order):
    offsets_arr, c_idx_arr, b_idx_arr = tables.div_tables(order)
    cdef int[::1] offsets = offsets_arr
    cdef int[::1] c_idx = c_idx_arr
    cdef int[::1] b_idx = b_idx_arr
    cdef int nterms = tables.term_count(order)
    out_arr = np.zeros(nterms)
    cdef double[::1] out = out_arr
    cdef double b0 = b[0]
    cdef double acc
    cdef Py_ssize_t o, k
    for o in range(nterms):
        acc = a[o]
        for k in range(offsets[o], offsets[o + 1]):
            acc -= out[c_idx[k]] * b[b_idx[k]]
        out[o] = acc / b0
    return out_arr
