"""Pure numpy kernels for jet arithmetic (fallback for the compiled core).

Both backends implement the same two hot operations on flat coefficient
arrays; this one also accepts array-valued coefficients (shape (T, ...)),
which the grid-evaluation path relies on.
"""

import numpy as np

from . import _jettables as tables

BACKEND = "python"


def jet_mul(a, b, order):
    ia, ib, io = tables.mul_triples(order)
    out = np.zeros_like(a)
    np.add.at(out, io, a[ia] * b[ib])
    return out


def jet_div(a, b, order):
    offsets, c_idx, b_idx = tables.div_tables(order)
    out = np.zeros_like(a)
    b0 = b[0]
    n = tables.term_count(order)
    for o in range(n):
        lo, hi = offsets[o], offsets[o + 1]
        acc = a[o]
        if hi > lo:
            acc = acc - np.sum(out[c_idx[lo:hi]] * b[b_idx[lo:hi]], axis=0)
        out[o] = acc / b0
    return out
