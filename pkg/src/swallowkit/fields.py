"""Jet providers: wrappers that deliver jets of derived or numeric fields.

Anything with a .jet(u, v, order) method can serve as a germ component or
a data field; expressions are the parseable case, these wrappers cover
derivatives, pullbacks, quadrature-backed primitives and ad-hoc formulas.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .jets import Expr, Jet2
from ._jettables import index_of, monomials


def pjet(p, u, v, order):
    """Jet of a provider or expression."""
    return p.jet(u, v, order)


def vjet(vec, u, v, order):
    return tuple(pjet(c, u, v, order) for c in vec)


class JetFn:
    """Wraps a function (u, v, order) -> Jet2."""

    def __init__(self, fn):
        self._fn = fn

    def jet(self, u, v, order, memo=None):
        return self._fn(u, v, order)


class DU:
    """u-derivative of a provider."""

    def __init__(self, base):
        self.base = base

    def jet(self, u, v, order, memo=None):
        return pjet(self.base, u, v, order + 1).du()


class Scaled:
    def __init__(self, base, s):
        self.base, self.s = base, s

    def jet(self, u, v, order, memo=None):
        return self.s * pjet(self.base, u, v, order)


class FlipU:
    """Provider of f(-u, v)."""

    def __init__(self, base):
        self.base = base

    def jet(self, u, v, order, memo=None):
        j = pjet(self.base, -u, v, order)
        c = j.c.copy()
        for (i, jj) in monomials(order):
            if i % 2:
                c[index_of(i, jj)] = -c[index_of(i, jj)]
        return Jet2(order, c)


class ComposeU:
    """Provider of f(phi(u), v) for a scalar provider phi of u."""

    def __init__(self, base, phi):
        self.base, self.phi = base, phi

    def jet(self, u, v, order, memo=None):
        from .jets import compose2
        ph = pjet(self.phi, u, 0.0, order)
        inner = pjet(self.base, ph.value(), v, order)
        vj = Jet2.variable("v", v, order, np.shape(u))
        return compose2(inner.c, order, ph, vj)


class CurveIntegral:
    """Primitive of u*g(u) vanishing at u = 0, jets from the integrand."""

    def __init__(self, g):
        self.g = g
        self._cache = {}

    def _value(self, u):
        u = float(u)
        if u not in self._cache:
            val, _ = quad(lambda t: t * pjet(self.g, t, 0.0, 0).value(), 0.0, u, limit=200)
            self._cache[u] = val
        return self._cache[u]

    def jet(self, u, v, order, memo=None):
        if np.ndim(u) != 0:
            vals = np.vectorize(self._value)(u)
            out = Jet2.constant(0.0, order, np.shape(u))
            out.c[0] = vals
        else:
            out = Jet2.constant(self._value(u), order, ())
        if order >= 1:
            uj = Jet2.variable("u", u, order - 1, np.shape(u))
            integ = uj * pjet(self.g, u, v, order - 1)
            for i in range(integ.order + 1):
                out.c[index_of(i + 1, 0)] = integ.c[index_of(i, 0)] / (i + 1)
        return out
