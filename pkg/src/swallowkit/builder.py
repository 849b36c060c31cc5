"""Representation formulas for (generalized) swallowtail germs.

A germ is built from a cusp direction field xi(u) and either a bulk field
b(u, v) (general form gamma + v xi + v^2 b) or an asymptotic triple
(xi, q, r) (form gamma + v xi + v^2 q xi' + v^3 r), where gamma is the
primitive of u xi(u) vanishing at 0.  The discriminants read the germ's
class off the data:

    D0 = -det(xi, xi', -xi'' + 2 b)(0)   swallowtail  <=>  D0 != 0
    D1 =  det(xi, xi', b)(0)             generic      <=>  D1 != 0
    Dqr(u) = (2 u q - 1)^2 (6 det(xi, xi', r) - 4 q^2 det(xi, xi', xi''))

and for right-handed data the sign of Dqr(0) is the sign of the Gaussian
curvature limit at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .frontal import MapGerm, sgn
from .jets import (Expr, Jet2, JetError, as_expr, compose2, diff, fold,
                   integrate_u_times, parse)
from .metric import SpaceForm, cross, det3, dot


class BuildError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Jet providers
# ---------------------------------------------------------------------------

from .fields import CurveIntegral, DU, FlipU, JetFn, Scaled, pjet as _pjet, vjet as _vjet


def gamma_from_xi(xi):
    """Curve gamma with gamma' = u xi, gamma(0) = 0; closed form when polynomial."""
    out = []
    for comp in xi:
        if isinstance(comp, Expr):
            closed = integrate_u_times(comp)
            if closed is not None:
                out.append(closed)
                continue
        out.append(CurveIntegral(comp))
    return tuple(out)


# ---------------------------------------------------------------------------
# Data types
# ---------------------------------------------------------------------------

def _parse_vec(v):
    return tuple(parse(c) if isinstance(c, str) else (as_expr(c) if isinstance(c, (int, float)) else c)
                 for c in v)


@dataclass
class SwallowtailData:
    xi: tuple
    b: tuple
    gamma: tuple | None = None    # precomputed primitive of u xi (optional)

    def __post_init__(self):
        self.xi = _parse_vec(self.xi)
        self.b = _parse_vec(self.b)
        x0 = np.array([_pjet(c, 0.0, 0.0, 0).value() for c in self.xi])
        if np.linalg.norm(x0) < 1e-12:
            raise BuildError("xi(0) = 0: not a cusp direction field")

    def xi_jets(self, u, order):
        return _vjet(self.xi, u, 0.0, order)

    def b_jets(self, u, v, order):
        return _vjet(self.b, u, v, order)


@dataclass
class AsymptoticData:
    xi: tuple
    q: object
    r: tuple
    gamma: tuple | None = None

    def __post_init__(self):
        self.xi = _parse_vec(self.xi)
        self.q = parse(self.q) if isinstance(self.q, str) else (
            as_expr(self.q) if isinstance(self.q, (int, float)) else self.q)
        self.r = _parse_vec(self.r)
        x0 = np.array([_pjet(c, 0.0, 0.0, 0).value() for c in self.xi])
        if np.linalg.norm(x0) < 1e-12:
            raise BuildError("xi(0) = 0: not a cusp direction field")

    def xi_jets(self, u, order):
        return _vjet(self.xi, u, 0.0, order)

    def as_general(self) -> SwallowtailData:
        """Same germ as (xi, b) with b = q xi' + v r."""
        dxi = tuple(_derivative(c) for c in self.xi)
        q, r = self.q, self.r

        def bk(k):
            def fn(u, v, order):
                vj = Jet2.variable("v", v, order, np.shape(u))
                return (_pjet(q, u, v, order) * _pjet(dxi[k], u, v, order)
                        + vj * _pjet(r[k], u, v, order))
            return JetFn(fn)

        if all(isinstance(c, Expr) for c in (*self.xi, self.q, *self.r)):
            from .jets import Mul, Add, V as VV
            b = tuple(fold(Add(Mul(self.q, dxi[k]), Mul(VV, self.r[k]))) for k in range(3))
        else:
            b = tuple(bk(k) for k in range(3))
        d = SwallowtailData.__new__(SwallowtailData)
        d.xi = self.xi
        d.b = b
        d.gamma = getattr(self, "gamma", None)
        return d


def _derivative(comp):
    if isinstance(comp, Expr):
        return diff(comp, "u")
    return DU(comp)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def build(data: SwallowtailData, a: float = 0.0) -> MapGerm:
    """Germ gamma + v xi + v^2 b in the space form of parameter a."""
    gamma = getattr(data, "gamma", None) or gamma_from_xi(data.xi)
    sf = SpaceForm(a)
    if all(isinstance(c, Expr) for c in (*gamma, *data.xi, *data.b)):
        from .jets import Add, Mul, Pow, V as VV
        comps = tuple(fold(Add(Add(gamma[k], Mul(VV, data.xi[k])),
                               Mul(Pow(VV, 2), data.b[k]))) for k in range(3))
        return MapGerm.from_exprs(comps, sf=sf, data=data)

    def comp(k):
        def fn(u, v, order):
            vj = Jet2.variable("v", v, order, np.shape(u))
            return (_pjet(gamma[k], u, v, order) + vj * _pjet(data.xi[k], u, v, order)
                    + vj * vj * _pjet(data.b[k], u, v, order))
        return JetFn(fn)

    return MapGerm(tuple(comp(k) for k in range(3)), sf=sf, data=data)


def build_asymptotic(data: AsymptoticData, a: float = 0.0,
                     require_swallowtail: bool = True) -> MapGerm:
    """Germ gamma + v xi + v^2 q xi' + v^3 r; needs a generic cusp direction."""
    disc = discriminants(data)
    if require_swallowtail and sgn(disc.psi0, disc.scale) == 0:
        raise BuildError(
            "non-generic cusp direction: no asymptotic swallowtail exists along it "
            f"(det(xi, xi', xi'')(0) = {disc.psi0:.3g})")
    germ = build(data.as_general(), a=a)
    germ.data = data
    return germ


# ---------------------------------------------------------------------------
# Discriminants
# ---------------------------------------------------------------------------

@dataclass
class Discriminants:
    D0: float          # wave-front discriminant; sign = sigma0_S
    D1: float          # genericity discriminant; sign = sigma_g_S
    psi0: float        # det(xi, xi', xi'')(0)
    scale: float
    Dqr: object = None   # u -> Dqr(u, 0), asymptotic data only
    delta: object = None  # u -> delta(u)

    def signs(self):
        return sgn(self.D0, self.scale), sgn(self.D1, self.scale)


def _xi_frame(data, u=0.0, order=3):
    xj = data.xi_jets(u, order)
    xi = np.array([c.value() for c in xj])
    xip = np.array([c.partial(1, 0) for c in xj])
    xipp = np.array([c.partial(2, 0) for c in xj])
    return xi, xip, xipp


def discriminants(data) -> Discriminants:
    xi, xip, xipp = _xi_frame(data)
    psi0 = float(np.linalg.det(np.stack([xi, xip, xipp], axis=1)))
    scale = max(np.linalg.norm(xi) * np.linalg.norm(xip), 1e-6) ** 1.5
    if isinstance(data, AsymptoticData):
        r0 = np.array([_pjet(c, 0.0, 0.0, 0).value() for c in data.r])
        q0 = _pjet(data.q, 0.0, 0.0, 0).value()
        b0 = q0 * xip  # b(o) = q(0) xi'(0) since the v r term vanishes on the axis
        general = data
    else:
        b0 = np.array([_pjet(c, 0.0, 0.0, 0).value() for c in data.b])
        general = None
    D0 = -float(np.linalg.det(np.stack([xi, xip, -xipp + 2 * b0], axis=1)))
    D1 = float(np.linalg.det(np.stack([xi, xip, b0], axis=1)))

    Dqr = None
    if general is not None:
        def Dqr(u, data=data):
            xi_u, xip_u, xipp_u = _xi_frame(data, u)
            q_u = _pjet(data.q, u, 0.0, 0).value()
            r_u = np.array([_pjet(c, u, 0.0, 0).value() for c in data.r])
            det_r = float(np.linalg.det(np.stack([xi_u, xip_u, r_u], axis=1)))
            det_x = float(np.linalg.det(np.stack([xi_u, xip_u, xipp_u], axis=1)))
            return (2 * u * q_u - 1.0) ** 2 * (6.0 * det_r - 4.0 * q_u ** 2 * det_x)

    def delta(u, data=data):
        nt = normal_on_axis(data)
        nj = _vjet(nt, u, 0.0, 2)
        n0 = np.array([c.value() for c in nj])
        n1 = np.array([c.partial(1, 0) for c in nj])
        xj = data.xi_jets(u, 2)
        x0 = np.array([c.value() for c in xj])
        return float(np.dot(n1, np.cross(n0, x0)))

    return Discriminants(D0=D0, D1=D1, psi0=psi0, scale=scale, Dqr=Dqr, delta=delta)


def normal_on_axis(data):
    """Provider of nu~(u, 0) = xi x xi' - 2u (xi x b(.,0)) from the data."""
    gen = data.as_general() if isinstance(data, AsymptoticData) else data

    def comp(k):
        def fn(u, v, order):
            xj = gen.xi_jets(u, order + 1)
            dx = tuple(c.du() for c in xj)
            bj = tuple(c.axis_part() for c in gen.b_jets(u, 0.0, order))
            xj = tuple(c.truncate(order) for c in xj)
            uj = Jet2.variable("u", u, order, np.shape(u))
            c1 = cross(xj, dx)
            c2 = cross(xj, bj)
            return c1[k] - 2.0 * uj * c2[k]
        return JetFn(fn)

    return tuple(comp(k) for k in range(3))


# ---------------------------------------------------------------------------
# Inverse problems: extract data, convert to asymptotic form
# ---------------------------------------------------------------------------

class _AxisRestriction:
    """gamma(u) = f(u, 0) of a germ, as a provider."""

    def __init__(self, germ, k):
        self.germ = germ
        self.k = k

    def jet(self, u, v, order, memo=None):
        return self.germ.fjet(u, 0.0, order)[self.k].axis_part()


def extract_data(germ: MapGerm, order=6, check_tol=1e-7) -> SwallowtailData:
    """Recover (xi, b) with germ = gamma + v xi + v^2 b up to v-rescaling.

    Requires the germ to be in admissible form (singular set = u-axis).
    The v-coefficient field a(u,0) must be parallel to xi(u); the residual
    of that projection is the admissibility diagnostic.
    """
    F0 = germ.fjet(0.0, 0.0, order + 2)
    fu0 = np.array([c.du().value() for c in F0])
    fv0 = np.array([c.dv().value() for c in F0])
    if np.linalg.norm(np.cross(fu0, fv0)) > 1e-8 * (1 + np.linalg.norm(fu0) * np.linalg.norm(fv0)):
        raise BuildError("origin is a regular point: nothing to extract")
    if np.linalg.norm(fu0) > 1e-8 * (1 + np.linalg.norm(fv0)):
        raise BuildError("origin is not of the second kind in these coordinates")

    # gamma' must vanish at 0 and the axis must be singular
    gamma_j = tuple(c.axis_part() for c in F0)
    xi0 = np.array([c.partial(2, 0) / 2 for c in gamma_j])  # gamma''(0)/2... xi(0) = gamma''(0)
    # consistency: a(u,0) parallel to xi at samples
    for uu in (-0.1, -0.05, 0.05, 0.1):
        Fj = germ.fjet(uu, 0.0, 3)
        a0 = np.array([c.dv().value() for c in Fj])
        gp = np.array([c.du().value() for c in Fj]) / uu
        c = np.cross(a0, gp)
        if np.linalg.norm(c) > check_tol * (1 + np.linalg.norm(a0) * np.linalg.norm(gp)):
            raise BuildError(f"not admissible: f_v(u,0) not parallel to xi(u) at u={uu}"
                             f" (residual {np.linalg.norm(c):.3g})")

    class Xi:
        def __init__(self, germ, k):
            self.germ, self.k = germ, k

        def jet(self, u, v, order, memo=None):
            gj = self.germ.fjet(u, 0.0, order + 2)[self.k].axis_part()
            gp = gj.du()
            if u == 0.0:
                return gp.divide_by_u()
            uj = Jet2.variable("u", u, order + 1, ())
            return (gp / uj).truncate(order)

    xi = tuple(Xi(germ, k) for k in range(3))

    class Alpha:
        """alpha(u) with a(u, 0) = alpha(u) xi(u)."""

        def __init__(self, germ, xi):
            self.germ, self.xi = germ, xi

        def jet(self, u, v, order, memo=None):
            Fj = self.germ.fjet(u, 0.0, order + 2)
            a_axis = tuple((c - c.axis_part()).divide_by_v().axis_part() for c in Fj)
            xj = _vjet(self.xi, u, 0.0, order + 1)
            num = dot(a_axis, xj)
            den = dot(xj, xj)
            return (num / den).truncate(order)

    alpha = Alpha(germ, xi)
    a0val = _pjet(alpha, 0.0, 0.0, 0).value()
    if abs(a0val) < 1e-10:
        raise BuildError("degenerate extraction: alpha(0) = 0")

    class Bfield:
        """b in the normalized coordinates (v replaced by v alpha(u))."""

        def __init__(self, germ, xi, alpha, k):
            self.germ, self.xi, self.alpha, self.k = germ, xi, alpha, k

        def jet(self, u, w, order, memo=None):
            K = order + 3
            aj = _pjet(self.alpha, u, 0.0, K)
            a_here = aj.value()
            v_here = w / a_here
            Fj = self.germ.fjet(u, v_here, K)[self.k]
            # b~(u, v) = (a(u,v) - a(u,0)) / v with a = (f - gamma)/v
            if v_here == 0.0:
                a_full = (Fj - Fj.axis_part()).divide_by_v()
                btilde = (a_full - a_full.axis_part()).divide_by_v()
            else:
                vj = Jet2.variable("v", v_here, K, ())
                a_full = (Fj - Fj.axis_part()) / vj
                btilde = (a_full - a_full.axis_part()) / vj
            # compose with v = w / alpha(u): U = u-var, V = w-var / alpha
            o = btilde.order
            uj = Jet2.variable("u", u, o, ())
            wj = Jet2.variable("v", w, o, ())
            Vin = wj / aj.truncate(o)
            out = compose2(btilde.c, o, uj, Vin)
            return (out / (aj.truncate(out.order) * aj.truncate(out.order))).truncate(order)

    b = tuple(Bfield(germ, xi, alpha, k) for k in range(3))
    d = SwallowtailData.__new__(SwallowtailData)
    d.xi = xi
    d.b = b
    d.gamma = None
    return d


def convert_to_asymptotic_form(data: SwallowtailData, samples=(-0.1, -0.05, 0.0, 0.05, 0.1),
                               tol=1e-8) -> AsymptoticData:
    """Rewrite (xi, b) as (xi, q, r); rejects data violating the span condition.

    The condition is b(u, 0) in span{xi(u), xi'(u)} at each sampled u; the
    tangential multiple p(u) is then absorbed by the substitution
    v -> v + v^2 p(u), leaving the normal form with q and r only.
    """
    worst_u, worst = None, 0.0
    for uu in samples:
        xj = data.xi_jets(uu, 1)
        xi = np.array([c.value() for c in xj])
        xip = np.array([c.partial(1, 0) for c in xj])
        b0 = np.array([c.value() for c in _vjet(data.b, uu, 0.0, 0)])
        n = np.cross(xi, xip)
        resid = abs(np.dot(b0, n)) / (np.linalg.norm(n) * (1 + np.linalg.norm(b0)))
        if resid > worst:
            worst, worst_u = resid, uu
    if worst > tol:
        raise BuildError(f"b(u,0) leaves span(xi, xi') (worst residual {worst:.3g} at u={worst_u})")

    def coef(which):
        def fn(u, v, order):
            xj = data.xi_jets(u, order + 1)
            dx = tuple(c.du() for c in xj)
            xj = tuple(c.truncate(order) for c in xj)
            bj = tuple(c.axis_part() for c in _vjet(data.b, u, 0.0, order))
            n = cross(xj, dx)
            den = det3(xj, dx, n)
            if which == "q":
                return det3(xj, bj, n) / den
            return det3(bj, dx, n) / den
        return JetFn(fn)

    q = coef("q")
    p = coef("p")

    class R:
        """r(u, w) = (f(u, v(w)) - gamma - w xi - w^2 q xi') / w^3."""

        def __init__(self, data, p, q, k):
            self.data, self.p, self.q, self.k = data, p, q, k
            self.gamma = gamma_from_xi(data.xi)

        def jet(self, u, w, order, memo=None):
            K = order + 4
            pj = _pjet(self.p, u, 0.0, K)
            pval = pj.value()
            # v solving v + v^2 p(u) = w
            if w == 0.0:
                v0 = 0.0
            else:
                v0 = w
                for _ in range(60):
                    g = v0 + v0 * v0 * pval - w
                    gp = 1 + 2 * v0 * pval
                    v0 -= g / gp
            uj = Jet2.variable("u", u, K, ())
            wj = Jet2.variable("v", w, K, ())
            # jets of v(u, w): Newton on jets for W(u, v) = v + v^2 p(u)
            Vj = Jet2.constant(v0, K, ())
            for _ in range(6):
                Wv = Vj + Vj * Vj * pj
                dW = 1.0 + 2.0 * Vj * pj
                Vj = Vj - (Wv - wj) / dW
            xj = _vjet(self.data.xi, u, 0.0, K)
            dxj = tuple(c.du() for c in _vjet(self.data.xi, u, 0.0, K + 1))
            g = _pjet(self.gamma[self.k], u, 0.0, K)
            # f(u, v(w)) assembled from the data, with b composed through v(w)
            bj = _pjet(self.data.b[self.k], u, v0, K)
            bj = compose2(bj.c, K, uj.truncate(K), Vj.truncate(K))
            f = g.truncate(bj.order) + Vj.truncate(bj.order) * xj[self.k].truncate(bj.order) \
                + Vj.truncate(bj.order) * Vj.truncate(bj.order) * bj
            qj = _pjet(self.q, u, 0.0, K)
            o = f.order
            core = (f - g.truncate(o) - wj.truncate(o) * xj[self.k].truncate(o)
                    - wj.truncate(o) * wj.truncate(o) * qj.truncate(o) * dxj[self.k].truncate(o))
            for _ in range(3):
                if w == 0.0:
                    core = core.divide_by_v(tol=1e-7)
                else:
                    core = core / wj.truncate(core.order)
            return core.truncate(order)

    r = tuple(R(data, p, q, k) for k in range(3))
    out = AsymptoticData.__new__(AsymptoticData)
    out.xi = data.xi
    out.q = q
    out.r = r
    out.gamma = getattr(data, "gamma", None)
    return out


# ---------------------------------------------------------------------------
# Existence along a prescribed cusp
# ---------------------------------------------------------------------------

def flip_data(data):
    """Data of the germ composed with (u, v) -> (-u, -v); flips sigma0_S."""
    g = getattr(data, "gamma", None) or gamma_from_xi(data.xi)
    # the primitive of u xi(-u) vanishing at 0 is gamma(-u)
    gflip = tuple(FlipU(c) for c in g)
    if isinstance(data, AsymptoticData):
        d = AsymptoticData.__new__(AsymptoticData)
        d.xi = tuple(FlipU(c) for c in data.xi)
        d.gamma = gflip

        class NegFlip:
            def __init__(self, base):
                self.base = FlipU(base)

            def jet(self, u, v, order, memo=None):
                return -self.base.jet(u, v, order)

        d.q = NegFlip(data.q)
        d.r = tuple(FlipU(c) for c in data.r)
        return d
    d = SwallowtailData.__new__(SwallowtailData)
    d.xi = tuple(FlipU(c) for c in data.xi)
    d.b = tuple(FlipU(c) for c in data.b)
    d.gamma = gflip
    return d


def scale_vec(c, vec):
    out = []
    for comp in vec:
        if isinstance(comp, Expr):
            from .jets import Const, Mul
            out.append(fold(Mul(Const(c), comp)))
        else:
            out.append(Scaled(comp, c))
    return tuple(out)


def exists_swallowtail_along(xi, want_sigma_g: int, tail_sign=None) -> SwallowtailData:
    """Swallowtail data along the cusp with direction field xi.

    For a generic cusp any sign of sigma_g_S can be requested (0 yields an
    asymptotic germ).  Along a non-generic cusp the wave-front condition
    forces sigma0_S * sigma_g_S < 0, the request 0 is impossible, and the
    tail-part curvature is always negative, so a positive tail request is
    rejected.
    """
    xi = _parse_vec(xi)
    probe = SwallowtailData(xi=xi, b=(0.0, 0.0, 0.0))
    xi0, xip0, xipp0 = _xi_frame(probe)
    if np.linalg.norm(np.cross(xi0, xip0)) < 1e-12:
        raise BuildError("not a space-cusp direction field: xi(0) x xi'(0) = 0")
    psi = float(np.linalg.det(np.stack([xi0, xip0, xipp0], axis=1)))
    scale = max(np.linalg.norm(xi0) * np.linalg.norm(xip0), 1e-6) ** 1.5
    generic = sgn(psi, scale) != 0
    if generic and psi < 0:
        xi = tuple(FlipU(c) for c in xi)
        psi = -psi

    ddxi = tuple(_derivative(_derivative(c)) for c in xi)
    if generic:
        if want_sigma_g == 0:
            return _raw_data(xi, _zero_vec())
        b = scale_vec(0.25 * want_sigma_g, ddxi)
        return _raw_data(xi, b)
    if want_sigma_g == 0:
        raise BuildError("no asymptotic swallowtails along a non-generic space-cusp")
    if tail_sign is not None and tail_sign > 0:
        raise BuildError("swallowtails along a non-generic cusp always have a "
                         "negatively curved tail part")

    def nk(k):
        def fn(u, v, order):
            xj = _vjet(xi, u, 0.0, order + 1)
            dx = tuple(c.du() for c in xj)
            return cross(tuple(c.truncate(order) for c in xj), dx)[k]
        return JetFn(fn)

    b = scale_vec(0.5 * want_sigma_g, tuple(nk(k) for k in range(3)))
    return _raw_data(xi, b)


def _zero_vec():
    from .jets import ZERO
    return (ZERO, ZERO, ZERO)


def _raw_data(xi, b, gamma=None):
    d = SwallowtailData.__new__(SwallowtailData)
    d.xi = tuple(xi)
    d.b = tuple(b)
    d.gamma = gamma
    return d
