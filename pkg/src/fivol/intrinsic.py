"""Functional intrinsic volumes Z_{j,zeta} (primal) and Z*_{j,zeta} (dual).

Z*_{j,zeta}(v) = Z_{j,zeta}(v*), so every query reduces to a primal function
u and its conjugate v = u*. Representations:

    smooth_hessian   int zeta(|grad u|) [D^2 u]_{n-j} dx
    dual_hessian     int zeta(|y|) [D^2 v]_j dy          (plus zeta(0)|dv(0)| for j = n)
    measure_alpha    int alpha dTheta_j(v),  alpha = C(n,j) R^{n-j} zeta
    tau_curvature    int alpha dTheta*_j(u)
    oracle           closed forms for u_t, v_t and indicators of balls and boxes

For radial functions the Hessian integrals are Stieltjes integrals along the
subgradient curve (see measures), exact whenever zeta is a piecewise density.
"""

from dataclasses import dataclass
from functools import cached_property
from math import comb, cos, inf, pi

import numpy as np

from . import densities as dens
from .errors import ArgumentError, NoClosedFormError, UnsupportedFunctionError
from .extmath import kappa
from .funcspace import (BoxCore, CatalogUt, CatalogVt, IndicatorBall, IndicatorBox,
                        PolarCore, SBoxCore, normalize)
from .measures import (_dual_kernel, _primal_kernel, _radial_curve,
                       curve_measure, polar_hessian_measure, quadratic_pushforward,
                       theta_measure, theta_star_measure)
from .quadrature import fixed_gl

REPRESENTATIONS = ("smooth_hessian", "dual_hessian", "measure_alpha", "tau_curvature", "oracle")


# ---------------------------------------------------------------------------
# classical bodies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalBody:
    """A ball rho*B^n or a centred box, optionally thickened to K + parallel*B^n."""

    kind: str
    n: int
    rho: float = 1.0
    halfwidths: tuple = ()
    parallel: float = 0.0

    def __post_init__(self):
        if self.kind not in ("ball", "box"):
            raise ArgumentError(f"unknown body kind {self.kind!r}")
        if self.kind == "box":
            h = tuple(float(x) for x in self.halfwidths)
            object.__setattr__(self, "halfwidths", h)
            object.__setattr__(self, "n", len(h))
        if not 1 <= self.n <= 8:
            raise ArgumentError("dimension outside 1..8")

    @classmethod
    def ball(cls, n, rho=1.0):
        return cls("ball", n, rho=float(rho))

    @classmethod
    def box(cls, halfwidths):
        return cls("box", len(halfwidths), halfwidths=tuple(halfwidths))

    @classmethod
    def cube(cls, n, side=1.0):
        return cls.box((side / 2,) * n)

    def thickened(self, r):
        return ClassicalBody(self.kind, self.n, self.rho, self.halfwidths, self.parallel + r)

    @cached_property
    def intrinsic_volumes(self):
        return tuple(classical_intrinsic_volumes(self))

    def volume(self):
        return parallel_volume(self)

    def spec(self):
        base = IndicatorBall(self.rho) if self.kind == "ball" else IndicatorBox(self.halfwidths)
        if self.parallel:
            from .funcspace import EpiSum
            return EpiSum(((1.0, base), (self.parallel, IndicatorBall(1.0))))
        return base

    def to_dict(self):
        d = {"type": "Ball" if self.kind == "ball" else "Box", "n": self.n}
        if self.kind == "ball":
            d["rho"] = self.rho
        else:
            d["halfwidths"] = list(self.halfwidths)
        if self.parallel:
            d["parallel"] = self.parallel
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            t = d["type"].lower()
            if t == "ball":
                return cls("ball", int(d["n"]), rho=float(d.get("rho", 1.0)),
                           parallel=float(d.get("parallel", 0.0)))
            if t == "box":
                return cls("box", len(d["halfwidths"]), halfwidths=tuple(d["halfwidths"]),
                           parallel=float(d.get("parallel", 0.0)))
            if t == "cube":
                n = int(d["n"])
                return cls.cube(n, float(d.get("side", 1.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise ArgumentError(f"malformed body spec: {e}") from e
        raise ArgumentError(f"unknown body type {d.get('type')!r}")


def _ball_steiner_coefficients(n, rho):
    """V_j from kappa_n (rho + r)^n = sum_j r^(n-j) kappa_{n-j} V_j."""
    # coefficient of r^(n-j) in kappa_n (rho + r)^n is kappa_n C(n, j) rho^j
    return [kappa(n) * comb(n, j) * rho ** j / kappa(n - j) for j in range(n + 1)]


def _elementary_symmetric(xs):
    e = [1.0] + [0.0] * len(xs)
    for x in xs:
        for k in range(len(xs), 0, -1):
            e[k] += e[k - 1] * x
    return e


def classical_intrinsic_volumes(K):
    """V_0..V_n of a ball, a box (elementary symmetric functions of the sides), or K + rB."""
    n = K.n
    if K.kind == "ball":
        base = _ball_steiner_coefficients(n, K.rho)
    else:
        base = _elementary_symmetric([2 * h for h in K.halfwidths])
    r = K.parallel
    if not r:
        return base
    # V_j(K + rB) = sum_{i<=j} C(n-i, j-i) kappa_{n-i} / kappa_{n-j} r^{j-i} V_i(K)
    return [sum(comb(n - i, j - i) * kappa(n - i) / kappa(n - j) * r ** (j - i) * base[i]
                for i in range(j + 1)) for j in range(n + 1)]


def _box_parallel_volume(h, r, order=32):
    """|box_h + rB| by slicing: a slice at distance d past a face is box_{h'} + sqrt(r^2-d^2) B."""
    if len(h) == 0:
        return 1.0
    rest = h[1:]
    total = 2 * h[0] * _box_parallel_volume(rest, r, order)
    if r > 0:
        th, w = fixed_gl(0.0, pi / 2, order)
        for t, wt in zip(th, w):
            c = r * cos(t)
            total += 2 * wt * c * _box_parallel_volume(rest, c, order)
    return total


def parallel_volume(K, r=None):
    """Volume of K + rB computed directly (not from intrinsic volumes)."""
    r = K.parallel if r is None else K.parallel + r
    if K.kind == "ball":
        return kappa(K.n) * (K.rho + r) ** K.n
    return _box_parallel_volume(list(K.halfwidths), r)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _Rl_at(zeta, l, t):
    rz = dens.transform_R(zeta, l)
    return rz.value_at_zero() if t == 0 else float(rz(t))


def fiv_oracle_ut(t, j, n, zeta):
    """Z_{j,zeta}(u_t) = kappa_n C(n,j) R^{n-j} zeta(t)."""
    if not 1 <= j <= n:
        raise ArgumentError("the u_t closed form needs 1 <= j <= n")
    dens.require_class(zeta, j, n)
    return kappa(n) * comb(n, j) * _Rl_at(zeta, n - j, float(t))


def fiv_indicator(K, j, zeta):
    """Z_{j,zeta}(I_K) = kappa_{n-j} R^{n-j} zeta(0) V_j(K); zeta(0) V_n(K) for j = n."""
    n = K.n
    dens.require_class(zeta, j, n)
    V = K.intrinsic_volumes
    if j == n:
        return zeta.value_at_zero() * V[n]
    return kappa(n - j) * _Rl_at(zeta, n - j, 0.0) * V[j]


def fiv_constant(n, zeta):
    """Z_{0,zeta} = kappa_n R^n zeta(0) = n kappa_n lim int_s^inf t^(n-1) zeta."""
    dens.require_class(zeta, 0, n)
    return kappa(n) * _Rl_at(zeta, n, 0.0)


# ---------------------------------------------------------------------------
# representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalIntrinsicVolumeQuery:
    side: str
    j: int
    zeta: object
    f: object
    n: int
    representation: str = None

    def __post_init__(self):
        if self.side not in ("primal", "dual"):
            raise ArgumentError("side must be primal or dual")
        if not 0 <= self.j <= self.n:
            raise ArgumentError(f"j = {self.j} outside 0..{self.n}")
        if self.representation is not None and self.representation not in REPRESENTATIONS:
            raise ArgumentError(f"unknown representation {self.representation!r}")


def _cores(f, side):
    """(primal core or None, dual core or None); missing sides are filled lazily by the caller."""
    if side == "primal":
        return _primal_kernel(f), None
    return None, _dual_kernel(f)


def _dual_of(u):
    return u.conj()


def _primal_of(v):
    return v.conj()


def _dual_hessian(v, j, n, zeta):
    curve = _radial_curve(v)
    if curve is not None:
        c = kappa(n) * comb(n, j)
        m = curve_measure(curve, n, lambda r, s: c * r ** (n - j) * s ** j, "r")
        return m.integrate(zeta)
    if isinstance(v, PolarCore):
        return polar_hessian_measure(v, j, n).integrate(zeta)
    raise UnsupportedFunctionError(f"dual Hessian representation not available for {v!r}")


def _smooth_hessian(u, j, n, zeta):
    curve = _radial_curve(u)
    if curve is not None:
        c = kappa(n) * comb(n, j)
        m = curve_measure(curve, n, lambda r, s: c * s ** (n - j) * r ** j, "s")
        return m.integrate(zeta)
    if isinstance(u, PolarCore):
        return quadratic_pushforward(u, n, j, "hessian").integrate(zeta)
    if isinstance(u, BoxCore) and j == n:
        # gradient vanishes on the interior of the domain
        K = ClassicalBody("box", len(u.h), halfwidths=tuple(u.h), parallel=u.r)
        return zeta.value_at_zero() * parallel_volume(K)
    raise UnsupportedFunctionError(f"primal Hessian representation not available for {u!r}")


def _oracle(f, side, j, n, zeta):
    g = normalize(f)
    if side == "primal" and isinstance(g, CatalogUt) and j >= 1:
        return fiv_oracle_ut(g.t, j, n, zeta)
    if side == "dual" and isinstance(g, CatalogVt) and j >= 1:
        return fiv_oracle_ut(g.t, j, n, zeta)
    core = _primal_kernel(f) if side == "primal" else _dual_kernel(f).conj()
    if isinstance(core, BoxCore):
        K = ClassicalBody("box", len(core.h), halfwidths=tuple(core.h), parallel=core.r)
        return fiv_indicator(K, j, zeta)
    curve = _radial_curve(core)
    if curve is not None and _is_ball_indicator(curve, core):
        return fiv_indicator(ClassicalBody.ball(n, curve.domain_radius()), j, zeta)
    raise NoClosedFormError("no closed form for this function")


def _is_ball_indicator(curve, core):
    """Gamma is [0,R] x {0} followed by the vertical ray at R, and the offset is zero."""
    rad = curve.domain_radius()
    if not 0 < rad < inf or abs(getattr(core.fn, "c0", 0.0)) > 0:
        return False
    for seg in curve.segs:
        if seg.axis == "r" and np.allclose(seg.poly.coef, 0.0):
            continue
        if seg.axis == "s" and seg.poly.degree() == 0 and abs(seg.poly.coef[0] - rad) < 1e-12:
            continue
        return False
    return True


def fiv(f, j, zeta, n, side="primal", representation=None):
    """Z_{j,zeta}(f) for side 'primal', Z*_{j,zeta}(f) for side 'dual'."""
    q = FunctionalIntrinsicVolumeQuery(side, j, zeta, f, n, representation)
    return evaluate_query(q)


def evaluate_query(q):
    j, n, zeta, side = q.j, q.n, q.zeta, q.side
    dens.require_class(zeta, j, n)
    if j == 0:
        return fiv_constant(n, zeta)
    rep = q.representation or default_representation(q.f, side, j, n)
    if rep == "oracle":
        return _oracle(q.f, side, j, n, zeta)
    u = v = None
    if side == "primal":
        u = _primal_kernel(q.f)
    else:
        v = _dual_kernel(q.f)
    if rep in ("dual_hessian", "measure_alpha") and v is None:
        v = u.conj()
    if rep in ("smooth_hessian", "tau_curvature") and u is None:
        u = v.conj()
    if rep == "dual_hessian":
        return _dual_hessian(v, j, n, zeta)
    if rep == "smooth_hessian":
        return _smooth_hessian(u, j, n, zeta)
    alpha = dens.alpha_of_zeta(zeta, j, n)
    if rep == "measure_alpha":
        return theta_measure(v, j, n).integrate(alpha)
    if rep == "tau_curvature":
        return theta_star_measure(u, j, n).integrate(alpha)
    raise ArgumentError(rep)


def default_representation(f, side, j, n):
    core = _primal_kernel(f) if side == "primal" else _dual_kernel(f)
    dual = core.conj() if side == "primal" else core
    if _radial_curve(dual) is not None or isinstance(dual, PolarCore):
        return "dual_hessian"
    primal = core if side == "primal" else None
    if isinstance(primal, (BoxCore,)) or isinstance(dual, SBoxCore):
        return "smooth_hessian" if j == n and side == "primal" else "oracle"
    return "smooth_hessian"


@dataclass
class CrossReport:
    dual_hessian: float
    measure_alpha: float
    discrepancy: float
    oracle: float = None


def cross_representation_check(f, j, zeta, n, side="dual"):
    """dual_hessian against measure_alpha for the same query."""
    a = fiv(f, j, zeta, n, side, "dual_hessian")
    b = fiv(f, j, zeta, n, side, "measure_alpha")
    d = abs(a - b) / max(abs(a), abs(b), 1e-300) if a != b else 0.0
    try:
        o = fiv(f, j, zeta, n, side, "oracle")
    except (NoClosedFormError, UnsupportedFunctionError, ArgumentError):
        o = None
    return CrossReport(a, b, d, o)
