"""Convex functions on R^n: a closed-form catalog, grid samples, and epi-calculus.

Catalog specs are immutable dataclasses that carry no dimension of their own
(a ball indicator works in every R^n); the dimension comes from the point a
spec is evaluated at, or from the caller. Each spec reduces to a normal form

    f(x) = core(x - shift) + <lin, x> + const

with one of a handful of cores (radial curve, quadratic-plus-cone, box
parallel body, box support plus cone, conjugate of quadratic-plus-cone).
Sums, epi-sums and conjugates are computed on cores, so evaluation of an
epi-sum goes through the identity (u box w)* = u* + w*.

Values are IEEE floats with +inf as the extended real "+infinity"; -inf never
occurs for proper functions.
"""

import json
from dataclasses import dataclass, field, fields
from functools import lru_cache
from math import inf, isfinite

import numpy as np
from numpy.polynomial import Polynomial as P

from .config import DEFAULT
from .errors import (ArgumentError, DifferentiabilityError, NoClosedFormError,
                     RejectionError, UnsupportedFunctionError)
from .extmath import SymMat
from .radial import Curve, RadialFn, RFunc


# ---------------------------------------------------------------------------
# catalog specs
# ---------------------------------------------------------------------------

def _vec(v):
    return tuple(float(x) for x in np.atleast_1d(np.asarray(v, dtype=float)))


@dataclass(frozen=True)
class Quadratic:
    """x -> 1/2 <Qx, x> + <b, x> + c with Q positive semidefinite."""

    Q: SymMat
    b: tuple = None
    c: float = 0.0

    def __post_init__(self):
        if not isinstance(self.Q, SymMat):
            object.__setattr__(self, "Q", SymMat.from_array(self.Q))
        n = self.Q.n
        b = (0.0,) * n if self.b is None else _vec(self.b)
        if len(b) != n:
            raise ArgumentError("linear term has the wrong length")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))
        ev = np.linalg.eigvalsh(self.Q.entries)
        if ev[0] < -1e-12 * max(1.0, abs(ev[-1])):
            raise ArgumentError("quadratic form is not positive semidefinite")

    @classmethod
    def iso(cls, n, q=1.0):
        return cls(SymMat.from_array(q * np.eye(n)))

    @classmethod
    def affine(cls, b, c=0.0):
        b = _vec(b)
        return cls(SymMat.from_array(np.zeros((len(b), len(b)))), b, c)


@dataclass(frozen=True)
class RadialProfile:
    """x -> phi(|x|), phi convex non-decreasing and piecewise polynomial.

    knots are the left ends of the pieces (knots[0] = 0); the last piece runs
    to radius, or to infinity when radius is None. Beyond radius the function
    is +inf. pieces hold power-basis coefficients of phi in r.
    """

    knots: tuple
    pieces: tuple
    radius: float = None

    def __post_init__(self):
        ks = tuple(float(k) for k in self.knots)
        pcs = tuple(tuple(float(c) for c in p) for p in self.pieces)
        if not ks or ks[0] != 0.0 or len(ks) != len(pcs):
            raise ArgumentError("need knots[0] = 0 and one piece per knot")
        if any(b <= a for a, b in zip(ks[:-1], ks[1:])):
            raise ArgumentError("knots must increase")
        rad = None if self.radius is None else float(self.radius)
        if rad is not None and rad <= ks[-1] and not (rad == 0.0 and ks == (0.0,)):
            raise ArgumentError("radius must exceed the last knot")
        object.__setattr__(self, "knots", ks)
        object.__setattr__(self, "pieces", pcs)
        object.__setattr__(self, "radius", rad)
        for i in range(1, len(ks)):
            l, r = P(pcs[i - 1])(ks[i]), P(pcs[i])(ks[i])
            if abs(l - r) > 1e-10 * max(1.0, abs(l)):
                raise ArgumentError(f"profile is discontinuous at {ks[i]}")
        if not _profile_fn(self).is_convex():
            raise ArgumentError("profile is not convex and non-decreasing")


@dataclass(frozen=True)
class IndicatorBall:
    rho: float = 1.0

    def __post_init__(self):
        if not self.rho >= 0:
            raise ArgumentError("radius must be >= 0")


@dataclass(frozen=True)
class IndicatorBox:
    halfwidths: tuple

    def __post_init__(self):
        h = _vec(self.halfwidths)
        if any(x < 0 for x in h):
            raise ArgumentError("halfwidths must be >= 0")
        object.__setattr__(self, "halfwidths", h)


@dataclass(frozen=True)
class SupportBall:
    """x -> rho |x|."""

    rho: float = 1.0

    def __post_init__(self):
        if not self.rho >= 0:
            raise ArgumentError("radius must be >= 0")


@dataclass(frozen=True)
class SupportBox:
    """x -> sum_i h_i |x_i|, the support function of the box."""

    halfwidths: tuple

    def __post_init__(self):
        h = _vec(self.halfwidths)
        if any(x < 0 for x in h):
            raise ArgumentError("halfwidths must be >= 0")
        object.__setattr__(self, "halfwidths", h)


@dataclass(frozen=True)
class CatalogUt:
    """u_t(x) = t|x| + I_B(x)."""

    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise ArgumentError("slope must be >= 0")


@dataclass(frozen=True)
class CatalogVt:
    """v_t(x) = max(0, |x| - t), the conjugate of u_t."""

    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise ArgumentError("plateau radius must be >= 0")


def _terms(terms):
    out = []
    for lam, f in terms:
        lam = float(lam)
        if not lam > 0:
            raise ArgumentError("combination weights must be > 0")
        out.append((lam, f))
    if not out:
        raise ArgumentError("empty combination")
    return tuple(out)


@dataclass(frozen=True)
class EpiSum:
    """Infimal convolution of the epi-multiples lam_i * f_i."""

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", _terms(self.terms))


@dataclass(frozen=True)
class Sum:
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", _terms(self.terms))


@dataclass(frozen=True)
class Shift:
    """x -> child(x - tau) + gamma."""

    child: object
    tau: tuple
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tau", _vec(self.tau))
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass(frozen=True)
class Max:
    a: object
    b: object


@dataclass(frozen=True)
class Min:
    a: object
    b: object


@dataclass(frozen=True)
class Conjugate:
    """Symbolic conjugate, used when no catalog variant represents it."""

    child: object


SPEC_TYPES = (Quadratic, RadialProfile, IndicatorBall, IndicatorBox, SupportBall, SupportBox,
              CatalogUt, CatalogVt, EpiSum, Sum, Shift, Max, Min, Conjugate)


def _profile_fn(p):
    ks = p.knots
    end = p.radius
    top = end if end is not None else inf
    polys = tuple(P(c).deriv() if len(c) > 1 else P([0.0]) for c in p.pieces)
    c0 = float(P(p.pieces[0])(0.0))
    if end == 0.0:
        return RadialFn(Curve.from_rfunc(RFunc((0.0, 0.0), (), 0.0)), c0)
    return RadialFn(Curve.from_rfunc(RFunc(ks + (top,), polys, end)), c0)


def profile_of(fn):
    """RadialProfile spec of a RadialFn (values integrated from the curve)."""
    knots, vals, end = fn.value_pieces()
    if not vals:
        return RadialProfile((0.0,), ((fn.c0,),), 0.0)
    pieces = tuple(tuple(float(c) for c in np.trim_zeros(v.coef, "b")) or (0.0,) for v in vals)
    return RadialProfile(tuple(knots[:-1]), pieces, end)


# ---------------------------------------------------------------------------
# cores
# ---------------------------------------------------------------------------

def _zero_if_small(v, tol=1e-15):
    return v if v is not None and np.max(np.abs(v)) > tol else None


class RadialCore:
    def __init__(self, fn):
        self.fn = fn

    def __repr__(self):
        return f"RadialCore({self.fn!r})"

    def radial(self):
        return self.fn

    def value(self, x):
        return self.fn.evaluate(x)

    def gradient(self, x):
        return self.fn.gradient(x)

    def hessian(self, x):
        return self.fn.hessian(x)

    def conj(self):
        return RadialCore(self.fn.conj())

    def scale(self, lam):
        return RadialCore(self.fn.scale(lam))

    def epi_scale(self, lam):
        return RadialCore(self.fn.epi_scale(lam))

    def add(self, other):
        o = other.radial()
        return RadialCore(self.fn.add(o)) if o is not None else None

    def is_supercoercive(self):
        return self.fn.curve.gradient_bound() == inf

    def is_finite(self):
        return self.fn.curve.domain_radius() == inf


class PolarCore:
    """x -> 1/2 <Px, x> + p/2 |x|^2 + c |x|; P None means zero."""

    def __init__(self, P=None, p=0.0, c=0.0):
        self.P = None if P is None else _zero_if_small(np.asarray(P, dtype=float))
        self.p = float(p)
        self.c = float(c)

    def __repr__(self):
        return f"PolarCore(P={None if self.P is None else self.P.tolist()}, p={self.p}, c={self.c})"

    def matrix(self, n):
        m = self.p * np.eye(n)
        return m if self.P is None else m + self.P

    def radial(self):
        if self.P is not None:
            return None
        curve = Curve.from_rfunc(RFunc((0.0, inf), (P([self.c, self.p]),), None))
        return RadialFn(curve, 0.0)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.matrix(len(x)) @ x) + self.c * float(np.linalg.norm(x))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = self.matrix(len(x)) @ x
        if self.c:
            r = np.linalg.norm(x)
            if r == 0:
                raise DifferentiabilityError("cone point at the origin")
            g = g + self.c * x / r
        return g

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        h = self.matrix(len(x))
        if self.c:
            r = np.linalg.norm(x)
            if r == 0:
                raise DifferentiabilityError("cone point at the origin")
            e = x / r
            h = h + self.c * (np.eye(len(x)) - np.outer(e, e)) / r
        return h

    def conj(self):
        if self.P is None:
            if self.c == 0.0 and self.p > 0:
                return PolarCore(None, 1.0 / self.p)
            return RadialCore(self.radial().conj())
        if self.c == 0.0:
            n = self.P.shape[0]
            m = self.matrix(n)
            ev = np.linalg.eigvalsh(m)
            if ev[0] <= 1e-12 * max(1.0, ev[-1]):
                raise NoClosedFormError("quadratic with singular form has no finite conjugate")
            return PolarCore(np.linalg.inv(m))
        return ConjPolarCore(self)

    def scale(self, lam):
        return PolarCore(None if self.P is None else lam * self.P, lam * self.p, lam * self.c)

    def epi_scale(self, lam):
        return PolarCore(None if self.P is None else self.P / lam, self.p / lam, self.c)

    def add(self, other):
        if isinstance(other, PolarCore):
            if self.P is None:
                Pm = other.P
            elif other.P is None:
                Pm = self.P
            else:
                Pm = self.P + other.P
            return PolarCore(Pm, self.p + other.p, self.c + other.c)
        if isinstance(other, SBoxCore) and self.P is None and self.p == 0.0:
            return SBoxCore(other.h, other.r + self.c)
        a, b = self.radial(), other.radial()
        if a is not None and b is not None:
            return RadialCore(a.add(b))
        return None

    def is_supercoercive(self):
        if self.P is None:
            return self.p > 0
        return np.linalg.eigvalsh(self.matrix(self.P.shape[0]))[0] > 1e-12

    def is_finite(self):
        return True


class ConjPolarCore:
    """Conjugate of 1/2<Py, y> + c|y| with c > 0: the quadratic 1/2<P^-1 x, x>
    smeared over the ball c*B (an infimal convolution with c * I_B)."""

    def __init__(self, dual):
        self.dual = dual

    def __repr__(self):
        return f"ConjPolarCore({self.dual!r})"

    def radial(self):
        r = self.dual.radial()
        return None if r is None else r.conj()

    def _ymax(self, x):
        x = np.asarray(x, dtype=float)
        c = self.dual.c
        if np.linalg.norm(x) <= c:
            return np.zeros_like(x)
        m = self.dual.matrix(len(x))
        eye = np.eye(len(x))

        def g(mu):
            return mu * np.linalg.norm(np.linalg.solve(m + mu * eye, x)) - c

        lo, hi = 0.0, 1.0
        while g(hi) < 0:
            hi *= 2.0
            if hi > 1e300:
                raise UnsupportedFunctionError("no maximiser found")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-16 * hi:
                break
        return np.linalg.solve(m + hi * eye, x)

    def value(self, x):
        y = self._ymax(x)
        return float(np.dot(x, y)) - self.dual.value(y)

    def gradient(self, x):
        return self._ymax(x)

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        rho, c = np.linalg.norm(x), self.dual.c
        if rho < c * (1 - 1e-9):
            # interior of the flat region c*B
            return np.zeros((len(x), len(x)))
        if rho <= c * (1 + 1e-9):
            raise DifferentiabilityError("boundary of the flat region")
        return np.linalg.inv(self.dual.hessian(self._ymax(x)))

    def conj(self):
        return self.dual

    def scale(self, lam):
        return ConjPolarCore(self.dual.epi_scale(lam))

    def epi_scale(self, lam):
        return ConjPolarCore(self.dual.scale(lam))

    def add(self, other):
        a, b = self.radial(), other.radial()
        if a is not None and b is not None:
            return RadialCore(a.add(b))
        return None

    def is_supercoercive(self):
        return True

    def is_finite(self):
        return self.dual.is_supercoercive()


class BoxCore:
    """Indicator of the parallel body K + rB for the box K = prod [-h_i, h_i]."""

    def __init__(self, h, r=0.0):
        self.h = np.asarray(h, dtype=float)
        self.r = float(r)

    def __repr__(self):
        return f"BoxCore(h={self.h.tolist()}, r={self.r})"

    def radial(self):
        return None

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(np.maximum(np.abs(x) - self.h, 0.0)))

    def value(self, x):
        d = self.distance(x)
        return 0.0 if d <= self.r * (1 + 1e-15) + 1e-300 else inf

    def gradient(self, x):
        if self.distance(x) >= self.r and (self.r > 0 or np.any(np.abs(x) >= self.h)):
            raise DifferentiabilityError("boundary of the domain")
        return np.zeros(len(x))

    def hessian(self, x):
        self.gradient(x)
        return np.zeros((len(x), len(x)))

    def conj(self):
        return SBoxCore(self.h, self.r)

    def scale(self, lam):
        return self

    def epi_scale(self, lam):
        return BoxCore(lam * self.h, lam * self.r)

    def add(self, other):
        return None

    def is_supercoercive(self):
        return True

    def is_finite(self):
        return False


class SBoxCore:
    """x -> sum_i h_i |x_i| + r |x|."""

    def __init__(self, h, r=0.0):
        self.h = np.asarray(h, dtype=float)
        self.r = float(r)

    def __repr__(self):
        return f"SBoxCore(h={self.h.tolist()}, r={self.r})"

    def radial(self):
        return None

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(self.h @ np.abs(x)) + self.r * float(np.linalg.norm(x))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x == 0) & (self.h > 0)) or (self.r > 0 and not np.any(x)):
            raise DifferentiabilityError("kink of the support function")
        g = self.h * np.sign(x)
        if self.r:
            g = g + self.r * x / np.linalg.norm(x)
        return g

    def hessian(self, x):
        self.gradient(x)
        x = np.asarray(x, dtype=float)
        if not self.r:
            return np.zeros((len(x), len(x)))
        nx = np.linalg.norm(x)
        e = x / nx
        return self.r * (np.eye(len(x)) - np.outer(e, e)) / nx

    def conj(self):
        return BoxCore(self.h, self.r)

    def scale(self, lam):
        return SBoxCore(lam * self.h, lam * self.r)

    def epi_scale(self, lam):
        return self

    def add(self, other):
        if isinstance(other, SBoxCore):
            return SBoxCore(self.h + other.h, self.r + other.r)
        if isinstance(other, PolarCore) and other.P is None and other.p == 0.0:
            return SBoxCore(self.h, self.r + other.c)
        return None

    def is_supercoercive(self):
        return False

    def is_finite(self):
        return True


# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------

def _add_vec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


@dataclass(frozen=True, eq=False)
class Normal:
    """f(x) = core(x - shift) + <lin, x> + const."""

    core: object
    shift: object = None
    lin: object = None
    const: float = 0.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        y = x if self.shift is None else x - self.shift
        v = self.core.value(y)
        if v == inf:
            return inf
        if self.lin is not None:
            v += float(self.lin @ x)
        return v + self.const

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        y = x if self.shift is None else x - self.shift
        g = np.asarray(self.core.gradient(y), dtype=float)
        return g if self.lin is None else g + self.lin

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        y = x if self.shift is None else x - self.shift
        return np.asarray(self.core.hessian(y), dtype=float)

    def conj(self):
        c = self.core.conj()
        lin, shift = self.shift, self.lin
        const = -self.const
        if self.shift is not None and self.lin is not None:
            const -= float(self.shift @ self.lin)
        return Normal(c, shift, lin, const)

    def scale(self, lam):
        return Normal(self.core.scale(lam), self.shift,
                      None if self.lin is None else lam * self.lin, lam * self.const)

    def epi_scale(self, lam):
        return Normal(self.core.epi_scale(lam), None if self.shift is None else lam * self.shift,
                      self.lin, lam * self.const)

    def unshifted(self):
        """Move a shift into lin/const when the core is a pure quadratic."""
        if self.shift is None:
            return self
        c = self.core
        if isinstance(c, PolarCore) and c.c == 0.0:
            a = self.shift
            m = c.matrix(len(a))
            lin = _add_vec(self.lin, -(m @ a))
            return Normal(c, None, lin, self.const + 0.5 * float(a @ m @ a))
        return self

    def unlinear(self):
        """Move a linear term into a shift when the core is a positive definite quadratic."""
        if self.lin is None:
            return self
        c = self.core
        if isinstance(c, PolarCore) and c.c == 0.0:
            n = len(self.lin)
            m = c.matrix(n)
            if np.linalg.eigvalsh(m)[0] > 1e-12:
                a = -np.linalg.solve(m, self.lin)
                extra = _add_vec(self.shift, a)
                base = self.shift if self.shift is not None else np.zeros(n)
                # core(x - s) + <b, x> = core(x - s - a) - 1/2 <m a, a> + <b, s>
                const = self.const - 0.5 * float(a @ m @ a) + float(self.lin @ base)
                return Normal(c, extra, None, const)
        return self

    def radial(self):
        if self.shift is not None or self.lin is not None:
            return None
        r = self.core.radial()
        if r is None:
            return None
        return RadialFn(r.curve, r.c0 + self.const)


def _as_polar(core):
    """PolarCore view of a radial core whose curve is s = c + p r."""
    if isinstance(core, PolarCore):
        return core
    if isinstance(core, RadialCore) and core.fn.curve.has_rform():
        rf = core.fn.curve.rform()
        if rf.end is None and len(rf.polys) == 1:
            coef = list(rf.polys[0].coef) + [0.0, 0.0]
            if not np.any(coef[2:]):
                return PolarCore(None, coef[1], coef[0])
    return None


def _add_cores(a, b):
    core = a.add(b)
    if core is None:
        core = b.add(a)
    if core is None:
        pa, pb = _as_polar(a), _as_polar(b)
        if pa is not None and pb is not None:
            core = pa.add(pb)
        elif pa is not None and isinstance(b, SBoxCore):
            core = b.add(pa)
        elif pb is not None and isinstance(a, SBoxCore):
            core = a.add(pb)
    return core


def _add_normal(a, b):
    a, b = a.unshifted(), b.unshifted()
    if a.shift is not None or b.shift is not None:
        sa = a.shift if a.shift is not None else 0
        sb = b.shift if b.shift is not None else 0
        if not np.allclose(sa, sb, rtol=0, atol=1e-15):
            raise UnsupportedFunctionError("sum of translated non-quadratic functions")
    shift = a.shift if a.shift is not None else b.shift
    core = _add_cores(a.core, b.core)
    if core is None:
        raise UnsupportedFunctionError(f"no closed form for the sum of {a.core!r} and {b.core!r}")
    return Normal(core, shift, _add_vec(a.lin, b.lin), a.const + b.const)


def _episum_normal(a, b):
    return _add_normal(a.conj(), b.conj()).conj()


@lru_cache(maxsize=4096)
def normal_form(f):
    """Normal form of a catalog spec."""
    if isinstance(f, Quadratic):
        m = f.Q.entries
        q = m[0, 0]
        core = PolarCore(None, q) if np.allclose(m, q * np.eye(f.Q.n), rtol=0, atol=1e-15) else PolarCore(m)
        lin = _zero_if_small(np.array(f.b))
        return Normal(core, None, lin, f.c)
    if isinstance(f, RadialProfile):
        fn = _profile_fn(f)
        return Normal(RadialCore(RadialFn(fn.curve, 0.0)), None, None, fn.c0)
    if isinstance(f, IndicatorBall):
        rf = RFunc((0.0, f.rho), (P([0.0]),), f.rho) if f.rho > 0 else RFunc((0.0, 0.0), (), 0.0)
        return Normal(RadialCore(RadialFn(Curve.from_rfunc(rf))))
    if isinstance(f, SupportBall):
        return Normal(PolarCore(None, 0.0, f.rho))
    if isinstance(f, IndicatorBox):
        return Normal(BoxCore(f.halfwidths))
    if isinstance(f, SupportBox):
        return Normal(SBoxCore(f.halfwidths))
    if isinstance(f, CatalogUt):
        rf = RFunc((0.0, 1.0), (P([f.t]),), 1.0)
        return Normal(RadialCore(RadialFn(Curve.from_rfunc(rf))))
    if isinstance(f, CatalogVt):
        return normal_form(CatalogUt(f.t)).conj()
    if isinstance(f, Sum):
        out = None
        for lam, g in f.terms:
            k = normal_form(g)
            k = k if lam == 1.0 else k.scale(lam)
            out = k if out is None else _add_normal(out, k)
        return out
    if isinstance(f, EpiSum):
        out = None
        for lam, g in f.terms:
            k = normal_form(g)
            k = k if lam == 1.0 else k.epi_scale(lam)
            out = k if out is None else _episum_normal(out, k)
        return out
    if isinstance(f, Shift):
        k = normal_form(f.child)
        t = _zero_if_small(np.array(f.tau))
        return Normal(k.core, _add_vec(k.shift, t),
                      k.lin, k.const + f.gamma + (0.0 if k.lin is None or t is None else -float(k.lin @ t)))
    if isinstance(f, (Max, Min)):
        a, b = normal_form(f.a).radial(), normal_form(f.b).radial()
        if a is None or b is None:
            raise UnsupportedFunctionError("max/min is supported for centred radial functions")
        fn = a.maximum(b) if isinstance(f, Max) else a.minimum(b)
        return Normal(RadialCore(RadialFn(fn.curve, 0.0)), None, None, fn.c0)
    if isinstance(f, Conjugate):
        return normal_form(f.child).conj()
    if isinstance(f, GridFunction):
        raise UnsupportedFunctionError("grid functions have no normal form")
    raise ArgumentError(f"not a function spec: {f!r}")


# ---------------------------------------------------------------------------
# pointwise calculus
# ---------------------------------------------------------------------------

def evaluate(f, x):
    if isinstance(f, GridFunction):
        return f.value_at(x)
    return normal_form(f).value(np.asarray(x, dtype=float))


def gradient(f, x):
    x = np.asarray(x, dtype=float)
    if evaluate(f, x) == inf:
        raise DifferentiabilityError("point outside the domain")
    return normal_form(f).gradient(x)


def hessian(f, x):
    x = np.asarray(x, dtype=float)
    if evaluate(f, x) == inf:
        raise DifferentiabilityError("point outside the domain")
    h = normal_form(f).hessian(x)
    return SymMat.from_array(0.5 * (h + h.T))


def is_supercoercive(f):
    if isinstance(f, Quadratic):
        return np.linalg.eigvalsh(f.Q.entries)[0] > 1e-12
    if isinstance(f, RadialProfile):
        return f.radius is not None or normal_form(f).core.is_supercoercive()
    if isinstance(f, (IndicatorBall, IndicatorBox, CatalogUt)):
        return True
    if isinstance(f, (SupportBall, SupportBox, CatalogVt)):
        return False
    if isinstance(f, EpiSum):
        return all(is_supercoercive(g) for _, g in f.terms)
    if isinstance(f, Sum):
        return any(is_supercoercive(g) for _, g in f.terms)
    if isinstance(f, Shift):
        return is_supercoercive(f.child)
    if isinstance(f, Max):
        return is_supercoercive(f.a) or is_supercoercive(f.b)
    if isinstance(f, Min):
        return is_supercoercive(f.a) and is_supercoercive(f.b)
    if isinstance(f, Conjugate):
        return is_finite(f.child)
    return False


def is_finite(f):
    if isinstance(f, Quadratic):
        return True
    if isinstance(f, RadialProfile):
        return f.radius is None
    if isinstance(f, (IndicatorBall, IndicatorBox, CatalogUt)):
        return False
    if isinstance(f, (SupportBall, SupportBox, CatalogVt)):
        return True
    if isinstance(f, EpiSum):
        return any(is_finite(g) for _, g in f.terms)
    if isinstance(f, Sum):
        return all(is_finite(g) for _, g in f.terms)
    if isinstance(f, Shift):
        return is_finite(f.child)
    if isinstance(f, Max):
        return is_finite(f.a) and is_finite(f.b)
    if isinstance(f, Min):
        return is_finite(f.a) or is_finite(f.b)
    if isinstance(f, Conjugate):
        return is_supercoercive(f.child)
    if isinstance(f, GridFunction):
        return bool(np.all(np.isfinite(f.values)))
    return False


def argmin_radius(f):
    """Radius of argmin f for centred radial functions (argmin is a ball)."""
    fn = normal_form(f).radial()
    if fn is None:
        raise UnsupportedFunctionError("argmin radius needs a centred radial function")
    return fn.curve.argmin_radius()


def domain_radius(f):
    fn = normal_form(f).radial()
    if fn is None:
        raise UnsupportedFunctionError("domain radius needs a centred radial function")
    return fn.curve.domain_radius()


# ---------------------------------------------------------------------------
# conjugation and epi-operations on specs
# ---------------------------------------------------------------------------

def conjugate(f, fallback_box=None, resolution=129):
    """Exact conjugate within the catalog.

    Without a closed form, returns a grid conjugate when fallback_box is given
    and raises NoClosedFormError otherwise.
    """
    try:
        return _conj(f)
    except NoClosedFormError:
        if fallback_box is None:
            raise
        g = GridFunction.sample(f, fallback_box, resolution)
        return grid_conjugate(g)


def _conj(f):
    if isinstance(f, Quadratic):
        m = f.Q.entries
        b = np.array(f.b)
        if not np.any(m):
            return Shift(IndicatorBall(0.0), f.b, -f.c)
        ev = np.linalg.eigvalsh(m)
        if ev[0] <= 1e-12 * max(1.0, ev[-1]):
            raise NoClosedFormError("degenerate quadratic")
        mi = np.linalg.inv(m)
        mi = 0.5 * (mi + mi.T)
        return Quadratic(SymMat.from_array(mi), tuple(-(mi @ b)), 0.5 * float(b @ mi @ b) - f.c)
    if isinstance(f, IndicatorBall):
        return SupportBall(f.rho)
    if isinstance(f, SupportBall):
        return IndicatorBall(f.rho)
    if isinstance(f, IndicatorBox):
        return SupportBox(f.halfwidths)
    if isinstance(f, SupportBox):
        return IndicatorBox(f.halfwidths)
    if isinstance(f, CatalogUt):
        return CatalogVt(f.t)
    if isinstance(f, CatalogVt):
        return CatalogUt(f.t)
    if isinstance(f, EpiSum):
        return Sum(tuple((lam, _conj(g)) for lam, g in f.terms))
    if isinstance(f, Sum):
        return EpiSum(tuple((lam, _conj(g)) for lam, g in f.terms))
    if isinstance(f, Shift):
        return Sum(((1.0, _conj(f.child)), (1.0, Quadratic.affine(f.tau, -f.gamma))))
    if isinstance(f, Conjugate):
        return f.child
    if isinstance(f, RadialProfile):
        fn = normal_form(f).radial().conj()
        if fn.curve.has_rform():
            return profile_of(fn)
        return Conjugate(f)
    if isinstance(f, (Max, Min)):
        return Conjugate(f)
    raise NoClosedFormError(f"no closed-form conjugate for {type(f).__name__}")


def inf_convolve(f, g):
    return normalize(EpiSum(((1.0, f), (1.0, g))))


def epi_scale(lam, f):
    if not lam > 0:
        raise ArgumentError("epi-multiplication needs lambda > 0")
    return normalize(EpiSum(((lam, f),)))


def scale(lam, f):
    if not lam > 0:
        raise ArgumentError("scalar multiplication needs lambda > 0")
    return normalize(Sum(((lam, f),)))


def add(f, g):
    return normalize(Sum(((1.0, f), (1.0, g))))


def _is_zero_fn(f):
    return (isinstance(f, SupportBall) and f.rho == 0.0) or (
        isinstance(f, Quadratic) and not np.any(f.Q.entries) and not any(f.b) and f.c == 0.0)


def _is_point(f):
    return isinstance(f, Shift) and isinstance(f.child, IndicatorBall) and f.child.rho == 0.0


def normalize(f):
    """Canonical spec: flattened combinations, merged shifts, trivial wrappers removed."""
    if isinstance(f, (Sum, EpiSum)):
        kind = type(f)
        flat = []
        for lam, g in f.terms:
            g = normalize(g)
            if isinstance(g, kind):
                flat.extend((lam * mu, h) for mu, h in g.terms)
            else:
                flat.append((lam, g))
        if kind is Sum:
            flat = [(lam, g) for lam, g in flat if not _is_zero_fn(g)] or [(1.0, SupportBall(0.0))]
            aff = [(lam, g) for lam, g in flat if isinstance(g, Quadratic) and not np.any(g.Q.entries)]
            if len(aff) > 1:
                rest = [t for t in flat if t not in aff]
                b = sum(lam * np.array(g.b) for lam, g in aff)
                c = sum(lam * g.c for lam, g in aff)
                flat = rest + [(1.0, Quadratic.affine(b, c))]
        else:
            pts = [(lam, g) for lam, g in flat if _is_point(g)]
            rest = [t for t in flat if not _is_point(t[1])]
            if pts and rest:
                tau = sum(lam * np.array(g.tau) for lam, g in pts)
                gamma = sum(lam * g.gamma for lam, g in pts)
                inner = rest[0][1] if len(rest) == 1 and rest[0][0] == 1.0 else EpiSum(tuple(rest))
                return normalize(Shift(inner, tau, gamma))
            flat = [(lam, g) for lam, g in flat if not (isinstance(g, IndicatorBall) and g.rho == 0.0)] \
                or [(1.0, IndicatorBall(0.0))]
        if len(flat) == 1 and flat[0][0] == 1.0:
            return flat[0][1]
        return kind(tuple(flat))
    if isinstance(f, Shift):
        child = normalize(f.child)
        tau, gamma = np.array(f.tau), f.gamma
        if isinstance(child, Shift):
            tau, gamma, child = tau + np.array(child.tau), gamma + child.gamma, child.child
        if not np.any(tau) and gamma == 0.0:
            return child
        return Shift(child, tuple(tau), gamma)
    if isinstance(f, Conjugate):
        child = normalize(f.child)
        if isinstance(child, Conjugate):
            return child.child
        return Conjugate(child)
    if isinstance(f, (Max, Min)):
        return type(f)(normalize(f.a), normalize(f.b))
    return f


def _close(a, b, tol):
    if isinstance(a, float) or isinstance(b, float):
        if a is None or b is None:
            return a is b
        if a == b:
            return True
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))
    if isinstance(a, SymMat) and isinstance(b, SymMat):
        return a.n == b.n and np.allclose(a.upper, b.upper, rtol=tol, atol=tol)
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(_close(x, y, tol) for x, y in zip(a, b))
    if type(a) is not type(b):
        return False
    if hasattr(a, "__dataclass_fields__"):
        return all(_close(getattr(a, k.name), getattr(b, k.name), tol) for k in fields(a))
    return a == b


def structurally_equal(f, g, tol=1e-9):
    return _close(normalize(f), normalize(g), tol)


# ---------------------------------------------------------------------------
# max / min
# ---------------------------------------------------------------------------

def _nested(f, g, is_max):
    fam = {CatalogUt: 1, CatalogVt: -1}
    if type(f) is type(g) and type(f) in fam:
        # u_t increases with t, v_t decreases
        up = fam[type(f)] > 0
        t = max(f.t, g.t) if up == is_max else min(f.t, g.t)
        return type(f)(t)
    return None


def _infer_dim(f):
    if isinstance(f, Quadratic):
        return f.Q.n
    if isinstance(f, (IndicatorBox, SupportBox)):
        return len(f.halfwidths)
    if isinstance(f, Shift):
        return len(f.tau)
    for attr in ("terms",):
        if hasattr(f, attr):
            for _, g in f.terms:
                d = _infer_dim(g)
                if d:
                    return d
    for attr in ("a", "b", "child"):
        d = _infer_dim(getattr(f, attr)) if hasattr(f, attr) else None
        if d:
            return d
    return None


def midpoint_convex(fun, n, box=2.0, samples=400, seed=0, tol=1e-10):
    """Check f((x+y)/2) <= (f(x)+f(y))/2 on random pairs in [-box, box]^n."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x, y = rng.uniform(-box, box, (2, n))
        fx, fy = fun(x), fun(y)
        if fx == inf or fy == inf:
            continue
        fm = fun(0.5 * (x + y))
        if fm > 0.5 * (fx + fy) + tol * max(1.0, abs(fx), abs(fy)):
            return False
    return True


def pointwise_max(f, g):
    if structurally_equal(f, g):
        return f
    nested = _nested(f, g, True)
    return nested if nested is not None else Max(f, g)


def pointwise_min(f, g, n=None, box=2.0):
    """Pointwise minimum, or RejectionError when it is not convex."""
    if structurally_equal(f, g):
        return f
    nested = _nested(f, g, False)
    if nested is not None:
        return nested
    fa, fb = normal_form(f).radial(), normal_form(g).radial()
    if fa is not None and fb is not None:
        if not fa.minimum(fb).is_convex():
            raise RejectionError("pointwise minimum is not convex")
        return Min(f, g)
    n = n or _infer_dim(f) or _infer_dim(g) or 2
    if not midpoint_convex(lambda x: min(evaluate(f, x), evaluate(g, x)), n, box):
        raise RejectionError("pointwise minimum is not convex")
    return Min(f, g)


# ---------------------------------------------------------------------------
# grid functions and the discrete Legendre transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a convex function on a tensor grid; +inf outside the domain."""

    axes: tuple
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    argmax: tuple = None   # per-axis index arrays (for conjugates): maximiser in the primal grid

    @property
    def n(self):
        return len(self.axes)

    @property
    def box(self):
        return tuple((float(a[0]), float(a[-1])) for a in self.axes)

    @property
    def spacing(self):
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @classmethod
    def sample(cls, f, box, resolution):
        box = [tuple(b) for b in box]
        res = [resolution] * len(box) if np.isscalar(resolution) else list(resolution)
        axes = tuple(np.linspace(lo, hi, m) for (lo, hi), m in zip(box, res))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = np.array([evaluate(f, p) for p in pts]).reshape(mesh[0].shape)
        return cls(axes, vals)

    def value_at(self, x):
        """Multilinear interpolation; +inf outside the box or next to an infinite node."""
        x = np.asarray(x, dtype=float)
        idx, wts = [], []
        for a, xi in zip(self.axes, x):
            if xi < a[0] - 1e-12 or xi > a[-1] + 1e-12:
                return inf
            i = int(np.clip(np.searchsorted(a, xi) - 1, 0, len(a) - 2))
            w = (xi - a[i]) / (a[i + 1] - a[i])
            idx.append(i)
            wts.append(min(max(w, 0.0), 1.0))
        total = 0.0
        for corner in np.ndindex(*([2] * self.n)):
            w = 1.0
            for c, wi in zip(corner, wts):
                w *= wi if c else 1.0 - wi
            if w == 0.0:
                continue
            v = self.values[tuple(i + c for i, c in zip(idx, corner))]
            if v == inf:
                return inf
            total += w * v
        return total

    def gradient_range(self):
        """Per-axis [min, max] of forward differences between finite neighbours."""
        out = []
        for d, a in enumerate(self.axes):
            h = np.diff(a)
            shape = [1] * self.n
            shape[d] = len(h)
            with np.errstate(invalid="ignore"):     # inf - inf between infinite neighbours
                diff = np.diff(self.values, axis=d) / h.reshape(shape)
            ok = np.isfinite(diff)
            out.append((float(diff[ok].min()), float(diff[ok].max())) if ok.any() else (0.0, 0.0))
        return out


def _llt_1d(x, f, s):
    """max_i s_k x_i - f_i for sorted x and s via the lower convex hull.

    Returns (values, argmax indices); points with f = +inf are skipped, and an
    all-infinite row gives -inf.
    """
    ok = np.isfinite(f)
    if not ok.any():
        return np.full(len(s), -inf), np.zeros(len(s), dtype=int)
    xi, fi, ii = x[ok], f[ok], np.nonzero(ok)[0]
    hull = []
    for k in range(len(xi)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or above the chord from a to k
            if (fi[b] - fi[a]) * (xi[k] - xi[a]) >= (fi[k] - fi[a]) * (xi[b] - xi[a]):
                hull.pop()
            else:
                break
        hull.append(k)
    hull = np.array(hull)
    hx, hf = xi[hull], fi[hull]
    if len(hull) == 1:
        pos = np.zeros(len(s), dtype=int)
    else:
        slopes = np.diff(hf) / np.diff(hx)
        pos = np.searchsorted(slopes, s, side="left")
    vals = s * hx[pos] - hf[pos]
    return vals, ii[hull[pos]]


def _llt_axis(values, x, s, axis):
    v = np.moveaxis(values, axis, -1)
    shape = v.shape[:-1]
    out = np.empty(shape + (len(s),))
    arg = np.empty(shape + (len(s),), dtype=int)
    for idx in np.ndindex(*shape):
        out[idx], arg[idx] = _llt_1d(x, v[idx], s)
    return np.moveaxis(out, -1, axis), np.moveaxis(arg, -1, axis)


def grid_conjugate(g, dual_box=None, dual_resolution=None, margin=None):
    """Discrete Legendre-Fenchel transform, one axis at a time.

    g*(y) = max_x <x, y> - g(x) over the grid. The default dual box is the
    observed gradient range enlarged by the margin (10% by default); a smaller
    explicit dual box sets meta['range_warning'].
    """
    margin = DEFAULT.grid.margin if margin is None else margin
    rng = g.gradient_range()
    if dual_box is None:
        dual_box = []
        for (lo, hi), (a, b) in zip(rng, g.box):
            half = max(abs(lo), abs(hi)) * (1 + margin)
            if half == 0.0:
                half = max(abs(a), abs(b))
            dual_box.append((-half, half))
    if np.isscalar(dual_box):
        dual_box = [(-float(dual_box), float(dual_box))] * g.n
    res = dual_resolution or [len(a) for a in g.axes]
    res = [res] * g.n if np.isscalar(res) else list(res)
    axes = tuple(np.linspace(lo, hi, m) for (lo, hi), m in zip(dual_box, res))
    warn = any(lo < a - 1e-12 or hi > b + 1e-12 for (lo, hi), (a, b) in zip(rng, dual_box))
    cur = np.asarray(g.values, dtype=float)
    args = []
    for d in range(g.n):
        src = cur if d == 0 else -cur
        cur, arg = _llt_axis(src, g.axes[d], axes[d], d)
        args.append(arg)
    # recover full maximisers: the last axis index first, then back-substitute
    shape = cur.shape
    full = [None] * g.n
    grids = np.meshgrid(*[np.arange(m) for m in shape], indexing="ij")
    for d in range(g.n - 1, -1, -1):
        idx = list(grids[:d + 1]) + [full[k] for k in range(d + 1, g.n)]
        full[d] = args[d][tuple(idx)]
    meta = {"range_warning": bool(warn), "gradient_range": rng}
    return GridFunction(axes, cur, meta, tuple(full))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _num(v):
    if v is None:
        return None
    return v if isfinite(v) else ("inf" if v > 0 else "-inf")


def to_dict(f):
    if isinstance(f, Quadratic):
        return {"type": "Quadratic", "Q": f.Q.entries.tolist(), "b": list(f.b), "c": f.c}
    if isinstance(f, RadialProfile):
        return {"type": "RadialProfile", "knots": list(f.knots),
                "pieces": [list(p) for p in f.pieces], "radius": f.radius}
    if isinstance(f, (IndicatorBall, SupportBall)):
        return {"type": type(f).__name__, "rho": f.rho}
    if isinstance(f, (IndicatorBox, SupportBox)):
        return {"type": type(f).__name__, "halfwidths": list(f.halfwidths)}
    if isinstance(f, CatalogUt):
        return {"type": "Ut", "t": f.t}
    if isinstance(f, CatalogVt):
        return {"type": "Vt", "t": f.t}
    if isinstance(f, (EpiSum, Sum)):
        return {"type": type(f).__name__,
                "terms": [{"weight": lam, "f": to_dict(g)} for lam, g in f.terms]}
    if isinstance(f, Shift):
        return {"type": "Shift", "child": to_dict(f.child), "tau": list(f.tau), "gamma": f.gamma}
    if isinstance(f, (Max, Min)):
        return {"type": type(f).__name__, "a": to_dict(f.a), "b": to_dict(f.b)}
    if isinstance(f, Conjugate):
        return {"type": "Conjugate", "child": to_dict(f.child)}
    raise ArgumentError(f"cannot serialise {f!r}")


def from_dict(d):
    try:
        t = d["type"]
        if t == "Quadratic":
            Q = np.asarray(d["Q"], dtype=float)
            return Quadratic(SymMat.from_array(Q), d.get("b"), d.get("c", 0.0))
        if t == "RadialProfile":
            return RadialProfile(tuple(d["knots"]), tuple(tuple(p) for p in d["pieces"]), d.get("radius"))
        if t == "IndicatorBall":
            return IndicatorBall(float(d.get("rho", 1.0)))
        if t == "SupportBall":
            return SupportBall(float(d.get("rho", 1.0)))
        if t == "IndicatorBox":
            return IndicatorBox(tuple(d["halfwidths"]))
        if t == "SupportBox":
            return SupportBox(tuple(d["halfwidths"]))
        if t in ("Ut", "CatalogUt"):
            return CatalogUt(float(d["t"]))
        if t in ("Vt", "CatalogVt"):
            return CatalogVt(float(d["t"]))
        if t in ("EpiSum", "Sum"):
            cls = EpiSum if t == "EpiSum" else Sum
            return cls(tuple((float(e["weight"]), from_dict(e["f"])) for e in d["terms"]))
        if t == "Shift":
            return Shift(from_dict(d["child"]), tuple(d["tau"]), d.get("gamma", 0.0))
        if t in ("Max", "Min"):
            cls = Max if t == "Max" else Min
            return cls(from_dict(d["a"]), from_dict(d["b"]))
        if t == "Conjugate":
            return Conjugate(from_dict(d["child"]))
    except (KeyError, TypeError) as e:
        raise ArgumentError(f"malformed function spec: {e}") from e
    raise ArgumentError(f"unknown function type {d.get('type')!r}")


def to_json(f, **kw):
    return json.dumps(to_dict(f), **kw)


def from_json(text):
    try:
        return from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise ArgumentError(f"invalid JSON: {e}") from e


def load(path):
    with open(path) as fh:
        return from_json(fh.read())
