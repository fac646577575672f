"""Radially symmetric convex functions through their subgradient curves.

A radial convex function v(x) = phi(|x|) with phi convex and non-decreasing is
determined, up to an additive constant, by the monotone relation

    Gamma = {(r, s) : s in d phi(r), r >= 0, s >= 0}

in the quarter plane, which starts at the origin and runs to infinity. The
vertical segment over r = 0 is the subdifferential d v(0) = s0 * B; a
horizontal segment over s = 0 is the argmin; a vertical ray at r = R means the
domain is the ball of radius R; a kink of phi is a vertical segment.

Every catalog operation acts on Gamma by a simple rule:

    conjugation        swap the r and s axes
    lambda * v         scale s by lambda
    lambda epi-mult    scale r by lambda
    v + w              add s-coordinates over common r
    u epi-sum w        add r-coordinates over common s

Gamma is stored as a list of segments; each segment is parametrised either by
r (s is a polynomial in r) or by s (r is a polynomial in s).
"""

from dataclasses import dataclass
from math import inf, isfinite

import numpy as np
from numpy.polynomial import Polynomial as P

from .errors import DifferentiabilityError, UnsupportedFunctionError

EPS = 1e-13


def _poly(c):
    p = c if isinstance(c, P) else P(np.atleast_1d(np.asarray(c, dtype=float)))
    return p.trim(tol=0.0) if len(p.coef) > 1 else p


def _const(v):
    return P([float(v)])


def _deg(p):
    c = np.trim_zeros(np.asarray(p.coef, dtype=float), "b")
    return max(len(c) - 1, 0)


@dataclass(frozen=True)
class Seg:
    """axis 'r': tau = r in [lo, hi], s = poly(tau).  axis 's': tau = s, r = poly(tau)."""

    axis: str
    lo: float
    hi: float
    poly: P

    def r_s(self):
        """(r(tau), s(tau)) as polynomials in the segment parameter."""
        ident = P([0.0, 1.0])
        return (ident, self.poly) if self.axis == "r" else (self.poly, ident)

    def swapped(self):
        return Seg("s" if self.axis == "r" else "r", self.lo, self.hi, self.poly)


@dataclass(frozen=True)
class RFunc:
    """Gamma as a multivalued function s(r): graph pieces plus implied jumps.

    knots[0] = 0 < ... < knots[-1] (the last may be inf); polys[i] gives s on
    [knots[i], knots[i+1]]. end is the domain radius when finite (a vertical
    ray sits there), else None.
    """

    knots: tuple
    polys: tuple
    end: object = None

    def piece_index(self, r):
        k = self.knots
        for i in range(len(self.polys)):
            if r < k[i + 1] or (i == len(self.polys) - 1):
                return i
        return len(self.polys) - 1


class Curve:
    """Subgradient curve of a radial convex function."""

    __slots__ = ("segs", "_rf")

    def __init__(self, segs):
        self.segs = tuple(s for s in segs if s.hi > s.lo)
        self._rf = None

    def __repr__(self):
        return "Curve(" + ", ".join(f"{s.axis}[{s.lo:g},{s.hi:g}]:{list(np.round(s.poly.coef, 6))}"
                                    for s in self.segs) + ")"

    # -- construction -----------------------------------------------------

    @classmethod
    def from_rfunc(cls, rf):
        segs, prev = [], 0.0
        for i, p in enumerate(rf.polys):
            a, b = rf.knots[i], rf.knots[i + 1]
            left = float(p(a))
            if left > prev + EPS * max(1.0, abs(left)):
                segs.append(Seg("s", prev, left, _const(a)))
            segs.append(Seg("r", a, b, p))
            prev = float(p(b)) if isfinite(b) else inf
        if rf.end is not None:
            cur = prev if rf.polys else 0.0
            segs.append(Seg("s", cur, inf, _const(rf.end)))
        return cls(segs)

    @classmethod
    def graph(cls, knots, polys, end=None):
        """Curve of phi' given as polynomials on knot intervals."""
        knots = tuple(float(k) for k in knots)
        if end is not None:
            knots = knots[:-1] + (float(end),) if knots[-1] != end else knots
        return cls.from_rfunc(RFunc(knots, tuple(_poly(p) for p in polys), end))

    # -- views ------------------------------------------------------------

    def swap(self):
        return Curve([s.swapped() for s in self.segs])

    def rform(self):
        """The RFunc view; fails when some s-parametrised piece is non-linear."""
        if self._rf is not None:
            return self._rf
        pieces, end = [], None
        for seg in self.segs:
            if seg.axis == "r":
                pieces.append((seg.lo, seg.hi, seg.poly))
                continue
            d = _deg(seg.poly)
            if d == 0:
                if seg.hi == inf:
                    end = float(seg.poly(0.0))
                continue
            if d == 1:
                c0, c1 = (list(seg.poly.coef) + [0.0])[:2]
                if c1 <= 0:
                    raise UnsupportedFunctionError("curve is not monotone")
                lo = float(seg.poly(seg.lo))
                hi = float(seg.poly(seg.hi)) if isfinite(seg.hi) else inf
                pieces.append((lo, hi, P([-c0 / c1, 1.0 / c1])))
                continue
            raise UnsupportedFunctionError("element of the curve has no polynomial graph form")
        knots = [0.0]
        polys = []
        for a, b, p in pieces:
            if abs(a - knots[-1]) > 1e-12 * max(1.0, abs(a)):
                raise UnsupportedFunctionError("curve pieces are not contiguous in r")
            knots.append(b)
            polys.append(p)
        if end is not None:
            if polys and abs(knots[-1] - end) > 1e-12 * max(1.0, end):
                raise UnsupportedFunctionError("domain end inconsistent with graph pieces")
            knots[-1] = end if polys else end
        self._rf = RFunc(tuple(knots), tuple(polys), end)
        return self._rf

    def sform(self):
        return self.swap().rform()

    def has_rform(self):
        try:
            self.rform()
            return True
        except UnsupportedFunctionError:
            return False

    # -- geometric data ---------------------------------------------------

    def subdiff_radius_at_zero(self):
        """s0 with d v(0) = s0 * B."""
        s0 = 0.0
        for seg in self.segs:
            r, s = seg.r_s()
            if seg.axis == "s" and _deg(seg.poly) == 0 and float(seg.poly(0.0)) == 0.0:
                s0 = max(s0, seg.hi)
            else:
                break
        return s0

    def argmin_radius(self):
        return self.swap().subdiff_radius_at_zero()

    def domain_radius(self):
        last = self.segs[-1] if self.segs else None
        if last is not None and last.axis == "s" and last.hi == inf and _deg(last.poly) == 0:
            return float(last.poly(0.0))
        return inf

    def gradient_bound(self):
        return self.swap().domain_radius()

    # -- algebra ----------------------------------------------------------

    def scale_s(self, lam):
        if not lam > 0:
            raise UnsupportedFunctionError("scalar multiples must be positive")
        out = []
        for seg in self.segs:
            if seg.axis == "r":
                out.append(Seg("r", seg.lo, seg.hi, seg.poly * lam))
            else:
                out.append(Seg("s", seg.lo * lam, seg.hi * lam, seg.poly(P([0.0, 1.0 / lam]))))
        return Curve(out)

    def scale_r(self, lam):
        return self.swap().scale_s(lam).swap()

    def add(self, other):
        """Curve of the sum of the two functions."""
        a, b = self.rform(), other.rform()
        ends = [e for e in (a.end, b.end) if e is not None]
        end = min(ends) if ends else None
        top = end if end is not None else inf
        ks = sorted({k for k in a.knots + b.knots if k < top} | {top})
        ks = _dedupe(ks)
        polys = []
        for lo, hi in zip(ks[:-1], ks[1:]):
            mid = lo + 1.0 if hi == inf else 0.5 * (lo + hi)
            polys.append(a.polys[_locate(a, mid)] + b.polys[_locate(b, mid)])
        if not polys:
            return Curve.from_rfunc(RFunc((0.0, end), (), end))
        return Curve.from_rfunc(RFunc(tuple(ks), tuple(polys), end))

    def epi_add(self, other):
        return self.swap().add(other.swap()).swap()

    # -- evaluation of s(r) -----------------------------------------------

    def s_at(self, r, side=+1):
        rf = self.rform()
        if rf.end is not None and r > rf.end:
            raise DifferentiabilityError("outside the domain")
        i = _locate(rf, r, side)
        return float(rf.polys[i](r))


def _dedupe(ks):
    out = [ks[0]]
    for k in ks[1:]:
        if k == inf or k - out[-1] > 1e-14 * max(1.0, abs(k)):
            out.append(k)
    return out


def _locate(rf, r, side=+1):
    k = rf.knots
    n = len(rf.polys)
    for i in range(n):
        hi = k[i + 1]
        if r < hi or (side < 0 and r <= hi) or i == n - 1:
            return i
    return n - 1


class RadialFn:
    """phi(|x|) represented by its curve and the value phi(0)."""

    __slots__ = ("curve", "c0", "_vals")

    def __init__(self, curve, c0=0.0):
        self.curve = curve
        self.c0 = float(c0)
        self._vals = None

    def __repr__(self):
        return f"RadialFn({self.curve!r}, c0={self.c0:g})"

    def conj(self):
        return RadialFn(self.curve.swap(), -self.c0)

    def add(self, other):
        return RadialFn(self.curve.add(other.curve), self.c0 + other.c0)

    def epi_add(self, other):
        return RadialFn(self.curve.epi_add(other.curve), self.c0 + other.c0)

    def scale(self, lam):
        return RadialFn(self.curve.scale_s(lam), lam * self.c0)

    def epi_scale(self, lam):
        return RadialFn(self.curve.scale_r(lam), lam * self.c0)

    # -- values -----------------------------------------------------------

    def value_pieces(self):
        """(knots, antiderivative polys, end) with phi = poly on each interval."""
        if self._vals is None:
            rf = self.curve.rform()
            vals, acc = [], self.c0
            for i, p in enumerate(rf.polys):
                a = rf.knots[i]
                F = p.integ()
                F = F - F(a) + acc
                vals.append(F)
                b = rf.knots[i + 1]
                acc = float(F(b)) if isfinite(b) else acc
            self._vals = (rf.knots, tuple(vals), rf.end)
        return self._vals

    def value(self, rho):
        knots, vals, end = self.value_pieces()
        if end is not None and rho > end * (1 + 1e-15):
            return inf
        if not vals:
            return self.c0 if rho == 0 else inf
        rf = self.curve.rform()
        return float(vals[_locate(rf, rho)](rho))

    def slope(self, rho):
        rf = self.curve.rform()
        knots = rf.knots
        if rf.end is not None and rho >= rf.end:
            raise DifferentiabilityError("gradient undefined on the domain boundary")
        for k in knots[1:-1]:
            if abs(rho - k) <= 1e-14 * max(1.0, k):
                left = float(rf.polys[_locate(rf, k, -1)](k))
                right = float(rf.polys[_locate(rf, k, +1)](k))
                if abs(left - right) > 1e-12 * max(1.0, abs(left)):
                    raise DifferentiabilityError(f"kink at radius {k}")
        return float(rf.polys[_locate(rf, rho)](rho))

    def slope_derivative(self, rho):
        rf = self.curve.rform()
        return float(rf.polys[_locate(rf, rho)].deriv()(rho))

    def evaluate(self, x):
        return self.value(float(np.linalg.norm(x)))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        s = self.slope(r)
        if r == 0:
            if s != 0:
                raise DifferentiabilityError("cone point at the origin")
            return np.zeros_like(x)
        return s * x / r

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        n = len(x)
        r = float(np.linalg.norm(x))
        s = self.slope(r)
        ds = self.slope_derivative(r)
        if r == 0:
            if s != 0:
                raise DifferentiabilityError("cone point at the origin")
            return ds * np.eye(n)
        e = x / r
        return ds * np.outer(e, e) + (s / r) * (np.eye(n) - np.outer(e, e))

    # -- lattice operations ---------------------------------------------------

    def _lattice(self, other, pick_max):
        ka, va, ea = self.value_pieces()
        kb, vb, eb = other.value_pieces()
        ta = ea if ea is not None else inf
        tb = eb if eb is not None else inf
        top = min(ta, tb) if pick_max else max(ta, tb)
        end = None if top == inf else top
        ks = _dedupe(sorted({k for k in ka + kb if k < top} | {top}))
        rfa, rfb = self.curve.rform(), other.curve.rform()
        knots, slopes = [0.0], []
        for lo, hi in zip(ks[:-1], ks[1:]):
            cuts = [lo, hi]
            ina, inb = lo < ta, lo < tb
            if ina and inb:
                d = va[_locate(rfa, 0.5 * (lo + min(hi, lo + 1)))] - vb[_locate(rfb, 0.5 * (lo + min(hi, lo + 1)))]
                for z in d.roots() if _deg(d) > 0 else []:
                    if abs(z.imag) < 1e-10 and lo + 1e-12 < z.real < (hi if hi < inf else 1e300) - 1e-12:
                        cuts.append(float(z.real))
            cuts = sorted(cuts)
            for c0, c1 in zip(cuts[:-1], cuts[1:]):
                mid = c0 + 1.0 if c1 == inf else 0.5 * (c0 + c1)
                fa = self.value(mid) if mid <= ta else inf
                fb = other.value(mid) if mid <= tb else inf
                if pick_max:
                    use_a = fa >= fb
                else:
                    use_a = fa <= fb
                src = rfa if use_a else rfb
                slopes.append(src.polys[_locate(src, mid)])
                knots.append(c1)
        c0 = max(self.c0, other.c0) if pick_max else min(self.c0, other.c0)
        return RadialFn(Curve.from_rfunc(RFunc(tuple(knots), tuple(slopes), end)), c0)

    def maximum(self, other):
        return self._lattice(other, True)

    def minimum(self, other):
        return self._lattice(other, False)

    def is_convex(self, tol=1e-10):
        """phi' non-decreasing with phi'(0+) >= 0, checked on the pieces."""
        rf = self.curve.rform()
        prev = 0.0
        for i, p in enumerate(rf.polys):
            a, b = rf.knots[i], rf.knots[i + 1]
            bb = b if isfinite(b) else a + 10.0
            xs = np.linspace(a, bb, 33)
            vals = p(xs)
            if vals[0] < prev - tol * max(1.0, abs(prev)):
                return False
            if np.any(np.diff(vals) < -tol * max(1.0, np.max(np.abs(vals)))):
                return False
            dp = p.deriv()
            if _deg(p) > 0 and np.any(dp(xs) < -tol * max(1.0, np.max(np.abs(dp(xs))))):
                return False
            prev = vals[-1]
        return True
