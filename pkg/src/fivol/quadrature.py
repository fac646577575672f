"""Adaptive Gauss-Legendre quadrature and product rules on spheres."""

import heapq
from functools import lru_cache
from math import pi

import numpy as np

from .config import DEFAULT
from .errors import ArgumentError, NumericError


@lru_cache(maxsize=None)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _gl(f, a, b, order):
    x, w = gauss_legendre(order)
    h = 0.5 * (b - a)
    return h * float(np.dot(w, f(a + h * (x + 1.0))))


class _Panel:
    __slots__ = ("a", "b", "whole", "left", "right")

    def __init__(self, f, a, b, order, whole=None):
        m = 0.5 * (a + b)
        self.a, self.b = a, b
        self.whole = _gl(f, a, b, order) if whole is None else whole
        self.left = _gl(f, a, m, order)
        self.right = _gl(f, m, b, order)

    @property
    def value(self):
        return self.left + self.right

    @property
    def error(self):
        return abs(self.whole - self.value)


def integrate(f, a, b, breaks=(), rtol=None, atol=None, order=None, max_panels=None):
    """Integral of a vectorised f over [a, b], with breaks used as panel boundaries.

    Globally adaptive: the panel with the largest bisection error estimate is
    split until the summed estimate falls below max(atol, rtol*|I|).
    Endpoint singularities of integrable type (logarithms, negative powers
    with integrable exponent) are handled by repeated bisection.
    """
    q = DEFAULT.quad
    rtol = q.rtol if rtol is None else rtol
    atol = q.atol if atol is None else atol
    order = q.order if order is None else order
    max_panels = q.max_panels if max_panels is None else max_panels
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ArgumentError("integration limits must be finite")
    if b < a:
        return -integrate(f, b, a, breaks, rtol, atol, order, max_panels)
    if b == a:
        return 0.0
    pts = sorted({a, b} | {float(t) for t in breaks if a < t < b})
    heap = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        p = _Panel(f, lo, hi, order)
        heapq.heappush(heap, (-p.error, id(p), p))
    npan = len(heap)
    while True:
        total = sum(p.value for _, _, p in heap)
        err = sum(p.error for _, _, p in heap)
        if not np.isfinite(total):
            raise NumericError("non-finite integrand encountered")
        if err <= max(atol, rtol * abs(total)):
            return total
        if npan >= max_panels:
            raise NumericError(
                f"quadrature did not converge: estimate {total:.3e}, error {err:.3e}")
        _, _, p = heapq.heappop(heap)
        m = 0.5 * (p.a + p.b)
        if not p.a < m < p.b:
            # panel cannot be split further in floating point; accept it
            raise NumericError("quadrature panel underflow")
        for lo, hi, whole in ((p.a, m, p.left), (m, p.b, p.right)):
            c = _Panel(f, lo, hi, order, whole)
            heapq.heappush(heap, (-c.error, id(c), c))
        npan += 1


def fixed_gl(a, b, order):
    """Nodes and weights of an order-point Gauss-Legendre rule on [a, b]."""
    x, w = gauss_legendre(order)
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), h * w


@lru_cache(maxsize=None)
def _sphere_rule(n, order_2d, order_polar):
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        th = 2 * pi * np.arange(order_2d) / order_2d
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(order_2d, 2 * pi / order_2d)
    if n == 3:
        m = order_polar
        z, wz = gauss_legendre(m)
        sub_pts, sub_w = _sphere_rule(2, 2 * m, m)
    else:
        m = max(8 if n >= 7 else 12, order_polar // (n - 2))
        th, wt = fixed_gl(0.0, pi, m)
        z = np.cos(th)
        wz = wt * np.sin(th) ** (n - 2)
        sub_pts, sub_w = _sphere_rule(n - 1, 2 * m, m)
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    pts = np.concatenate([np.column_stack([np.full(len(sub_w), zi), ri * sub_pts])
                          for zi, ri in zip(z, rho)])
    w = np.concatenate([wi * sub_w for wi in wz])
    return pts, w


def sphere_rule(n, order_2d=None, order_polar=None):
    """Product quadrature on the unit sphere S^(n-1); weights sum to n*kappa_n."""
    s = DEFAULT.sphere
    return _sphere_rule(n, order_2d or s.order_2d, order_polar or s.order_polar)
