"""Functional Steiner formulas and the general phi o h_B machinery."""

from dataclasses import dataclass, field
from math import comb, factorial, isfinite

import numpy as np
from numpy.polynomial import Polynomial as P

from . import densities as dens
from .config import DEFAULT
from .errors import ArgumentError, ConditioningError, DegenerateError
from .extmath import kappa
from .funcspace import (CatalogVt, IndicatorBall, RadialProfile, Sum, SupportBall, epi_scale,
                        inf_convolve)
from .intrinsic import fiv
from .measures import (SteinerReport, chebyshev_nodes, coefficient_errors, fit_polynomial,
                       mixed_ma_measure)
from .quadrature import integrate as quad


def _nodes(n, r_nodes):
    if r_nodes is None:
        return chebyshev_nodes(n + 1 + DEFAULT.steiner.extra_nodes)
    r_nodes = [float(r) for r in r_nodes]
    if any(r <= 0 for r in r_nodes):
        raise ArgumentError("Steiner nodes must be positive")
    if len(r_nodes) < n + 1:
        raise ArgumentError(f"need at least {n + 1} nodes")
    return r_nodes


def _report(r_nodes, lhs, ref, n, label):
    coeffs, res, node_res = fit_polynomial(r_nodes, lhs, n)
    scale = max(abs(c) for c in ref) or 1.0
    return SteinerReport(r_nodes, lhs, ref, coeffs, coefficient_errors(coeffs, ref, scale), res,
                         node_res, label)


def parallel_function(u, r):
    """u box r*I_B."""
    return inf_convolve(u, epi_scale(r, IndicatorBall(1.0)))


def steiner_verify(u, zeta, n, r_nodes=None):
    """Z_n(u box r I_B) sampled in r against sum_j r^(n-j) kappa_{n-j} Z_{j,zeta_j}(u)."""
    dens.require_class(zeta, n, n)
    r_nodes = _nodes(n, r_nodes)
    lhs = [fiv(parallel_function(u, r), n, zeta, n, "primal") for r in r_nodes]
    zs = dens.steiner_densities(zeta, n)
    ref = [0.0] * (n + 1)
    for j in range(n + 1):
        ref[n - j] = kappa(n - j) * fiv(u, j, zs[j], n, "primal")
    return _report(r_nodes, lhs, ref, n, "Z_n(u box rI_B)")


def steiner_closed_form_ut(t, n, zeta, r):
    """Z_n(u_t box r I_B) = kappa_n r^n zeta(0) + sum_{j>=1} C(n,j) r^(n-j) kappa_n zeta(t)."""
    z0 = zeta.value_at_zero()
    zt = z0 if t == 0 else float(zeta(t))
    return kappa(n) * (r ** n * z0 + sum(comb(n, j) * r ** (n - j) * zt for j in range(1, n + 1)))


def steiner_derivative_extract(u, j, zeta, n, r_nodes=None):
    """Z_{j,zeta}(u) from the r^(n-j) coefficient of r -> Z_{n,alpha}(u box r I_B)."""
    dens.require_class(zeta, j, n)
    alpha = dens.alpha_of_zeta(zeta, j, n)
    if j == n:
        return fiv(u, n, alpha, n, "primal")
    r_nodes = _nodes(n, r_nodes)
    lhs = [fiv(parallel_function(u, r), n, alpha, n, "primal") for r in r_nodes]
    coeffs, res, _ = fit_polynomial(r_nodes, lhs, n)
    if res > DEFAULT.steiner.residual_tol:
        raise ConditioningError(f"Steiner polynomial fit residual {res:.2e}")
    # (j!/n!) d^(n-j)/dr^(n-j) at 0 = (j!/n!) (n-j)! coefficient
    return factorial(j) * factorial(n - j) / factorial(n) * coeffs[n - j]


def dual_steiner_verify(v, zeta, n, r_nodes=None, variant="support"):
    """Z*_n(v + r h_B) (variant 'support') or Z*_n(v + r|x|^2/2) (variant 'quadratic')."""
    dens.require_class(zeta, n, n)
    r_nodes = _nodes(n, r_nodes)
    if variant == "support":
        extra = SupportBall(1.0)
        zs = dens.steiner_densities(zeta, n)
        weights = [kappa(n - j) for j in range(n + 1)]
    elif variant == "quadratic":
        extra = RadialProfile((0.0,), ((0.0, 0.0, 0.5),))
        zs = [zeta] * (n + 1)
        weights = [1.0] * (n + 1)
    else:
        raise ArgumentError(f"unknown variant {variant!r}")
    lhs = [fiv(Sum(((1.0, v), (r, extra))), n, zeta, n, "dual") for r in r_nodes]
    ref = [0.0] * (n + 1)
    for j in range(n + 1):
        ref[n - j] = weights[j] * fiv(v, j, zs[j], n, "dual")
    return _report(r_nodes, lhs, ref, n, f"Z*_n(v + r {variant})")


def classical_steiner_retrieve(K, zeta, r_nodes=None):
    """Steiner report for I_K with fitted coefficients rescaled to V_0..V_n.

    Returns (report, recovered, reference), recovered[j] = coef_{n-j} / (zeta(0) kappa_{n-j}).
    """
    n = K.n
    z0 = zeta.value_at_zero()
    if z0 == 0:
        raise DegenerateError("zeta(0) = 0 carries no information about V_j")
    rep = steiner_verify(K.spec(), zeta, n, r_nodes)
    rec = [float(rep.fitted_coefficients[n - j]) / (z0 * kappa(n - j)) for j in range(n + 1)]
    return rep, rec, list(K.intrinsic_volumes)


# ---------------------------------------------------------------------------
# general phi o h_B
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiProfile:
    """Convex C^2 profile phi on [0, inf), piecewise polynomial.

    knots are left ends (knots[0] = 0); pieces hold power coefficients. phi'(0) >= 0.
    """

    knots: tuple
    pieces: tuple

    def __post_init__(self):
        ks = tuple(float(k) for k in self.knots)
        pcs = tuple(tuple(float(c) for c in p) for p in self.pieces)
        if not ks or ks[0] != 0.0 or len(ks) != len(pcs) or any(b <= a for a, b in zip(ks, ks[1:])):
            raise ArgumentError("need increasing knots starting at 0, one piece each")
        if any(len(p) > 7 for p in pcs):
            raise ArgumentError("piece degree above 6")
        object.__setattr__(self, "knots", ks)
        object.__setattr__(self, "pieces", pcs)
        polys = [P(p) for p in pcs]
        for i in range(1, len(ks)):
            for d in range(3):
                a, b = polys[i - 1].deriv(d)(ks[i]), polys[i].deriv(d)(ks[i])
                if abs(a - b) > 1e-10 * max(1.0, abs(a)):
                    raise ArgumentError(f"phi is not C^2 at {ks[i]}")
        if self.d1(0.0) < 0:
            raise ArgumentError("phi'(0) must be >= 0")
        hi = 2 * ks[-1] + 2.0
        grid = np.linspace(0.0, hi, 401)
        if np.min(self.d2(grid)) < -1e-12:
            raise ArgumentError("phi is not convex")

    @classmethod
    def polynomial(cls, coeffs):
        return cls((0.0,), (tuple(coeffs),))

    def _eval(self, t, d):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.knots) - 1)
        out = np.zeros_like(t)
        for i, p in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                out[m] = P(p).deriv(d)(t[m])
        return out if out.ndim else float(out)

    def __call__(self, t):
        return self._eval(t, 0)

    def d1(self, t):
        return self._eval(t, 1)

    def d2(self, t):
        return self._eval(t, 2)

    @property
    def d1_at_zero(self):
        return self.d1(0.0)

    def monomial_derivative(self):
        """(c, k) when phi' = c t^k on [0, inf), else None."""
        if len(self.pieces) != 1:
            return None
        d = P(self.pieces[0]).deriv().coef
        nz = [i for i, c in enumerate(d) if abs(c) > 0]
        if len(nz) != 1:
            return None
        return float(d[nz[0]]), nz[0]

    def radial_spec(self):
        """phi o h_B as a function on R^n (phi is applied to |x|)."""
        return RadialProfile(self.knots, self.pieces)


@dataclass
class BetaSolution:
    """beta solving kappa_n (beta phi'^m + m int_t^inf beta phi'^(m-1) phi'') = alpha, m = n - j."""

    alpha: object
    phi: PhiProfile
    j: int
    n: int
    density: object = None          # exact Density when available
    diverges_at_zero: bool = False
    decade_increments: list = field(default_factory=list)

    @property
    def m(self):
        return self.n - self.j

    @property
    def support(self):
        return float(self.alpha.support)

    def __call__(self, t):
        if self.density is not None:
            return self.density(t)
        t = np.asarray(t, dtype=float)
        out = np.array([self._numeric(x) for x in np.atleast_1d(t).ravel()]).reshape(np.shape(np.atleast_1d(t)))
        return out if t.ndim else float(out[0])

    def _breaks(self):
        return [float(k) for k in self.alpha.knots] + list(self.phi.knots)

    def _numeric(self, t):
        S, m = self.support, self.m
        if t >= S:
            return 0.0
        a, phi = self.alpha, self.phi
        head = float(a(t)) / self.phi.d1(t) ** m
        tail = quad(lambda r: np.asarray(a(r)) * phi.d2(r) / phi.d1(r) ** (m + 1), t, S, breaks=self._breaks())
        return (head - m * tail) / kappa(self.n)

    def integral_equation_lhs(self, t):
        """kappa_n (beta(t) phi'(t)^m + m int_t^inf beta phi'^(m-1) phi'')  by direct quadrature."""
        S, m, phi = self.support, self.m, self.phi
        if t >= S:
            return 0.0
        tail = 0.0
        if m:
            tail = quad(lambda r: np.asarray(self(r)) * phi.d1(r) ** (m - 1) * phi.d2(r), t, S,
                        breaks=self._breaks(), rtol=1e-12)
        return kappa(self.n) * (float(self(t)) * phi.d1(t) ** m + m * tail)

    def validate(self, points=50, tol=1e-9):
        """Max relative error of the integral equation at points in (0, support)."""
        S = self.support
        ts = np.linspace(0.0, S, points + 2)[1:-1]
        scale = max(1.0, max(abs(float(self.alpha(t))) for t in ts))
        errs = [abs(self.integral_equation_lhs(t) - float(self.alpha(t))) / scale for t in ts]
        return max(errs), max(errs) <= tol


def _decade_increments(beta, lo_exp=3, hi_exp=9):
    vals = [float(beta(10.0 ** -k)) for k in range(lo_exp, hi_exp + 1)]
    return [b - a for a, b in zip(vals, vals[1:])]


def _diverges(incs, tol=1e-6):
    """Non-decaying decade increments signal blow-up (log or power) at 0."""
    if not incs or not all(np.isfinite(incs)):
        return True
    a = [abs(x) for x in incs]
    if a[-1] < tol:
        return False
    return all(b >= 0.5 * x for x, b in zip(a, a[1:]))


def general_phi_beta_solve(alpha, phi, j, n):
    """beta = (1/kappa_n)(alpha/phi'^m - m int_t^inf alpha phi''/phi'^(m+1)), m = n - j.

    For phi' = c t^k this is R^(-km) alpha / (c^m kappa_n) exactly. With phi'(0) = 0
    the solution lives on (0, inf) and may blow up at 0; this is reported through
    diverges_at_zero rather than raised.
    """
    if not 1 <= j <= n - 1:
        raise ArgumentError("general phi formulas need 1 <= j <= n-1")
    if not isinstance(alpha, dens.Density) or not isfinite(float(alpha.support)):
        raise ArgumentError("alpha must be a compactly supported density")
    m = n - j
    sol = BetaSolution(alpha, phi, j, n)
    mono = phi.monomial_derivative()
    if mono is not None:
        c, k = mono
        sol.density = dens.transform_R_inv(alpha, k * m).scale(1.0 / (c ** m * kappa(n)))
    if phi.d1_at_zero > 0:
        return sol
    incs = _decade_increments(sol)
    sol.decade_increments = incs
    sol.diverges_at_zero = _diverges(incs)
    return sol


def phi_mixed_check(beta, phi, j, n, ts):
    """int beta(|x|) dMA(v_t[j], phi o h_B[n-j]) at each t, for comparison with alpha(t)."""
    spec = phi.radial_spec()
    out = []
    for t in ts:
        mu = mixed_ma_measure([CatalogVt(float(t))] * j + [spec] * (n - j), n, path="pointwise")
        if beta.density is not None:
            out.append(mu.integrate(beta.density))
        else:
            out.append(mu.integrate(lambda r: beta(r), support=beta.support))
    return out
