"""Monge-Ampere type measures integrated against radial test functions.

Measures are never stored as set functions. A RadialMeasure holds what is
needed to integrate radial test functions beta(|x|): an atom at the origin,
mass on spheres, radially pushed-forward pieces mass = w(tau) dtau placed at
radius loc(tau), and optionally a particle cloud.

For a radial convex function with subgradient curve Gamma = {(r, s)}, every
measure here is the Stieltjes measure of a monomial G(r, s) along Gamma:

    MA(v)          kappa_n d(s^n)           at radius r
    Theta_j(v)     kappa_n d(s^j)           at radius r (origin atom explicit)
    MA*(u)         kappa_n d(r^n)           at radius s
    Theta*_j(u)    kappa_n d(r^j)           at radius s (argmin atom explicit)
    MA(v_1..v_n)   kappa_n d(s_1 ... s_n)   at radius r

Non-radial quadratics (optionally plus c|x|) are handled by polar
separation: the angular factor is a sphere integral of mixed discriminants,
the radial factor a monomial moment of the test density.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb, factorial, inf, isfinite

import numpy as np
from numpy.polynomial import Polynomial as P

from .config import DEFAULT
from .densities import Density
from .errors import ArgumentError, ConditioningError, UnsupportedFunctionError
from .extmath import (elem_sym_batch, kappa, mixed_discriminant_batch,
                      orthogonal_complement_batch)
from .funcspace import (BoxCore, ConjPolarCore, GridFunction, PolarCore, RadialCore,
                        SBoxCore, grid_conjugate, normal_form)
from .quadrature import integrate as quad, sphere_rule
from .radial import _deg, _locate

IDENT = P([0.0, 1.0])


# ---------------------------------------------------------------------------
# integration of test functions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=512)
def _tail(d, p):
    return d.tail(p)


def _support(beta, support):
    if isinstance(beta, Density):
        return float(beta.support)
    return inf if support is None else float(support)


def _at(beta, x):
    if isinstance(beta, Density):
        return beta.value_at_zero() if x == 0 else float(beta(x))
    return float(beta(np.array([x]))[0])


def _breaks(beta):
    return [float(k) for k in beta.knots] if isinstance(beta, Density) else []


def moment(beta, a, b, weight, support=None, breaks=()):
    """int_a^b beta(t) weight(t) dt for a polynomial weight; exact for densities."""
    S = _support(beta, support)
    b = min(b, S)
    if not b > a:
        return 0.0
    coef = np.trim_zeros(np.asarray(weight.coef, dtype=float), "b")
    if isinstance(beta, Density):
        total = 0.0
        for p, w in enumerate(coef):
            if w == 0.0:
                continue
            T = _tail(beta, p)
            ta = T.value_at_zero() if a == 0 else float(T(a))
            tb = 0.0 if b >= S else float(T(b))
            total += w * (ta - tb)
        return total
    if not isfinite(b):
        raise ArgumentError("test function needs a finite support bound")
    return quad(lambda t: beta(t) * weight(t), a, b, breaks=breaks)


@dataclass(frozen=True)
class RadialMeasure:
    """Measure on R^n seen through radial test functions."""

    n: int
    atom0: float = 0.0
    shells: tuple = ()      # (radius, mass)
    pieces: tuple = ()      # (lo, hi, loc poly, weight poly)
    particles: tuple = ()   # (points (N, n), weights (N,))

    def __add__(self, other):
        if self.n != other.n:
            raise ArgumentError("dimension mismatch")
        return RadialMeasure(self.n, self.atom0 + other.atom0, self.shells + other.shells,
                             self.pieces + other.pieces, self.particles + other.particles)

    def scale(self, c):
        return RadialMeasure(self.n, c * self.atom0, tuple((r, c * m) for r, m in self.shells),
                             tuple((a, b, l, c * w) for a, b, l, w in self.pieces),
                             tuple((x, c * w) for x, w in self.particles))

    def integrate(self, beta, support=None):
        """int beta(|x|) dmu for a Density or a vectorised callable with given support."""
        S = _support(beta, support)
        total = 0.0
        if self.atom0:
            total += self.atom0 * _at(beta, 0.0)
        for r, m in self.shells:
            if m == 0 or r >= S:
                continue
            b = _at(beta, r)
            if b != 0:
                total += m * b
        for lo, hi, loc, w in self.pieces:
            total += self._piece(beta, S, lo, hi, loc, w)
        for pts, wts in self.particles:
            rad = np.linalg.norm(pts, axis=1)
            total += float(np.dot(wts, np.asarray(_vals(beta, rad))))
        return total

    @staticmethod
    def _piece(beta, S, lo, hi, loc, w):
        if len(loc.coef) == 2 and np.allclose(loc.coef, [0.0, 1.0], rtol=0, atol=1e-15):
            return moment(beta, lo, hi, w, S)
        # general monotone location: cut where loc reaches the support bound
        top = hi
        if isfinite(S):
            if float(loc(lo)) >= S:
                return 0.0
            if not isfinite(hi) or float(loc(hi)) > S:
                top = _first_root(loc - S, lo, hi)
        if not isfinite(top):
            raise ArgumentError("unbounded piece against a test function of unbounded support")
        brk = []
        for k in _breaks(beta):
            if k > 0:
                brk += [z for z in _roots_in(loc - k, lo, top)]
        return quad(lambda t: np.asarray(_vals(beta, loc(t))) * w(t), lo, top, breaks=brk)

    def total_mass(self, radius):
        """mu(radius * B), counting shells on the boundary."""
        tot = self.atom0
        tot += sum(m for r, m in self.shells if r <= radius)
        for lo, hi, loc, w in self.pieces:
            if loc(lo) > radius:
                continue
            top = hi if (isfinite(hi) and loc(hi) <= radius) else _first_root(loc - radius, lo, hi)
            W = w.integ()
            tot += float(W(top) - W(lo))
        for pts, wts in self.particles:
            tot += float(np.sum(wts[np.linalg.norm(pts, axis=1) <= radius]))
        return tot


def _vals(beta, x):
    x = np.asarray(x, dtype=float)
    if isinstance(beta, Density):
        return beta(x)
    return beta(x)


def _roots_in(p, lo, hi):
    if _deg(p) == 0:
        return []
    out = []
    for z in p.roots():
        if abs(z.imag) < 1e-12 and lo < z.real < hi:
            out.append(float(z.real))
    return sorted(out)


def _first_root(p, lo, hi):
    rs = _roots_in(p, lo, hi if isfinite(hi) else 1e300)
    if not rs:
        return hi
    return rs[0]


# ---------------------------------------------------------------------------
# measures from subgradient curves
# ---------------------------------------------------------------------------

def curve_measure(curve, n, G, at="r", skip_origin=False):
    """Stieltjes measure of G(r(tau), s(tau)) along a curve, located at r or s."""
    atom = 0.0
    shells, pieces = [], []
    for seg in curve.segs:
        rp, sp = seg.r_s()
        loc = rp if at == "r" else sp
        g = G(rp, sp)
        if _deg(loc) == 0:
            L = float(loc(0.0))
            if _deg(g) == 0:
                continue
            if isfinite(seg.hi):
                m = float(g(seg.hi) - g(seg.lo))
            else:
                m = inf if g.coef[-1] > 0 else -inf
            if L == 0.0:
                if not skip_origin:
                    atom += m
            else:
                shells.append((L, m))
            continue
        dg = g.deriv()
        if _deg(g) == 0:
            continue
        pieces.append((seg.lo, seg.hi, loc, dg))
    return RadialMeasure(n, atom, tuple(shells), tuple(pieces))


CORE_TYPES = (RadialCore, PolarCore, ConjPolarCore, BoxCore, SBoxCore)


def _dual_kernel(v):
    """Normal form of a finite function with affine parts removed."""
    if isinstance(v, CORE_TYPES):
        return v
    k = normal_form(v).unshifted()
    if k.shift is not None:
        raise UnsupportedFunctionError("translated non-quadratic functions are not supported here")
    return k.core


def _primal_kernel(u):
    """Normal form of a supercoercive function up to translation and constants."""
    if isinstance(u, CORE_TYPES):
        return u
    k = normal_form(u).unlinear()
    if k.lin is not None:
        raise UnsupportedFunctionError("linear perturbations of non-quadratic functions are not supported here")
    return k.core


def _radial_curve(core):
    r = core.radial()
    return None if r is None else r.curve


def _vj_ball(n, j, rho):
    """V_j(rho B^n)."""
    return comb(n, j) * kappa(n) / kappa(n - j) * rho ** j


# ---------------------------------------------------------------------------
# polar quadratics: v(y) = 1/2 <Py, y> + c |y|
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _poly_sphere(n):
    # integrands are polynomials of degree <= 2n in theta
    return sphere_rule(n, 4 * n + 8, 2 * n + 4)


def _sphere_mixed(n, blocks):
    """int_S det(blocks) dtheta; blocks are (matrix or 'H', multiplicity)."""
    pts, w = _poly_sphere(n)
    H = np.eye(n)[None] - pts[:, :, None] * pts[:, None, :]
    mats = []
    for m, k in blocks:
        mats.extend([H if isinstance(m, str) else m] * k)
    if len(mats) != n:
        raise ArgumentError("block multiplicities must sum to n")
    vals = mixed_discriminant_batch(mats)
    if np.ndim(vals) == 0:
        return float(vals) * float(np.sum(w))
    return float(np.dot(w, vals))


def _polar(core, n):
    if isinstance(core, PolarCore):
        return core.matrix(n), core.c
    raise UnsupportedFunctionError(f"not a quadratic-plus-cone: {core!r}")


def polar_ma_measure(core, n):
    Pm, c = _polar(core, n)
    w = np.zeros(n)
    for i in range(n):
        D = _sphere_mixed(n, [(Pm, n - i), ("H", i)])
        w[n - 1 - i] += comb(n, i) * c ** i * D
    return RadialMeasure(n, kappa(n) * c ** n, (), ((0.0, inf, IDENT, P(w)),))


def polar_theta_measure(core, j, n):
    """Theta_j without its origin atom."""
    Pm, c = _polar(core, n)
    if j == 0:
        return RadialMeasure(n)
    w = np.zeros(j)
    for i in range(j):
        E = _sphere_mixed(n, [(Pm, j - i), ("H", n - j + i)])
        w[j - 1 - i] += comb(j, i) * c ** i * E
    return RadialMeasure(n, 0.0, (), ((0.0, inf, IDENT, P(w)),))


def polar_hessian_measure(core, j, n):
    """[D^2 v]_j dy for the quadratic-plus-cone, including the top-degree origin atom."""
    Pm, c = _polar(core, n)
    w = np.zeros(n)
    I = np.eye(n)
    for i in range(min(j, n - 1) + 1):
        F = _sphere_mixed(n, [(Pm, j - i), ("H", i), (I, n - j)])
        w[n - 1 - i] += comb(n, j) * comb(j, i) * c ** i * F
    atom = kappa(n) * c ** n if j == n else 0.0
    return RadialMeasure(n, atom, (), ((0.0, inf, IDENT, P(w)),))


def polar_mixed_ma_measure(cores, n):
    """Pointwise mixed discriminant of Hessians of quadratic-plus-cone functions."""
    data = [_polar(c, n) for c in cores]
    w = np.zeros(n)
    atom = kappa(n) * float(np.prod([c for _, c in data]))
    for k in range(n):
        for T in combinations(range(n), k):
            cw = float(np.prod([data[i][1] for i in T])) if T else 1.0
            if cw == 0.0:
                continue
            blocks = [(data[i][0], 1) if i not in T else ("H", 1) for i in range(n)]
            w[n - 1 - k] += cw * _sphere_mixed(n, blocks)
    return RadialMeasure(n, atom, (), ((0.0, inf, IDENT, P(w)),))


def quadratic_pushforward(core, n, j, kind):
    """Primal quadratic 1/2<Qx, x>: radial pushforward of the measure under the gradient.

    kind 'hessian': [Q]_{n-j} dx; kind 'tau': tau_{n-j}(u, x) dx / C(n, j).
    Only the part away from the argmin; the atom is added by the caller.
    """
    if not (isinstance(core, PolarCore) and core.c == 0.0):
        raise UnsupportedFunctionError("native primal formulas need a pure quadratic")
    Q = core.matrix(n)
    if np.linalg.eigvalsh(Q)[0] <= 1e-12:
        raise UnsupportedFunctionError("quadratic is not positive definite")
    # substituting y = Qx turns the angular integrals into polynomials on the sphere
    det = float(np.linalg.det(Q))
    if kind == "hessian":
        ang = n * kappa(n) / det * float(elem_sym_batch(Q[None], n - j)[0])
        weight = P([0.0] * (n - 1) + [ang])
    elif kind == "tau":
        if j == 0:
            return RadialMeasure(n)
        pts, wts = _poly_sphere(n)
        u = orthogonal_complement_batch(pts)
        T = elem_sym_batch(np.swapaxes(u, 1, 2) @ Q @ u, n - j)
        ang = float(np.dot(wts, T)) / det / comb(n, j)
        weight = P([0.0] * (j - 1) + [ang])
    else:
        raise ArgumentError(kind)
    return RadialMeasure(n, 0.0, (), ((0.0, inf, IDENT, weight),))


# ---------------------------------------------------------------------------
# public measures
# ---------------------------------------------------------------------------

def ma_measure(v, n):
    core = _dual_kernel(v)
    curve = _radial_curve(core)
    if curve is not None:
        return curve_measure(curve, n, lambda r, s: kappa(n) * s ** n, "r")
    if isinstance(core, PolarCore):
        return polar_ma_measure(core, n)
    raise UnsupportedFunctionError(f"MA not available for {core!r}")


def ma_integral(v, beta, n):
    """int beta(|x|) dMA(v; x)."""
    if isinstance(v, GridFunction):
        return grid_ma_measure(v).integrate(beta)
    return ma_measure(v, n).integrate(beta)


def _radial_mixed_measure(curves, n):
    rfs = [c.rform() for c in curves]
    ends = [rf.end for rf in rfs if rf.end is not None]
    if ends:
        raise UnsupportedFunctionError("mixed MA needs finite functions")
    ks = sorted({k for rf in rfs for k in rf.knots if isfinite(k)} | {inf})
    shells, pieces = [], []
    atom = 0.0
    prev = 0.0
    for lo, hi in zip(ks[:-1], ks[1:]):
        mid = lo + 1.0 if hi == inf else 0.5 * (lo + hi)
        polys = [rf.polys[_locate(rf, mid)] for rf in rfs]
        prod = P([kappa(n)])
        for p in polys:
            prod = prod * p
        jump = float(prod(lo)) - prev
        if jump:
            if lo == 0.0:
                atom += jump
            else:
                shells.append((lo, jump))
        pieces.append((lo, hi, IDENT, prod.deriv()))
        prev = float(prod(hi)) if isfinite(hi) else 0.0
    return RadialMeasure(n, atom, tuple(shells), tuple(pieces))


def mixed_ma_measure(vs, n, path="pr"):
    """Mixed MA measure, by inclusion-exclusion over sums ('pr') or pointwise mixed discriminants."""
    if len(vs) != n:
        raise ArgumentError(f"need {n} functions")
    cores = [_dual_kernel(v) for v in vs]
    if path == "pr":
        from .funcspace import _add_cores
        total = None
        for k in range(1, n + 1):
            sign = -1.0 if (n - k) % 2 else 1.0
            for S in combinations(range(n), k):
                core = cores[S[0]]
                for i in S[1:]:
                    core = _add_cores(core, cores[i])
                    if core is None:
                        raise UnsupportedFunctionError("sum outside the catalog")
                m = _core_ma(core, n).scale(sign / factorial(n))
                total = m if total is None else total + m
        return total
    if path == "pointwise":
        curves = [_radial_curve(c) for c in cores]
        if all(c is not None for c in curves):
            return _radial_mixed_measure(curves, n)
        if all(isinstance(c, PolarCore) for c in cores):
            return polar_mixed_ma_measure(cores, n)
        raise UnsupportedFunctionError("pointwise mixed MA needs all-radial or all-quadratic inputs")
    raise ArgumentError(f"unknown path {path!r}")


def _core_ma(core, n):
    curve = _radial_curve(core)
    if curve is not None:
        return curve_measure(curve, n, lambda r, s: kappa(n) * s ** n, "r")
    if isinstance(core, PolarCore):
        return polar_ma_measure(core, n)
    raise UnsupportedFunctionError(f"MA not available for {core!r}")


def mixed_ma_integral(vs, beta, n, path="pr"):
    return mixed_ma_measure(vs, n, path).integrate(beta)


def conj_ma_measure(u, n):
    """MA*(u): Lebesgue measure on dom u pushed forward by the gradient."""
    core = _primal_kernel(u)
    curve = _radial_curve(core)
    if curve is not None:
        return curve_measure(curve, n, lambda r, s: kappa(n) * r ** n, "s")
    if isinstance(core, PolarCore):
        return quadratic_pushforward(core, n, n, "hessian")
    if isinstance(core, ConjPolarCore):
        return polar_ma_measure(core.dual, n)
    raise UnsupportedFunctionError(f"MA* not available for {core!r}")


def conj_ma_integral(u, beta, n):
    """int_{dom u} beta(|grad u(x)|) dx."""
    return conj_ma_measure(u, n).integrate(beta)


def theta_atom(v, j, n):
    """Mass of Theta_j(v; .) at the origin: (kappa_{n-j}/C(n,j)) V_j(dv(0))."""
    core = _dual_kernel(v)
    curve = _radial_curve(core)
    if curve is not None:
        s0 = curve.subdiff_radius_at_zero()
    elif isinstance(core, PolarCore):
        s0 = core.c
    else:
        raise UnsupportedFunctionError(f"subdifferential at 0 unknown for {core!r}")
    return kappa(n - j) / comb(n, j) * _vj_ball(n, j, s0)


def theta_measure(v, j, n):
    """Theta_j(v; .) = MA(v[j], h_B[n-j]; .) with the origin atom included."""
    if not 0 <= j <= n:
        raise ArgumentError(f"index {j} outside 0..{n}")
    core = _dual_kernel(v)
    curve = _radial_curve(core)
    if curve is not None:
        body = curve_measure(curve, n, lambda r, s: kappa(n) * s ** j, "r", skip_origin=True)
    elif isinstance(core, PolarCore):
        body = polar_theta_measure(core, j, n)
    else:
        raise UnsupportedFunctionError(f"Theta_j not available for {core!r}")
    return body + RadialMeasure(n, theta_atom(v, j, n))


def theta_j_integral(v, j, alpha, n):
    return theta_measure(v, j, n).integrate(alpha)


def theta_star_atom(u, j, n):
    """(kappa_{n-j}/C(n,j)) V_j(argmin u)."""
    core = _primal_kernel(u)
    curve = _radial_curve(core)
    if curve is not None:
        r0 = curve.argmin_radius()
    elif isinstance(core, PolarCore):
        r0 = 0.0
    elif isinstance(core, ConjPolarCore):
        r0 = None
    else:
        raise UnsupportedFunctionError(f"argmin unknown for {core!r}")
    if r0 is None:
        raise UnsupportedFunctionError("argmin of a smeared quadratic is an ellipsoid; use the dual")
    return kappa(n - j) / comb(n, j) * _vj_ball(n, j, r0)


def theta_star_measure(u, j, n):
    """Theta*_j(u; .): tau_{n-j} density pushed forward by the gradient, plus the argmin atom."""
    if not 0 <= j <= n:
        raise ArgumentError(f"index {j} outside 0..{n}")
    core = _primal_kernel(u)
    curve = _radial_curve(core)
    if curve is not None:
        body = curve_measure(curve, n, lambda r, s: kappa(n) * r ** j, "s", skip_origin=True)
        return body + RadialMeasure(n, theta_star_atom(u, j, n))
    if isinstance(core, PolarCore):
        return quadratic_pushforward(core, n, j, "tau") + RadialMeasure(n, theta_star_atom(u, j, n))
    if isinstance(core, ConjPolarCore):
        return theta_measure_core(core.dual, j, n)
    raise UnsupportedFunctionError(f"Theta*_j not available for {core!r}")


def theta_measure_core(core, j, n):
    body = polar_theta_measure(core, j, n)
    return body + RadialMeasure(n, kappa(n - j) / comb(n, j) * _vj_ball(n, j, core.c))


def theta_star_j_integral(u, j, alpha, n):
    return theta_star_measure(u, j, n).integrate(alpha)


# ---------------------------------------------------------------------------
# Steiner expansion of MA(v + r h_B)
# ---------------------------------------------------------------------------

@dataclass
class SteinerReport:
    r_nodes: list
    lhs_values: list
    rhs_coefficients: list          # index k = coefficient of r^k
    fitted_coefficients: list
    per_coefficient_rel_error: list
    residual: float = 0.0
    node_residuals: list = field(default_factory=list)
    label: str = ""

    @property
    def max_rel_error(self):
        return max(self.per_coefficient_rel_error) if self.per_coefficient_rel_error else 0.0

    def rhs_values(self):
        return [float(np.polyval(self.rhs_coefficients[::-1], r)) for r in self.r_nodes]


def chebyshev_nodes(count, lo=None, hi=None):
    s = DEFAULT.steiner
    lo = s.r_min if lo is None else lo
    hi = s.r_max if hi is None else hi
    k = np.arange(count)
    x = np.cos((2 * k + 1) * np.pi / (2 * count))[::-1]
    return list(0.5 * (lo + hi) + 0.5 * (hi - lo) * x)


def fit_polynomial(r_nodes, values, degree):
    """Least-squares fit in a scaled Chebyshev basis; returns power coefficients and residual."""
    r = np.asarray(r_nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(r) < degree + 1:
        raise ConditioningError("need at least degree + 1 nodes")
    spread = r.max() - r.min()
    if spread <= 1e-3 * max(1.0, abs(r).max()):
        raise ConditioningError("node spread too small for a stable fit")
    ch = np.polynomial.Chebyshev.fit(r, y, degree)
    cond = np.linalg.cond(np.polynomial.chebyshev.chebvander(ch.mapparms()[0] + ch.mapparms()[1] * r, degree))
    if cond > 1e10:
        raise ConditioningError(f"fit condition number {cond:.2e}")
    coeffs = ch.convert(kind=np.polynomial.Polynomial, domain=[-1, 1], window=[-1, 1]).coef
    coeffs = np.concatenate([coeffs, np.zeros(degree + 1 - len(coeffs))])
    fitted = ch(r)
    scale = max(1.0, float(np.max(np.abs(y))))
    res = float(np.max(np.abs(fitted - y))) / scale
    return list(coeffs), res, list(fitted - y)


def rel_err(a, b, floor=1e-300):
    d = abs(a - b)
    m = max(abs(a), abs(b))
    if d == 0:
        return 0.0
    return d / max(m, floor)


def coefficient_errors(fitted, ref, scale):
    """Relative errors on each coefficient; near-zero references use the global scale."""
    out = []
    for a, b in zip(fitted, ref):
        out.append(abs(a - b) / max(abs(b), 1e-6 * scale, 1e-300))
    return out


def ma_steiner_expand(v, beta, n, r_nodes=None):
    """Fit r -> MA(v + r h_B) against beta and compare with C(n,j) Theta_j(v) coefficients."""
    from .funcspace import Sum, SupportBall
    r_nodes = list(r_nodes) if r_nodes is not None else chebyshev_nodes(n + 1 + DEFAULT.steiner.extra_nodes)
    lhs = [ma_integral(Sum(((1.0, v), (r, SupportBall(1.0)))), beta, n) for r in r_nodes]
    coeffs, res, node_res = fit_polynomial(r_nodes, lhs, n)
    # coefficient of r^(n-j) is C(n,j) Theta_j(v)
    ref = [0.0] * (n + 1)
    for j in range(n + 1):
        ref[n - j] = comb(n, j) * theta_j_integral(v, j, beta, n)
    scale = max(abs(c) for c in ref) or 1.0
    return SteinerReport(r_nodes, lhs, ref, coeffs, coefficient_errors(coeffs, ref, scale), res, node_res,
                         "MA(v + r h_B)")


# ---------------------------------------------------------------------------
# grid Monge-Ampere measure
# ---------------------------------------------------------------------------

def grid_ma_measure(g):
    """MA of a sampled finite convex function as the gradient image of Lebesgue measure on dom g*.

    The discrete conjugate records, for every dual node y, the primal maximiser
    x(y), which is the gradient of g* at y; MA(g) = (grad g*)_# Lebesgue.
    """
    dual = grid_conjugate(g)
    cell = float(np.prod(dual.spacing))
    pts = np.stack([g.axes[d][dual.argmax[d]].ravel() for d in range(g.n)], axis=1)
    weights = np.full(len(pts), cell)
    # trapezoid weights on the dual box boundary
    for d in range(g.n):
        idx = np.indices(dual.values.shape)[d].ravel()
        weights[(idx == 0) | (idx == dual.values.shape[d] - 1)] *= 0.5
    ok = np.isfinite(dual.values.ravel())
    return RadialMeasure(g.n, particles=((pts[ok], weights[ok]),))
