"""Independent reference computations used by the test suite.

Nothing here calls the code paths under test for the quantity being checked.
Closed forms are derived by hand; numerical oracles use scipy or brute force.
"""

from fractions import Fraction
from itertools import combinations, permutations, product
from math import comb, factorial, gamma, pi

import numpy as np
import sympy as sp
from scipy import integrate


def kappa(j):
    return pi ** (j / 2) / gamma(j / 2 + 1)


# -- linear algebra ----------------------------------------------------------

def mixed_discriminant_perm(mats):
    """(1/n!) sum over permutations of det with column k taken from A_sigma(k)."""
    n = len(mats)
    total = 0.0
    for sigma in permutations(range(n)):
        m = np.column_stack([mats[sigma[k]][:, k] for k in range(n)])
        total += np.linalg.det(m)
    return total / factorial(n)


def mixed_discriminant_signs(mats):
    """Coefficient of l_1...l_n in det(sum l_i A_i), by the +-1 central difference.

    sum_{e in {+-1}^n} prod(e) det(sum e_i A_i) / (2^n n!) is exact for this
    homogeneous polynomial: every monomial missing some l_i cancels.
    """
    n = len(mats)
    total = 0.0
    for eps in product((1.0, -1.0), repeat=n):
        total += np.prod(eps) * np.linalg.det(sum(e * a for e, a in zip(eps, mats)))
    return total / (2 ** n * factorial(n))


def elem_sym_eig(a, j):
    ev = np.linalg.eigvalsh(a)
    return sum(np.prod(c) for c in combinations(ev, j)) if j else 1.0


def random_sym(rng, n, lo=-1.0, hi=1.0):
    a = rng.uniform(lo, hi, (n, n))
    return 0.5 * (a + a.T)


def random_spd(rng, n):
    a = rng.uniform(-1, 1, (n, n))
    return a @ a.T + 0.5 * np.eye(n)


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def fd_jacobian(T, x, h=1e-6):
    n = len(x)
    J = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (T(x + e) - T(x - e)) / (2 * h)
    return J


# -- densities ---------------------------------------------------------------

def hat_R_symbolic(l):
    """R^l hat(s) = s^l (1 - s) + l int_s^1 t^(l-1) (1 - t) dt on (0, 1), via sympy."""
    s, t = sp.symbols("s t", positive=True)
    expr = s ** l * (1 - s) + l * sp.integrate(t ** (l - 1) * (1 - t), (t, s, 1))
    return sp.expand(expr), s


def hat_R(l, t):
    """Closed form R^l hat(t) = (1 - t^(l+1)) / (l+1) on [0, 1]."""
    return (1 - t ** (l + 1)) / (l + 1) if t < 1 else 0.0


def poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def random_continuous_pp(rng, pieces=3, degree=3, support=None):
    """Knots and Fraction power coefficients of a continuous piecewise polynomial vanishing at the end.

    Built from the right: the last piece is (s - S) q(s), every earlier piece
    is p_next(k) + (s - k) q(s) for its right knot k.
    """
    cuts = sorted({Fraction(int(x), 8) for x in rng.integers(1, 24, size=pieces - 1)})
    S = Fraction(int(rng.integers(25, 33)), 8) if support is None else Fraction(support)
    knots = [Fraction(0)] + [c for c in cuts if c < S] + [S]
    coeffs = [None] * (len(knots) - 1)
    right_val = Fraction(0)
    for i in range(len(knots) - 2, -1, -1):
        k = knots[i + 1]
        q = [Fraction(int(c), int(rng.integers(1, 5))) for c in rng.integers(-4, 5, size=degree)]
        if not any(q):
            q[0] = Fraction(1)
        p = poly_mul([-k, Fraction(1)], q)
        p[0] += right_val
        coeffs[i] = p
        right_val = sum(c * knots[i] ** e for e, c in enumerate(p))
    return knots, coeffs


def radial_fiv_quad(dphi, d2phi, zeta, j, n, r_max):
    """Z_j(phi(|x|)) = n kappa_n int zeta(phi'(r)) [D^2 u]_{n-j} r^(n-1) dr by scipy quad.

    The Hessian of phi(|x|) has eigenvalues phi''(r) once and phi'(r)/r n-1 times.
    """
    m = n - j

    def integrand(r):
        a, b = d2phi(r), dphi(r) / r
        e = comb(n - 1, m) * b ** m + (comb(n - 1, m - 1) * a * b ** (m - 1) if m >= 1 else 0.0)
        return float(zeta(dphi(r))) * e * r ** (n - 1)

    val, _ = integrate.quad(integrand, 0.0, r_max, epsabs=1e-14, epsrel=1e-12, limit=400)
    return n * kappa(n) * val


def radial_moment(zeta, n, support):
    """n kappa_n int_0^inf t^(n-1) zeta(t) dt = int_{R^n} zeta(|y|) dy."""
    val, _ = integrate.quad(lambda t: float(zeta(t)) * t ** (n - 1), 0.0, support,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return n * kappa(n) * val


def quadratic_fiv_primal(Q, zeta, j, n, support):
    """Z_j(x^T Q x / 2) = [Q]_{n-j} int zeta(|Qx|) dx = [Q]_{n-j} / det Q int zeta(|y|) dy."""
    return elem_sym_eig(Q, n - j) / np.linalg.det(Q) * radial_moment(zeta, n, support)


def quadratic_fiv_dual(P, zeta, j, n, support):
    """Z*_j(y^T P y / 2) = [P]_j int zeta(|y|) dy."""
    return elem_sym_eig(P, j) * radial_moment(zeta, n, support)


# -- bodies -------------------------------------------------------------------

def steiner_polynomial_coeffs(kind, n):
    """Coefficient list c_k of r^k in vol(K + rB) for the unit ball or unit cube, symbolically."""
    r = sp.Symbol("r")
    kap = lambda j: sp.pi ** sp.Rational(j, 2) / sp.gamma(sp.Rational(j, 2) + 1)
    if kind == "ball":
        poly = kap(n) * (1 + r) ** n
    else:
        # unit cube: faces of dimension i (count C(n,i) 2^(n-i)) each thickened by a
        # (n-i)-dimensional orthant of the ball, volume 2^-(n-i) kappa_{n-i} r^(n-i)
        poly = sum(comb(n, i) * 2 ** (n - i) * kap(n - i) * r ** (n - i) / 2 ** (n - i) for i in range(n + 1))
    p = sp.Poly(sp.expand(poly), r)
    return [float(p.coeff_monomial(r ** k)) for k in range(n + 1)]


def intrinsic_volumes_from_steiner(kind, n):
    c = steiner_polynomial_coeffs(kind, n)
    return [c[n - j] / kappa(n - j) for j in range(n + 1)]


def box_parallel_volume_mc(h, r, samples, rng):
    """Monte Carlo volume of box_h + rB (distance to the box <= r)."""
    h = np.asarray(h, float)
    lo, hi = -(h + r), h + r
    x = rng.uniform(lo, hi, size=(samples, len(h)))
    d = np.linalg.norm(np.maximum(np.abs(x) - h, 0.0), axis=1)
    return float(np.prod(hi - lo) * np.mean(d <= r))
