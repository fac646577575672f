"""Piecewise densities on [0, inf) with exact integral transforms.

A density is a finite list of pieces on [x_i, x_{i+1}) with x_0 = 0 and
x_p = S (the support bound), identically zero on [S, inf). On each piece it is
a finite sum of terms c * s^k * (log s)^m with integer k (possibly negative)
and integer m >= 0. That family is closed under s -> s^p * zeta(s) and under
tail integrals, so R^l and R^(-l) are computed exactly on coefficients.

Coefficients are stored as Fractions. Rational inputs stay exact through every
transform; the only inexact values are logarithms of knots other than 1, which
enter as the exact binary fraction of the float log.
"""

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .errors import ArgumentError, ClassError, UnsupportedDensityError
from .extmath import kappa

ZERO = Fraction(0)


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    v = float(v)
    if not math.isfinite(v):
        raise ArgumentError(f"non-finite coefficient {v}")
    return Fraction(v)


def _log_pow(x, m):
    if m == 0:
        return Fraction(1)
    if x == 1:
        return ZERO
    return Fraction(math.log(x)) ** m


def _term_at(k, m, x):
    """Exact value of s^k log^m s at a positive knot x."""
    return x ** k * _log_pow(x, m)


def _clean(terms):
    return {key: c for key, c in terms.items() if c != 0}


def _antiderivative(terms):
    """One antiderivative of sum c s^k log^m s, in the same family."""
    out = {}
    for (k, m), c in terms.items():
        if k == -1:
            key = (0, m + 1)
            out[key] = out.get(key, ZERO) + c / (m + 1)
        else:
            for i in range(m + 1):
                key = (k + 1, m - i)
                coef = c * (-1) ** i * Fraction(factorial(m), factorial(m - i)) / Fraction(k + 1) ** (i + 1)
                out[key] = out.get(key, ZERO) + coef
    return _clean(out)


def _eval_terms(terms, x):
    return sum((c * _term_at(k, m, x) for (k, m), c in terms.items()), ZERO)


def _shift(terms, p):
    return {(k + p, m): c for (k, m), c in terms.items()}


def _add_terms(a, b, scale=1):
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, ZERO) + scale * c
    return _clean(out)


@dataclass(frozen=True)
class HadClassCheck:
    j: int
    n: int
    limit_s_pow: object       # lim s^(n-j) zeta(s); float, or +-inf when divergent
    limit_integral: object    # lim int_s^inf t^(n-j-1) zeta(t) dt; None when j = n
    verdict: bool


class Density:
    """Piecewise s^k log^m s density with bounded support."""

    __slots__ = ("knots", "pieces", "_fknots", "_fpieces")

    def __init__(self, knots, pieces, check=True):
        knots = [_frac(x) for x in knots]
        pieces = [_clean({(int(k), int(m)): _frac(c) for (k, m), c in dict(p).items()})
                  for p in pieces]
        if len(knots) != len(pieces) + 1:
            raise ArgumentError("need one more knot than pieces")
        if knots and knots[0] != 0:
            raise ArgumentError("first knot must be 0")
        for a, b in zip(knots[:-1], knots[1:]):
            if not b > a:
                raise ArgumentError("knots must be strictly increasing")
        for p in pieces:
            for k, m in p:
                if m < 0:
                    raise UnsupportedDensityError("negative log power")
        knots, pieces = self._normalise(knots, pieces)
        self.knots = tuple(knots)
        self.pieces = tuple(tuple(sorted(p.items())) for p in pieces)
        self._fknots = np.array([float(x) for x in self.knots])
        self._fpieces = [[(k, m, float(c)) for (k, m), c in p] for p in self.pieces]
        if check:
            self._check_continuity()

    @staticmethod
    def _normalise(knots, pieces):
        if not pieces:
            return [ZERO], []
        nk, npc = [knots[0]], []
        for i, p in enumerate(pieces):
            if npc and npc[-1] == p:
                nk[-1] = knots[i + 1]
            else:
                npc.append(p)
                nk.append(knots[i + 1])
        while npc and not npc[-1]:
            npc.pop()
            nk.pop()
        if not npc:
            return [ZERO], []
        return nk, npc

    # -- basic access -----------------------------------------------------

    @property
    def support(self):
        return self.knots[-1]

    @property
    def terms(self):
        return [dict(p) for p in self.pieces]

    def is_zero(self):
        return not self.pieces

    def _check_continuity(self, tol=1e-8):
        scale = max([1.0] + [abs(float(c)) for p in self.pieces for _, c in p])
        for i in range(len(self.pieces)):
            b = self.knots[i + 1]
            left = float(_eval_terms(dict(self.pieces[i]), b))
            right = float(_eval_terms(dict(self.pieces[i + 1]), b)) if i + 1 < len(self.pieces) else 0.0
            if abs(left - right) > tol * scale * max(1.0, abs(float(b))) ** 6:
                raise ArgumentError(f"density is discontinuous at knot {float(b)}")

    def __repr__(self):
        return f"Density(knots={[str(k) for k in self.knots]}, pieces={self.terms})"

    # -- evaluation -------------------------------------------------------

    def value_at_zero(self):
        """lim_{s->0+} zeta(s); +-inf when the first piece is singular."""
        if not self.pieces:
            return 0.0
        terms = dict(self.pieces[0])
        lead = min(((k, -m) for (k, m) in terms), default=None)
        k, mneg = lead
        if k > 0:
            return 0.0
        if k == 0 and mneg == 0:
            return float(terms[(0, 0)])
        c = terms[(k, -mneg)]
        sign = np.sign(float(c)) * (-1) ** (-mneg)
        return float(sign * np.inf)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.zeros_like(s)
        if self.pieces:
            idx = np.searchsorted(self._fknots, s, side="right") - 1
            pos = s > 0
            for i, terms in enumerate(self._fpieces):
                mask = (idx == i) & pos
                if not mask.any():
                    continue
                x = s[mask]
                lx = np.log(x)
                acc = np.zeros_like(x)
                for k, m, c in terms:
                    acc += c * x ** float(k) * (lx ** m if m else 1.0)
                out[mask] = acc
            zero = s == 0
            if zero.any():
                out[zero] = self.value_at_zero()
            if (s < 0).any():
                raise ArgumentError("densities live on [0, inf)")
        return float(out[0]) if scalar else out

    # -- algebra ----------------------------------------------------------

    def refine(self, knots):
        """Knots and term dicts of the same function on a finer knot list."""
        ks = sorted(set(self.knots) | {_frac(k) for k in knots})
        pieces = []
        for a in ks[:-1]:
            i = bisect.bisect_right(self.knots, a) - 1
            pieces.append(dict(self.pieces[i]) if i < len(self.pieces) else {})
        return ks, pieces

    def _binary(self, other, op):
        ks = sorted(set(self.knots) | set(other.knots))
        k1, p1 = self.refine(ks)
        k2, p2 = other.refine(ks)
        return Density(ks, [op(a, b) for a, b in zip(p1, p2)], check=False)

    def __add__(self, other):
        return self._binary(other, lambda a, b: _add_terms(a, b))

    def __sub__(self, other):
        return self._binary(other, lambda a, b: _add_terms(a, b, -1))

    def scale(self, c):
        c = _frac(c)
        return Density(self.knots, [{key: c * v for key, v in p} for p in self.pieces], check=False)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1)

    def mul_power(self, p):
        """s -> s^p zeta(s)."""
        return Density(self.knots, [_shift(dict(q), p) for q in self.pieces], check=False)

    def tail(self, p):
        """T(s) = int_s^inf t^p zeta(t) dt as a density (exact)."""
        if not self.pieces:
            return self
        out = [None] * len(self.pieces)
        acc = ZERO  # integral over [knots[i+1], inf)
        for i in range(len(self.pieces) - 1, -1, -1):
            b = self.knots[i + 1]
            f = _antiderivative(_shift(dict(self.pieces[i]), p))
            fb = _eval_terms(f, b)
            piece = {key: -c for key, c in f.items()}
            piece[(0, 0)] = piece.get((0, 0), ZERO) + acc + fb
            out[i] = _clean(piece)
            a = self.knots[i]
            if a > 0:
                acc = acc + fb - _eval_terms(f, a)
        return Density(self.knots, out, check=False)

    def integral_from_zero(self, p):
        """lim_{s->0+} int_s^inf t^p zeta(t) dt, or None if it diverges."""
        if not self.pieces:
            return 0.0
        t = self.tail(p)
        v = t.value_at_zero()
        return v if np.isfinite(v) else None

    def equals(self, other, tol=1e-12):
        """Knot-wise coefficient equality with a relative tolerance."""
        def close(a, b):
            return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(a)), abs(float(b)))
        ks = sorted(set(self.knots) | set(other.knots))
        merged = [ks[0]]
        for k in ks[1:]:
            if close(k, merged[-1]):
                continue
            merged.append(k)
        snap = lambda d: Density([min(merged, key=lambda m: abs(float(m) - float(k))) for k in d.knots],
                                 [dict(p) for p in d.pieces], check=False) if d.pieces else d
        a, b = snap(self), snap(other)
        _, pa = a.refine(merged)
        _, pb = b.refine(merged)
        for x, y in zip(pa, pb):
            for key in set(x) | set(y):
                if not close(x.get(key, ZERO), y.get(key, ZERO)):
                    return False
        return True

    # -- serialisation ----------------------------------------------------

    def to_dict(self):
        pieces = []
        for a, b, p in zip(self.knots[:-1], self.knots[1:], self.pieces):
            coeffs = {}
            for (k, m), c in p:
                key = str(k) if m == 0 else f"{k}|{m}"
                coeffs[key] = _fmt_frac(c)
            pieces.append({"interval": [_fmt_frac(a), _fmt_frac(b)], "coefficients": coeffs})
        return {"pieces": pieces}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        try:
            raw = d["pieces"]
        except (KeyError, TypeError) as exc:
            raise ArgumentError("density JSON needs a 'pieces' list") from exc
        if not raw:
            return zero()
        knots, pieces = [], []
        for p in raw:
            a, b = (_frac(v) for v in p["interval"])
            if knots and knots[-1] != a:
                raise ArgumentError("density pieces must be contiguous")
            if not knots:
                knots.append(a)
            knots.append(b)
            terms = {}
            for key, c in p["coefficients"].items():
                terms[_parse_key(key)] = _frac(c)
            pieces.append(terms)
        return cls(knots, pieces)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    # -- transforms as methods --------------------------------------------

    def R(self, l):
        return transform_R(self, l)

    def R_inv(self, l):
        return transform_R_inv(self, l)


def _fmt_frac(c):
    c = _frac(c)
    if c.denominator == 1:
        return int(c.numerator)
    # short exact strings for simple rationals, floats otherwise
    if c.denominator < 10 ** 6:
        return f"{c.numerator}/{c.denominator}"
    return float(c) if Fraction(float(c)) == c else f"{c.numerator}/{c.denominator}"


def _parse_key(key):
    try:
        if "|" in key:
            k, m = key.split("|")
            return int(k), int(m)
        return int(key), 0
    except ValueError as exc:
        raise UnsupportedDensityError(f"exponent key {key!r} is not an integer power") from exc


# -- constructors -------------------------------------------------------------

def zero():
    return Density([0], [])


def polynomial(coeffs, support):
    """Density equal to sum coeffs[k] s^k on [0, support)."""
    return Density([0, support], [{(k, 0): c for k, c in enumerate(coeffs) if c != 0}])


def hat():
    """zeta(s) = (1 - s)_+."""
    return polynomial([1, -1], 1)


def piecewise_polynomial(knots, coeff_lists, check=True):
    return Density(knots, [{(k, 0): c for k, c in enumerate(cl) if c != 0} for cl in coeff_lists],
                   check=check)


# -- Hadwiger classes ---------------------------------------------------------

def class_check(zeta, j, n):
    """Membership of zeta in Had^n_j, from exact limits of its first piece."""
    if not 0 <= j <= n:
        raise ArgumentError(f"degree {j} outside 0..{n}")
    if zeta.is_zero():
        return HadClassCheck(j, n, 0.0, 0.0 if j < n else None, True)
    first = dict(zeta.pieces[0])
    d = n - j
    lim_pow = 0.0
    divergent = False
    for (k, m), c in first.items():
        e = k + d
        if e > 0:
            continue
        if e == 0 and m == 0:
            lim_pow += float(c)
        else:
            divergent = True
    if divergent:
        lim_pow = zeta.mul_power(d).value_at_zero()
    if j == n:
        return HadClassCheck(j, n, lim_pow, None, bool(np.isfinite(lim_pow)))
    lim_int = zeta.integral_from_zero(d - 1)
    verdict = (not divergent) and lim_pow == 0.0 and lim_int is not None
    return HadClassCheck(j, n, lim_pow, lim_int, verdict)


def in_class(zeta, j, n):
    return class_check(zeta, j, n).verdict


def classes(zeta, n):
    """The set of j with zeta in Had^n_j."""
    return {j for j in range(n + 1) if in_class(zeta, j, n)}


def require_class(zeta, j, n, what="density"):
    chk = class_check(zeta, j, n)
    if not chk.verdict:
        raise ClassError(f"{what} is not in Had^{n}_{j} (limits {chk.limit_s_pow}, {chk.limit_integral})")
    return chk


# -- transforms --------------------------------------------------------------

def transform_R(zeta, l, n=None, k=None):
    """R^l zeta(s) = s^l zeta(s) + l int_s^inf t^(l-1) zeta(t) dt.

    When n and k are given, membership zeta in Had^n_k and l <= n - k are
    checked first.
    """
    if l < 0:
        raise ArgumentError("use transform_R_inv for negative powers")
    if n is not None and k is not None:
        if l > n - k:
            raise ClassError(f"R^{l} is only defined on Had^{n}_{k} for l <= {n - k}")
        require_class(zeta, k, n)
    if l == 0:
        return zeta
    return zeta.mul_power(l) + zeta.tail(l - 1).scale(l)


def transform_R_inv(rho, l, n=None, k=None):
    """R^(-l) rho(s) = rho(s)/s^l - l int_s^inf rho(t)/t^(l+1) dt.

    When n and k are given the result is meant to lie in Had^n_k, so rho must
    lie in Had^(n-l)_k (the range of R^l on Had^n_k).
    """
    if l < 0:
        raise ArgumentError("l must be non-negative")
    if n is not None and k is not None:
        if l > n - k:
            raise ClassError(f"R^(-{l}) maps into Had^{n}_{k} only for l <= {n - k}")
        require_class(rho, k, n - l, "input")
    if l == 0:
        return rho
    return rho.mul_power(-l) - rho.tail(-l - 1).scale(l)


def steiner_densities(zeta, n):
    """zeta_j = R^(-(n-j)) zeta / kappa_{n-j} for j = 0..n."""
    require_class(zeta, n, n)
    out = []
    for j in range(n + 1):
        zj = transform_R_inv(zeta, n - j).scale(Fraction(1) / _frac(kappa(n - j))) if j < n else zeta
        out.append(zj)
    return out


def alpha_of_zeta(zeta, j, n):
    """alpha = C(n, j) R^(n-j) zeta."""
    require_class(zeta, j, n)
    return transform_R(zeta, n - j).scale(comb(n, j))


def zeta_of_alpha(alpha, j, n):
    return transform_R_inv(alpha, n - j).scale(Fraction(1, comb(n, j)))


def load(path):
    with open(path) as fh:
        return Density.from_json(fh.read())
