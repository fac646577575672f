"""Dense symmetric-matrix algebra for small dimensions.

Mixed discriminants (by inclusion-exclusion over subset sums), elementary
symmetric functions of eigenvalues (from characteristic polynomial
coefficients), the Hessian of the Euclidean norm, and curvature functions of
level sets.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb, factorial, gamma, pi

import numpy as np

from .errors import ArgumentError, SingularityError

MAX_DIM = 8


@dataclass(frozen=True, eq=False)
class SymMat:
    """Symmetric n x n matrix stored by its upper triangle."""

    n: int
    upper: tuple

    @classmethod
    def from_array(cls, a, tol=1e-12):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ArgumentError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        if not 1 <= n <= MAX_DIM:
            raise ArgumentError(f"dimension {n} outside 1..{MAX_DIM}")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > tol * scale:
            raise ArgumentError("matrix is not symmetric")
        iu = np.triu_indices(n)
        return cls(n, tuple(float(v) for v in a[iu]))

    @classmethod
    def identity(cls, n):
        return cls.from_array(np.eye(n))

    @property
    def entries(self):
        a = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n)
        a[iu] = self.upper
        return a + np.triu(a, 1).T

    def __array__(self, dtype=None, copy=None):
        e = self.entries
        return e if dtype is None else e.astype(dtype)

    def __eq__(self, other):
        return isinstance(other, SymMat) and self.upper == other.upper

    def __hash__(self):
        return hash(self.upper)


def as_array(a):
    if isinstance(a, SymMat):
        return a.entries
    return np.asarray(a, dtype=float)


@dataclass(frozen=True)
class KappaTable:
    """Volumes of unit balls kappa_0 .. kappa_n."""

    values: tuple

    @classmethod
    def upto(cls, n):
        return cls(tuple(kappa(j) for j in range(n + 1)))

    def __getitem__(self, j):
        return self.values[j]


def kappa(j):
    """Volume of the j-dimensional unit ball."""
    if j < 0:
        raise ArgumentError("negative dimension")
    if j == 0:
        return 1.0
    if j == 1:
        return 2.0
    if j == 2:
        return pi
    return pi ** (j / 2) / gamma(j / 2 + 1)


def _check_square(mats):
    arrs = [as_array(m) for m in mats]
    n = len(arrs)
    if n == 0:
        raise ArgumentError("need at least one matrix")
    for a in arrs:
        if a.shape != (n, n):
            raise ArgumentError(f"need {n} matrices of shape ({n},{n}), got {a.shape}")
    if n > MAX_DIM:
        raise ArgumentError(f"dimension {n} above cap {MAX_DIM}")
    return arrs


def mixed_discriminant(mats):
    """det(A_1, ..., A_n) by inclusion-exclusion over subset sums.

    Uses 2^n - 1 determinants:
    (1/n!) sum_k sum_{|S|=k} (-1)^(n-k) det(sum_{i in S} A_i).
    """
    arrs = _check_square(mats)
    n = len(arrs)
    total = 0.0
    for k in range(1, n + 1):
        sign = -1.0 if (n - k) % 2 else 1.0
        for subset in combinations(range(n), k):
            total += sign * np.linalg.det(sum(arrs[i] for i in subset))
    return total / factorial(n)


def mixed_discriminant_repeated(blocks):
    """Mixed discriminant with repeated arguments, e.g. det(A[j], B[n-j]).

    blocks is a list of (matrix, multiplicity) pairs.
    """
    mats = []
    for m, k in blocks:
        if k < 0:
            raise ArgumentError("negative multiplicity")
        mats.extend([m] * k)
    return mixed_discriminant(mats)


def char_poly_coeffs(a):
    """Coefficients c_0..c_n of det(lambda I - A) via Faddeev-LeVerrier."""
    a = as_array(a)
    n = a.shape[0]
    c = np.zeros(n + 1)
    c[n] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + c[n - k + 1] * eye
        c[n - k] = -np.trace(a @ m) / k
    return c


def elem_sym_all(a):
    """[A]_0 .. [A]_n, the elementary symmetric functions of the eigenvalues."""
    c = char_poly_coeffs(a)
    n = len(c) - 1
    return np.array([(-1) ** j * c[n - j] for j in range(n + 1)])


def elem_sym(a, j):
    a = as_array(a)
    n = a.shape[0]
    if not 0 <= j <= n:
        raise ArgumentError(f"index {j} outside 0..{n}")
    if j == 0:
        return 1.0
    return float(elem_sym_all(a)[j])


def hessian_hB(x):
    """Hessian of x -> |x| away from the origin."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    if r == 0:
        raise SingularityError("the norm is not twice differentiable at 0")
    e = x / r
    return (np.eye(len(x)) - np.outer(e, e)) / r


def orthogonal_complement(g):
    """Orthonormal basis (as columns) of the complement of g, via a Householder reflector."""
    g = np.asarray(g, dtype=float)
    n = len(g)
    e = g / np.linalg.norm(g)
    w = e.copy()
    # reflect e onto -sign(e_0) e_0 to avoid cancellation
    w[0] += 1.0 if e[0] >= 0 else -1.0
    h = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    return h[:, 1:]


def tau(grad, hess, i):
    """i-th elementary symmetric function of the principal curvatures of the level set.

    The Weingarten map is the restriction of hess/|grad| to grad^perp.
    """
    grad = np.asarray(grad, dtype=float)
    hess = as_array(hess)
    n = len(grad)
    if hess.shape != (n, n):
        raise ArgumentError("gradient and Hessian dimensions differ")
    if not 0 <= i <= n - 1:
        raise ArgumentError(f"index {i} outside 0..{n - 1}")
    g = np.linalg.norm(grad)
    if g == 0:
        raise SingularityError("zero gradient: point lies in the argmin")
    if i == 0:
        return 1.0
    u = orthogonal_complement(grad)
    return elem_sym(u.T @ hess @ u, i) / g ** i


def binom(n, k):
    return comb(n, k) if 0 <= k <= n else 0


# -- batched variants (leading axis indexes points) --------------------------

def mixed_discriminant_batch(mats):
    """Mixed discriminants of stacks: each entry has shape (N, n, n) or (n, n)."""
    arrs = [np.asarray(m, dtype=float) for m in mats]
    n = len(arrs)
    if n == 0 or n > MAX_DIM:
        raise ArgumentError("need 1..8 matrices")
    lead = max((a.shape[0] for a in arrs if a.ndim == 3), default=None)
    if lead is None:
        return np.array(mixed_discriminant(arrs))
    arrs = [a if a.ndim == 3 else np.broadcast_to(a, (lead, n, n)) for a in arrs]
    total = np.zeros(lead)
    for k in range(1, n + 1):
        sign = -1.0 if (n - k) % 2 else 1.0
        for subset in combinations(range(n), k):
            total += sign * np.linalg.det(sum(arrs[i] for i in subset))
    return total / factorial(n)


def elem_sym_batch(a, j):
    """[A]_j for a stack of matrices, via batched Faddeev-LeVerrier."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    if not 0 <= j <= n:
        raise ArgumentError(f"index {j} outside 0..{n}")
    if j == 0:
        return np.ones(a.shape[0])
    eye = np.broadcast_to(np.eye(n), a.shape)
    m = np.zeros_like(a)
    c_prev = np.ones(a.shape[0])
    coeffs = [c_prev]
    for k in range(1, j + 1):
        m = a @ m + c_prev[:, None, None] * eye
        c_prev = -np.trace(a @ m, axis1=1, axis2=2) / k
        coeffs.append(c_prev)
    return (-1) ** j * coeffs[j]


def orthogonal_complement_batch(g):
    """Stack of Householder bases (N, n, n-1) for the complements of the rows of g."""
    g = np.asarray(g, dtype=float)
    e = g / np.linalg.norm(g, axis=1, keepdims=True)
    w = e.copy()
    w[:, 0] += np.where(e[:, 0] >= 0, 1.0, -1.0)
    n = g.shape[1]
    h = np.eye(n)[None] - 2.0 * w[:, :, None] * w[:, None, :] / np.sum(w * w, axis=1)[:, None, None]
    return h[:, :, 1:]


def tau_batch(grads, hess, i):
    """tau_i at many points sharing nothing but shapes: grads (N, n), hess (N, n, n) or (n, n)."""
    grads = np.asarray(grads, dtype=float)
    hess = np.asarray(hess, dtype=float)
    if hess.ndim == 2:
        hess = np.broadcast_to(hess, (grads.shape[0],) + hess.shape)
    gn = np.linalg.norm(grads, axis=1)
    if np.any(gn == 0):
        raise SingularityError("zero gradient: point lies in the argmin")
    if i == 0:
        return np.ones(grads.shape[0])
    u = orthogonal_complement_batch(grads)
    w = np.swapaxes(u, 1, 2) @ hess @ u
    return elem_sym_batch(w, i) / gn ** i
