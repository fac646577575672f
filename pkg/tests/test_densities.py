from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from fivol import densities as D
from fivol.errors import ArgumentError, ClassError
from fivol.extmath import kappa

import oracles as O


def exact_equal(a, b):
    ks = sorted(set(a.knots) | set(b.knots))
    _, pa = a.refine(ks)
    _, pb = b.refine(ks)
    return all({k: v for k, v in x.items() if v} == {k: v for k, v in y.items() if v} for x, y in zip(pa, pb))


def random_density(seed, pieces=3, degree=3):
    rng = np.random.default_rng(seed)
    knots, coeffs = O.random_continuous_pp(rng, pieces, degree)
    return D.piecewise_polynomial(knots, coeffs)


def test_hat_basics():
    z = D.hat()
    assert z.support == 1
    assert z.value_at_zero() == 1
    assert float(z(0.25)) == 0.75
    assert float(z(2.0)) == 0.0


def test_transform_examples():
    z = D.hat()
    assert D.transform_R(z, 1).equals(D.piecewise_polynomial([0, 1], [[Fraction(1, 2), 0, Fraction(-1, 2)]]))
    assert D.transform_R(z, 2).equals(D.piecewise_polynomial([0, 1], [[Fraction(1, 3), 0, 0, Fraction(-1, 3)]]))
    assert D.transform_R(z, 0) is z or D.transform_R(z, 0).equals(z)
    assert exact_equal(D.transform_R_inv(D.transform_R(z, 2), 2), z)
    assert D.transform_R_inv(D.zero(), 2).is_zero()


@pytest.mark.parametrize("l", range(5))
def test_hat_R_agrees_with_symbolic(l):
    expr, s = O.hat_R_symbolic(l)
    poly = expr.as_poly(s)
    got = D.transform_R(D.hat(), l)
    assert got.knots == (0, 1)
    piece = dict(got.pieces[0])
    ref = {(k[0], 0): Fraction(int(c.p), int(c.q)) for k, c in zip(poly.monoms(), poly.coeffs())}
    assert piece == ref


def test_class_examples():
    z = D.hat()
    for n in range(1, 4):
        assert D.classes(z, n) == set(range(n + 1))
        assert D.classes(D.zero(), n) == set(range(n + 1))
    # s^-(n-j) (1 - s) near 0 fails the power limit
    bad = D.Density([0, 1], [{(-1, 0): 1, (0, 0): -1}])
    chk = D.class_check(bad, 1, 2)
    assert not chk.verdict and chk.limit_s_pow == pytest.approx(1.0)
    with pytest.raises(ClassError):
        D.require_class(bad, 1, 2)
    with pytest.raises(ClassError):
        D.transform_R(z, 3, n=2, k=0)
    with pytest.raises(ArgumentError):
        D.class_check(z, 3, 2)


def test_alpha_examples():
    z = D.hat()
    assert D.alpha_of_zeta(z, 1, 2).equals(D.piecewise_polynomial([0, 1], [[1, 0, -1]]))
    assert D.alpha_of_zeta(z, 2, 2).equals(z)
    assert D.alpha_of_zeta(z, 0, 2).value_at_zero() == pytest.approx(1 / 3)
    assert exact_equal(D.zeta_of_alpha(D.alpha_of_zeta(z, 1, 3), 1, 3), z)


def test_steiner_densities_roundtrip():
    z = D.hat()
    for n in (1, 2, 3):
        zs = D.steiner_densities(z, n)
        assert exact_equal(zs[n], z)
        for j, zj in enumerate(zs):
            assert D.in_class(zj, j, n)
            back = D.transform_R(zj, n - j).scale(kappa(n - j))
            assert back.equals(z, tol=1e-12)
    assert all(x.is_zero() for x in D.steiner_densities(D.zero(), 2))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(0, 3))
def test_roundtrip_random(seed, l):
    z = random_density(seed)
    assert exact_equal(D.transform_R_inv(D.transform_R(z, l), l), z)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(0, 2 ** 31 - 1), st.integers(1, 3))
def test_linearity(s1, s2, l):
    a, b = random_density(s1), random_density(s2)
    lhs = D.transform_R(a + b.scale(3), l)
    rhs = D.transform_R(a, l) + D.transform_R(b, l).scale(3)
    assert exact_equal(lhs, rhs)
    lhs = D.transform_R_inv(a - b, l)
    assert exact_equal(lhs, D.transform_R_inv(a, l) - D.transform_R_inv(b, l))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 3))
def test_R_matches_quadrature(seed, l):
    z = random_density(seed)
    rz = D.transform_R(z, l)
    S = float(z.support)
    rng = np.random.default_rng(seed)
    ks = [float(k) for k in z.knots]
    for s in rng.uniform(0.01, S, 50):
        ref = s ** l * float(z(s)) + l * integrate.quad(lambda t: t ** (l - 1) * float(z(t)), s, S,
                                                        points=[k for k in ks if s < k < S],
                                                        epsabs=1e-14, epsrel=1e-13)[0]
        assert float(rz(s)) == pytest.approx(ref, abs=1e-10, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 2))
def test_R_inv_matches_quadrature(seed, l):
    z = random_density(seed)
    S = float(z.support)
    rz = D.transform_R_inv(z, l)
    ks = [float(k) for k in z.knots]
    for s in np.random.default_rng(seed).uniform(0.05, S, 50):
        ref = float(z(s)) / s ** l - l * integrate.quad(lambda t: float(z(t)) / t ** (l + 1), s, S,
                                                        points=[k for k in ks if s < k < S],
                                                        epsabs=1e-14, epsrel=1e-13)[0]
        assert float(rz(s)) == pytest.approx(ref, abs=1e-9, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 3), st.integers(0, 3))
def test_class_mapping(seed, n, k):
    if k > n:
        k = n
    z = random_density(seed)
    for l in range(n - k + 1):
        assert D.in_class(D.transform_R(z, l, n, k), k, n - l) == D.in_class(z, k, n)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_json_roundtrip(seed):
    z = D.transform_R_inv(random_density(seed), 2)
    back = D.Density.from_json(z.to_json())
    assert exact_equal(back, z)
    assert D.Density.from_dict(z.to_dict()).to_json() == z.to_json()


def test_tail_and_moments():
    z = D.hat()
    assert z.integral_from_zero(0) == pytest.approx(0.5)
    assert z.integral_from_zero(1) == pytest.approx(1 / 6)
    assert float(z.tail(2)(0.5)) == pytest.approx(integrate.quad(lambda t: t * t * (1 - t), 0.5, 1)[0])


def test_discontinuous_rejected():
    with pytest.raises(ArgumentError):
        D.piecewise_polynomial([0, 1, 2], [[1], [2]])
