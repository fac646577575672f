from math import comb, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fivol import densities as D
from fivol import funcspace as F
from fivol import intrinsic as I
from fivol.errors import ArgumentError, ClassError

import oracles as O

HAT = D.hat()
HALF_SQ = F.RadialProfile((0.0,), ((0.0, 0.0, 0.5),))


def test_fiv_examples():
    assert I.fiv(F.CatalogUt(0.5), 1, HAT, 2) == pytest.approx(3 * pi / 4, rel=1e-12)
    assert I.fiv(F.CatalogVt(0.5), 1, HAT, 2, side="dual") == pytest.approx(3 * pi / 4, rel=1e-12)
    # j = 0: n kappa_n int t^(n-1) zeta = 2 pi / 6 for n = 2
    for u in (F.CatalogUt(0.3), F.Quadratic.iso(2), F.IndicatorBall(2.0)):
        assert I.fiv(u, 0, HAT, 2) == pytest.approx(pi / 3, rel=1e-14)


def test_oracle_ut_examples():
    assert I.fiv_oracle_ut(0.5, 2, 2, HAT) == pytest.approx(pi / 2, rel=1e-14)
    assert I.fiv_oracle_ut(0.0, 1, 2, HAT) == pytest.approx(pi, rel=1e-14)
    assert I.fiv_oracle_ut(1.0, 1, 2, HAT) == 0.0
    assert I.fiv_oracle_ut(1.5, 2, 3, HAT) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_oracle_ut_against_hand_formula(n):
    for j in range(1, n + 1):
        for t in np.linspace(0, 1, 11):
            ref = O.kappa(n) * comb(n, j) * O.hat_R(n - j, t)
            assert I.fiv_oracle_ut(t, j, n, HAT) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_indicator_examples():
    z = HAT
    B2 = I.ClassicalBody.ball(2)
    sq = I.ClassicalBody.box((0.5, 0.5))
    assert I.fiv_indicator(B2, 1, z) == pytest.approx(pi, rel=1e-14)
    assert I.fiv_indicator(sq, 2, z) == pytest.approx(1.0, rel=1e-14)
    assert I.fiv_indicator(sq, 0, z) == pytest.approx(pi * O.hat_R(2, 0.0), rel=1e-14)
    # numerical representations agree with the closed form
    assert I.fiv(F.IndicatorBall(1.0), 1, z, 2, representation="dual_hessian") == pytest.approx(pi, rel=1e-12)
    assert I.fiv(F.IndicatorBox((0.5, 0.5)), 2, z, 2) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("kind,n", [("ball", 2), ("ball", 3), ("cube", 2), ("cube", 3)])
def test_classical_intrinsic_volumes(kind, n):
    K = I.ClassicalBody.ball(n) if kind == "ball" else I.ClassicalBody.cube(n)
    ref = O.intrinsic_volumes_from_steiner(kind, n)
    assert np.allclose(I.classical_intrinsic_volumes(K), ref, rtol=1e-13)
    assert K.intrinsic_volumes[0] == 1.0


def test_classical_examples():
    assert np.allclose(I.classical_intrinsic_volumes(I.ClassicalBody.ball(2)), [1, pi, pi])
    assert np.allclose(I.classical_intrinsic_volumes(I.ClassicalBody.cube(2)), [1, 2, 1])
    assert I.classical_intrinsic_volumes(I.ClassicalBody.ball(3))[3] == pytest.approx(4 * pi / 3)


def test_parallel_volume_against_monte_carlo():
    rng = np.random.default_rng(0)
    h = (0.3, 0.7, 0.5)
    K = I.ClassicalBody.box(h)
    for r in (0.2, 0.8):
        mc = O.box_parallel_volume_mc(h, r, 400_000, rng)
        assert I.parallel_volume(K, r) == pytest.approx(mc, rel=1e-2)
    sq = I.ClassicalBody.cube(2)
    for r in (0.1, 1.0):
        assert I.parallel_volume(sq, r) == pytest.approx(1 + 4 * r + pi * r * r, rel=1e-12)


def test_body_json():
    K = I.ClassicalBody.box((0.5, 1.0))
    assert I.ClassicalBody.from_dict(K.to_dict()) == K
    assert I.ClassicalBody.from_dict({"type": "Ball", "n": 3, "rho": 2.0}).volume() == pytest.approx(32 * pi / 3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ut_sweep_all_representations(n):
    for j in range(1, n + 1):
        for t in np.linspace(0, 1, 11):
            ref = I.fiv_oracle_ut(t, j, n, HAT)
            for rep in ("smooth_hessian", "dual_hessian", "measure_alpha", "tau_curvature"):
                a = I.fiv(F.CatalogUt(t), j, HAT, n, representation=rep)
                b = I.fiv(F.CatalogVt(t), j, HAT, n, side="dual", representation=rep)
                assert a == pytest.approx(ref, rel=1e-8, abs=1e-14), rep
                assert b == pytest.approx(ref, rel=1e-8, abs=1e-14), rep


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_quadratic_against_closed_forms(n, seed):
    rng = np.random.default_rng(seed)
    Q = O.random_spd(rng, n)
    for j in range(1, n + 1):
        ref = O.quadratic_fiv_primal(Q, HAT, j, n, 1.0)
        refd = O.quadratic_fiv_dual(Q, HAT, j, n, 1.0)
        for rep in ("smooth_hessian", "dual_hessian", "measure_alpha", "tau_curvature"):
            assert I.fiv(F.Quadratic(Q), j, HAT, n, representation=rep) == pytest.approx(ref, rel=1e-8)
            assert I.fiv(F.Quadratic(Q), j, HAT, n, side="dual", representation=rep) == pytest.approx(refd, rel=1e-8)


@pytest.mark.parametrize("n", [2, 3])
def test_radial_profile_against_quadrature(n):
    # phi = r^2/2 + r^3/3: phi' = r + r^2 reaches the support of hat at r = (sqrt(5) - 1)/2
    u = F.RadialProfile((0.0,), ((0.0, 0.0, 0.5, 1.0 / 3.0),))
    r_max = (sqrt(5) - 1) / 2
    for j in range(1, n + 1):
        ref = O.radial_fiv_quad(lambda r: r + r * r, lambda r: 1 + 2 * r, HAT, j, n, r_max)
        assert I.fiv(u, j, HAT, n) == pytest.approx(ref, rel=1e-9)


def test_class_violation_raises():
    bad = D.Density([0, 1], [{(-1, 0): 1, (0, 0): -1}])
    with pytest.raises(ClassError):
        I.fiv(F.CatalogUt(0.5), 1, bad, 2)
    with pytest.raises(ArgumentError):
        I.fiv(F.CatalogUt(0.5), 3, HAT, 2)
    with pytest.raises(ArgumentError):
        I.fiv(F.CatalogUt(0.5), 1, HAT, 2, representation="nope")


CATALOG = [
    lambda rng, n: F.CatalogUt(float(rng.uniform(0, 1))),
    lambda rng, n: F.Quadratic(O.random_spd(rng, n)),
    lambda rng, n: F.IndicatorBall(float(rng.uniform(0.3, 2))),
    lambda rng, n: F.RadialProfile((0.0,), ((0.0, float(rng.uniform(0, 0.5)), float(rng.uniform(0.2, 2))),)),
]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(CATALOG) - 1), st.integers(1, 3), st.sampled_from([0.5, 2.0]), st.integers(0, 2 ** 31 - 1))
def test_epi_homogeneity(k, n, lam, seed):
    rng = np.random.default_rng(seed)
    u = CATALOG[k](rng, n)
    for j in range(n + 1):
        a = I.fiv(F.epi_scale(lam, u), j, HAT, n)
        assert a == pytest.approx(lam ** j * I.fiv(u, j, HAT, n), rel=1e-8, abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(CATALOG) - 1), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_epi_translation_invariance(k, n, seed):
    rng = np.random.default_rng(seed)
    u = CATALOG[k](rng, n)
    w = F.Shift(u, tuple(rng.normal(size=n)), float(rng.normal()))
    for j in range(1, n + 1):
        assert I.fiv(w, j, HAT, n) == pytest.approx(I.fiv(u, j, HAT, n), rel=1e-8, abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2 ** 31 - 1))
def test_rotation_invariance(n, seed):
    rng = np.random.default_rng(seed)
    Q = O.random_spd(rng, n)
    R = O.random_rotation(rng, n)
    for j in range(1, n + 1):
        for side in ("primal", "dual"):
            a = I.fiv(F.Quadratic(Q), j, HAT, n, side=side)
            b = I.fiv(F.Quadratic(R @ Q @ R.T), j, HAT, n, side=side)
            assert b == pytest.approx(a, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(CATALOG) - 1), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_duality(k, n, seed):
    rng = np.random.default_rng(seed)
    u = CATALOG[k](rng, n)
    for j in range(n + 1):
        a = I.fiv(u, j, HAT, n)
        assert I.fiv(F.conjugate(u), j, HAT, n, side="dual") == pytest.approx(a, rel=1e-8, abs=1e-13)


def chord_pair(rng):
    """Finite h = q r^2/2 raised by chords over two disjoint radius intervals."""
    q = float(rng.uniform(0.5, 2.0))
    cuts = np.sort(rng.uniform(0.05, 1.4, 4))
    h = F.RadialProfile((0.0,), ((0.0, 0.0, q / 2),))

    def chord(a, b):
        return F.pointwise_max(h, F.RadialProfile((0.0,), ((-q / 2 * a * b, q / 2 * (a + b)),)))
    return chord(cuts[0], cuts[1]), chord(cuts[2], cuts[3])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_valuation(n, seed):
    rng = np.random.default_rng(seed)
    f, g = chord_pair(rng)
    lo, hi = F.pointwise_min(f, g), F.pointwise_max(f, g)
    for j in range(1, n + 1):
        z = lambda h: I.fiv(h, j, HAT, n, side="dual")
        assert z(f) + z(g) == pytest.approx(z(lo) + z(hi), rel=1e-7)


def test_cross_representation_examples():
    v = F.Sum(((1.0, F.Quadratic.iso(2)), (1.0, F.Quadratic(np.array([[0.3, 0.1], [0.1, 0.05]])))))
    rep = I.cross_representation_check(v, 1, HAT, 2)
    assert rep.discrepancy <= 1e-8
    for t in (0.0, 0.25, 0.5, 1.0):
        rep = I.cross_representation_check(F.CatalogVt(t), 1, HAT, 2)
        assert rep.discrepancy <= 1e-8
        assert rep.dual_hessian == pytest.approx(rep.oracle, rel=1e-8, abs=1e-14)
    assert I.cross_representation_check(F.CatalogVt(0.5), 2, HAT, 2).discrepancy <= 1e-14
