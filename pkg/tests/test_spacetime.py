import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st_

from greybound import spacetime as st
from greybound.errors import DomainError, NearExtremal, NotSubExtremal
from greybound.spacetime import BlackHole, Extremality, Mode

mp.mp.dps = 40

SQRT3 = math.sqrt(3.0)

holes = st_.builds(
    lambda gm, frac, g: BlackHole(mass=gm / g, charge=frac * gm / math.sqrt(g), newton_g=g),
    st_.floats(0.5, 8.0),
    st_.floats(0.0, 0.95),
    st_.sampled_from([1.0, 0.5, 2.0]),
)


def mp_delta(gm, gq2, r):
    return 1 - 2 * gm / r + gq2 / r**2


# ---- BlackHole ----------------------------------------------------------

def test_classification():
    assert BlackHole(2.0, 1.0).extremality is Extremality.SUB_EXTREMAL
    assert BlackHole(1.0, 1.0).extremality is Extremality.EXTREMAL
    assert BlackHole(1.0, 2.0).extremality is Extremality.SUPER_EXTREMAL
    assert BlackHole(2.0).r_plus == 4.0


def test_a_and_b_params(rn):
    assert rn.a_param == pytest.approx(SQRT3, rel=1e-15)
    assert rn.b_param is None
    assert BlackHole(1.0, 2.0).b_param == pytest.approx(SQRT3, rel=1e-15)


@pytest.mark.parametrize("kwargs", [dict(mass=0.0), dict(mass=-1.0), dict(mass=1.0, charge=-0.1),
                                    dict(mass=1.0, newton_g=0.0), dict(mass=math.nan)])
def test_invalid_parameters(kwargs):
    with pytest.raises(DomainError):
        BlackHole(**kwargs)


def test_near_extremal_guard():
    with pytest.raises(NearExtremal):
        BlackHole(1.0, 1.0 - 1e-14)
    with pytest.raises(NearExtremal):
        BlackHole(1.0, 1.0 + 1e-14)
    # comfortably away from extremality is fine
    BlackHole(1.0, 1.0 - 1e-6)


@given(holes)
def test_horizon_identities(bh):
    a2 = bh.a_squared
    gq2 = bh.newton_g * bh.charge**2
    assert a2 + gq2 == pytest.approx(bh.gm**2, rel=1e-14)
    r_plus, r_minus = st.horizons(bh)
    assert r_plus >= r_minus >= 0
    if bh.charge > 1e-100:
        assert r_minus > 0
    scale = 1.0 + 2 * bh.gm / r_plus + gq2 / r_plus**2
    assert abs(st.delta(bh, r_plus)) <= 1e-12 * scale
    if r_minus > 0:
        assert abs(st.delta(bh, r_minus)) <= 1e-12 * (1 + 2 * bh.gm / r_minus + gq2 / r_minus / r_minus)


# ---- delta ----------------------------------------------------------------

def test_delta_examples(schw, rn):
    assert st.delta(schw, 4.0) == 0.0
    assert abs(st.delta(rn, 2 + SQRT3)) < 1e-15
    exact = 1 - Fraction(4, 10) + Fraction(1, 100)
    assert st.delta(rn, 10.0) == pytest.approx(float(exact), abs=1e-16)


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_delta_rejects_non_positive_r(rn, r):
    with pytest.raises(DomainError):
        st.delta(rn, r)


def test_delta_vectorised(rn):
    r = np.array([5.0, 10.0, 20.0])
    np.testing.assert_allclose(st.delta(rn, r), 1 - 4 / r + 1 / r**2, rtol=1e-15)


# ---- horizons -------------------------------------------------------------

def test_horizons_examples(schw, rn):
    assert st.horizons(schw) == (4.0, 0.0)
    r_plus, r_minus = st.horizons(rn)
    # quadratic-root oracle on r^2 - 2GM r + GQ^2
    roots = sorted(mp.polyroots([1, -4, 1]), reverse=True)
    assert r_plus == pytest.approx(float(roots[0]), rel=1e-15)
    assert r_minus == pytest.approx(float(roots[1]), rel=1e-14)
    with pytest.raises(NotSubExtremal):
        st.horizons(BlackHole(1.0, 1.0))


# ---- potential ----------------------------------------------------------

def test_potential_examples(schw, rn):
    assert st.potential(rn, 1, rn.r_plus) == pytest.approx(0.0, abs=1e-15)
    exact = (1 - Fraction(4, 8)) * (Fraction(2, 64) + Fraction(4, 512))
    assert float(exact) == 0.01953125
    assert st.potential(schw, 1, 8.0) == pytest.approx(0.01953125, rel=1e-15)
    far = np.array([1e3, 1e4, 1e5])
    np.testing.assert_allclose(st.potential(rn, 1, far) * far**2, 2.0, rtol=5e-3)


def test_potential_rejects_interior(rn):
    with pytest.raises(DomainError):
        st.potential(rn, 1, rn.r_plus * 0.99)
    with pytest.raises(DomainError):
        st.potential(rn, -1, 10.0)


@given(st_.floats(1.0001, 1e4), st_.integers(0, 6), st_.floats(0.5, 5.0))
def test_q_zero_matches_regge_wheeler(x, l, gm):
    bh = BlackHole(gm)
    r = 2 * gm * x
    direct = (1 - 2 * gm / r) * (l * (l + 1) / r**2 + 2 * gm / r**3)
    assert st.potential(bh, l, r) == pytest.approx(direct, rel=1e-14)


def test_horizon_vanishing():
    for gm in (1.0, 2.0, 4.0):
        for frac in (0.0, 0.3, 0.7, 0.95):
            bh = BlackHole(gm, frac * gm)
            for l in range(4):
                _, v_max = st.potential_peak(bh, l)
                assert st.potential(bh, l, bh.r_plus * (1 + 1e-10)) < 1e-8 * v_max


@given(holes, st_.integers(0, 5), st_.floats(1e-6, 1e3))
def test_regular_integrand_identity(bh, l, x):
    r = bh.r_plus * (1 + x)
    v = st.potential(bh, l, r)
    assert st.potential_over_delta(bh, l, r) * st.delta(bh, r) == pytest.approx(v, rel=1e-12)


def test_potential_derivative_matches_difference(rn):
    for r in (4.0, 6.0, 20.0):
        h = 1e-5 * r
        fd = (st.potential(rn, 2, r + h) - st.potential(rn, 2, r - h)) / (2 * h)
        assert st.potential_derivative(rn, 2, r) == pytest.approx(fd, rel=1e-8)


# ---- potential_over_delta -------------------------------------------------

def test_potential_over_delta_at_horizon(rn):
    s = mp.sqrt(3)
    rp = 2 + s
    oracle = 2 / (7 + 4 * s) + (4 / (7 + 4 * s) - 2 / rp**3) / rp
    assert float(oracle) == pytest.approx(0.2102355330306, rel=1e-12)
    r_plus = rn.r_plus
    assert st.potential_over_delta(rn, 1, r_plus) == pytest.approx(float(oracle), rel=1e-14)
    # and it is the limit of V / Delta from outside
    r = r_plus * (1 + 1e-7)
    ratio = st.potential(rn, 1, r) / st.delta(rn, r)
    assert ratio == pytest.approx(float(oracle), rel=1e-6)


def test_potential_over_delta_examples(schw):
    assert st.potential_over_delta(schw, 0, 100.0) == pytest.approx(4e-6, rel=1e-14)
    assert st.potential_over_delta(schw, 0, 1e12) < 1e-30
    with pytest.raises(DomainError):
        st.potential_over_delta(schw, 0, 0.0)


# ---- tortoise ---------------------------------------------------------------

def test_tortoise_rn_example(rn):
    s = mp.sqrt(3)
    oracle = 10 + 2 * mp.log(61) + (7 / (2 * s)) * mp.log((8 - s) / (8 + s))
    assert float(oracle) == pytest.approx(17.332677969, abs=1e-9)
    assert st.tortoise(rn, 10.0) == pytest.approx(float(oracle), rel=1e-15)
    # cross-check the closed form against quadrature of 1/Delta
    diff = mp.quad(lambda r: 1 / mp_delta(2, 1, r), [10, 30])
    assert st.tortoise(rn, 30.0) - st.tortoise(rn, 10.0) == pytest.approx(float(diff), rel=1e-14)


def test_tortoise_schwarzschild_forms(schw):
    textbook = float(10 + 4 * mp.log(mp.mpf(3) / 2))
    assert textbook == pytest.approx(11.62186, abs=1e-5)
    assert st.schwarzschild_tortoise(schw, 10.0) == pytest.approx(textbook, rel=1e-15)
    r = np.geomspace(4.001, 4000.0, 50)
    shift = st.tortoise(schw, r) - st.schwarzschild_tortoise(schw, r)
    np.testing.assert_allclose(shift, 4 * math.log(4), rtol=1e-11)
    with pytest.raises(DomainError):
        st.schwarzschild_tortoise(BlackHole(2.0, 1.0), 10.0)


@pytest.mark.parametrize("bh", [BlackHole(2.0, 1.0), BlackHole(2.0), BlackHole(1.0, 1.0),
                                BlackHole(1.0, 1.5)], ids=["sub", "schw", "extremal", "super"])
def test_tortoise_derivative(bh):
    edge = st.outer_boundary(bh)
    scale = edge if edge > 0 else bh.gm
    for r in np.geomspace(1.01 * scale, 100 * scale, 60):
        h = 1e-5 * (r - edge)
        fd = (st.tortoise(bh, r + h) - st.tortoise(bh, r - h)) / (2 * h)
        assert fd * st.delta(bh, r) == pytest.approx(1.0, rel=1e-6)


@given(holes, st_.lists(st_.floats(1e-8, 1e4), min_size=2, max_size=20, unique=True))
def test_tortoise_monotone(bh, xs):
    r = bh.r_plus * (1 + np.sort(np.array(xs)))
    r = np.unique(r)
    assert np.all(np.diff(st.tortoise(bh, r)) > 0)


def test_tortoise_branches_and_domain():
    assert st.tortoise_branch(BlackHole(2.0, 1.0)) == "sub-extremal"
    assert st.tortoise_branch(BlackHole(1.0, 1.0)) == "extremal"
    assert st.tortoise_branch(BlackHole(1.0, 2.0)) == "super-extremal"
    with pytest.raises(DomainError):
        st.tortoise(BlackHole(2.0, 1.0), 3.0)
    with pytest.raises(DomainError):
        st.tortoise(BlackHole(1.0, 1.0), 1.0)
    # no horizon: defined for every r > 0
    assert math.isfinite(st.tortoise(BlackHole(1.0, 2.0), 0.01))


def test_tortoise_extremal_oracle():
    bh = BlackHole(1.0, 1.0)
    diff = mp.quad(lambda r: 1 / (1 - 1 / r) ** 2, [2, 7])
    assert st.tortoise(bh, 7.0) - st.tortoise(bh, 2.0) == pytest.approx(float(diff), rel=1e-14)


def test_tortoise_super_extremal_oracle():
    bh = BlackHole(1.0, 2.0)
    diff = mp.quad(lambda r: 1 / mp_delta(1, 4, r), [0.5, 9])
    assert st.tortoise(bh, 9.0) - st.tortoise(bh, 0.5) == pytest.approx(float(diff), rel=1e-13)


@settings(max_examples=40)
@given(holes, st_.floats(-200.0, 400.0))
def test_radius_from_tortoise_round_trip(bh, x):
    r_star = x * bh.gm
    closest = float(st.tortoise(bh, bh.r_plus * (1 + 1e-14)))
    if r_star < closest:
        # r - r_plus is below the resolution of a double
        with pytest.raises(DomainError):
            st.radius_from_tortoise(bh, r_star)
        return
    r = st.radius_from_tortoise(bh, r_star)
    assert r > bh.r_plus
    # one ulp in r moves r* by ulp / Delta
    floor = 4 * np.spacing(r) / st.delta(bh, r)
    assert st.tortoise(bh, r) == pytest.approx(r_star, abs=1e-9 * max(1.0, abs(r_star)) + floor)


# ---- Mode -----------------------------------------------------------------

@pytest.mark.parametrize("l, omega", [(-1, 1.0), (1.5, 1.0), (1, 0.0), (1, -1.0), (1, 1e-7), (1, math.inf)])
def test_mode_validation(l, omega):
    with pytest.raises(DomainError):
        Mode(l, omega)


# ---- sample_profile -------------------------------------------------------

def test_profile_invariants(rn):
    prof = st.sample_profile(rn, 1, rn.r_plus * (1 + 1e-6), 100.0, 200)
    assert len(prof) == 200
    assert np.all(np.diff(prof.r) > 0)
    assert np.all(prof.r > rn.r_plus)
    assert np.all(np.diff(prof.r_star) > 0)
    np.testing.assert_allclose(np.diff(prof.r_star), np.diff(prof.r_star).mean(), rtol=1e-6)
    assert np.all(prof.V >= 0)
    r, r_star, v = prof.samples[3]
    assert v == st.potential(rn, 1, r) and r_star == st.tortoise(rn, r)


def test_profile_two_points(rn):
    prof = st.sample_profile(rn, 1, 4.0, 10.0, 2)
    assert prof.r.tolist() == [4.0, 10.0]


@pytest.mark.parametrize("args", [(3.0, 10.0, 10), (10.0, 5.0, 10), (5.0, 10.0, 1), (5.0, math.inf, 10)])
def test_profile_rejects_bad_ranges(rn, args):
    with pytest.raises(DomainError):
        st.sample_profile(rn, 1, *args)


def test_peak_matches_dense_grid(schw):
    r = np.linspace(4.0001, 40.0, 400_001)
    v = st.potential(schw, 1, r)
    r_oracle = r[np.argmax(v)]
    prof = st.sample_profile(schw, 1, 4.0 * (1 + 1e-8), 100.0, 2000)
    r_pk, _ = prof.peak()
    assert r_pk == pytest.approx(r_oracle, rel=2e-3)
    r_fine, v_fine = st.potential_peak(schw, 1)
    assert r_fine == pytest.approx(r_oracle, abs=1e-3)
    assert 2.5 * 2 <= r_fine <= 3.5 * 2
    assert v_fine >= v.max()
    # large l approaches 3GM
    r_big, _ = st.potential_peak(schw, 40)
    assert r_big == pytest.approx(6.0, rel=1e-3)
