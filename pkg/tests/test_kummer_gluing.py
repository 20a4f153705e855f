"""Orbifold tori, fixed points, moduli counts and the glued hyperkähler triple."""
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specialkahler import forms
from specialkahler.calculus import DerivativeScheme
from specialkahler.chart_atlas import WeightPair
from specialkahler.errors import BadPrimitive, NotInvariant, NotIsolated, WeightMismatch
from specialkahler.gibbons_hawking import hyperkahler_triple
from specialkahler.kummer_gluing import (GAMMA, SIGMA, GluedModel, GluingScan, GluingSchedule, LatticeTorus,
                                         TorusAutomorphism, admissible_orders, blend_region, exterior_d1,
                                         fixed_point_coordinates, fixed_points, flat_primitive, flat_triple,
                                         gluing_scan, homotopy_primitive, local_model_check, moduli_dimensions,
                                         orders_by_search, per_point_gluing, primitive_on_annulus,
                                         random_z3_torus, resolution_ledger, singular_count, smoothstep5,
                                         smoothstep5_prime, z3_family_moduli)

FD = DerivativeScheme(h=1e-3)


def brute_fixed(action, torus, denom):
    """Oracle: scan the grid (1/denom) Z^4 in [0, 1)^4 for points fixed modulo the lattice."""
    out = set()
    for c in product(range(denom), repeat=4):
        z = torus.point(np.array(c, dtype=float) / denom)
        if torus.contains(action.apply(z) - z, tol=1e-8):
            out.add(tuple(Fraction(v, denom) for v in c))
    return out


def test_sigma_fixed_points_are_half_periods():
    pts = fixed_point_coordinates(SIGMA, LatticeTorus.square())
    assert len(pts) == 16
    assert set(pts) == set(product((Fraction(0), Fraction(1, 2)), repeat=4))


def test_gamma_fixed_points_match_brute_force():
    torus = LatticeTorus.z3_family()
    pts = set(fixed_point_coordinates(GAMMA, torus))
    assert pts == brute_fixed(GAMMA, torus, 3)
    assert len(pts) == 9


def test_gamma_fixed_points_on_random_lattices():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        torus = random_z3_torus(rng)
        pts = fixed_points(GAMMA, torus)
        assert len(pts) == 9
        for z in pts:
            assert torus.contains(GAMMA.apply(z) - z, tol=1e-9)


@pytest.mark.parametrize("action,count", [(SIGMA, 16), (GAMMA, 9)])
def test_fixed_point_count_is_lefschetz_number(action, count):
    assert round(np.linalg.det(np.eye(4) - action.real_matrix)) == count


def test_lattice_invariance_is_enforced():
    with pytest.raises(NotInvariant):
        GAMMA.lattice_matrix(LatticeTorus.square())
    with pytest.raises(NotIsolated):
        fixed_points(TorusAutomorphism(1), LatticeTorus.square())


def test_lattice_matrix_has_the_right_order():
    M = GAMMA.lattice_matrix(LatticeTorus.z3_family())
    assert np.array_equal(np.linalg.matrix_power(M, 3), np.eye(4, dtype=np.int64))
    assert not np.array_equal(M, np.eye(4, dtype=np.int64))


def test_torus_json_round_trip():
    t = random_z3_torus(np.random.default_rng(0))
    np.testing.assert_allclose(LatticeTorus.from_json(t.to_json()).basis, t.basis)


def test_admissible_orders():
    assert admissible_orders(12) == {3, 4, 6}
    assert orders_by_search(12) == {3, 4, 6}


def test_local_model_ledger():
    assert local_model_check(3, WeightPair(1, 2)) == {2: 1}
    assert local_model_check(2, WeightPair(1, 1)) == {}
    with pytest.raises(WeightMismatch):
        local_model_check(4, WeightPair(1, 2))


def test_resolution_reaches_zero_in_two_stages():
    ledger = resolution_ledger()
    assert [singular_count(ledger, s) for s in range(3)] == [9, 9, 0]
    assert {(e.order, e.count) for e in ledger if e.stage == 1} == {(2, 9)}


def test_moduli_totals():
    counts = {m.route: m for m in moduli_dimensions()}
    assert counts["page"].total == 10 + 16 * 3 == 58
    assert counts["z3"].total == 4 + 9 * 3 + 9 * 3 == 58
    assert z3_family_moduli() == 4
    assert per_point_gluing("Z2") == (2, 1) and per_point_gluing("Z3") == (2, 1)
    with pytest.raises(ValueError):
        per_point_gluing("Z5")


@given(st.floats(-0.5, 1.5))
def test_smoothstep_is_monotone_and_clamped(q):
    v = smoothstep5(q)
    assert 0.0 <= v <= 1.0
    if q <= 0:
        assert v == 0.0
    if q >= 1:
        assert v == 1.0


def test_smoothstep_derivative_and_c2_seams():
    q = np.linspace(0.05, 0.95, 7)
    h = 1e-6
    np.testing.assert_allclose(smoothstep5_prime(q), (smoothstep5(q + h) - smoothstep5(q - h)) / (2 * h), atol=1e-8)
    # second derivative 60 q (1 - q)(1 - 2 q) vanishes at both ends
    for end in (0.0, 1.0):
        second = (smoothstep5_prime(end + 1e-7 if end == 0 else end - 1e-7)) / 1e-7
        assert abs(second) < 1e-4


def test_schedule_validation():
    with pytest.raises(ValueError):
        GluingSchedule(delta=0.6)
    with pytest.raises(ValueError):
        GluingSchedule(t=0.0)


def test_cutoff_profile():
    s = GluingSchedule()
    assert s.u(0.3) == 0.0 and s.u(0.55) == 1.0
    assert 0 < s.u(5 / 12) < 1


def test_flat_primitive_is_exact():
    y = blend_region(GluingSchedule(), 4, margin=0.05)
    for i in range(3):
        d = exterior_d1(lambda z: flat_primitive(z)[..., i, :], y, 4, FD)
        np.testing.assert_allclose(d, flat_triple(y)[..., i, :], atol=1e-8)


def test_decay_primitive_of_the_difference():
    model = GluedModel(GluingSchedule(t=0.1))
    y = blend_region(model.schedule, 3, margin=0.05)
    res = primitive_on_annulus(lambda z: model.difference(z)[..., 0, :], y)
    assert res.residual < 1e-6 and res.closedness < 1e-8


def test_cone_primitive_of_a_constant_form():
    c = np.array([0.5, -1.0, 2.0, 0.3, 1.5, -0.7])
    form = lambda z: np.broadcast_to(c, z.shape[:-1] + (6,))
    y = np.random.default_rng(3).uniform(-1, 1, size=(6, 4))
    res = primitive_on_annulus(form, y, scaled=(0, 1, 2, 3), mode="cone")
    assert res.residual < 1e-10
    # i_E of a constant form, integrated against s ds: half the contraction
    eta = res.eta(y)
    np.testing.assert_allclose(eta, 0.5 * np.stack([forms.interior(v, c, 4, 2) for v in y]), atol=1e-12)


def test_primitive_rejects_non_closed_input():
    y = blend_region(GluingSchedule(), 3, margin=0.05)
    bad = lambda z: np.stack([z[..., 1] * 0, z[..., 1] ** 2, z[..., 0] * 0 + z[..., 2], 0 * z[..., 0],
                              z[..., 3], 0 * z[..., 0]], -1)
    with pytest.raises(BadPrimitive):
        primitive_on_annulus(bad, y)
    with pytest.raises(ValueError):
        homotopy_primitive(bad, y, 4, (1, 2, 3), mode="spiral")


def test_glued_triple_equals_d_of_blended_primitive():
    model = GluedModel(GluingSchedule(t=0.1))
    y = blend_region(model.schedule, 4, margin=0.05)
    np.testing.assert_allclose(model.omega(y), model.omega_by_differencing(y, FD), atol=1e-8)


def test_glued_triple_matches_pieces_outside_the_annulus():
    model = GluedModel(GluingSchedule(t=0.1))
    outer = np.array([[0.0, 0.2, 0.3, 0.5]])  # sqrt|x| > 1/2
    inner = np.array([[0.0, 0.02, 0.03, 0.05]])  # sqrt|x| < 1/3
    np.testing.assert_allclose(model.omega(outer), flat_triple(outer), atol=1e-14)
    np.testing.assert_allclose(model.omega(inner), hyperkahler_triple(model.config, inner), atol=1e-12)


@pytest.fixture(scope="module")
def scan():
    return gluing_scan(GluingScan(n=16))


@pytest.mark.parametrize("i,slope", [(0, 3.9981), (1, 3.9981), (2, 4.0129)])
def test_glued_triple_difference_is_order_t4(scan, i, slope):
    fit = scan["fits"][i]
    assert 3.8 <= fit.slope <= 4.2 and fit.residual <= 0.05
    assert fit.slope == pytest.approx(slope, abs=1e-3)
