"""Gibbons-Hawking metrics, the link with M_{k,l}, and the three-centre limit."""
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specialkahler.calculus import DerivativeScheme
from specialkahler.chart_atlas import WeightPair
from specialkahler.errors import AtSource, CriticalPoint, NoSingleConstant, OnString, RegionTooSmall
from specialkahler.gibbons_hawking import (GH_ORIENTATION, GHConfig, LimitStudy, axis_gauge, axis_gauge_shift,
                                          curl, exterior_derivative, gh_consistency_checks, gh_kahler_form,
                                          gh_metric, grad_potential, hyperkahler_triple, laplacian,
                                          limit_coincidence_check, metric_difference_norms, monopole_form,
                                          potential, potential_difference_norms, pulled_back_triple, safe_points,
                                          special_to_gh, three_center, triple_gram, two_center,
                                          weyl_self_dual_norm)
from specialkahler.special_kahler import default_grid, kahler_form_array

PAIRS = [WeightPair(1, 1), WeightPair(1, 2), WeightPair(2, 3)]
FD = DerivativeScheme(h=1e-3)


@pytest.fixture(scope="module")
def cfg3():
    return three_center(0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        GHConfig(np.zeros((2, 3)), (1, 1))
    with pytest.raises(ValueError):
        GHConfig(np.zeros((1, 3)), (0,))
    with pytest.raises(ValueError):
        GHConfig(np.zeros((1, 3)), (1, 2))


def test_config_json_round_trip(cfg3):
    back = GHConfig.from_json(cfg3.to_json())
    np.testing.assert_array_equal(back.points, cfg3.points)
    np.testing.assert_array_equal(back.gauge, cfg3.gauge)
    assert back.multiplicities == cfg3.multiplicities
    assert set(json.loads(cfg3.to_json())) == {"sources", "gauge", "period"}


def test_single_source_fields_match_closed_forms():
    cfg = GHConfig(np.zeros((1, 3)), (2,))
    x = np.array([[0.3, -0.4, 1.2], [1.0, 2.0, -0.5]])
    r = np.linalg.norm(x, axis=-1)
    np.testing.assert_allclose(potential(cfg, x), 2 / r, rtol=1e-14)
    # string along -e3: w = m (cos T - 1) dP = m (y dx - x dy) / (r (r + z))
    expected = 2 * np.stack([x[:, 1], -x[:, 0], 0 * r], -1) / (r * (r + x[:, 2]))[:, None]
    np.testing.assert_allclose(monopole_form(cfg, x), expected, rtol=1e-13)


def test_singular_loci_raise():
    cfg = GHConfig(np.array([[-1.0, 0, 0], [1.0, 0, 0]]), (1, 1))
    with pytest.raises(AtSource):
        potential(cfg, np.array([1.0, 0, 0]))
    with pytest.raises(OnString):
        monopole_form(cfg, np.array([-1.0, 0, -0.5]))
    with pytest.raises(CriticalPoint):
        gh_kahler_form(cfg, np.array([0.0, 0, 0, 0]))


def test_monopole_equation_by_differencing(cfg3, rng):
    x = safe_points(cfg3, rng, 40, min_dist=0.3, min_angle=0.3)
    c = curl(lambda z: monopole_form(cfg3, z, check=False), x, FD)
    np.testing.assert_allclose(c, grad_potential(cfg3, x), atol=1e-7)
    assert np.max(np.abs(laplacian(lambda z: potential(cfg3, z, check=False), x, FD))) < 1e-5


@pytest.mark.parametrize("which", ["two", "three"])
def test_consistency_checks_pass(which, rng):
    cfg = two_center(WeightPair(1, 2)) if which == "two" else three_center(0.5)
    checks = gh_consistency_checks(cfg, rng, 300)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2))
def test_triple_is_orthogonal_with_equal_norms(a, b, c):
    cfg = three_center(0.5)
    y = np.array([[0.0, a, b, c]])
    G = triple_gram(cfg, y)[0]
    np.testing.assert_allclose(G, G[0, 0] * np.eye(3), rtol=1e-10, atol=1e-10)


def test_gauge_choice_changes_only_the_string(cfg3, rng):
    flipped = cfg3.with_gauge(-cfg3.gauge)
    x = safe_points(flipped, rng, 50, min_angle=0.3)
    x = x[np.all(np.einsum("nij,ij->ni", x[:, None] - cfg3.points, cfg3.gauge) < 0, axis=1)]
    d = lambda z: monopole_form(flipped, z, check=False) - monopole_form(cfg3, z, check=False)
    assert np.max(np.abs(curl(d, x, FD))) < 1e-6


def test_self_duality_fixes_orientation(cfg3):
    y = np.array([[0.0, 0.4, 0.7, 0.9], [0.0, -0.6, 0.3, 0.8]])
    g = gh_metric(cfg3)
    assert np.max(weyl_self_dual_norm(g, y, GH_ORIENTATION)) < 1e-6
    assert np.max(weyl_self_dual_norm(g, y, -GH_ORIENTATION)) > 1e-3


@pytest.mark.parametrize("kp", PAIRS, ids=str)
def test_limit_constant_is_total_strength(kp):
    c, checks = limit_coincidence_check(kp, default_grid(15), 1e-6)
    assert all(ch.passed for ch in checks)
    assert c == pytest.approx(kp.k + kp.l, rel=1e-12)


@pytest.mark.parametrize("kp", PAIRS[:2], ids=str)
def test_doubling_strengths_doubles_constant(kp):
    c, _ = limit_coincidence_check(kp, default_grid(8))
    c2, checks = limit_coincidence_check(kp, default_grid(8), cfg=two_center(kp, axis_gauge(kp)).scaled(2))
    assert all(ch.passed for ch in checks)
    assert c2 / c == pytest.approx(2.0, rel=1e-12)


def test_swapped_sources_have_no_single_constant():
    kp = WeightPair(1, 2)
    right = two_center(kp, axis_gauge(kp))
    swapped = GHConfig(right.points[::-1], right.multiplicities, right.gauge)
    with pytest.raises(NoSingleConstant):
        limit_coincidence_check(kp, default_grid(6), cfg=swapped)


@pytest.mark.parametrize("kp", PAIRS, ids=str)
def test_axis_member_pulls_back_to_kahler_form(kp):
    cfg = two_center(kp, axis_gauge(kp))
    x = default_grid(6)
    tri = pulled_back_triple(cfg, kp, x, axis_gauge_shift(cfg))
    np.testing.assert_allclose(tri[:, 0], (kp.k + kp.l) * kahler_form_array(x, kp.a), atol=1e-12)


def test_identification_map_is_the_stated_one():
    x = np.array([0.7, 1.1, 0.4, 0.2])
    y = special_to_gh(x, WeightPair(1, 2), gauge_shift=-1.0)
    ch, sh = np.cosh(0.7), np.sinh(0.7)
    np.testing.assert_allclose(y, [3 * 0.2 - 0.4, ch * np.cos(1.1), sh * np.sin(1.1) * np.cos(0.4),
                                   sh * np.sin(1.1) * np.sin(0.4)])


@pytest.mark.xfail(strict=True, reason="the level-set Kähler form built from grad U is not closed")
def test_level_set_kahler_form_is_closed():
    cfg = GHConfig(np.array([[-1.0, 0, 0], [1.0, 0, 0]]), (1, 1))
    y = np.array([[0.0, 0.3, 0.4, 0.7], [0.0, -0.2, 0.5, 0.9]])
    d = exterior_derivative(lambda z: gh_kahler_form(cfg, z), y, 4, 2, FD)
    assert np.max(np.abs(d)) < 1e-8


def test_triple_members_are_closed_by_differencing(cfg3):
    y = np.array([[0.0, 0.3, 0.4, 0.7], [0.0, -0.2, 0.5, 0.9]])
    for a in range(3):
        d = exterior_derivative(lambda z: hyperkahler_triple(cfg3, z, check=False)[..., a, :], y, 4, 2, FD)
        assert np.max(np.abs(d)) < 1e-8


def test_region_must_contain_sources():
    with pytest.raises(RegionTooSmall):
        LimitStudy(t_values=(0.3, 0.2, 0.1)).region()


@pytest.fixture(scope="module")
def potential_scan():
    return potential_difference_norms(LimitStudy(n=24), (0, 1, 2))


@pytest.mark.parametrize("order,slope", [(0, 3.9931), (1, 4.0611), (2, 4.1257)])
def test_potential_difference_is_order_t4(potential_scan, order, slope):
    _, fit = potential_scan[order]
    assert 3.8 <= fit.slope <= 4.2 and fit.residual <= 0.05
    assert fit.slope == pytest.approx(slope, abs=1e-3)


def test_metric_difference_is_order_t4():
    fit = metric_difference_norms(LimitStudy(n=24), (0,))[0][1]
    assert 3.8 <= fit.slope <= 4.2 and fit.residual <= 0.05
    assert fit.slope == pytest.approx(4.0280, abs=1e-3)
