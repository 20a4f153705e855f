"""The Ricci-flat metric on M_{k,l}: Ricci-flatness, Kähler structure, holonomy, Eguchi-Hanson limit."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specialkahler.calculus import FORWARD_AD, DerivativeScheme
from specialkahler.chart_atlas import ChartId, SpecialCoords, WeightPair
from specialkahler.errors import DegeneratePoint
from specialkahler.special_kahler import (Loop, MklMetric, axis_holonomy, cohomogeneity_spread, complex_structure,
                                          contractible_loop_study, default_grid, eguchi_hanson_compare,
                                          eh_kretschmann, kahler_check, kretschmann_grid, metric2_eval,
                                          parallel_transport, periods_report, ricci_flat_check, verify_ricci_report)

PAIRS = [WeightPair(1, 1), WeightPair(1, 2), WeightPair(2, 3)]


@pytest.mark.parametrize("kp", PAIRS, ids=str)
def test_ricci_flat_on_standard_grid(kp):
    rep = verify_ricci_report(kp, 20, 1e-6)
    assert rep.passed, rep.checks


@pytest.mark.parametrize("kp", PAIRS[1:], ids=str)
def test_ricci_flat_with_forward_ad(kp):
    c = ricci_flat_check(kp, default_grid(6), 1e-9, DerivativeScheme(method=FORWARD_AD))
    assert c.passed, c


def test_perturbed_metric_is_not_ricci_flat():
    c = ricci_flat_check(WeightPair(1, 2), default_grid(5), perturb=0.01)
    assert c.value > 1e-3


@pytest.mark.parametrize("kp", PAIRS, ids=str)
def test_kahler_structure(kp):
    checks = kahler_check(kp, default_grid(20), 1e-8)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


@given(st.floats(0.3, 2.5), st.floats(0.2, 2.9), st.sampled_from(PAIRS))
def test_complex_structure_is_orthogonal(rho, theta, kp):
    m = MklMetric(kp)
    x = np.array([rho, theta, 0.1, 0.2])
    g = m.array(x)
    J = complex_structure(g, m.kahler(x))
    np.testing.assert_allclose(J @ J, -np.eye(4), atol=1e-10)
    np.testing.assert_allclose(J.T @ g @ J, g, atol=1e-10)


@given(st.floats(0.3, 2.5), st.floats(0.2, 2.9))
def test_metric_is_positive_definite(rho, theta):
    for kp in PAIRS:
        g = metric2_eval(SpecialCoords(rho=rho, theta=theta, phi=0.0, psi=0.0), kp)
        assert np.all(np.linalg.eigvalsh(g) > 0)


def test_special_coordinates_reject_zero_section():
    with pytest.raises(DegeneratePoint):
        metric2_eval(SpecialCoords(rho=0.0, theta=1.0, phi=0.0, psi=0.0), WeightPair(1, 2))


def test_homothety_scales_metric():
    x = default_grid(3)
    np.testing.assert_allclose(MklMetric(WeightPair(1, 2), t=0.5).array(x), 0.25 * MklMetric(WeightPair(1, 2)).array(x))


def test_eguchi_hanson_limit():
    info, checks = eguchi_hanson_compare(tol=1e-6)
    assert all(c.passed for c in checks)
    assert info["a_eh"] > 0


def test_eguchi_hanson_kretschmann_oracle():
    """The k = l = 1 curvature invariant against the closed form 384 a^8 / r^12."""
    x = default_grid(6)
    K = kretschmann_grid(MklMetric(WeightPair(1, 1)), x)
    np.testing.assert_allclose(K, eh_kretschmann(x[:, 0]), rtol=1e-6)


def test_only_a_zero_has_extra_symmetry():
    assert cohomogeneity_spread(0.0) < 1e-12
    assert cohomogeneity_spread(WeightPair(1, 2).a) > 0.1


def test_period_lattices():
    assert periods_report(WeightPair(1, 1))["printed_charts_agree_with_smooth"]
    assert not periods_report(WeightPair(2, 3))["printed_charts_agree_with_smooth"]


def test_contractible_loops_have_su2_holonomy():
    study = contractible_loop_study(WeightPair(2, 3), count=3, seed=7)
    assert study["max_su2_defect"] <= 1e-4
    assert study["min_ratio"] >= 3.0


@pytest.mark.parametrize("chart,order", [(ChartId.Z, 2), (ChartId.W, 3)])
def test_axis_holonomy_matches_group_generator(chart, order):
    res = axis_holonomy(WeightPair(2, 3), chart=chart)
    assert res["group_order"] == order
    assert res["deviation"] < 1e-3
    assert res["in_su2"] < 1e-10
    G = res["group_element"]
    np.testing.assert_allclose(np.linalg.matrix_power(G, order), np.eye(2), atol=1e-8)


def test_loops_on_eguchi_hanson_need_a_pivoted_frame():
    """For a = 0 a fixed Gram-Schmidt column can fall into span(e1, J e1)."""
    study = contractible_loop_study(WeightPair(1, 1), count=2, seed=0)
    assert study["max_su2_defect"] <= 1e-4
    assert study["min_ratio"] >= 3.0


@pytest.mark.parametrize("ode_tol", [1e-6, 1e-8])
def test_transport_preserves_metric_to_ode_tolerance(ode_tol):
    c = np.array([1.2, 1.4, 0.3, 0.8])
    u, v = np.eye(4)[0], (np.eye(4)[1] + np.eye(4)[3]) / np.sqrt(2)
    T = parallel_transport(Loop.circle(c, u, v, 0.3), WeightPair(1, 2), ode_tol)
    assert T.isometry_defect <= 10 * ode_tol
    assert T.kahler_defect <= 10 * ode_tol
