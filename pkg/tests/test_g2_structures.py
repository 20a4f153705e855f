"""G2 linear algebra and torsion of the glued 3-form."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specialkahler import forms
from specialkahler.calculus import DerivativeScheme
from specialkahler.errors import NotPositive
from specialkahler.g2_structures import (blended_torsion_scan, build_phi_t, closedness, codifferential_gap,
                                         flat_triple_standard, g2_algebra_basis, g2_slots, gh_phi_field,
                                         glued_phi_field, hypothesis_check, lift7, metric_from_phi, phi0,
                                         pullback, random_g2_element, stabilizer_dimension, star_phi0, theta,
                                         torsion_psi)
from specialkahler.gibbons_hawking import hyperkahler_triple, three_center
from specialkahler.kummer_gluing import GluedModel, GluingSchedule, blend_region

N = 7
LOOSE = DerivativeScheme(h=1e-3, guard=1e9)


def test_phi0_terms():
    p = phi0()
    nonzero = {forms.multi_indices(N, 3)[i]: v for i, v in enumerate(p) if v}
    assert nonzero == {(0, 1, 6): 1, (0, 2, 5): 1, (0, 3, 4): 1, (1, 2, 4): 1, (1, 3, 5): -1, (2, 3, 6): 1,
                       (4, 5, 6): 1}


def test_star_phi0_is_euclidean_hodge_dual():
    np.testing.assert_array_equal(forms.hodge_star(phi0(), np.eye(N), N, 3), star_phi0())
    assert star_phi0()[forms.index_of(N, 4)[(0, 2, 4, 6)]] == -1


def test_metric_and_theta_of_phi0():
    assert np.max(np.abs(metric_from_phi(phi0()) - np.eye(N))) < 1e-12
    np.testing.assert_array_equal(theta(phi0()), star_phi0())
    assert forms.wedge(phi0(), star_phi0(), N, 3, 4)[0] == 7.0


def test_stabilizer_is_fourteen_dimensional():
    assert stabilizer_dimension() == 14
    B = g2_algebra_basis()
    assert B.shape == (14, N, N)
    np.testing.assert_allclose(B, -np.swapaxes(B, -1, -2), atol=1e-14)


def test_g2_elements_preserve_phi0():
    A = random_g2_element(np.random.default_rng(0))
    np.testing.assert_allclose(A.T @ A, np.eye(N), atol=1e-12)
    np.testing.assert_allclose(pullback(phi0(), A, 3), phi0(), atol=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.5, 3.0))
def test_metric_and_theta_are_equivariant(seed, s):
    rng = np.random.default_rng(seed)
    A = s * (np.eye(N) + 0.2 * rng.normal(size=(N, N)))
    if np.linalg.det(A) <= 0:
        A[:, 0] *= -1
    phi = pullback(phi0(), A, 3)
    np.testing.assert_allclose(metric_from_phi(phi), A.T @ A, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(theta(phi), pullback(star_phi0(), A, 4), rtol=1e-9, atol=1e-9)


def test_theta_is_homogeneous_of_degree_four_thirds():
    np.testing.assert_allclose(theta(8 * phi0()), 16 * star_phi0(), atol=1e-12)


def test_negative_orbit_is_rejected():
    with pytest.raises(NotPositive):
        metric_from_phi(-phi0())


def test_flat_triple_reproduces_phi0():
    phi, v = build_phi_t(flat_triple_standard())
    np.testing.assert_allclose(phi, phi0(), atol=1e-15)
    np.testing.assert_allclose(v, star_phi0(), atol=1e-15)
    rep = torsion_psi(phi[None], v[None])
    assert rep.sup_norm <= 1e-10 and rep.l2_norm <= 1e-10


def test_hyperkahler_triple_is_torsion_free():
    y = lift7(blend_region(GluingSchedule(), 4))
    phi, v = gh_phi_field(three_center(0.05))(y)
    assert torsion_psi(phi, v).sup_norm < 1e-10


def test_slot_assignment_matches_flat_triple():
    """The flat Gibbons-Hawking triple at a point where U = 1 gives back the standard one."""
    cfg = three_center(1e-8)
    y = np.array([[0.0, 0.0, 0.0, 3.0]])  # U = 3/|x| = 1, w = 0 on the positive x3 axis
    np.testing.assert_allclose(g2_slots(hyperkahler_triple(cfg, y))[0], flat_triple_standard(), atol=1e-12)


def test_glued_structure_closedness_and_codifferential():
    model = GluedModel(GluingSchedule(t=0.1))
    y = lift7(blend_region(model.schedule, 3, margin=0.05))
    field = glued_phi_field(model)
    dphi, dv = closedness(field, y, LOOSE)
    assert dphi < 1e-5 and dv < 1e-5
    gap = codifferential_gap(field, y, LOOSE)
    assert gap["max_abs_gap"] < 1e-6


def test_blended_torsion_is_order_t4():
    res = blended_torsion_scan()
    assert 3.7 <= res["sup_fit"].slope <= 4.3
    assert 3.7 <= res["l2_fit"].slope <= 4.3
    assert res["sup_fit"].slope == pytest.approx(4.0033, abs=1e-3)
    norms = [r.sup_norm for r in res["reports"]]
    assert norms == sorted(norms, reverse=True)


def test_hypothesis_numerics():
    hyp = hypothesis_check().hypotheses
    assert hyp["B_ii"] == "NOT CHECKED"
    assert hyp["B_iii"] and hyp["B_iv"] and hyp["B_v"]
    assert hyp["curvature_spread"] < 1e-6
    assert np.mean(hyp["curvature_times_t2"]) == pytest.approx(2.075, abs=5e-3)
