"""Derivatives, curvature and the slope fitter against closed-form oracles."""
import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from specialkahler.calculus import (FORWARD_AD, DerivativeScheme, MetricField, christoffel, gauss_legendre_linear,
                                    jacobian, kretschmann, orthonormal_frame, partials, product_grid,
                                    riemann_ricci)
from specialkahler.convergence import fit_loglog
from specialkahler.errors import FitFailure, StepTooLarge


def sphere(R=2.0):
    """Round 2-sphere of radius R in (theta, phi)."""
    def ev(x, xp=np):
        th = x[..., 0]
        z = xp.zeros_like(th)
        return xp.stack([xp.stack([R * R + z, z], -1), xp.stack([z, R * R * xp.sin(th) ** 2], -1)], -2)

    import jax.numpy as jnp
    return MetricField(2, ev, depends_on=(0,), jax_eval=lambda x: ev(x, jnp))


def hyperbolic3():
    """Upper half-space model, sectional curvature -1."""
    def ev(x, xp=np):
        z = x[..., 2]
        return (1 / z ** 2)[..., None, None] * xp.eye(3)

    import jax.numpy as jnp
    return MetricField(3, ev, depends_on=(2,), jax_eval=lambda x: ev(x, jnp))


@pytest.fixture(scope="module")
def sphere_pts():
    return product_grid(np.linspace(0.4, 2.7, 5), np.linspace(0, 6, 3))


def test_jacobian_of_polynomial_is_exact():
    f = lambda x: np.stack([x[..., 0] ** 3 * x[..., 1], x[..., 1] ** 2], -1)
    x = np.array([[0.7, -1.3]])
    J = jacobian(f, x)
    expected = np.array([[3 * 0.49 * -1.3, 0.343], [0.0, -2.6]])
    np.testing.assert_allclose(J[0], expected, atol=1e-10)


def test_jacobian_respects_axes():
    f = lambda x: np.sin(x)
    J = jacobian(f, np.array([0.2, 0.3, 0.4]), axes=(1,))
    assert J[0, 0] == 0.0 and J[1, 1] == pytest.approx(np.cos(0.3), abs=1e-10)


def test_step_guard_raises_on_jump():
    f = lambda x: np.sign(x[..., :1] - 1e-4)
    with pytest.raises(StepTooLarge):
        jacobian(f, np.array([0.0]), DerivativeScheme(h=1e-2, guard=1e-3))


def test_scheme_validates():
    with pytest.raises(ValueError):
        DerivativeScheme(method="spline")
    with pytest.raises(ValueError):
        DerivativeScheme(h=0.0)


def test_second_partials_are_symmetric():
    f = lambda x: np.exp(x[..., 0]) * np.cos(x[..., 1] * x[..., 2])
    H = partials(f, np.array([[0.1, 0.5, -0.3]]), 2)
    np.testing.assert_allclose(H, np.swapaxes(H, -1, -2), atol=1e-8)


def test_christoffel_matches_sympy(sphere_pts):
    th, ph, R = sp.symbols("theta phi R", positive=True)
    g = sp.diag(R ** 2, R ** 2 * sp.sin(th) ** 2)
    gi = g.inv()
    X = (th, ph)
    G = [[[sp.simplify(sum(gi[i, l] * (sp.diff(g[l, j], X[k]) + sp.diff(g[l, k], X[j]) - sp.diff(g[j, k], X[l]))
                           for l in range(2)) / 2) for k in range(2)] for j in range(2)] for i in range(2)]
    f = sp.lambdify((th, ph), sp.Array(G).subs(R, 2), "numpy")
    num = christoffel(sphere(), sphere_pts)
    for p, n in zip(sphere_pts, num):
        np.testing.assert_allclose(n, np.array(f(*p), dtype=float), atol=1e-8)


@pytest.mark.parametrize("method", ["central_fd", FORWARD_AD])
def test_sphere_curvature(method, sphere_pts):
    R = 2.0
    g = sphere(R)
    curv = riemann_ricci(g, sphere_pts, DerivativeScheme(method=method))
    np.testing.assert_allclose(curv.ricci, g(sphere_pts) / R ** 2, atol=1e-7)
    K = kretschmann(g(sphere_pts), curv.riemann)
    np.testing.assert_allclose(K, 4 / R ** 4, rtol=1e-7)


def test_hyperbolic_space_is_space_form():
    g = hyperbolic3()
    x = np.array([[0.1, -0.3, 0.8], [1.0, 2.0, 1.7]])
    curv = riemann_ricci(g, x)
    np.testing.assert_allclose(curv.ricci, -2 * g(x), atol=1e-6)
    np.testing.assert_allclose(kretschmann(g(x), curv.riemann), 12.0, rtol=1e-6)


def test_orthonormal_frame():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(3, 4, 4))
    g = B @ np.swapaxes(B, -1, -2) + np.eye(4)
    E = orthonormal_frame(g)
    np.testing.assert_allclose(np.swapaxes(E, -1, -2) @ g @ E, np.broadcast_to(np.eye(4), g.shape), atol=1e-12)


def test_gauss_legendre_keeps_rotations_orthogonal():
    gen = lambda s: np.array([[0.0, -1.0 - s], [1.0 + s, 0.0]])
    C = gauss_legendre_linear(gen, np.eye(2), steps=32)
    np.testing.assert_allclose(C.T @ C, np.eye(2), atol=1e-13)
    angle = 1.5  # integral of (1 + s) over [0, 1]
    np.testing.assert_allclose(C, [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]], atol=1e-6)


@given(st.floats(0.5, 6.0), st.floats(0.01, 100.0))
def test_fit_recovers_exact_power(p, c):
    t = np.array([0.1, 0.05, 0.025])
    fit = fit_loglog(t, c * t ** p)
    assert fit.slope == pytest.approx(p, abs=1e-9)
    assert fit.residual < 1e-9
    np.testing.assert_allclose(fit.predict(t), c * t ** p, rtol=1e-9)


def test_fit_rejects_bad_data():
    with pytest.raises(FitFailure):
        fit_loglog([0.1], [1.0])
    with pytest.raises(FitFailure):
        fit_loglog([0.1, 0.05], [1.0, 0.0])
