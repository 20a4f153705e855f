"""Derivatives, connections and curvature of metrics given in coordinates.

Every evaluator in this module is vectorised: points are arrays of shape
``(..., n)`` and results carry the same leading batch axes.  Derivative
axes are appended last, matching ``jax.jacfwd``: ``jacobian(f, x)[..., k]``
is the partial along coordinate ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SingularMetric, StepFailure, StepTooLarge

CENTRAL_FD = "central_fd"
FORWARD_AD = "forward_mode_ad"


@dataclass(frozen=True)
class DerivativeScheme:
    """How coordinate partials are estimated.

    Central differences use step ``h`` (times a per-axis scale when given),
    optionally improved by one Richardson level, which makes them fourth
    order.  ``guard`` bounds the relative disagreement between the h and h/2
    estimates before ``StepTooLarge`` is raised.
    """

    method: str = CENTRAL_FD
    h: float = 1e-3
    richardson: bool = True
    guard: float = 1e-2

    def __post_init__(self):
        if self.method not in (CENTRAL_FD, FORWARD_AD):
            raise ValueError(f"unknown derivative method {self.method!r}")
        if not self.h > 0:
            raise ValueError("step must be positive")


DEFAULT_SCHEME = DerivativeScheme()


def jacobian(f: Callable, x, scheme: DerivativeScheme = DEFAULT_SCHEME,
             axes: Optional[Sequence[int]] = None, scale=None) -> np.ndarray:
    """Central-difference partials of ``f`` at ``x``.

    Only coordinates in ``axes`` are differentiated; the partials along the
    others are returned as zero (for fields known not to depend on them).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    axes = range(n) if axes is None else axes
    h = scheme.h * (1.0 if scale is None else np.asarray(scale, dtype=float))
    h = np.broadcast_to(h, (n,))
    shifts = []
    for k in axes:
        e = np.zeros(n)
        e[k] = h[k]
        shifts += [e, -e, e / 2, -e / 2] if scheme.richardson else [e, -e]
    shifts = np.array(shifts).reshape((len(shifts),) + (1,) * (x.ndim - 1) + (n,))
    vals = np.asarray(f(x[None] + shifts))
    fshape = vals.shape[x.ndim:]
    out = np.zeros(x.shape[:-1] + fshape + (n,))
    per = 4 if scheme.richardson else 2
    for slot, k in enumerate(axes):
        v = vals[per * slot:per * slot + per]
        d1 = (v[0] - v[1]) / (2 * h[k])
        if scheme.richardson:
            d2 = (v[2] - v[3]) / h[k]
            d = (4 * d2 - d1) / 3
            gap = np.max(np.abs(d2 - d1))
            if gap > scheme.guard * (1.0 + np.max(np.abs(d))):
                raise StepTooLarge(f"Richardson estimates disagree by {gap:.3g} along axis {k}")
        else:
            d = d1
        out[..., k] = d
    return out


@lru_cache(maxsize=None)
def _jax():
    import jax

    jax.config.update("jax_enable_x64", True)
    return jax


def ad_jacobian(fj: Callable, x) -> np.ndarray:
    """Forward-mode jacobian of a jax-traceable single-point function."""
    _jax()  # switches on float64
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, x.shape[-1])
    jf = _compiled_jacfwd(fj)
    out = np.asarray(jf(flat))
    return out.reshape(x.shape[:-1] + out.shape[1:])


@lru_cache(maxsize=None)
def _compiled_jacfwd(fj):
    jax = _jax()
    return jax.jit(jax.vmap(jax.jacfwd(fj)))


@dataclass(frozen=True)
class MetricField:
    """A Riemannian metric on a chart.

    ``eval`` maps points (..., dim) to symmetric matrices (..., dim, dim).
    ``depends_on`` lists the coordinates the components actually vary with;
    derivatives along the others are skipped.  ``jax_eval``, when given, is a
    single-point jax-traceable version of ``eval`` used by forward-mode AD.
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None
    depends_on: Optional[tuple[int, ...]] = None
    jax_eval: Optional[Callable] = field(default=None, compare=False)

    def __call__(self, x) -> np.ndarray:
        return self.eval(np.asarray(x, dtype=float))


def check_positive(g: np.ndarray) -> np.ndarray:
    """Cholesky factor of ``g``; raises SingularMetric where g is not SPD."""
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("metric failed Cholesky factorisation") from exc


def metric_derivative(g: MetricField, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    """``dg[..., i, j, k] = d_k g_ij``."""
    if scheme.method == FORWARD_AD:
        if g.jax_eval is None:
            raise ValueError("forward-mode AD needs a jax-traceable metric evaluator")
        return ad_jacobian(g.jax_eval, x)
    return jacobian(g.eval, x, scheme, axes=g.depends_on)


def _christoffel_from(gx: np.ndarray, dg: np.ndarray) -> np.ndarray:
    ginv = np.linalg.inv(gx)
    # lower[l, j, k] = d_j g_lk + d_k g_lj - d_l g_jk
    lower = np.einsum("...lkj->...ljk", dg) + dg - np.einsum("...jkl->...ljk", dg)
    return 0.5 * np.einsum("...il,...ljk->...ijk", ginv, lower)


def christoffel(g: MetricField, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Levi-Civita symbols ``gamma[..., i, j, k] = Gamma^i_{jk}``."""
    x = np.asarray(x, dtype=float)
    gx = g(x)
    check_positive(gx)
    if scheme.method == FORWARD_AD:
        return ad_christoffel(g, x)
    return _christoffel_from(gx, metric_derivative(g, x, scheme))


def _jax_christoffel(gj):
    jax = _jax()
    jnp = jax.numpy

    def gamma(x):
        gx = gj(x)
        dg = jax.jacfwd(gj)(x)
        ginv = jnp.linalg.inv(gx)
        lower = jnp.einsum("lkj->ljk", dg) + dg - jnp.einsum("jkl->ljk", dg)
        return 0.5 * jnp.einsum("il,ljk->ijk", ginv, lower)

    return gamma


@lru_cache(maxsize=None)
def _ad_gamma(gj):
    return _jax_christoffel(gj)


def ad_christoffel(g: MetricField, x) -> np.ndarray:
    _jax()  # switches on float64
    fn = _ad_gamma(g.jax_eval)
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, g.dim)
    out = np.asarray(_compiled_vmap(fn)(flat))
    return out.reshape(x.shape[:-1] + out.shape[1:])


@lru_cache(maxsize=None)
def _compiled_vmap(fn):
    jax = _jax()
    return jax.jit(jax.vmap(fn))


class Curvature(NamedTuple):
    riemann: np.ndarray  # R^i_{jkl}
    ricci: np.ndarray  # R_{jl} = R^i_{jil}


def _riemann_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    # dgamma[..., i, j, k, m] = d_m Gamma^i_{jk}
    R = (np.einsum("...iljk->...ijkl", dgamma) - np.einsum("...ikjl->...ijkl", dgamma)
         + np.einsum("...ikm,...mlj->...ijkl", gamma, gamma)
         - np.einsum("...ilm,...mkj->...ijkl", gamma, gamma))
    return R


def riemann_ricci(g: MetricField, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> Curvature:
    """Riemann tensor R^i_{jkl} and Ricci tensor of ``g`` at ``x``.

    Finite differences nest: the Christoffel symbols are differenced again,
    so roughly two digits are lost per level relative to the step.
    """
    x = np.asarray(x, dtype=float)
    if scheme.method == FORWARD_AD:
        _jax()  # switches on float64
        fn = _ad_gamma(g.jax_eval)
        gamma = ad_christoffel(g, x)
        dgamma = ad_jacobian(fn, x)
    else:
        gamma = christoffel(g, x, scheme)
        dgamma = jacobian(lambda y: _christoffel_from(g(y), metric_derivative(g, y, scheme)),
                          x, scheme, axes=g.depends_on)
    R = _riemann_from(gamma, dgamma)
    return Curvature(R, np.einsum("...ijil->...jl", R))


def orthonormal_frame(gx: np.ndarray) -> np.ndarray:
    """Columns form a g-orthonormal frame, Gram-Schmidt in coordinate order."""
    L = check_positive(gx)
    return np.swapaxes(np.linalg.inv(L), -1, -2)


def frame_components(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    """All-lower tensor components in the frame whose vectors are E's columns."""
    p = T.ndim - E.ndim + 2
    from .forms import transform_full

    return transform_full(T, np.swapaxes(E, -1, -2), p)


def lower_riemann(gx: np.ndarray, R: np.ndarray) -> np.ndarray:
    return np.einsum("...im,...mjkl->...ijkl", gx, R)


def kretschmann(gx: np.ndarray, R: np.ndarray) -> np.ndarray:
    Rf = frame_components(lower_riemann(gx, R), orthonormal_frame(gx))
    return np.sum(Rf ** 2, axis=(-4, -3, -2, -1))


def product_grid(*axes) -> np.ndarray:
    """Cartesian product of 1-d coordinate samples as an (N, len(axes)) array."""
    mesh = np.meshgrid(*[np.asarray(a, dtype=float) for a in axes], indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def partials(f: Callable, x, order: int, scheme: DerivativeScheme = DEFAULT_SCHEME,
             axes: Optional[Sequence[int]] = None) -> np.ndarray:
    """All coordinate partials of the given order, by nested differencing.

    The result has ``order`` trailing derivative axes.
    """
    if order == 0:
        return np.asarray(f(np.asarray(x, dtype=float)))
    inner = (lambda y: partials(f, y, order - 1, scheme, axes))
    return jacobian(inner, x, scheme, axes=axes)


def grid_sup_norm(f: Callable, grid, order: int = 0, scheme: DerivativeScheme = DEFAULT_SCHEME,
                  axes: Optional[Sequence[int]] = None) -> float:
    """max over grid points and all order-i multi-indices of |d^i f|."""
    vals = partials(f, grid, order, scheme, axes)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def parallel_transport(gamma_fn: Callable[[np.ndarray], np.ndarray], path: Callable, velocity: Callable,
                       V0: np.ndarray, span=(0.0, 1.0), tol: float = 1e-8, method: str = "DOP853") -> np.ndarray:
    """Solve dV/ds = -Gamma(x(s))[xdot(s)] V along a prescribed curve.

    ``V0`` is a matrix whose columns are the transported vectors.
    """
    n = V0.shape[0]

    def rhs(s, y):
        V = y.reshape(n, -1)
        G = gamma_fn(path(s))
        A = np.einsum("ijk,j->ik", G, velocity(s))
        return (-A @ V).ravel()

    sol = solve_ivp(rhs, span, np.asarray(V0, dtype=float).ravel(), method=method,
                    rtol=tol, atol=tol)
    if not sol.success:
        raise StepFailure(sol.message)
    return sol.y[:, -1].reshape(n, -1)


_GL_A = np.array([[0.25, 0.25 - np.sqrt(3) / 6], [0.25 + np.sqrt(3) / 6, 0.25]])
_GL_C = np.array([0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6])


def gauss_legendre_linear(generator: Callable[[float], np.ndarray], C0: np.ndarray, span=(0.0, 1.0),
                          steps: int = 16) -> np.ndarray:
    """Fixed-step 2-stage Gauss-Legendre (order 4) for dC/ds = A(s) C.

    Gauss collocation preserves every quadratic invariant C^T Q C with
    A^T Q + Q A = 0, so a skew generator keeps C orthogonal to roundoff.
    """
    n = C0.shape[0]
    h = (span[1] - span[0]) / steps
    C = np.array(C0, dtype=float)
    eye = np.eye(2 * n)
    for i in range(steps):
        s = span[0] + i * h
        A1, A2 = generator(s + _GL_C[0] * h), generator(s + _GL_C[1] * h)
        big = eye - h * np.block([[_GL_A[0, 0] * A1, _GL_A[0, 1] * A1], [_GL_A[1, 0] * A2, _GL_A[1, 1] * A2]])
        K = np.linalg.solve(big, np.vstack([A1 @ C, A2 @ C]))
        C = C + 0.5 * h * (K[:n] + K[n:])
    return C


def refine_until(solve: Callable[[int], np.ndarray], tol: float, start: int = 8,
                 max_steps: int = 1 << 16) -> tuple[np.ndarray, int, float]:
    """Double the step count until successive solutions differ by at most ``tol``.

    For an order-4 method the accepted answer is then accurate to about tol/15.
    """
    steps = start
    prev = solve(steps)
    while steps < max_steps:
        steps *= 2
        cur = solve(steps)
        err = float(np.max(np.abs(cur - prev)))
        if err <= tol:
            return cur, steps, err
        prev = cur
    raise StepFailure(f"no convergence to {tol:g} within {max_steps} steps")


def all_multi_indices(n: int, order: int):
    return product(range(n), repeat=order)
