"""The Ricci-flat Kähler metric on M_{k,l} in special coordinates.

Points are arrays (..., 4) in the order (rho, theta, psi, phi).  With
N = ch(rho) - a cos(theta) the metric reads

    N (d rho^2 + d theta^2) + sh^2(rho)/N (d psi + cos theta d phi)^2
                            + sin^2(theta)/N (a d psi + ch(rho) d phi)^2

and its Kähler form is

    sh(rho) d rho ^ (d psi + cos theta d phi) - sin(theta) d theta ^ (a d psi + ch(rho) d phi).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import forms
from .calculus import (DEFAULT_SCHEME, FORWARD_AD, DerivativeScheme, MetricField, _jax, ad_jacobian,
                       christoffel, frame_components, jacobian, kretschmann, orthonormal_frame,
                       gauss_legendre_linear, product_grid, refine_until, riemann_ricci)
from .chart_atlas import (ChartId, SpecialCoords, WeightPair, corner_generator, group_of, holomorphic_chart_array,
                          period_lattice, same_lattice, smooth_period_lattice, special_to_chart_array)
from .errors import DegeneratePoint, FitFailure
from .reports import Check, Report

RHO_MIN = 1e-6


def metric2_array(x, a: float, t: float = 1.0, xp=np) -> np.ndarray:
    rho, theta = x[..., 0], x[..., 1]
    ch, sh = xp.cosh(rho), xp.sinh(rho)
    c, s = xp.cos(theta), xp.sin(theta)
    N = ch - a * c
    A, B = sh ** 2 / N, s ** 2 / N
    zero = xp.zeros_like(rho)
    g_pp = A + a ** 2 * B
    g_pf = A * c + a * ch * B
    g_ff = A * c ** 2 + ch ** 2 * B
    rows = [[N, zero, zero, zero], [zero, N, zero, zero], [zero, zero, g_pp, g_pf], [zero, zero, g_pf, g_ff]]
    return t ** 2 * xp.stack([xp.stack(r, axis=-1) for r in rows], axis=-2)


def kahler_form_array(x, a: float, t: float = 1.0, xp=np) -> np.ndarray:
    """Coefficients on (rr th, rr ps, rr ph, th ps, th ph, ps ph) with rr=rho, th=theta."""
    rho, theta = x[..., 0], x[..., 1]
    sh, ch = xp.sinh(rho), xp.cosh(rho)
    c, s = xp.cos(theta), xp.sin(theta)
    zero = xp.zeros_like(rho)
    return t ** 2 * xp.stack([zero, sh, sh * c, -a * s, -ch * s, zero], axis=-1)


@lru_cache(maxsize=None)
def _jax_metric(a: float, t: float):
    jnp = _jax().numpy
    return lambda x: metric2_array(x, a, t, jnp)


@dataclass(frozen=True)
class MklMetric:
    """Metric (with homothety t) on M_{k,l} in special coordinates."""

    weights: WeightPair
    t: float = 1.0
    perturb: float = 0.0  # relative scaling of g_rho_rho, for negative controls

    @property
    def a(self) -> float:
        return self.weights.a

    def array(self, x, xp=np):
        g = metric2_array(x, self.a, self.t, xp)
        if self.perturb:
            bump = np.zeros((4, 4))
            bump[0, 0] = self.perturb
            g = g * (1.0 + bump)
        return g

    def field(self) -> MetricField:
        jev = _jax_metric(self.a, self.t) if not self.perturb else None
        return MetricField(4, self.array, domain=in_domain, depends_on=(0, 1), jax_eval=jev)

    def kahler(self, x) -> np.ndarray:
        return kahler_form_array(np.asarray(x, dtype=float), self.a, self.t)

    def chart_array(self, x, chart: ChartId, xp=np):
        return special_to_chart_array(x, self.weights, chart, xp)


def in_domain(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (x[..., 0] >= RHO_MIN) & (np.sin(x[..., 1]) > 0)


def metric2_eval(sc: SpecialCoords, kp: WeightPair, t: float = 1.0) -> np.ndarray:
    if sc.rho < RHO_MIN:
        if np.isclose(np.sin(sc.theta), 0.0):
            raise DegeneratePoint("rho = 0 on an axis is a singular point of M_{k,l}")
        raise DegeneratePoint(f"special coordinates need rho >= {RHO_MIN}; use a chart near the zero section")
    return metric2_array(sc.as_array(), kp.a, t)


def default_grid(n: int = 20, rho=(0.5, 2.0), theta=(0.5, 2.6)) -> np.ndarray:
    """n x n grid in (rho, theta); psi and phi are fixed at generic values."""
    return product_grid(np.linspace(*rho, n), np.linspace(*theta, n), [0.3], [0.7])


def ricci_frame(metric: MklMetric, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    g = metric.field()
    curv = riemann_ricci(g, x, scheme)
    return frame_components(curv.ricci, orthonormal_frame(g(x)))


def ricci_flat_check(kp: WeightPair, grid=None, tol: float = 1e-6, scheme: DerivativeScheme = DEFAULT_SCHEME,
                     perturb: float = 0.0) -> Check:
    grid = default_grid() if grid is None else grid
    ric = ricci_frame(MklMetric(kp, perturb=perturb), grid, scheme)
    return Check(f"max_abs_ricci_orthonormal[{kp.k},{kp.l}]", float(np.max(np.abs(ric))), tol)


def complex_structure(gx: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """J with omega(X, Y) = g(JX, Y); omega given by its 6 coefficients."""
    W = forms.to_full(omega, 4, 2)
    return -np.linalg.solve(gx, W)


def d_kahler(metric: MklMetric, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    jac = jacobian(metric.kahler, x, scheme)
    return forms.d_from_jacobian(jac, 4, 2)


def covariant_derivative_J(metric: MklMetric, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    """(nabla_k J)^i_j, shape (..., i, j, k)."""
    g = metric.field()

    def J(y):
        return complex_structure(g(y), metric.kahler(y))

    dJ = jacobian(J, x, scheme)
    G = christoffel(g, x, scheme)
    Jx = J(x)
    return dJ + np.einsum("...ikm,...mj->...ijk", G, Jx) - np.einsum("...mkj,...im->...ijk", G, Jx)


def kahler_check(kp: WeightPair, grid=None, tol: float = 1e-8, scheme: DerivativeScheme = DEFAULT_SCHEME,
                 parallel_tol: float = 1e-6) -> list[Check]:
    grid = default_grid() if grid is None else grid
    metric = MklMetric(kp)
    gx = metric.field()(grid)
    om = metric.kahler(grid)
    J = complex_structure(gx, om)
    eye = np.eye(4)
    top = forms.wedge(om, om, 4, 2, 2)[..., 0]
    gJ = gx @ J
    return [
        Check("sup_abs_d_omega", float(np.max(np.abs(d_kahler(metric, grid, scheme)))), tol),
        Check("max_norm_J2_plus_id", float(np.max(np.abs(J @ J + eye))), tol),
        Check("max_abs_gJ_symmetric_part", float(np.max(np.abs(gJ + np.swapaxes(gJ, -1, -2)))), 1e-10),
        Check("max_abs_nabla_J", float(np.max(np.abs(covariant_derivative_J(metric, grid, scheme)))), parallel_tol),
        Check("omega_wedge_omega_over_2vol_minus_one",
              float(np.max(np.abs(top / (2 * np.sqrt(np.linalg.det(gx))) - np.sign(top[0])))), tol),
    ]


# ----------------------------------------------------------------- holonomy

@dataclass(frozen=True)
class Loop:
    """A closed curve in special coordinates, interpolated by a periodic cubic spline."""

    samples: np.ndarray  # (m, 4), first sample repeated at the end

    @property
    def spline(self) -> CubicSpline:
        s = np.linspace(0.0, 1.0, len(self.samples))
        return CubicSpline(s, self.samples, bc_type="periodic")

    @classmethod
    def circle(cls, center, u, v, diameter: float, m: int = 64) -> "Loop":
        s = np.linspace(0.0, 2 * np.pi, m + 1)
        r = diameter / 2
        pts = np.asarray(center) + r * (np.cos(s)[:, None] * np.asarray(u) + np.sin(s)[:, None] * np.asarray(v))
        pts[-1] = pts[0]
        return cls(pts)


@dataclass(frozen=True)
class HolonomyElement:
    T: np.ndarray
    base: np.ndarray
    g: np.ndarray
    omega: np.ndarray

    @property
    def isometry_defect(self) -> float:
        return float(np.max(np.abs(self.T.T @ self.g @ self.T - self.g)))

    @property
    def kahler_defect(self) -> float:
        W = forms.to_full(self.omega, 4, 2)
        return float(np.max(np.abs(self.T.T @ W @ self.T - W)))

    def complex_matrix(self) -> np.ndarray:
        """T in a unitary basis (e1, Je1, e3, Je3) as a 2x2 complex matrix."""
        J = complex_structure(self.g, self.omega)
        E = adapted_basis(self.g, J)
        A = np.linalg.solve(E, self.T @ E)
        return np.array([[A[0, 0] + 1j * A[1, 0], A[0, 2] + 1j * A[1, 2]],
                         [A[2, 0] + 1j * A[3, 0], A[2, 2] + 1j * A[3, 2]]])

    @property
    def det_defect(self) -> float:
        return float(abs(np.linalg.det(self.complex_matrix()) - 1))

    @property
    def su2_defect(self) -> float:
        return max(self.isometry_defect, self.kahler_defect, self.det_defect)

    @property
    def rotation(self) -> float:
        """Distance of T from the identity; scales with the enclosed curvature."""
        return float(np.max(np.abs(self.T - np.eye(4))))


def adapted_basis(g: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Orthonormal columns e1, Je1, e3, Je3."""
    E = orthonormal_frame(g)
    e1 = E[:, 0]
    e2 = J @ e1
    rest = [E[:, j] - (E[:, j] @ g @ e1) * e1 - (E[:, j] @ g @ e2) * e2 for j in (1, 2, 3)]
    v = max(rest, key=lambda w: w @ g @ w)
    e3 = v / np.sqrt(v @ g @ v)
    return np.stack([e1, e2, e3, J @ e3], axis=1)


def _gamma_fn(metric: MklMetric, scheme: DerivativeScheme) -> Callable:
    if scheme.method == FORWARD_AD:
        from .calculus import _ad_gamma
        jax = _jax()
        fn = jax.jit(_ad_gamma(metric.field().jax_eval))
        return lambda x: np.asarray(fn(np.asarray(x, dtype=float)))
    g = metric.field()
    return lambda x: christoffel(g, x, scheme)


def _unitary_frame_xp(x, a: float, t: float, xp, pivot: int = 2):
    """Orthonormal frame (e1, J e1, e3, J e3) as matrix columns, traceable by jax.

    e3 comes from Cholesky column ``pivot``; see ``frame_pivot``.
    """
    g = metric2_array(x, a, t, xp)
    W = _full_two_form(kahler_form_array(x, a, t, xp), xp)
    J = -xp.linalg.solve(g, W)
    L = xp.linalg.cholesky(g)
    E = xp.linalg.inv(L).T
    e1 = E[:, 0]
    e2 = J @ e1
    c = E[:, pivot]
    v = c - (c @ g @ e1) * e1 - (c @ g @ e2) * e2
    e3 = v / xp.sqrt(v @ g @ v)
    return xp.stack([e1, e2, e3, J @ e3], axis=1)


def _full_two_form(c, xp):
    rows = [[0 * c[0], c[0], c[1], c[2]], [-c[0], 0 * c[0], c[3], c[4]],
            [-c[1], -c[3], 0 * c[0], c[5]], [-c[2], -c[4], -c[5], 0 * c[0]]]
    return xp.stack([xp.stack(r) for r in rows])


def frame_pivot(x, a: float, t: float = 1.0) -> int:
    """Cholesky column furthest from span(e1, J e1) at x.

    A fixed column can fall into that plane (it does for a = 0), so the
    choice is made once per path, at its start point.
    """
    x = np.asarray(x, dtype=float)
    g = metric2_array(x, a, t, np)
    J = -np.linalg.solve(g, _full_two_form(kahler_form_array(x, a, t, np), np))
    E = np.linalg.inv(np.linalg.cholesky(g)).T
    e1, e2 = E[:, 0], J @ E[:, 0]
    norms = [np.sqrt(max(0.0, E[:, j] @ g @ E[:, j] - (E[:, j] @ g @ e1) ** 2 - (E[:, j] @ g @ e2) ** 2))
             for j in (1, 2, 3)]
    return 1 + int(np.argmax(norms))


@lru_cache(maxsize=None)
def _frame_generator(a: float, t: float, pivot: int = 2):
    """Compiled map (x, xdot) -> transport generator in the unitary moving frame."""
    jax = _jax()
    jnp = jax.numpy
    gamma = _ad_gamma_cached(a, t)
    frame = lambda y: _unitary_frame_xp(y, a, t, jnp, pivot)

    def gen(x, xdot):
        E = frame(x)
        dE = jnp.einsum("ijk,k->ij", jax.jacfwd(frame)(x), xdot)
        A = jnp.einsum("ijk,j->ik", gamma(x), xdot)
        return -jnp.linalg.solve(E, A @ E + dE)

    return jax.jit(gen), jax.jit(frame)


@lru_cache(maxsize=None)
def _ad_gamma_cached(a: float, t: float):
    from .calculus import _ad_gamma
    return _ad_gamma(_jax_metric(a, t))


def transport_matrix(metric: MklMetric, path: Callable, velocity: Callable, ode_tol: float = 1e-8,
                     span=(0.0, 1.0)) -> tuple[np.ndarray, int]:
    """Parallel transport along a path, as a matrix on coordinate components.

    The transport equation is written in the moving frame (e1, J e1, e3, J e3),
    where its generator lies in u(2), and integrated with the order-4
    Gauss-Legendre method.  That method conserves g and omega exactly, so
    integration error shows up only in the rotation itself.  Step counts
    double until two successive answers differ by at most ``ode_tol``.
    Assumes the frames at both ends coincide (closed loops, or paths along
    the Killing directions psi and phi).
    """
    gen, frame = _frame_generator(metric.a, metric.t, frame_pivot(path(span[0]), metric.a, metric.t))

    def generator(s):
        return np.asarray(gen(np.asarray(path(s), dtype=float), np.asarray(velocity(s), dtype=float)))

    C, steps, _ = refine_until(lambda n: gauss_legendre_linear(generator, np.eye(4), span, n), ode_tol)
    E0 = np.asarray(frame(np.asarray(path(span[0]), dtype=float)))
    return E0 @ C @ np.linalg.inv(E0), steps


AD_SCHEME = DerivativeScheme(method=FORWARD_AD)


def parallel_transport(loop: Loop, kp: WeightPair, ode_tol: float = 1e-8) -> HolonomyElement:
    metric = MklMetric(kp)
    sp = loop.spline
    T, _ = transport_matrix(metric, sp, sp.derivative(), ode_tol)
    base = loop.samples[0]
    return HolonomyElement(T, base, metric.array(base), metric.kahler(base))


def random_loops(rng: np.random.Generator, count: int, diameter: float,
                 rho=(0.5, 2.0), theta=(0.5, 2.6)) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Centers and orthonormal plane directions for random circular loops."""
    out = []
    for _ in range(count):
        c = np.array([rng.uniform(*rho), rng.uniform(*theta), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)])
        q, _ = np.linalg.qr(rng.normal(size=(4, 2)))
        out.append((c, q[:, 0], q[:, 1]))
    return out


def contractible_loop_study(kp: WeightPair, count: int = 10, diameter: float = 0.2, ode_tol: float = 1e-8,
                            seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    rows = []
    for c, u, v in random_loops(rng, count, diameter):
        big = parallel_transport(Loop.circle(c, u, v, diameter), kp, ode_tol)
        small = parallel_transport(Loop.circle(c, u, v, diameter / 2), kp, ode_tol)
        rows.append({"center": c, "su2_defect": big.su2_defect, "su2_defect_half": small.su2_defect,
                     "rotation": big.rotation, "rotation_half": small.rotation,
                     "ratio": big.rotation / small.rotation})
    return {"loops": rows,
            "max_su2_defect": max(max(r["su2_defect"], r["su2_defect_half"]) for r in rows),
            "min_ratio": min(r["ratio"] for r in rows)}


def chart_jacobian(metric: MklMetric, x, chart: ChartId) -> np.ndarray:
    """Jacobian of the smooth holomorphic chart (Re u, Im u, Re v, Im v) at x."""
    return ad_jacobian(_chart_fn(metric.weights, chart), np.asarray(x, dtype=float))


@lru_cache(maxsize=None)
def _chart_fn(kp: WeightPair, chart: ChartId):
    jnp = _jax().numpy
    return lambda y: holomorphic_chart_array(y, kp, chart, jnp)


def _complex_to_real(m: np.ndarray) -> np.ndarray:
    """Real 4x4 form of a complex 2x2 matrix acting on (Re u, Im u, Re v, Im v)."""
    out = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            c = m[i, j]
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = [[c.real, -c.imag], [c.imag, c.real]]
    return out


def axis_holonomy(kp: WeightPair, rho: float = 0.005, theta: float = 0.005, psi: float = 0.0,
                  ode_tol: float = 1e-10, chart: ChartId = ChartId.Z) -> dict:
    """Holonomy of a short loop winding once around a cone point of M_{k,l}.

    The loop is the straight (psi, phi) segment along a period of the smooth
    lattice that generates the corner group; it is short because that period
    is a combination of Killing fields vanishing at the corner.  Since psi and
    phi are Killing directions, the transport matrix T in coordinate components
    is already the holonomy at the base point.  Written in the smooth
    uniformizing chart it should approach the inverse of the group element
    that the period induces on the chart.
    """
    metric = MklMetric(kp)
    if chart is ChartId.W:
        theta = np.pi - theta
    step = corner_generator(kp, chart)
    x0 = np.array([rho, theta, psi, 0.0])
    x1 = x0 + np.concatenate([[0.0, 0.0], step])
    knots = np.linspace(0.0, 1.0, 33)
    sp = CubicSpline(knots, x0 + knots[:, None] * (x1 - x0))
    T, _ = transport_matrix(metric, sp, sp.derivative(), ode_tol)
    D0 = chart_jacobian(metric, x0, chart)
    H = D0 @ T @ np.linalg.inv(D0)
    p0 = holomorphic_chart_array(x0, kp, chart)
    p1 = holomorphic_chart_array(x1, kp, chart)
    u0, u1 = complex(p0[0], p0[1]), complex(p1[0], p1[1])
    v0, v1 = complex(p0[2], p0[3]), complex(p1[2], p1[3])
    G = np.diag([u1 / u0, v1 / v0])
    Ginv = _complex_to_real(np.linalg.inv(G))
    return {"holonomy_chart": H, "group_element": G, "expected": Ginv,
            "group_order": group_of(chart, kp).order,
            "in_su2": float(abs(np.linalg.det(G) - 1)),
            "deviation": float(np.max(np.abs(H - Ginv))),
            "period": step}


def periods_report(kp: WeightPair) -> dict:
    """The chosen (psi, phi) periods, and how they relate to the printed chart maps."""
    smooth = smooth_period_lattice(kp)
    printed = period_lattice(kp, ChartId.Z)
    return {"smooth_generators_psi_phi": smooth.T,
            "printed_chart_generators_psi_phi": printed.T,
            "printed_charts_agree_with_each_other": same_lattice(printed, period_lattice(kp, ChartId.W)),
            "printed_charts_agree_with_smooth": same_lattice(printed, smooth)}


# ------------------------------------------------------------ Eguchi-Hanson

def eh_metric_coords(r, dr, theta, a_eh: float) -> np.ndarray:
    """Textbook Eguchi-Hanson metric pulled back along rho -> r(rho).

    (1 - a^4/r^4)^-1 dr^2 + r^2/4 (sigma_1^2 + sigma_2^2) + r^2/4 (1 - a^4/r^4) sigma_3^2
    with sigma_1^2 + sigma_2^2 = d theta^2 + sin^2 theta d phi^2 and sigma_3 = d psi + cos theta d phi.
    """
    f = 1 - a_eh ** 4 / r ** 4
    c, s = np.cos(theta), np.sin(theta)
    q = r ** 2 / 4
    g = np.zeros(np.shape(r) + (4, 4))
    g[..., 0, 0] = dr ** 2 / f
    g[..., 1, 1] = q
    g[..., 2, 2] = q * f
    g[..., 2, 3] = g[..., 3, 2] = q * f * c
    g[..., 3, 3] = q * (f * c ** 2 + s ** 2)
    return g


def eguchi_hanson_compare(grid=None, tol: float = 1e-6, scheme: DerivativeScheme = DEFAULT_SCHEME) -> tuple[dict, list[Check]]:
    """Match the a = 0 metric against Eguchi-Hanson after a radial reparametrization.

    The radius is read off the round part, r(rho) = 2 sqrt(g_theta_theta); the
    EH parameter comes from a least-squares fit of the fibre component.
    """
    grid = default_grid(15) if grid is None else grid
    metric = MklMetric(WeightPair(1, 1))
    g = metric.array(grid)
    rho_s = np.unique(grid[:, 0])

    def radius(rho):
        x = np.stack([rho, np.full_like(rho, 1.0), 0 * rho, 0 * rho], axis=-1)
        return 2 * np.sqrt(metric.array(x)[..., 1, 1])

    r = radius(grid[:, 0])
    dr = jacobian(lambda y: radius(y[..., 0])[..., None], grid[:, :1], scheme)[..., 0, 0]
    # fibre component: r^2/4 - a^4/(4 r^2) = g_psi_psi, least squares in a^4
    y = r ** 2 / 4 - g[:, 2, 2]
    a4 = float(np.linalg.lstsq((1 / (4 * r ** 2))[:, None], y, rcond=None)[0][0])
    if not a4 > 0:
        raise FitFailure("fitted Eguchi-Hanson parameter is not positive")
    a_eh = a4 ** 0.25
    rs = radius(rho_s)
    monotone = bool(np.all(np.diff(rs) > 0))
    if not monotone:
        raise FitFailure("radial reparametrization is not monotone")
    geh = eh_metric_coords(r, dr, grid[:, 1], a_eh)
    rel = float(np.max(np.abs(geh - g)) / np.max(np.abs(g)))
    info = {"a_eh": a_eh, "monotone": monotone, "r_range": [float(rs[0]), float(rs[-1])]}
    checks = [Check("eh_max_relative_deviation", rel, tol),
              Check("eh_reparametrization_monotone", monotone, True, "eq")]
    return info, checks


def sigma_frame_components(x, a: float) -> np.ndarray:
    """Metric components in the coframe (d rho, d theta, sin theta d phi, d psi + cos theta d phi)."""
    x = np.asarray(x, dtype=float)
    g = metric2_array(x, a)
    theta = x[..., 1]
    # coordinate differentials in terms of the coframe: columns are coordinate vectors dual to it
    E = np.zeros(theta.shape + (4, 4))
    E[..., 0, 0] = 1
    E[..., 1, 1] = 1
    E[..., 3, 2] = 1 / np.sin(theta)
    E[..., 2, 2] = -np.cos(theta) / np.sin(theta)
    E[..., 2, 3] = 1
    return np.einsum("...ia,...ij,...jb->...ab", E, g, E)


def cohomogeneity_spread(a: float, rho_values=(0.6, 1.0, 1.7), theta_values=None) -> float:
    """Largest theta-variation of the sigma-frame components at fixed rho, relative to their size."""
    theta_values = np.linspace(0.4, 2.7, 12) if theta_values is None else theta_values
    worst = 0.0
    for rho in rho_values:
        x = np.stack([np.full_like(theta_values, rho), theta_values, 0 * theta_values, 0 * theta_values], -1)
        comp = sigma_frame_components(x, a)
        worst = max(worst, float(np.max(np.ptp(comp, axis=0)) / np.max(np.abs(comp))))
    return worst


def eh_kretschmann(rho) -> np.ndarray:
    """Kretschmann scalar of the a = 0 metric, from 384 a^8 / r^12 with r^4 = 16 ch^2 rho, a = 2."""
    return 24.0 / np.cosh(rho) ** 6


def kretschmann_grid(metric: MklMetric, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    g = metric.field()
    return kretschmann(g(x), riemann_ricci(g, x, scheme).riemann)


def verify_ricci_report(kp: WeightPair, n: int = 20, tol: float = 1e-6,
                        scheme: DerivativeScheme = DEFAULT_SCHEME) -> Report:
    rep = Report("verify-ricci", {"k": kp.k, "l": kp.l, "grid": n, "tol": tol, "scheme": scheme.method,
                                  "h": scheme.h})
    rep.checks.append(ricci_flat_check(kp, default_grid(n), tol, scheme))
    neg = ricci_flat_check(kp, default_grid(max(4, n // 4)), tol, scheme, perturb=0.01)
    rep.add("perturbed_metric_max_abs_ricci", neg.value, 1e-3, "ge")
    return rep
