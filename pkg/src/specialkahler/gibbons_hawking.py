"""Gibbons-Hawking multi-instantons.

The metric lives on (R^3 minus sources and strings) x S^1 with coordinates
ordered (tau, x1, x2, x3):

    ds^2 = (d tau + w . dx)^2 / U + U dx . dx,    U = sum m_i / |x - x_i|,

where rot w = grad U.  The closed hyperkähler triple is

    omega_a = dx_a ^ (d tau + w . dx) + U dx_b ^ dx_c    (a, b, c cyclic),

and is self-dual for the orientation (x1, x2, x3, tau).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import forms
from .calculus import (DEFAULT_SCHEME, DerivativeScheme, MetricField, _jax, ad_jacobian, frame_components,
                       jacobian, lower_riemann, orthonormal_frame, partials, riemann_ricci)
from .chart_atlas import SpecialCoords, WeightPair
from .convergence import fit_loglog
from .errors import AtSource, CriticalPoint, NoSingleConstant, OnString, RegionTooSmall
from .reports import Check

SOURCE_TOL = 1e-12
STRING_TOL = 1e-6  # radians
DEFAULT_PERIOD = 4 * np.pi
# coordinate order (tau, x1, x2, x3) is negatively oriented relative to (x1, x2, x3, tau)
GH_ORIENTATION = -1


@dataclass(frozen=True)
class GHConfig:
    """Point sources with integer weights, and one Dirac-string direction per source."""

    points: np.ndarray
    multiplicities: tuple[int, ...]
    gauge: Optional[np.ndarray] = None
    period: float = DEFAULT_PERIOD

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        m = tuple(int(v) for v in self.multiplicities)
        if len(m) != len(pts):
            raise ValueError("one multiplicity per source")
        if any(v < 1 for v in m):
            raise ValueError("multiplicities must be positive integers")
        object.__setattr__(self, "multiplicities", m)
        for i in range(len(pts)):
            for j in range(i):
                if np.linalg.norm(pts[i] - pts[j]) == 0:
                    raise ValueError("sources must be pairwise distinct")
        if self.gauge is None:
            gauge = np.tile([0.0, 0.0, -1.0], (len(pts), 1))
        else:
            gauge = np.atleast_2d(np.asarray(self.gauge, dtype=float))
            gauge = gauge / np.linalg.norm(gauge, axis=1, keepdims=True)
        object.__setattr__(self, "gauge", gauge)
        if not self.period > 0:
            raise ValueError("fibre period must be positive")

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.multiplicities, dtype=float)

    def with_gauge(self, gauge) -> "GHConfig":
        return GHConfig(self.points, self.multiplicities, gauge, self.period)

    def scaled(self, factor: int) -> "GHConfig":
        return GHConfig(self.points, tuple(factor * m for m in self.multiplicities), self.gauge, self.period)

    def to_json(self) -> str:
        return json.dumps({"sources": [{"x": p.tolist(), "m": m} for p, m in zip(self.points, self.multiplicities)],
                           "gauge": self.gauge.tolist(), "period": self.period})

    @classmethod
    def from_json(cls, text: str) -> "GHConfig":
        d = json.loads(text)
        return cls(np.array([s["x"] for s in d["sources"]]), tuple(s["m"] for s in d["sources"]),
                   d.get("gauge"), d.get("period", DEFAULT_PERIOD))


def two_center(kp: WeightPair, gauge=None) -> GHConfig:
    """Weight l at (-1, 0, 0) and weight k at (1, 0, 0)."""
    return GHConfig(np.array([[-1.0, 0, 0], [1.0, 0, 0]]), (kp.l, kp.k), gauge)


def axis_gauge(kp: WeightPair, signs=(-1, 1)) -> np.ndarray:
    """Strings along the x1 axis pointing away from the segment between the sources."""
    return np.array([[signs[0], 0.0, 0.0], [signs[1], 0.0, 0.0]])


def _check_safe(cfg: GHConfig, x) -> None:
    r = x[..., None, :] - cfg.points
    dist = np.linalg.norm(r, axis=-1)
    if np.any(dist < SOURCE_TOL):
        raise AtSource("point coincides with a source")
    cosang = np.einsum("...ij,ij->...i", r, cfg.gauge) / dist
    if np.any(cosang > np.cos(STRING_TOL)):
        raise OnString("point lies on a Dirac string")


def potential(cfg: GHConfig, x, xp=np, check: bool = True):
    """U(x) = sum m_i / |x - x_i| for points x of shape (..., 3)."""
    if check and xp is np:
        r = np.linalg.norm(np.asarray(x)[..., None, :] - cfg.points, axis=-1)
        if np.any(r < SOURCE_TOL):
            raise AtSource("potential is singular at a source")
    r = x[..., None, :] - cfg.points
    return xp.sum(cfg.weights / xp.sqrt(xp.sum(r ** 2, axis=-1)), axis=-1)


def grad_potential(cfg: GHConfig, x, xp=np):
    r = x[..., None, :] - cfg.points
    d = xp.sqrt(xp.sum(r ** 2, axis=-1))
    return -xp.sum((cfg.weights / d ** 3)[..., None] * r, axis=-2)


def monopole_form(cfg: GHConfig, x, xp=np, check: bool = True):
    """Coefficients of w = w_j dx_j with rot w = grad U.

    Each source contributes m (n x r) / (|r| (|r| - r . n)) with r = x - x_i and
    n its string direction; this equals m (cos T - 1) dP in spherical angles
    (T, P) about the axis -n and is singular exactly on the string.
    """
    if check and xp is np:
        _check_safe(cfg, np.asarray(x, dtype=float))
    r = x[..., None, :] - cfg.points
    n = cfg.gauge
    d = xp.sqrt(xp.sum(r ** 2, axis=-1))
    cross = xp.stack([n[:, 1] * r[..., 2] - n[:, 2] * r[..., 1],
                      n[:, 2] * r[..., 0] - n[:, 0] * r[..., 2],
                      n[:, 0] * r[..., 1] - n[:, 1] * r[..., 0]], axis=-1)
    denom = d * (d - xp.sum(r * n, axis=-1))
    return xp.sum((cfg.weights / denom)[..., None] * cross, axis=-2)


def curl(f, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    J = jacobian(f, x, scheme)  # J[..., i, j] = d_j f_i
    return np.stack([J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]], axis=-1)


def laplacian(f, x, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    H = partials(f, x, 2, scheme)
    return np.trace(H, axis1=-2, axis2=-1)


def gh_metric_array(cfg: GHConfig, y, xp=np, check: bool = True):
    """Metric components at points y = (tau, x1, x2, x3)."""
    x = y[..., 1:]
    U = potential(cfg, x, xp, check)
    w = monopole_form(cfg, x, xp, check)
    theta = xp.concatenate([xp.ones_like(U)[..., None], w], axis=-1)
    eye = xp.asarray(np.diag([0.0, 1.0, 1.0, 1.0]))
    return theta[..., :, None] * theta[..., None, :] / U[..., None, None] + U[..., None, None] * eye


@lru_cache(maxsize=None)
def _jax_gh(cfg_json: str):
    jnp = _jax().numpy
    cfg = GHConfig.from_json(cfg_json)
    return lambda y: gh_metric_array(cfg, y, jnp, check=False)


def gh_metric(cfg: GHConfig) -> MetricField:
    return MetricField(4, lambda y: gh_metric_array(cfg, y), depends_on=(1, 2, 3),
                       jax_eval=_jax_gh(cfg.to_json()))


def gh_metric_eval(cfg: GHConfig, x, tau: float = 0.0) -> np.ndarray:
    y = np.concatenate([[tau], np.asarray(x, dtype=float)])
    return gh_metric_array(cfg, y)


def triple_coefficients(U, w, xp=np):
    """The three 2-forms on (tau, x1, x2, x3), shape (..., 3, 6).

    Component order: (tau x1, tau x2, tau x3, x1 x2, x1 x3, x2 x3).
    """
    one = xp.ones_like(U)
    zero = xp.zeros_like(U)
    w1, w2, w3 = w[..., 0], w[..., 1], w[..., 2]
    o1 = xp.stack([-one, zero, zero, w2, w3, U], axis=-1)
    o2 = xp.stack([zero, -one, zero, -w1, -U, w3], axis=-1)
    o3 = xp.stack([zero, zero, -one, U, -w1, -w2], axis=-1)
    return xp.stack([o1, o2, o3], axis=-2)


def hyperkahler_triple(cfg: GHConfig, y, xp=np, check: bool = True):
    x = y[..., 1:]
    return triple_coefficients(potential(cfg, x, xp, check), monopole_form(cfg, x, xp, check), xp)


def gh_kahler_form(cfg: GHConfig, y, critical_tol: float = 1e-10) -> np.ndarray:
    """dU/|grad U| ^ (d tau + w . dx) + U dsigma, dsigma = i_n vol on level sets of U.

    With n = grad U / |grad U| this is the pointwise combination n_a omega_a of
    the closed triple.
    """
    y = np.asarray(y, dtype=float)
    x = y[..., 1:]
    G = grad_potential(cfg, x)
    norm = np.linalg.norm(G, axis=-1)
    if np.any(norm < critical_tol):
        raise CriticalPoint("grad U vanishes; the level-set normal is undefined")
    n = G / norm[..., None]
    return np.einsum("...a,...ac->...c", n, hyperkahler_triple(cfg, y))


def exterior_derivative(f, y, n: int, p: int, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    return forms.d_from_jacobian(jacobian(f, y, scheme), n, p)


def complex_structure(gx, omega) -> np.ndarray:
    return -np.linalg.solve(gx, forms.to_full(omega, 4, 2))


def self_dual_basis(gx: np.ndarray, orientation: int = GH_ORIENTATION) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal frame E and projector onto self-dual 2-forms in that frame."""
    E = orthonormal_frame(gx)
    # frame orientation relative to coordinate order
    sign = np.sign(np.linalg.det(E)) * orientation
    star = np.zeros((6, 6))
    eye4 = np.eye(4)
    for a in range(6):
        star[:, a] = forms.hodge_star(np.eye(6)[a], eye4, 4, 2, 1)
    star = star * sign[..., None, None] if np.ndim(sign) else star * sign
    return E, 0.5 * (np.eye(6) + star)


def weyl_self_dual_norm(g: MetricField, y, orientation: int = GH_ORIENTATION,
                        scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    """max |P+ R P+| of the curvature operator on 2-forms, in an orthonormal frame.

    For a Ricci-flat metric this block is the self-dual Weyl tensor.
    """
    y = np.asarray(y, dtype=float)
    gx = g(y)
    R = riemann_ricci(g, y, scheme).riemann
    Rl = lower_riemann(gx, R)
    out = []
    pairs = forms.multi_indices(4, 2)
    for b in range(gx.shape[0]):
        E, P = self_dual_basis(gx[b], orientation)
        Rf = frame_components(Rl[b], E)
        op = np.array([[Rf[i, j, k, l] for (k, l) in pairs] for (i, j) in pairs])
        out.append(np.max(np.abs(P @ op @ P)))
    return np.array(out)


# ------------------------------------------------- link with the M_{k,l} metric

def special_to_gh(x, kp: WeightPair, gauge_shift: float = 0.0, xp=np, fibre: Optional[float] = None):
    """(rho, theta, psi, phi) -> (tau, x1, x2, x3).

    x1 = ch rho cos theta, x2 = sh rho sin theta cos psi,
    x3 = sh rho sin theta sin psi, tau = fibre * phi + gauge_shift * psi.
    ``fibre`` is the total source strength, l + k by default.  The shift
    compensates the constant part of the monopole form, which depends on
    where the Dirac strings are placed.
    """
    rho, theta, psi, phi = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    sh = xp.sinh(rho)
    fibre = kp.k + kp.l if fibre is None else fibre
    return xp.stack([fibre * phi + gauge_shift * psi, xp.cosh(rho) * xp.cos(theta),
                     sh * xp.sin(theta) * xp.cos(psi), sh * xp.sin(theta) * xp.sin(psi)], axis=-1)


def special_coords_to_gh(sc: SpecialCoords, kp: WeightPair, gauge_shift: float = 0.0) -> tuple[np.ndarray, float]:
    y = special_to_gh(sc.as_array(), kp, gauge_shift)
    return y[1:], float(y[0])


def axis_gauge_shift(cfg: GHConfig) -> float:
    """Constant that tau must absorb when every string lies along the x1 axis.

    A string along s e1 (s = +-1) contributes a constant multiple -s m of
    d psi, where psi is the angle about the x1 axis.
    """
    s = cfg.gauge[:, 0]
    if not np.allclose(np.abs(s), 1.0):
        raise ValueError("gauge shift is only defined for strings along the x1 axis")
    return float(-np.sum(s * cfg.weights))


def pullback_gh(cfg: GHConfig, kp: WeightPair, x, gauge_shift: float) -> np.ndarray:
    fibre = float(np.sum(cfg.weights))
    D = ad_jacobian(_special_to_gh_fn(kp, gauge_shift, fibre), x)
    y = special_to_gh(np.asarray(x, dtype=float), kp, gauge_shift, fibre=fibre)
    g = gh_metric_array(cfg, y)
    return np.einsum("...ia,...ij,...jb->...ab", D, g, D)


@lru_cache(maxsize=None)
def _special_to_gh_fn(kp: WeightPair, shift: float, fibre: Optional[float] = None):
    jnp = _jax().numpy
    return lambda y: special_to_gh(y, kp, shift, jnp, fibre)


def limit_coincidence_check(kp: WeightPair, grid=None, tol: float = 1e-6, cfg: Optional[GHConfig] = None
                            ) -> tuple[float, list[Check]]:
    """Fit the single constant c with pullback(GH) = c * (metric on M_{k,l})."""
    from .special_kahler import default_grid, metric2_array

    grid = default_grid(15) if grid is None else grid
    cfg = two_center(kp, axis_gauge(kp)) if cfg is None else cfg
    shift = axis_gauge_shift(cfg)
    P = pullback_gh(cfg, kp, grid, shift)
    g2 = metric2_array(grid, kp.a)
    mask = np.abs(g2) > 1e-12 * np.max(np.abs(g2))
    # least squares for P = c g2 over all nonzero components
    c = float(np.sum(P[mask] * g2[mask]) / np.sum(g2[mask] ** 2))
    dev = float(np.max(np.abs(P - c * g2)) / np.max(np.abs(c * g2)))
    ratios = P[mask] / g2[mask]
    spread = float(np.ptp(ratios) / abs(c))
    if spread > max(tol * 1e3, 1e-3):
        raise NoSingleConstant(f"component ratios vary by {spread:.3g}")
    return c, [Check(f"limit_max_relative_deviation[{kp.k},{kp.l}]", dev, tol),
               Check(f"limit_constant_positive[{kp.k},{kp.l}]", c, 0.0, "ge")]


def pulled_back_triple(cfg: GHConfig, kp: WeightPair, x, gauge_shift: float) -> np.ndarray:
    """The triple pulled back to (rho, theta, psi, phi), shape (..., 3, 6)."""
    D = ad_jacobian(_special_to_gh_fn(kp, gauge_shift), x)
    y = special_to_gh(np.asarray(x, dtype=float), kp, gauge_shift)
    om = hyperkahler_triple(cfg, y)
    full = forms.to_full(om, 4, 2)
    pb = np.einsum("...ia,...cij,...jb->...cab", D, full, D)
    return forms.from_full(pb, 4, 2)


# ------------------------------------------------------- multi-center limit

def three_center(t: float, eps_split: float = 1.0, gauge=None) -> GHConfig:
    """Three unit sources with centre of mass at 0, collapsing like t^2."""
    s = t * t
    pts = np.array([[-4 * s / 3, 0, 0], [2 * s / 3, s * eps_split, 0], [2 * s / 3, -s * eps_split, 0]])
    return GHConfig(pts, (1, 1, 1), gauge)


def centre_config(total: int = 3) -> GHConfig:
    return GHConfig(np.zeros((1, 3)), (total,))


def shell_grid(n: int, r_min: float, r_max: float, exclude_cone: float = 0.0) -> np.ndarray:
    """Spherical product grid, geometric in radius; optionally drops a cone about -e3."""
    r = np.geomspace(r_min, r_max, n)
    th = np.linspace(0, np.pi, n)
    ph = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
    R, T, P = np.meshgrid(r, th, ph, indexing="ij")
    pts = np.stack([R * np.sin(T) * np.cos(P), R * np.sin(T) * np.sin(P), R * np.cos(T)], -1).reshape(-1, 3)
    if exclude_cone > 0:
        keep = T.reshape(-1) < np.pi - exclude_cone
        pts = pts[keep]
    return pts


@dataclass(frozen=True)
class LimitStudy:
    t_values: tuple[float, ...] = (0.1, 0.05, 0.025)
    zeta: float = 1.0
    eps_split: float = 1.0
    n: int = 24
    cone: float = np.pi / 2  # keeps the half-space x3 > 0, away from the strings
    scheme: DerivativeScheme = DerivativeScheme(h=1e-3)

    def region(self, exclude_cone: float = 0.0) -> np.ndarray:
        r_min, r_max = self.zeta ** 2 / 16, self.zeta ** 2
        if r_min <= 4 * max(self.t_values) ** 2 * max(1.0, self.eps_split):
            raise RegionTooSmall("sources are not well inside the inner radius")
        return shell_grid(self.n, r_min, r_max, exclude_cone)


CHUNK = 8192


def _sup_partials(f, grid, order: int, scheme: DerivativeScheme) -> float:
    if order == 0:
        return float(np.max(np.abs(f(grid))))
    h = scheme.h if order == 1 else max(scheme.h, 1e-3)
    sch = DerivativeScheme(h=h, guard=scheme.guard)
    return max(float(np.max(np.abs(partials(f, grid[i:i + CHUNK], order, sch))))
               for i in range(0, len(grid), CHUNK))


def potential_difference_norms(study: LimitStudy = LimitStudy(), orders: Sequence[int] = (0, 1, 2)) -> dict:
    """sup over the shell of |d^i (U_t - U_bar)| for each t, with log-log fits."""
    grid = study.region()
    bar = centre_config()
    table = {i: [] for i in orders}
    for t in study.t_values:
        cfg = three_center(t, study.eps_split)
        f = lambda x, cfg=cfg: potential(cfg, x, check=False) - potential(bar, x, check=False)
        for i in orders:
            table[i].append(_sup_partials(f, grid, i, study.scheme))
    return {i: (table[i], fit_loglog(study.t_values, table[i])) for i in orders}


def metric_difference_norms(study: LimitStudy = LimitStudy(), orders: Sequence[int] = (0, 1)) -> dict:
    """sup of the pointwise g_bar-norm of r^i d^i (ds^2(t) - ds_bar^2), away from the strings.

    The weight r^i makes each order scale-invariant on the cone; it does not
    change the t-exponent.
    """
    x = study.region(exclude_cone=study.cone)
    grid = np.concatenate([np.zeros((len(x), 1)), x], axis=1)
    bar = centre_config()
    gi = np.linalg.inv(gh_metric_array(bar, grid))
    r = np.linalg.norm(x, axis=-1)
    table = {i: [] for i in orders}
    for t in study.t_values:
        cfg = three_center(t, study.eps_split)
        f = lambda y, cfg=cfg: gh_metric_array(cfg, y, check=False) - gh_metric_array(bar, y, check=False)
        for i in orders:
            best = 0.0
            for s in range(0, len(grid), CHUNK):
                c = slice(s, s + CHUNK)
                h = partials(f, grid[c], i, study.scheme, axes=(1, 2, 3))
                h = h.reshape(h.shape[:3] + (-1,))
                sq = np.einsum("nac,nbd,nabk,ncdk->n", gi[c], gi[c], h, h)
                best = max(best, float(np.max(r[c] ** i * np.sqrt(sq))))
            table[i].append(best)
    return {i: (table[i], fit_loglog(study.t_values, table[i])) for i in orders}


# ------------------------------------------------------------ consistency

def safe_points(cfg: GHConfig, rng: np.random.Generator, count: int, box: float = 2.0,
                min_dist: float = 0.1, min_angle: float = 0.05) -> np.ndarray:
    """Uniform samples in a cube, away from sources and Dirac strings."""
    out = []
    while sum(len(o) for o in out) < count:
        x = rng.uniform(-box, box, size=(4 * count, 3))
        r = x[:, None, :] - cfg.points
        d = np.linalg.norm(r, axis=-1)
        cosang = np.einsum("nij,ij->ni", r, cfg.gauge) / d
        ok = np.all(d > min_dist, axis=1) & np.all(cosang < np.cos(min_angle), axis=1)
        out.append(x[ok])
    return np.concatenate(out)[:count]


def triple_gram(cfg: GHConfig, y) -> np.ndarray:
    """Pairwise metric inner products of the triple, shape (..., 3, 3)."""
    g = gh_metric_array(cfg, y)
    om = hyperkahler_triple(cfg, y)
    return np.stack([forms.inner(om[..., a, None, :], om, g[..., None, :, :], 4, 2) for a in range(3)], axis=-2)


def _ad_fields(cfg: GHConfig):
    jax = _jax()
    jnp = jax.numpy
    U = lambda x: potential(cfg, x, jnp, check=False)
    w = lambda x: monopole_form(cfg, x, jnp, check=False)
    tri = lambda y: hyperkahler_triple(cfg, y, jnp, check=False)
    return U, w, tri, jax.jacfwd(U)


def gh_consistency_checks(cfg: GHConfig, rng: np.random.Generator, count: int = 1000,
                          scheme: DerivativeScheme = DerivativeScheme(method="forward_mode_ad")) -> list[Check]:
    """Monopole equation, harmonicity, the triple, gauge change and flatness checks.

    First and second partials come from forward-mode AD by default; with a
    finite-difference scheme the samples should stay well away from sources.
    """
    x = safe_points(cfg, rng, count)
    y = np.concatenate([np.zeros((len(x), 1)), x], axis=1)
    other = cfg.with_gauge(-cfg.gauge)
    x2 = safe_points(other, rng, min(count, 200))
    r2 = x2[:, None, :] - cfg.points
    cosang = np.einsum("nij,ij->ni", r2 / np.linalg.norm(r2, axis=-1)[..., None], cfg.gauge)
    x2 = x2[np.all(cosang < np.cos(0.05), axis=1)]
    if scheme.method == "forward_mode_ad":
        U, w, tri, dU = _ad_fields(cfg)
        _, w2, _, _ = _ad_fields(other)
        Jw = ad_jacobian(w, x)
        curl_w = np.stack([Jw[..., 2, 1] - Jw[..., 1, 2], Jw[..., 0, 2] - Jw[..., 2, 0], Jw[..., 1, 0] - Jw[..., 0, 1]], -1)
        lap = np.trace(ad_jacobian(dU, x), axis1=-2, axis2=-1)
        d_tri = [forms.d_from_jacobian(J, 4, 2) for J in np.moveaxis(ad_jacobian(tri, y), -3, 0)]
        Jd = ad_jacobian(w2, x2) - ad_jacobian(w, x2)
        gauge_curl = np.stack([Jd[..., 2, 1] - Jd[..., 1, 2], Jd[..., 0, 2] - Jd[..., 2, 0], Jd[..., 1, 0] - Jd[..., 0, 1]], -1)
    else:
        wn = lambda z: monopole_form(cfg, z, check=False)
        curl_w = curl(wn, x, scheme)
        lap = laplacian(lambda z: potential(cfg, z, check=False), x, scheme)
        d_tri = [exterior_derivative(lambda z, a=a: hyperkahler_triple(cfg, z, check=False)[..., a, :], y, 4, 2, scheme)
                 for a in range(3)]
        gauge_curl = curl(lambda z: monopole_form(other, z, check=False) - wn(z), x2, scheme)
    curl_err = float(np.max(np.abs(curl_w - grad_potential(cfg, x))))
    G = triple_gram(cfg, y)
    conformal = float(np.max(np.abs(G - G[..., :1, :1] * np.eye(3)) / G[..., :1, :1]))
    gx = gh_metric_array(cfg, y)
    om = hyperkahler_triple(cfg, y)
    j2 = max(float(np.max(np.abs(complex_structure(gx, om[:, a]) @ complex_structure(gx, om[:, a]) + np.eye(4))))
             for a in range(3))
    one = GHConfig(np.zeros((1, 3)), (1,))
    flat = float(np.max(np.abs(riemann_ricci(gh_metric(one), y[:20], scheme).riemann)))
    wplus = float(np.max(weyl_self_dual_norm(gh_metric(cfg), y[:10], scheme=DEFAULT_SCHEME)))
    return [Check("max_abs_curl_w_minus_grad_U", curl_err, 1e-8),
            Check("max_abs_laplacian_U", float(np.max(np.abs(lap))), 1e-7),
            Check("max_abs_d_triple", float(max(np.max(np.abs(d)) for d in d_tri)), 1e-8),
            Check("max_relative_triple_gram_defect", conformal, 1e-8),
            Check("max_norm_J2_plus_id", j2, 1e-8),
            Check("max_abs_curl_gauge_change", float(np.max(np.abs(gauge_curl))), 1e-8),
            Check("single_center_max_abs_riemann", flat, 1e-6),
            Check("max_abs_self_dual_weyl", wplus, 1e-6)]
