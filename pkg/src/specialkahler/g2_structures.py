"""Pointwise G2 algebra on R^7 and the glued 3- and 4-forms.

Seven-dimensional points are (y1, ..., y7): a 4-dimensional chart in the
first four slots and flat T^3 coordinates, dual to delta_1, delta_2,
delta_3, in the last three.  Forms are stored as in :mod:`forms`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm

from . import forms
from .calculus import DerivativeScheme, jacobian, kretschmann, riemann_ricci
from .convergence import SlopeFit, fit_loglog
from .errors import NotPositive
from .gibbons_hawking import (GHConfig, gh_metric, hyperkahler_triple, shell_grid,
                              three_center)

N7 = 7
PHI0_TERMS = (((1, 2, 7), 1), ((1, 3, 6), 1), ((1, 4, 5), 1), ((2, 3, 5), 1), ((2, 4, 6), -1),
              ((3, 4, 7), 1), ((5, 6, 7), 1))
STAR_PHI0_TERMS = (((1, 2, 3, 4), 1), ((1, 2, 5, 6), 1), ((1, 3, 5, 7), -1), ((1, 4, 6, 7), 1),
                   ((2, 3, 6, 7), 1), ((2, 4, 5, 7), 1), ((3, 4, 5, 6), 1))
DELTA_AXES = (4, 5, 6)


def _from_terms(terms, p: int) -> np.ndarray:
    out = np.zeros(len(forms.multi_indices(N7, p)))
    for idx, s in terms:
        out += s * forms.basis_form(N7, *[i - 1 for i in idx])
    return out


def phi0() -> np.ndarray:
    return _from_terms(PHI0_TERMS, 3)


def star_phi0() -> np.ndarray:
    return _from_terms(STAR_PHI0_TERMS, 4)


def volume_form() -> np.ndarray:
    return np.ones(1)


@lru_cache(maxsize=None)
def _interior_tables():
    """T[i, a, b] with (i_{e_i} phi)_b = sum_a T[i, a, b] phi_a."""
    n3 = len(forms.multi_indices(N7, 3))
    T = np.zeros((N7, n3, len(forms.multi_indices(N7, 2))))
    for i in range(N7):
        e = np.zeros(N7)
        e[i] = 1.0
        T[i] = forms.interior(e, np.eye(n3), N7, 3)
    return T


def bilinear_b(phi) -> np.ndarray:
    """b_ij vol = (1/6) (i_i phi) ^ (i_j phi) ^ phi, so that b(phi0) = identity."""
    phi = np.asarray(phi, dtype=float)
    I = np.einsum("iab,...a->...ib", _interior_tables(), phi)
    W = forms.wedge(I, phi[..., None, :], N7, 2, 3)  # i_i phi ^ phi, (..., 7, 21)
    out = forms.wedge(I[..., :, None, :], W[..., None, :, :], N7, 2, 5)[..., 0]
    return out / 6.0


def metric_from_phi(phi) -> np.ndarray:
    """g = det(b)^(-1/9) b.

    b transforms as b -> det(A) A^T b A under pullback by A, so the
    determinant power makes g a genuine bilinear form; the 1/6 fixes
    g(phi0) = identity.
    """
    b = bilinear_b(phi)
    det = np.linalg.det(b)
    if np.any(det <= 0):
        raise NotPositive("3-form is not in the positive orbit")
    g = b * det[..., None, None] ** (-1.0 / 9.0)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotPositive("reconstructed metric is not positive definite") from None
    return g


def hodge7(a, g, p: int) -> np.ndarray:
    return forms.hodge_star(a, g, N7, p)


def theta(phi) -> np.ndarray:
    """Theta(phi): the Hodge dual of phi in its own metric."""
    phi = np.asarray(phi, dtype=float)
    return hodge7(phi, metric_from_phi(phi), 3)


def pullback(a, A, p: int) -> np.ndarray:
    """A^* a for the linear map x -> A x of R^7."""
    return forms.pullback_linear(a, A, N7, p)


# --------------------------------------------------------------- stabilizer

def _action_matrix() -> np.ndarray:
    """Linearised action X -> d/ds exp(sX)^* phi0 on the 21 antisymmetric X."""
    pairs = forms.multi_indices(N7, 2)
    cols = []
    for i, j in pairs:
        X = np.zeros((N7, N7))
        X[i, j], X[j, i] = 1.0, -1.0
        cols.append(forms.from_full(_lie_derivative(forms.to_full(phi0(), N7, 3), X), N7, 3))
    return np.array(cols).T


def _lie_derivative(T: np.ndarray, X: np.ndarray) -> np.ndarray:
    return (np.einsum("da,dbc->abc", X, T) + np.einsum("db,adc->abc", X, T) + np.einsum("dc,abd->abc", X, T))


def stabilizer_dimension() -> int:
    """Dimension of {X in so(7) : X . phi0 = 0}, by exact rational rank."""
    from sympy import Matrix

    M = Matrix(np.round(_action_matrix()).astype(int).tolist())
    return 21 - M.rank()


def g2_algebra_basis() -> np.ndarray:
    """Orthonormal basis of the stabilizer algebra, shape (14, 7, 7)."""
    A = _action_matrix()
    _, s, vt = np.linalg.svd(A)
    null = vt[np.sum(s > 1e-10):]
    pairs = forms.multi_indices(N7, 2)
    out = []
    for v in null:
        X = np.zeros((N7, N7))
        for c, (i, j) in zip(v, pairs):
            X[i, j], X[j, i] = c, -c
        out.append(X)
    return np.array(out)


def random_g2_element(rng: np.random.Generator, factors: int = 3) -> np.ndarray:
    basis = g2_algebra_basis()
    A = np.eye(N7)
    for _ in range(factors):
        A = A @ expm(np.tensordot(rng.normal(size=len(basis)), basis, 1))
    return A


# -------------------------------------------------------- glued structures

def _embed4(a, p: int) -> np.ndarray:
    return forms.embed(a, 4, p, (0, 1, 2, 3), N7)


def _delta(i: int) -> np.ndarray:
    return forms.basis_form(N7, DELTA_AXES[i])


def build_phi_t(triple) -> tuple[np.ndarray, np.ndarray]:
    """phi = sum omega_i ^ delta_i + delta_123 and
    v = omega_1 ^ delta_23 + omega_2 ^ delta_31 + omega_3 ^ delta_12 + omega_1 ^ omega_1 / 2.

    ``triple`` has shape (..., 3, 6): three 2-forms on the 4-chart.
    """
    om = _embed4(np.asarray(triple, dtype=float), 2)
    d = [_delta(i) for i in range(3)]
    d123 = forms.wedge(forms.wedge(d[0], d[1], N7, 1, 1), d[2], N7, 2, 1)
    phi = d123 + sum(forms.wedge(om[..., i, :], d[i], N7, 2, 1) for i in range(3))
    pairs = ((1, 2), (2, 0), (0, 1))
    v = 0.5 * forms.wedge(om[..., 0, :], om[..., 0, :], N7, 2, 2)
    for i, (j, k) in enumerate(pairs):
        v = v + forms.wedge(om[..., i, :], forms.wedge(d[j], d[k], N7, 1, 1), N7, 2, 2)
    return phi, v


def flat_triple_standard() -> np.ndarray:
    """The triple reproducing phi0: y14 + y23, y13 - y24, y12 + y34."""
    b = lambda i, j: forms.basis_form(4, i - 1, j - 1)
    return np.array([b(1, 4) + b(2, 3), b(1, 3) - b(2, 4), b(1, 2) + b(3, 4)])


def gh_to_g2_chart(y4) -> np.ndarray:
    """(y1, y2, y3, y4) -> (tau, x1, x2, x3) = (y2, y1, y3, y4)."""
    y4 = np.asarray(y4, dtype=float)
    return y4[..., [1, 0, 2, 3]]


def g2_slots(gh_triple) -> np.ndarray:
    """Reorder a triple given on (tau, x1, x2, x3) into the phi0 slots on (x1, tau, x2, x3).

    The Gibbons-Hawking members omega_1, omega_2, omega_3 (about the x1, x2,
    x3 axes) fill the slots as (-omega_2, omega_3, omega_1).
    """
    t = forms.embed(np.asarray(gh_triple, dtype=float), 4, 2, (1, 0, 2, 3), 4)
    return np.stack([-t[..., 1, :], t[..., 2, :], t[..., 0, :]], axis=-2)


@dataclass(frozen=True)
class TorsionReport:
    sup_norm: float
    l2_norm: float
    t: Optional[float] = None
    slope: Optional[SlopeFit] = None
    hypotheses: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"sup_norm": self.sup_norm, "l2_norm": self.l2_norm, "t": self.t,
             "slope": None if self.slope is None else self.slope.slope,
             "slope_residual": None if self.slope is None else self.slope.residual,
             "hypotheses": dict(self.hypotheses)}
        return d


def psi_from(phi, v) -> tuple[np.ndarray, np.ndarray]:
    """psi with *psi = Theta(phi) - v in the metric of phi, and that metric."""
    g = metric_from_phi(phi)
    four = hodge7(phi, g, 3) - v
    # in odd dimension ** = 1
    return hodge7(four, g, 4), g


def torsion_psi(phi, v, weights=None, t: Optional[float] = None) -> TorsionReport:
    """Sup and weighted L2 norms of psi_t over the sampled points."""
    psi, g = psi_from(phi, v)
    nrm = forms.norm(psi, g, N7, 3)
    w = np.full(nrm.shape, 1.0 / nrm.size) if weights is None else np.asarray(weights, dtype=float)
    vol = np.sqrt(np.linalg.det(g))
    return TorsionReport(float(np.max(nrm)), float(np.sqrt(np.sum(w * vol * nrm ** 2))), t)


# -------------------------------------------------- blended Kähler triples

def gh_phi_field(cfg: GHConfig) -> Callable:
    """(phi, v) at 7-dimensional points for a Gibbons-Hawking triple."""
    def field_(y7):
        tri = hyperkahler_triple(cfg, gh_to_g2_chart(np.asarray(y7)[..., :4]), check=False)
        return build_phi_t(g2_slots(tri))
    return field_


def glued_phi_field(model) -> Callable:
    """(phi_t, v_t) from the blended triple of a glued model."""
    def field_(y7):
        tri = model.omega(gh_to_g2_chart(np.asarray(y7)[..., :4]))
        return build_phi_t(g2_slots(tri))
    return field_


def lift7(y4_gh) -> np.ndarray:
    """7-dimensional points over GH-chart points, with delta coordinates zero."""
    y = gh_to_g2_chart(np.asarray(y4_gh, dtype=float))
    return np.concatenate([y, np.zeros(y.shape[:-1] + (3,))], axis=-1)


def blend_weights(y4_gh, n: int, schedule) -> np.ndarray:
    """Quadrature weights (flat volume) for the shell grid used on the blend region."""
    x = np.asarray(y4_gh)[..., 1:]
    r = np.linalg.norm(x, axis=-1)
    z = schedule.zeta
    dlogr = np.log((z / 2) ** 2 / (z / 3) ** 2) / (n - 1)
    dth = np.pi / (n - 1)
    dph = np.pi / n
    sin = np.sqrt(np.maximum(0.0, 1 - (x[..., 2] / r) ** 2))
    return r ** 3 * sin * dlogr * dth * dph


def blended_torsion_scan(t_values=(0.1, 0.05, 0.025), n: int = 10, schedule=None) -> dict:
    from .kummer_gluing import GluedModel, GluingSchedule, blend_region

    schedule = GluingSchedule() if schedule is None else schedule
    y = blend_region(schedule, n)
    w = blend_weights(y, n, schedule)
    reports = []
    for t in t_values:
        phi, v = glued_phi_field(GluedModel(schedule.with_t(t)))(lift7(y))
        reports.append(torsion_psi(phi, v, w, t))
    sup_fit = fit_loglog(t_values, [r.sup_norm for r in reports])
    l2_fit = fit_loglog(t_values, [r.l2_norm for r in reports])
    return {"reports": reports, "sup_fit": sup_fit, "l2_fit": l2_fit}


def codifferential_gap(field_: Callable, y7, scheme: DerivativeScheme = DerivativeScheme(h=1e-3)) -> dict:
    """Compare d*psi and d*phi through d(Theta(phi) - v) and d(Theta(phi)).

    Both codifferentials are *d* of these 4-forms up to one common sign, so
    their difference is the differenced d v, which vanishes when the triple
    is closed.
    """
    th = lambda y: theta(field_(y)[0])
    star_psi = lambda y: (lambda pv: theta(pv[0]) - pv[1])(field_(y))
    d_th = forms.d_from_jacobian(jacobian(th, y7, scheme, axes=(0, 1, 2, 3)), N7, 4)
    d_sp = forms.d_from_jacobian(jacobian(star_psi, y7, scheme, axes=(0, 1, 2, 3)), N7, 4)
    g = metric_from_phi(field_(y7)[0])
    co_phi = forms.hodge_star(d_th, g, N7, 5)
    co_psi = forms.hodge_star(d_sp, g, N7, 5)
    return {"max_abs_codiff_phi": float(np.max(np.abs(co_phi))),
            "max_abs_codiff_psi": float(np.max(np.abs(co_psi))),
            "max_abs_gap": float(np.max(np.abs(co_phi - co_psi)))}


def closedness(field_: Callable, y7, scheme: DerivativeScheme = DerivativeScheme(h=1e-3)) -> tuple[float, float]:
    dphi = forms.d_from_jacobian(jacobian(lambda y: field_(y)[0], y7, scheme, axes=(0, 1, 2, 3)), N7, 3)
    dv = forms.d_from_jacobian(jacobian(lambda y: field_(y)[1], y7, scheme, axes=(0, 1, 2, 3)), N7, 4)
    return float(np.max(np.abs(dphi))), float(np.max(np.abs(dv)))


# ------------------------------------------------------------- hypotheses

def model_grid(n: int = 6) -> np.ndarray:
    """Unit-scale sample around the three sources, clear of sources and strings."""
    return shell_grid(n, 0.5, 3.0, exclude_cone=np.pi / 2 + 0.2)


def curvature_sup(t: float, grid=None, eps_split: float = 1.0) -> float:
    """sup |Rm| of the three-centre model at scale t over the scaled sample grid."""
    cfg = three_center(t, eps_split)
    x = (model_grid() if grid is None else grid) * t * t
    y = np.concatenate([np.zeros((len(x), 1)), x], axis=1)
    g = gh_metric(cfg)
    scheme = DerivativeScheme(h=1e-3 * t * t)
    R = riemann_ricci(g, y, scheme).riemann
    return float(np.sqrt(np.max(kretschmann(g(y), R))))


def model_volume(t: float, zeta: float = 1.0, period: float = 4 * np.pi, n: int = 24) -> float:
    """Volume of {|x| < zeta^2} x S^1 in the three-centre metric, by quadrature.

    dvol = U dtau d^3x; the radial integral is done in r with Gauss-Legendre
    nodes, which handles the 1/|x - x_i| singularities well enough for a
    lower bound that is stable in t.
    """
    cfg = three_center(t)
    r, wr = np.polynomial.legendre.leggauss(n)
    r = 0.5 * zeta ** 2 * (r + 1)
    wr = 0.5 * zeta ** 2 * wr
    c, wc = np.polynomial.legendre.leggauss(n)
    ph = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
    R, C, P = np.meshgrid(r, c, ph, indexing="ij")
    S = np.sqrt(1 - C ** 2)
    x = np.stack([R * S * np.cos(P), R * S * np.sin(P), R * C], -1)
    from .gibbons_hawking import potential

    U = potential(cfg, x, check=False)
    W = (wr[:, None, None] * wc[None, :, None] * (2 * np.pi / (2 * n))) * R ** 2
    return float(period * np.sum(U * W))


def model_diameter(t: float, zeta: float = 1.0, period: float = 4 * np.pi, n: int = 16, m: int = 64) -> float:
    """Upper bound: two radial paths to the centre plus half a fibre at the rim."""
    cfg = three_center(t)
    dirs = shell_grid(n, 1.0, 1.0, exclude_cone=np.pi / 2)
    s, ws = np.polynomial.legendre.leggauss(m)
    s = 0.5 * (s + 1)
    ws = 0.5 * ws
    # path x = zeta^2 s^2 d, |dx/ds| = 2 zeta^2 s, tau fixed: length int sqrt(U + (w.dx/ds)^2 / U)
    from .gibbons_hawking import monopole_form, potential

    lengths = []
    for d in dirs:
        x = (zeta ** 2) * (s ** 2)[:, None] * d
        dx = (2 * zeta ** 2 * s)[:, None] * d
        U = potential(cfg, x, check=False)
        w = monopole_form(cfg, x, check=False)
        speed = np.sqrt(U * np.sum(dx ** 2, -1) + np.sum(w * dx, -1) ** 2 / U)
        lengths.append(np.sum(ws * speed))
    rim = shell_grid(n, zeta ** 2, zeta ** 2, exclude_cone=np.pi / 2)
    fibre = 0.5 * period * np.max(1 / np.sqrt(potential(cfg, rim, check=False)))
    return float(2 * max(lengths) + fibre)


def hypothesis_check(t_values=(0.1, 0.05, 0.025), D3: Optional[float] = None) -> TorsionReport:
    """Curvature, volume and diameter numerics for the gluing-theorem hypotheses.

    The injectivity radius is not checked.
    """
    curv = [curvature_sup(t) * t * t for t in t_values]
    vols = [model_volume(t) for t in t_values]
    diams = [model_diameter(t) for t in t_values]
    spread = (max(curv) - min(curv)) / max(curv)
    hyp = {
        "B_ii": "NOT CHECKED",
        "B_iii": bool(spread < 0.1 and (D3 is None or max(curv) <= D3)),
        "B_iv": bool(min(vols) > 0 and (max(vols) - min(vols)) / max(vols) < 0.1),
        "B_v": bool(max(diams) < np.inf and (max(diams) - min(diams)) / max(diams) < 0.1),
        "curvature_times_t2": curv,
        "curvature_spread": spread,
        "volume": vols,
        "diameter_bound": diams,
    }
    return TorsionReport(float("nan"), float("nan"), None, None, hyp)
