"""Torus orbifolds, their singular points, and the gluing of local models.

Combinatorics (lattices, fixed points, admissible orders, moduli counts) is
exact integer arithmetic.  The analytic part works in a Gibbons-Hawking
chart (tau, x1, x2, x3) around one singular point: the flat cone C^2/Z_3 is
the single-centre potential 3/|x|, the resolved model is the three-centre
potential, and the two Kähler triples are glued with a radial cutoff.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np
from sympy import totient

from . import forms
from .calculus import DEFAULT_SCHEME, DerivativeScheme, jacobian
from .chart_atlas import WeightPair
from .convergence import fit_loglog
from .errors import BadPrimitive, NotInvariant, NotIsolated, ResidualTooLarge, WeightMismatch
from .gibbons_hawking import (GHConfig, centre_config, gh_metric_array, hyperkahler_triple, shell_grid,
                              three_center)

OMEGA3 = np.exp(2j * np.pi / 3)
EISENSTEIN = (1.0 + 0j, np.exp(1j * np.pi / 3))


# ------------------------------------------------------------------ lattices

def _realify(v: np.ndarray) -> np.ndarray:
    """C^2 -> R^4 as (Re z1, Im z1, Re z2, Im z2)."""
    v = np.asarray(v, dtype=complex)
    return np.stack([v[..., 0].real, v[..., 0].imag, v[..., 1].real, v[..., 1].imag], axis=-1)


def _complexify(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.stack([x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]], axis=-1)


@dataclass(frozen=True)
class LatticeTorus:
    """T^4 = C^2 / Lambda, Lambda spanned over Z by four vectors of C^2."""

    basis: np.ndarray  # (4, 2) complex

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex).reshape(4, 2)
        object.__setattr__(self, "basis", B)
        if abs(np.linalg.det(self.real_basis)) < 1e-10:
            raise ValueError("lattice vectors are linearly dependent over R")

    @property
    def real_basis(self) -> np.ndarray:
        """Columns are the basis vectors in R^4."""
        return _realify(self.basis).T

    def coordinates(self, z) -> np.ndarray:
        """Real coordinates of points of C^2 in the lattice basis."""
        return np.linalg.solve(self.real_basis, _realify(z).T).T

    def point(self, c) -> np.ndarray:
        return _complexify((self.real_basis @ np.asarray(c, dtype=float).T).T)

    def contains(self, z, tol: float = 1e-9) -> bool:
        c = self.coordinates(z)
        return bool(np.all(np.abs(c - np.round(c)) < tol))

    @classmethod
    def square(cls) -> "LatticeTorus":
        return cls(np.array([[1, 0], [1j, 0], [0, 1], [0, 1j]]))

    @classmethod
    def z3_family(cls, lam=(1.0, 0.0), mu=(0.0, 1.0)) -> "LatticeTorus":
        """{(l1 z1 + l2 z2, m1 conj(z1) + m2 conj(z2)) : z1, z2 Eisenstein}.

        Conjugating the second coordinate makes the lattice invariant under
        (z1, z2) -> (w z1, conj(w) z2) for every choice of parameters.
        """
        l1, l2 = lam
        m1, m2 = mu
        rows = []
        for coef_l, coef_m in ((l1, m1), (l2, m2)):
            for e in EISENSTEIN:
                rows.append([coef_l * e, coef_m * np.conj(e)])
        return cls(np.array(rows))

    def to_json(self) -> str:
        return json.dumps({"basis": [[[z.real, z.imag] for z in row] for row in self.basis]})

    @classmethod
    def from_json(cls, text: str) -> "LatticeTorus":
        d = json.loads(text)
        return cls(np.array([[complex(*z) for z in row] for row in d["basis"]]))


@dataclass(frozen=True)
class TorusAutomorphism:
    """Linear map diag(w^q, conj(w)^q) of C^2, w = exp(2 pi i / p)."""

    p: int
    q: int = 1

    @property
    def matrix(self) -> np.ndarray:
        w = np.exp(2j * np.pi * self.q / self.p)
        return np.diag([w, np.conj(w)])

    @property
    def real_matrix(self) -> np.ndarray:
        A = self.matrix
        out = np.zeros((4, 4))
        for k in range(2):
            c = A[k, k]
            out[2 * k:2 * k + 2, 2 * k:2 * k + 2] = [[c.real, -c.imag], [c.imag, c.real]]
        return out

    def lattice_matrix(self, torus: LatticeTorus, tol: float = 1e-9) -> np.ndarray:
        """Integer matrix of the map in lattice coordinates; NotInvariant otherwise."""
        B = torus.real_basis
        M = np.linalg.solve(B, self.real_matrix @ B)
        Mi = np.round(M)
        if np.max(np.abs(M - Mi)) > tol:
            raise NotInvariant("the automorphism does not preserve the lattice")
        return Mi.astype(np.int64)

    def apply(self, z) -> np.ndarray:
        return np.asarray(z, dtype=complex) @ self.matrix.T


SIGMA = TorusAutomorphism(2)
GAMMA = TorusAutomorphism(3)


def _int_det_adj(M: np.ndarray) -> tuple[int, np.ndarray]:
    """Exact determinant and adjugate of a small integer matrix."""
    from sympy import Matrix

    S = Matrix(M.tolist())
    return int(S.det()), np.array(S.adjugate().tolist(), dtype=object)


def _fixed_numerators(action: TorusAutomorphism, torus: LatticeTorus) -> tuple[int, list[tuple[int, ...]]]:
    """Fixed points as lattice coordinates v / n with integer v in [0, n)^4.

    In lattice coordinates the condition is (M - I) c in Z^4; the solutions
    modulo Z^4 form the group (M - I)^{-1} Z^4 / Z^4, of order |det(M - I)|,
    generated by the columns of the adjugate over the determinant.
    """
    M = action.lattice_matrix(torus)
    D, adj = _int_det_adj(M - np.eye(4, dtype=np.int64))
    if D == 0:
        raise NotIsolated("the fixed set is not a finite set of points")
    n = abs(D)
    sign = 1 if D > 0 else -1
    gens = [tuple(sign * int(adj[i, j]) % n for i in range(4)) for j in range(4)]
    seen = {(0, 0, 0, 0)}
    frontier = [(0, 0, 0, 0)]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = tuple((a + b) % n for a, b in zip(v, g))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return n, sorted(seen)


def fixed_point_coordinates(action: TorusAutomorphism, torus: LatticeTorus) -> list[tuple[Fraction, ...]]:
    """Exact lattice coordinates of the fixed points, in [0, 1)."""
    n, vs = _fixed_numerators(action, torus)
    return [tuple(Fraction(a, n) for a in v) for v in vs]


def fixed_points(action: TorusAutomorphism, torus: LatticeTorus, tol: float = 1e-12) -> list[np.ndarray]:
    """Points z of C^2/Lambda with action(z) = z, each verified fixed modulo Lambda."""
    pts = []
    for c in fixed_point_coordinates(action, torus):
        z = torus.point(np.array([float(v) for v in c]))
        if not torus.contains(action.apply(z) - z, tol=tol * max(1.0, float(np.max(np.abs(z))))):
            raise NotInvariant("enumerated point is not fixed")  # pragma: no cover
        pts.append(z)
    return pts


def random_z3_torus(rng: np.random.Generator) -> LatticeTorus:
    while True:
        lam = rng.normal(size=2) + 1j * rng.normal(size=2)
        mu = rng.normal(size=2) + 1j * rng.normal(size=2)
        if abs(lam[0] * mu[1] - lam[1] * mu[0]) > 0.1:
            try:
                return LatticeTorus.z3_family(tuple(lam), tuple(mu))
            except ValueError:
                continue


# ------------------------------------------------------------ admissibility

def admissible_orders(max_order: int = 12) -> set[int]:
    """Orders p > 2 of rotations preserving some lattice of the plane.

    A lattice rotation has an integer characteristic polynomial, so the
    minimal polynomial of exp(2 pi i / p) has degree phi(p) <= 2.
    """
    return {p for p in range(3, max_order + 1) if int(totient(p)) <= 2}


def _matrix_order(M: np.ndarray, limit: int) -> Optional[int]:
    P = np.eye(2, dtype=np.int64)
    for j in range(1, limit + 1):
        P = P @ M
        if np.array_equal(P, np.eye(2, dtype=np.int64)):
            return j
        if np.max(np.abs(P)) > 10 ** 6:
            return None
    return None


def orders_by_search(max_order: int = 12, bound: int = 3) -> set[int]:
    """Finite orders p > 2 among integer 2x2 matrices with entries in [-bound, bound]."""
    found = set()
    rng = range(-bound, bound + 1)
    for a, b, c, d in product(rng, rng, rng, rng):
        if a * d - b * c not in (1, -1):
            continue
        o = _matrix_order(np.array([[a, b], [c, d]], dtype=np.int64), max_order)
        if o is not None and o > 2:
            found.add(o)
    return found


# -------------------------------------------------------- singularity ledger

@dataclass(frozen=True)
class LedgerEntry:
    order: int
    count: int
    stage: int

    def as_dict(self) -> dict:
        return {"order": self.order, "count": self.count, "stage": self.stage}


def local_model_check(p: int, kp: WeightPair) -> dict[int, int]:
    """Singular points left after replacing one C^2/Z_p by M_{k,l}: orders k and l (1 is smooth)."""
    if kp.k + kp.l != p:
        raise WeightMismatch(f"k + l = {kp.k + kp.l} differs from p = {p}")
    out: dict[int, int] = {}
    for o in (kp.k, kp.l):
        if o > 1:
            out[o] = out.get(o, 0) + 1
    return out


def resolution_ledger(start: dict[int, int] = None,
                      stages: Sequence[WeightPair] = (WeightPair(1, 2), WeightPair(1, 1))) -> list[LedgerEntry]:
    """Apply the local models stage by stage, starting from nine Z_3 points."""
    state = {3: 9} if start is None else dict(start)
    ledger = [LedgerEntry(o, c, 0) for o, c in sorted(state.items())]
    for s, kp in enumerate(stages, start=1):
        nxt: dict[int, int] = {}
        for o, c in state.items():
            if o == kp.order:
                for o2, c2 in local_model_check(o, kp).items():
                    nxt[o2] = nxt.get(o2, 0) + c * c2
            else:
                nxt[o] = nxt.get(o, 0) + c
        state = nxt
        ledger += [LedgerEntry(o, c, s) for o, c in sorted(state.items())] or [LedgerEntry(1, 0, s)]
    return ledger


def singular_count(ledger: list[LedgerEntry], stage: int) -> int:
    return sum(e.count for e in ledger if e.stage == stage and e.order > 1)


# ------------------------------------------------------------------ moduli

LIE_DIMS = {"U(1)xU(1)": 2, "U(2)": 4, "SO(4)": 6, "GL_C(2)": 8}


@dataclass(frozen=True)
class ModuliCount:
    route: str
    base: int
    per_point: tuple[int, ...]
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.base + sum(p * c for p, c in zip(self.per_point, self.counts))

    def as_dict(self) -> dict:
        return {"route": self.route, "base": self.base, "per_point": list(self.per_point),
                "counts": list(self.counts), "total": self.total}


def flat_torus_moduli() -> int:
    """Flat metrics on T^4 up to diffeomorphism: symmetric 4x4 Gram matrices."""
    return 4 * 5 // 2


def z3_family_moduli() -> int:
    """dim S_3 = dim GL_C(2) - dim U(2): the parameters (lambda, mu) modulo unitary changes."""
    return LIE_DIMS["GL_C(2)"] - LIE_DIMS["U(2)"]


def per_point_gluing(stage: str) -> tuple[int, int]:
    """(dimension of the isometry coset, homothety) for one glued model."""
    if stage == "Z2":
        return LIE_DIMS["SO(4)"] - LIE_DIMS["U(2)"], 1
    if stage == "Z3":
        return LIE_DIMS["U(2)"] - LIE_DIMS["U(1)xU(1)"], 1
    raise ValueError(stage)


def moduli_dimensions() -> list[ModuliCount]:
    z2 = sum(per_point_gluing("Z2"))
    z3 = sum(per_point_gluing("Z3"))
    n_sigma = len(fixed_points(SIGMA, LatticeTorus.square()))
    n_gamma = len(fixed_points(GAMMA, LatticeTorus.z3_family()))
    return [ModuliCount("page", flat_torus_moduli(), (z2,), (n_sigma,)),
            ModuliCount("z3", z3_family_moduli(), (z3, z2), (n_gamma, n_gamma))]


# ------------------------------------------------------------ cutoff, radii

def smoothstep5(q):
    q = np.clip(q, 0.0, 1.0)
    return q ** 3 * (10 - 15 * q + 6 * q * q)


def smoothstep5_prime(q):
    inside = (q > 0) & (q < 1)
    return np.where(inside, 30 * q * q * (1 - q) ** 2, 0.0)


@dataclass(frozen=True)
class GluingSchedule:
    """Radii of the concentric neighbourhoods, the model scale, and the cutoff.

    The cutoff u(r) is 0 on [0, zeta/3] and 1 on [zeta/2, zeta], with a quintic
    smoothstep in between.  In the Gibbons-Hawking chart r = sqrt(|x|).
    """

    zeta: float = 1.0
    eps: float = 0.9
    eps_prime: float = 0.5
    delta: float = 0.3
    delta_prime: float = 0.15
    t: float = 0.05
    u_scale: float = 1.0
    eps_split: float = 1.0

    def __post_init__(self):
        if not (0 < self.delta_prime < self.delta < self.eps_prime < self.eps):
            raise ValueError("radii must satisfy delta' < delta < eps' < eps")
        if not (self.zeta > 0 and self.t > 0):
            raise ValueError("zeta and t must be positive")

    def u(self, r):
        return smoothstep5((np.asarray(r, dtype=float) - self.zeta / 3) / (self.zeta / 6))

    def du_dr(self, r):
        return smoothstep5_prime((np.asarray(r, dtype=float) - self.zeta / 3) / (self.zeta / 6)) / (self.zeta / 6)

    def u_of_x(self, x):
        return self.u(np.sqrt(np.linalg.norm(x, axis=-1)))

    def du_of_x(self, x):
        """Gradient of u(sqrt|x|) in x, shape (..., 3)."""
        d = np.linalg.norm(x, axis=-1)
        return (self.du_dr(np.sqrt(d)) / (2 * d ** 1.5))[..., None] * x

    def with_t(self, t: float) -> "GluingSchedule":
        return GluingSchedule(self.zeta, self.eps, self.eps_prime, self.delta, self.delta_prime, t,
                              self.u_scale, self.eps_split)

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


# -------------------------------------------------------------- primitives

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre01(m: int) -> tuple[np.ndarray, np.ndarray]:
    if m not in _GL_CACHE:
        s, w = np.polynomial.legendre.leggauss(m)
        _GL_CACHE[m] = (0.5 * (s + 1), 0.5 * w)
    return _GL_CACHE[m]


def homotopy_primitive(form: Callable, y, n: int, scaled: Sequence[int], mode: str = "cone",
                       nodes: int = 40) -> np.ndarray:
    """A 1-form eta with d eta = form, from the scaling homotopy h_s(y) = (s y_scaled, y_rest).

    ``cone``  contracts to the fixed set:  eta = int_0^1 (1/s) h_s^* i_E form ds,
    ``decay`` pushes to infinity:         eta = -int_1^oo (1/s) h_s^* i_E form ds,
    where E is the Euler field of the scaled coordinates.  The first needs
    the form to be regular at the fixed set; the second needs h_s^* form -> 0.
    """
    y = np.asarray(y, dtype=float)
    mask = np.zeros(n)
    mask[list(scaled)] = 1.0
    sig, wts = _gauss_legendre01(nodes)
    out = np.zeros(y.shape[:-1] + (n,))
    for sg, wt in zip(sig, wts):
        s = sg if mode == "cone" else 1.0 / sg
        ys = y * (1 + (s - 1) * mask)
        E = ys * mask
        iE = forms.interior(E, form(ys), n, 2)
        pulled = iE * (1 + (s - 1) * mask)
        if mode == "cone":
            out += wt * pulled / s
        elif mode == "decay":
            out -= wt * pulled / s / sg ** 2
        else:
            raise ValueError(f"unknown homotopy mode {mode!r}")
    return out


def exterior_d1(eta: Callable, y, n: int, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    return forms.d_from_jacobian(jacobian(eta, y, scheme), n, 1)


def exterior_d2(om: Callable, y, n: int, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
    return forms.d_from_jacobian(jacobian(om, y, scheme), n, 2)


CLOSEDNESS_SCHEME = DerivativeScheme(h=2.5e-4)


@dataclass
class PrimitiveResult:
    eta: Callable
    residual: float
    closedness: float


def primitive_on_annulus(form: Callable, grid, n: int = 4, scaled: Sequence[int] = (1, 2, 3),
                         mode: str = "decay", nodes: int = 40, closed_tol: float = 1e-8,
                         residual_tol: float = 1e-6, scheme: DerivativeScheme = DEFAULT_SCHEME,
                         closed_scheme: DerivativeScheme = CLOSEDNESS_SCHEME) -> PrimitiveResult:
    """Primitive of a closed 2-form, checked on the sample grid.

    The form must be defined along the scaling orbits of the grid points.
    Closedness of the (cheap) input uses a finer step than the residual of
    the primitive, whose evaluation involves the quadrature.
    """
    closed = float(np.max(np.abs(exterior_d2(form, grid, n, closed_scheme))))
    if closed > closed_tol:
        raise BadPrimitive(f"input form is not closed: |d form| = {closed:.3g}")
    eta = lambda y: homotopy_primitive(form, y, n, scaled, mode, nodes)
    res = float(np.max(np.abs(exterior_d1(eta, grid, n, scheme) - form(grid))))
    if res > residual_tol:
        raise ResidualTooLarge(f"|d eta - form| = {res:.3g}")
    return PrimitiveResult(eta, res, closed)


def blend_forms(u: Callable, eta_flat: Callable, eta_gh: Callable, n: int = 4) -> tuple[Callable, Callable]:
    """eta(t) = u eta_flat + (1 - u) eta_gh and omega(t) = d eta(t) (by differencing)."""
    eta = lambda y: u(y)[..., None] * eta_flat(y) + (1 - u(y))[..., None] * eta_gh(y)
    return eta, (lambda y: exterior_d1(eta, y, n))


# ----------------------------------------------- the glued local model

def flat_triple(y, total: int = 3) -> np.ndarray:
    return hyperkahler_triple(centre_config(total), y, check=False)


def flat_primitive(y, total: int = 3) -> np.ndarray:
    """i_E omega_bar: the flat triple is homogeneous of degree one under x -> s x."""
    y = np.asarray(y, dtype=float)
    E = y * np.array([0.0, 1.0, 1.0, 1.0])
    return forms.interior(E[..., None, :], flat_triple(y, total), 4, 2)


@dataclass(frozen=True)
class GluedModel:
    """Resolved three-centre model glued to the flat cone on the blend annulus."""

    schedule: GluingSchedule = GluingSchedule()
    nodes: int = 40

    @property
    def config(self) -> GHConfig:
        return three_center(self.schedule.t, self.schedule.eps_split)

    def difference(self, y) -> np.ndarray:
        """omega'(t) - omega_bar, shape (..., 3, 6); decays like |x|^-3 * t^4."""
        return hyperkahler_triple(self.config, y, check=False) - flat_triple(y)

    def beta(self, y) -> np.ndarray:
        """Primitive of the difference vanishing at infinity, shape (..., 3, 4)."""
        out = []
        for i in range(3):
            out.append(homotopy_primitive(lambda z, i=i: self.difference(z)[..., i, :], y, 4, (1, 2, 3),
                                          "decay", self.nodes))
        return np.stack(out, axis=-2)

    def eta_flat(self, y) -> np.ndarray:
        return flat_primitive(y)

    def eta_gh(self, y) -> np.ndarray:
        return flat_primitive(y) + self.beta(y)

    def u(self, y) -> np.ndarray:
        return self.schedule.u_of_x(np.asarray(y)[..., 1:])

    def eta(self, y) -> np.ndarray:
        u = self.u(y)[..., None, None]
        return u * self.eta_flat(y) + (1 - u) * self.eta_gh(y)

    def omega(self, y) -> np.ndarray:
        """omega_i(t) = omega_bar_i - du ^ beta_i + (1 - u) (omega'_i - omega_bar_i)."""
        y = np.asarray(y, dtype=float)
        du = np.concatenate([np.zeros(y.shape[:-1] + (1,)), self.schedule.du_of_x(y[..., 1:])], axis=-1)
        u = self.u(y)[..., None, None]
        corr = -forms.wedge(du[..., None, :], self.beta(y), 4, 1, 1) + (1 - u) * self.difference(y)
        return flat_triple(y) + corr

    def omega_by_differencing(self, y, scheme: DerivativeScheme = DEFAULT_SCHEME) -> np.ndarray:
        out = []
        for i in range(3):
            out.append(exterior_d1(lambda z, i=i: self.eta(z)[..., i, :], y, 4, scheme))
        return np.stack(out, axis=-2)


def blend_region(schedule: GluingSchedule, n: int = 16, upper: bool = True, margin: float = 0.0) -> np.ndarray:
    """Grid of (0, x) with zeta/3 <= sqrt|x| <= zeta/2, optionally in x3 > 0.

    A positive ``margin`` (a fraction of the annulus width) keeps the samples
    off the two seams, where the cutoff is only C^2 and differencing across
    them is inaccurate.
    """
    z = schedule.zeta
    lo, hi = z / 3, z / 2
    lo, hi = lo + margin * (hi - lo), hi - margin * (hi - lo)
    x = shell_grid(n, lo ** 2, hi ** 2, np.pi / 2 if upper else 0.0)
    return np.concatenate([np.zeros((len(x), 1)), x], axis=1)


def flat_norm2(a, y) -> np.ndarray:
    """Pointwise norm of 2-forms (..., 6) in the flat cone metric."""
    g = gh_metric_array(centre_config(), np.asarray(y, dtype=float), check=False)
    return forms.norm(a, g[..., None, :, :] if a.ndim > g.ndim - 1 else g, 4, 2)


@dataclass(frozen=True)
class GluingScan:
    t_values: tuple[float, ...] = (0.1, 0.05, 0.025)
    n: int = 16
    schedule: GluingSchedule = GluingSchedule()
    nodes: int = 40


def gluing_scan(scan: GluingScan = GluingScan()) -> dict:
    """sup over the blend region of |omega_i(t) - omega_bar_i|, one fit per i."""
    y = blend_region(scan.schedule, scan.n)
    rows = []
    for t in scan.t_values:
        model = GluedModel(scan.schedule.with_t(t), scan.nodes)
        diff = model.omega(y) - flat_triple(y)
        rows.append([float(np.max(flat_norm2(diff[..., i, :], y))) for i in range(3)])
    rows = np.array(rows)
    fits = [fit_loglog(scan.t_values, rows[:, i]) for i in range(3)]
    return {"t": list(scan.t_values), "norms": rows, "fits": fits}
