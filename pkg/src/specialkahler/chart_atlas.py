"""Charts, transitions and the blow-down map for M_{k,l} = T*CP^1(k,l).

M_{k,l} is covered by two uniformizing charts.  The Z chart has complex
coordinates (z, alpha) modulo Z_k acting by diag(w, w^-1); the W chart has
(w, beta) modulo Z_l.  On the overlap

    z^k w^l = 1,    alpha z = beta w.

Special coordinates (rho, theta, psi, phi) parametrize the complement of the
zero section and the two axes.  All fractional powers of the real radial
factors use the principal real branch; the phases come from psi and phi only.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum
from math import gcd, pi

import numpy as np

from .errors import DegeneratePoint, DomainError, NotSingular, OnExceptionalSet

OVERLAP_TOL = 1e-9


@dataclass(frozen=True)
class WeightPair:
    k: int
    l: int

    def __post_init__(self):
        if int(self.k) != self.k or int(self.l) != self.l or self.k < 1 or self.l < 1:
            raise ValueError("weights must be positive integers")
        if gcd(self.k, self.l) != 1:
            raise ValueError(f"weights ({self.k}, {self.l}) are not coprime")

    @property
    def a(self) -> float:
        return (self.l - self.k) / (self.l + self.k)

    @property
    def order(self) -> int:
        """Order of the cone C^2/Z_{k+l} that M_{k,l} resolves."""
        return self.k + self.l


class ChartId(Enum):
    Z = "ZChart"
    W = "WChart"


@dataclass(frozen=True)
class ChartPoint:
    chart: ChartId
    coords: tuple[complex, complex]

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)


@dataclass(frozen=True)
class SpecialCoords:
    rho: float
    theta: float
    phi: float
    psi: float

    def as_array(self) -> np.ndarray:
        """Coordinates in the array order (rho, theta, psi, phi) used everywhere."""
        return np.array([self.rho, self.theta, self.psi, self.phi], dtype=float)

    @classmethod
    def from_array(cls, x) -> "SpecialCoords":
        rho, theta, psi, phi = (float(v) for v in x)
        return cls(rho=rho, theta=theta, phi=phi, psi=psi)


@dataclass(frozen=True)
class UniformizingGroup:
    order: int

    @property
    def root(self) -> complex:
        return cmath.exp(2j * pi / self.order)

    @property
    def generator(self) -> np.ndarray:
        w = self.root
        return np.diag([w, 1 / w])

    def elements(self) -> list[np.ndarray]:
        return [np.linalg.matrix_power(self.generator, j) for j in range(self.order)]


def group_of(chart: ChartId, kp: WeightPair) -> UniformizingGroup:
    return UniformizingGroup(kp.k if chart is ChartId.Z else kp.l)


def transition(p: ChartPoint, target: ChartId, kp: WeightPair) -> ChartPoint:
    """Change chart on the overlap, using the principal branch of Log.

    The result is exact up to the uniformizing group: a round trip returns
    the input modulo Z_k (or Z_l), and is the identity when that group is
    trivial.
    """
    if p.chart is target:
        return p
    u, v = p.coords
    if abs(u) < OVERLAP_TOL:
        raise DegeneratePoint(f"{p.chart.value} point with |{'z' if p.chart is ChartId.Z else 'w'}| "
                              f"< {OVERLAP_TOL} has no representation in the other chart")
    if p.chart is ChartId.Z:
        w = cmath.exp(-(kp.k / kp.l) * cmath.log(u))
        return ChartPoint(ChartId.W, (w, v * u / w))
    z = cmath.exp(-(kp.l / kp.k) * cmath.log(u))
    return ChartPoint(ChartId.Z, (z, v * u / z))


def relation_residuals(pz: ChartPoint, pw: ChartPoint, kp: WeightPair) -> tuple[float, float]:
    """Relative residuals of z^k w^l = 1 and alpha z = beta w."""
    z, alpha = pz.coords
    w, beta = pw.coords
    r1 = abs(z ** kp.k * w ** kp.l - 1)
    scale = max(abs(alpha * z), abs(beta * w), 1e-300)
    r2 = abs(alpha * z - beta * w) / scale if scale > 1e-300 else 0.0
    return r1, r2


def orbit_distance(p: ChartPoint, q: ChartPoint, kp: WeightPair) -> float:
    """Distance between p and the closest point of q's uniformizing-group orbit."""
    if p.chart is not q.chart:
        q = transition(q, p.chart, kp)
    a, b = p.as_array(), q.as_array()
    return min(float(np.linalg.norm(a - g @ b)) for g in group_of(p.chart, kp).elements())


def special_to_chart(sc: SpecialCoords, kp: WeightPair, target: ChartId) -> ChartPoint:
    k, l, a = kp.k, kp.l, kp.a
    c, s = np.cos(sc.theta / 2), np.sin(sc.theta / 2)
    radial = k * l * np.sinh(sc.rho / 2)
    if target is ChartId.Z:
        if not sc.theta < pi:
            raise DomainError("the Z chart needs theta < pi")
        z = s / c ** (l / k) * cmath.exp(-1j * l * (a * sc.psi + sc.phi))
        alpha = radial * c ** (1 + l / k) * cmath.exp(1j * l * (sc.psi + sc.phi))
        return ChartPoint(ChartId.Z, (complex(z), complex(alpha)))
    if not sc.theta > 0:
        raise DomainError("the W chart needs theta > 0")
    w = c / s ** (k / l) * cmath.exp(1j * k * (a * sc.psi + sc.phi))
    beta = radial * s ** (1 + k / l) * cmath.exp(1j * k * (sc.psi - sc.phi))
    return ChartPoint(ChartId.W, (complex(w), complex(beta)))


def special_to_chart_array(x: np.ndarray, kp: WeightPair, target: ChartId, xp=np) -> tuple:
    """Vectorised chart map on arrays (..., 4) in (rho, theta, psi, phi) order.

    Returns (real, imag) parts stacked as (..., 4): (Re u, Im u, Re v, Im v).
    """
    k, l, a = kp.k, kp.l, kp.a
    rho, theta, psi, phi = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    c, s = xp.cos(theta / 2), xp.sin(theta / 2)
    radial = k * l * xp.sinh(rho / 2)
    if target is ChartId.Z:
        m1, p1 = s / c ** (l / k), -l * (a * psi + phi)
        m2, p2 = radial * c ** (1 + l / k), l * (psi + phi)
    else:
        m1, p1 = c / s ** (k / l), k * (a * psi + phi)
        m2, p2 = radial * s ** (1 + k / l), k * (psi - phi)
    return xp.stack([m1 * xp.cos(p1), m1 * xp.sin(p1), m2 * xp.cos(p2), m2 * xp.sin(p2)], axis=-1)


def period_lattice(kp: WeightPair, chart: ChartId = ChartId.Z) -> np.ndarray:
    """Generators (columns) of the (psi, phi) shifts acting trivially on M_{k,l}.

    A shift is trivial when it moves the chart coordinates by an element of
    the uniformizing group, i.e. its phase image lies in the lattice spanned
    by 2pi(1,0), 2pi(0,1) and 2pi(1/n,-1/n).
    """
    k, l, a = kp.k, kp.l, kp.a
    if chart is ChartId.Z:
        M, n = l * np.array([[-a, -1.0], [1.0, 1.0]]), k
    else:
        M, n = k * np.array([[a, 1.0], [1.0, -1.0]]), l
    L = 2 * pi * np.array([[1 / n, 0.0], [-1 / n, 1.0]])
    return np.linalg.solve(M, L)


def lattice_contains(basis: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    c = np.linalg.solve(basis, v)
    return bool(np.all(np.abs(c - np.round(c)) < tol))


def same_lattice(b1: np.ndarray, b2: np.ndarray, tol: float = 1e-9) -> bool:
    return all(lattice_contains(b1, b2[:, j], tol) for j in range(2)) and \
        all(lattice_contains(b2, b1[:, j], tol) for j in range(2))


def _canonical(u: np.ndarray, n: int) -> np.ndarray:
    lead = u[0] if abs(u[0]) > OVERLAP_TOL else u[1]
    sign = 1 if abs(u[0]) > OVERLAP_TOL else -1
    arg = np.angle(lead) % (2 * pi)
    j = int(np.floor(arg / (2 * pi / n)))
    eta = np.exp(-2j * pi * j / n)
    # diag(eta, 1/eta) lowers the first coordinate's argument by 2 pi j / n
    return np.array([u[0] * eta ** sign, u[1] / eta ** sign])


def blow_down(p: ChartPoint, kp: WeightPair) -> np.ndarray:
    """tau_{k,l}: M_{k,l} minus the zero section onto (C^2 / Z_{k+l}) minus 0.

    Returns the canonical representative of the Z_{k+l} orbit: the first
    nonzero coordinate has argument in [0, 2pi/(k+l)).
    """
    n = kp.order
    if p.chart is ChartId.Z:
        z, alpha = p.coords
        if abs(alpha) < OVERLAP_TOL:
            raise OnExceptionalSet("alpha = 0 lies on the zero section")
        u = np.array([alpha ** (kp.k / n), z * alpha ** (kp.l / n)])
    else:
        w, beta = p.coords
        if abs(beta) < OVERLAP_TOL:
            raise OnExceptionalSet("beta = 0 lies on the zero section")
        u = np.array([w * beta ** (kp.k / n), beta ** (kp.l / n)])
    return _canonical(u.astype(complex), n)


def blow_up(u, kp: WeightPair) -> ChartPoint:
    """Inverse of blow_down, landing in the Z chart when u1 != 0."""
    u1, u2 = complex(u[0]), complex(u[1])
    n = kp.order
    if abs(u1) > OVERLAP_TOL:
        alpha = u1 ** (n / kp.k)
        return ChartPoint(ChartId.Z, (u1 * u2 / alpha, alpha))
    if abs(u2) > OVERLAP_TOL:
        beta = u2 ** (n / kp.l)
        return ChartPoint(ChartId.W, (u1 * u2 / beta, beta))
    raise OnExceptionalSet("the origin of C^2/Z_{k+l} is the blown-up point")


def cone_distance(u, v, n: int) -> float:
    """Distance between Z_n orbits in C^2 under diag(eta, 1/eta)."""
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    best = np.inf
    for j in range(n):
        eta = np.exp(2j * pi * j / n)
        best = min(best, float(np.linalg.norm(u - np.array([eta * v[0], v[1] / eta]))))
    return best


def singular_points(kp: WeightPair) -> list[ChartPoint]:
    pts = []
    if kp.k > 1:
        pts.append(ChartPoint(ChartId.Z, (0j, 0j)))
    if kp.l > 1:
        pts.append(ChartPoint(ChartId.W, (0j, 0j)))
    return pts


def uniformizing_group_at(p: ChartPoint, kp: WeightPair) -> UniformizingGroup:
    """Group of the cone point at the origin of the Z chart (Z_k) or W chart (Z_l)."""
    if max(abs(c) for c in p.coords) > OVERLAP_TOL:
        raise NotSingular(f"{p} is not the origin of its chart")
    group = group_of(p.chart, kp)
    if group.order == 1:
        raise NotSingular(f"the origin of the {p.chart.value} is a smooth point for weights "
                          f"({kp.k}, {kp.l})")
    return group


# ------------------------------------------------- smooth uniformizing charts

def smooth_period_lattice(kp: WeightPair) -> np.ndarray:
    """Generators (columns) of the (psi, phi) periods making the M_{k,l} metric an orbifold metric.

    The Killing fields vanishing on theta = 0, theta = pi and rho = 0 are
    e1 = (1, -1), e2 = (1, 1) and v = (1, -a); each must have period exactly
    2 pi for the metric to be smooth along those loci.  In the (e1, e2) basis
    v = (l, k)/(k + l), so the lattice has index k + l over Z e1 + Z e2 and the
    corners rho = 0, theta in {0, pi} are cone points of orders k and l.
    """
    n = kp.order
    j = pow(kp.k, -1, n) if n > 1 else 0
    x = (j * kp.l) % n / n
    e1 = np.array([1.0, -1.0])
    e2 = np.array([1.0, 1.0])
    return 2 * pi * np.stack([e1, x * e1 + e2 / n], axis=1)


def cone_order(kp: WeightPair, u, w) -> float:
    """Index of Z u + Z w in the smooth lattice (the order of the corner group)."""
    L = smooth_period_lattice(kp)
    return abs(np.linalg.det(np.stack([u, w], axis=1)) / np.linalg.det(L))


def _weights(kp: WeightPair, chart: ChartId) -> tuple[tuple[float, float], tuple[float, float]]:
    """(p, q) phase weights of the two holomorphic chart coordinates."""
    k, l = kp.k, kp.l
    if chart is ChartId.Z:
        return (-(l - k) / (2 * k), -(l + k) / (2 * k)), ((l + k) / (2 * k), (l + k) / (2 * k))
    return ((l - k) / (2 * l), (l + k) / (2 * l)), ((l + k) / (2 * l), -(l + k) / (2 * l))


def torus_holomorphic(x, p: float, q: float, a: float, xp=np):
    """The J-holomorphic function with phase e^{i(p psi + q phi)}, as (Re, Im).

    Its modulus is sh(rho)^p tanh(rho/2)^(-a q) sin(theta)^p tan(theta/2)^(-q);
    this solves dF o J = i dF for the complex structure of the Kähler form.
    """
    rho, theta, psi, phi = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    logr = (p * xp.log(xp.sinh(rho)) - a * q * xp.log(xp.tanh(rho / 2))
            + p * xp.log(xp.sin(theta)) - q * xp.log(xp.tan(theta / 2)))
    mod, ph = xp.exp(logr), p * psi + q * phi
    return mod * xp.cos(ph), mod * xp.sin(ph)


def holomorphic_chart_array(x, kp: WeightPair, chart: ChartId, xp=np):
    """Smooth uniformizing coordinates (Re u, Im u, Re v, Im v) on arrays (..., 4).

    They satisfy the same relations z^k w^l = 1 and alpha z = beta w as the
    chart maps above, are holomorphic for the Kähler complex structure, and
    are single-valued on the smooth period lattice modulo the uniformizing
    group.
    """
    (p1, q1), (p2, q2) = _weights(kp, chart)
    u = torus_holomorphic(x, p1, q1, kp.a, xp)
    v = torus_holomorphic(x, p2, q2, kp.a, xp)
    return xp.stack([u[0], u[1], v[0], v[1]], axis=-1)


def holomorphic_chart(sc: SpecialCoords, kp: WeightPair, chart: ChartId) -> ChartPoint:
    r = holomorphic_chart_array(sc.as_array(), kp, chart)
    return ChartPoint(chart, (complex(r[0], r[1]), complex(r[2], r[3])))


def corner_generator(kp: WeightPair, chart: ChartId = ChartId.Z) -> np.ndarray:
    """A (psi, phi) period that winds once around the cone point of the chart."""
    return 2 * pi * (np.array([1.0, 1.0]) if chart is ChartId.Z else np.array([1.0, -1.0]))
