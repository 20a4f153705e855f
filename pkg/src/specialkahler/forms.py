"""Exterior algebra on coordinate charts.

A p-form in dimension n is stored by its components on strictly increasing
multi-indices in lexicographic order, so its coefficient array has shape
``(..., C(n, p))`` with arbitrary leading batch axes.  Index tables for the
wedge product, exterior derivative and Hodge star are built once per
``(n, p)`` and cached.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from math import comb
from typing import Callable, Optional

import numpy as np

from .errors import SingularMetric


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def index_of(n: int, p: int) -> dict[tuple[int, ...], int]:
    return {I: a for a, I in enumerate(multi_indices(n, p))}


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    seq = list(seq)
    if len(set(seq)) < len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def basis_form(n: int, *indices: int) -> np.ndarray:
    """Coefficients of dx^{i1} ^ ... ^ dx^{ip} (indices in any order)."""
    p = len(indices)
    out = np.zeros(comb(n, p))
    s = perm_sign(indices)
    if s:
        out[index_of(n, p)[tuple(sorted(indices))]] = s
    return out


@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int) -> np.ndarray:
    W = np.zeros((comb(n, p), comb(n, q), comb(n, p + q)))
    target = index_of(n, p + q)
    for a, I in enumerate(multi_indices(n, p)):
        for b, J in enumerate(multi_indices(n, q)):
            s = perm_sign(I + J)
            if s:
                W[a, b, target[tuple(sorted(I + J))]] = s
    return W


def wedge(a: np.ndarray, b: np.ndarray, n: int, p: int, q: int) -> np.ndarray:
    if p + q > n:
        return np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (0,))
    return np.einsum("...i,...j,ijk->...k", a, b, _wedge_table(n, p, q))


@lru_cache(maxsize=None)
def _d_table(n: int, p: int) -> np.ndarray:
    # d(f dx^I) = df ^ dx^I and dx^j ^ dx^I = (-1)^r dx^K where j sits at slot r of K
    D = np.zeros((comb(n, p), n, comb(n, p + 1)))
    source = index_of(n, p)
    for c, K in enumerate(multi_indices(n, p + 1)):
        for r, j in enumerate(K):
            I = K[:r] + K[r + 1:]
            D[source[I], j, c] = (-1) ** r
    return D


def d_from_jacobian(jac: np.ndarray, n: int, p: int) -> np.ndarray:
    """Exterior derivative from partials ``jac[..., I, j] = d_j a_I``."""
    return np.einsum("...aj,ajc->...c", jac, _d_table(n, p))


@lru_cache(maxsize=None)
def _full_table(n: int, p: int) -> np.ndarray:
    P = np.zeros((n,) * p + (comb(n, p),))
    for a, I in enumerate(multi_indices(n, p)):
        for perm in permutations(range(p)):
            J = tuple(I[k] for k in perm)
            P[J + (a,)] = perm_sign(perm)
    return P


def to_full(a: np.ndarray, n: int, p: int) -> np.ndarray:
    """Antisymmetric tensor ``T[..., i1, ..., ip]`` with T_I = a_I on sorted I."""
    return np.tensordot(a, _full_table(n, p), axes=([-1], [-1]))


def from_full(T: np.ndarray, n: int, p: int) -> np.ndarray:
    idx = np.array(multi_indices(n, p)).T
    return T[(Ellipsis,) + tuple(idx)] if p else T[..., None]


def transform_full(T: np.ndarray, M: np.ndarray, p: int) -> np.ndarray:
    """Contract every tensor slot of ``T`` with ``M``: out_{i..} = M_{i j} ... T_{j..}.

    ``T`` has shape (B..., n^p), ``M`` shape (B..., m, n); batch axes broadcast.
    """
    if p == 0:
        return T
    letters = string.ascii_letters
    src = letters[:p]
    dst = letters[p:2 * p]
    ops = [f"...{dst[k]}{src[k]}" for k in range(p)]
    spec = ",".join(ops + [f"...{src}"]) + f"->...{dst}"
    return np.einsum(spec, *([M] * p), T, optimize=True)


def pullback_linear(a: np.ndarray, A: np.ndarray, n: int, p: int) -> np.ndarray:
    """Pullback of a constant-coefficient p-form under the linear map y = A x."""
    T = to_full(a, n, p)
    return from_full(transform_full(T, np.swapaxes(A, -1, -2), p), A.shape[-1], p)


def raise_indices(a: np.ndarray, g: np.ndarray, n: int, p: int) -> np.ndarray:
    ginv = np.linalg.inv(g)
    return from_full(transform_full(to_full(a, n, p), ginv, p), n, p)


@lru_cache(maxsize=None)
def _star_table(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    source = index_of(n, p)
    comp, sign = [], []
    for J in multi_indices(n, n - p):
        I = tuple(i for i in range(n) if i not in J)
        comp.append(source[I])
        sign.append(perm_sign(I + J))
    return np.array(comp, dtype=int), np.array(sign, dtype=float)


def _sqrt_det(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if np.any(det <= 0):
        raise SingularMetric("metric is not positive definite")
    return np.sqrt(det)


def hodge_star(a: np.ndarray, g: np.ndarray, n: int, p: int, orientation: int = 1) -> np.ndarray:
    """Riemannian Hodge star, normalised so that a ^ *b = <a, b> vol."""
    up = raise_indices(a, g, n, p)
    comp, sign = _star_table(n, p)
    return orientation * _sqrt_det(g)[..., None] * sign * up[..., comp]


def inner(a: np.ndarray, b: np.ndarray, g: np.ndarray, n: int, p: int) -> np.ndarray:
    return np.sum(a * raise_indices(b, g, n, p), axis=-1)


def norm(a: np.ndarray, g: np.ndarray, n: int, p: int) -> np.ndarray:
    return np.sqrt(np.maximum(inner(a, a, g, n, p), 0.0))


def interior(v: np.ndarray, a: np.ndarray, n: int, p: int) -> np.ndarray:
    """Contraction of the vector ``v`` into the first slot of ``a``."""
    rest = string.ascii_letters[:p - 1]
    T = np.einsum(f"...z,...z{rest}->...{rest}", v, to_full(a, n, p))
    return from_full(T, n, p - 1)


def embed(a: np.ndarray, n: int, p: int, axes: tuple[int, ...], m: int) -> np.ndarray:
    """Push a p-form on R^n into R^m, coordinate i going to axis ``axes[i]``.

    ``axes`` need not be increasing; reordering signs are applied.
    """
    out = np.zeros(a.shape[:-1] + (comb(m, p),))
    target = index_of(m, p)
    for c, I in enumerate(multi_indices(n, p)):
        J = tuple(axes[i] for i in I)
        s = perm_sign(J)
        out[..., target[tuple(sorted(J))]] += s * a[..., c]
    return out


@dataclass(frozen=True)
class DifferentialForm:
    """A p-form field on an n-dimensional chart.

    ``coeffs`` maps points of shape (..., dim) to coefficients (..., C(dim, degree)).
    """

    dim: int
    degree: int
    coeffs: Callable[[np.ndarray], np.ndarray]
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x) -> np.ndarray:
        return self.coeffs(np.asarray(x, dtype=float))

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        assert (self.dim, self.degree) == (other.dim, other.degree)
        return DifferentialForm(self.dim, self.degree, lambda x: self(x) + other(x), self.domain)

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        assert (self.dim, self.degree) == (other.dim, other.degree)
        return DifferentialForm(self.dim, self.degree, lambda x: self(x) - other(x), self.domain)

    def scale(self, c: float) -> "DifferentialForm":
        return DifferentialForm(self.dim, self.degree, lambda x: c * self(x), self.domain)

    def wedge(self, other: "DifferentialForm") -> "DifferentialForm":
        n, p, q = self.dim, self.degree, other.degree
        return DifferentialForm(n, p + q, lambda x: wedge(self(x), other(x), n, p, q), self.domain)


def constant_form(n: int, p: int, coeffs) -> DifferentialForm:
    c = np.asarray(coeffs, dtype=float)
    return DifferentialForm(n, p, lambda x: np.broadcast_to(c, np.shape(x)[:-1] + c.shape).copy())
