"""Real spherical harmonics on S^{n-1} (n = 2, 3) and matching sphere quadrature.

Harmonics are orthonormal for the *normalized* scalar product

    <u, v> = (1 / |S^{n-1}|) * integral over S^{n-1} of u * v,

so the constant function has unit norm and the quadrature weights sum to one.
Within degree k the index ell runs over 1..d_k in the order

    ell = 1       -> order 0
    ell = 2m      -> cos(m * phi) component
    ell = 2m + 1  -> sin(m * phi) component

for n = 3; for n = 2 the same layout holds with only m = k present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from polyharm.errors import DomainError, UnsupportedDimensionError

SUPPORTED_DIMENSIONS = (2, 3)
DEFAULT_MAX_DEGREE = 64


class ModeIndex(NamedTuple):
    """One spherical-harmonic channel (k, ell) with 1 <= ell <= d_k."""

    k: int
    ell: int


def mode_dimension(n: int, k: int) -> int:
    """Dimension d_k of the space of degree-k spherical harmonics in R^n.

    Uses ``C(n+k-1, k) - C(n+k-3, k-2)``, i.e. homogeneous polynomials of
    degree k minus those of degree k-2 (the image of multiplication by |x|^2).

    Examples
    --------
    >>> mode_dimension(3, 2)
    5
    >>> mode_dimension(2, 5)
    2
    """
    n = int(n)
    k = int(k)
    if n < 2:
        raise DomainError(f"dimension n must be >= 2, got {n}")
    if k < 0:
        raise DomainError(f"degree k must be >= 0, got {k}")
    total = math.comb(n + k - 1, k)
    if k >= 2:
        total -= math.comb(n + k - 3, k - 2)
    return total


def mode_offset(n: int, k: int) -> int:
    """Number of modes with degree strictly below k."""
    if n == 3:
        return k * k
    if n == 2:
        return 0 if k == 0 else 2 * k - 1
    return sum(mode_dimension(n, j) for j in range(k))


def mode_count(n: int, k_max: int) -> int:
    """Number of modes with degree <= k_max."""
    return mode_offset(n, k_max + 1)


def mode_position(n: int, mode: ModeIndex) -> int:
    """Zero-based position of ``mode`` in the canonical ascending (k, ell) order."""
    k, ell = int(mode[0]), int(mode[1])
    d = mode_dimension(n, k)
    if not 1 <= ell <= d:
        raise DomainError(f"ell={ell} outside 1..{d} for n={n}, k={k}")
    return mode_offset(n, k) + ell - 1


def iter_modes(n: int, k_max: int):
    for k in range(k_max + 1):
        for ell in range(1, mode_dimension(n, k) + 1):
            yield ModeIndex(k, ell)


def _check_dimension(n: int) -> int:
    if n not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimensionError(
            f"dimension n={n} not supported (basis and quadrature exist for n in {SUPPORTED_DIMENSIONS})"
        )
    return n


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights on the unit sphere for the normalized scalar product.

    ``weights.sum() == 1``; products of harmonics with total degree up to
    ``exactness_degree`` are integrated exactly.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * np.asarray(values, dtype=float)))


def _azimuth_count(exactness_degree: int) -> int:
    # smallest even count > exactness; resolves trigonometric degree <= exactness
    return exactness_degree + 2 - (exactness_degree % 2)


def build_quadrature(n: int, exactness_degree: int) -> QuadratureRule:
    """Quadrature on S^{n-1} exact for polynomials of degree <= ``exactness_degree``.

    n = 2 uses equispaced angles with equal weights. n = 3 is a product rule:
    Gauss-Legendre in cos(polar angle) times equispaced azimuth.
    """
    _check_dimension(n)
    exactness_degree = int(exactness_degree)
    if exactness_degree < 0:
        raise DomainError(f"exactness_degree must be >= 0, got {exactness_degree}")
    m = _azimuth_count(exactness_degree)
    phi = 2.0 * np.pi * np.arange(m) / m
    if n == 2:
        nodes = np.column_stack([np.cos(phi), np.sin(phi)])
        weights = np.full(m, 1.0 / m)
    else:
        p = exactness_degree // 2 + 1
        x, w = np.polynomial.legendre.leggauss(p)
        s = np.sqrt(1.0 - x * x)
        nodes = np.column_stack(
            [
                np.repeat(s, m) * np.tile(np.cos(phi), p),
                np.repeat(s, m) * np.tile(np.sin(phi), p),
                np.repeat(x, m),
            ]
        )
        # renormalize away the last few ulps so both invariants hold tightly
        nodes /= np.linalg.norm(nodes, axis=1)[:, None]
        weights = np.repeat(w / 2.0, m) / m
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(n=n, nodes=nodes, weights=weights, exactness_degree=exactness_degree)


SphereFunction = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, Sequence[float]]


def _values_on(u: SphereFunction, nodes: np.ndarray) -> np.ndarray:
    if callable(u):
        return np.asarray(u(nodes), dtype=float)
    values = np.asarray(u, dtype=float)
    if values.ndim == 0:
        return np.full(len(nodes), float(values))
    return values


def inner_product(u: SphereFunction, v: SphereFunction, q: QuadratureRule) -> float:
    """Normalized scalar product of two sphere functions under ``q``.

    ``u`` and ``v`` are callables taking an ``(m, n)`` array of unit vectors,
    or arrays of values already sampled at ``q.nodes``.
    """
    return q.integrate(_values_on(u, q.nodes) * _values_on(v, q.nodes))


# ---------------------------------------------------------------------------
# Basis
# ---------------------------------------------------------------------------


def _unit(points: np.ndarray, n: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != n:
        raise DomainError(f"expected points with {n} coordinates, got shape {pts.shape}")
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms == 0.0):
        raise DomainError("direction undefined for the zero vector")
    return pts / norms[:, None]


@dataclass(frozen=True)
class HarmonicBasis:
    """Real orthonormal spherical harmonics Y_{k,ell} for k <= k_max."""

    n: int
    k_max: int
    modes: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(iter_modes(self.n, self.k_max)))

    def __len__(self) -> int:
        return len(self.modes)

    def position(self, mode: ModeIndex) -> int:
        if mode[0] > self.k_max:
            raise DomainError(f"mode {tuple(mode)} beyond k_max={self.k_max}")
        return mode_position(self.n, mode)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Degree k of every mode, in canonical order."""
        return np.array([m.k for m in self.modes], dtype=int)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Matrix ``Y[i, p] = Y_{modes[p]}(points[i] / |points[i]|)``."""
        theta = _unit(points, self.n)
        if self.n == 2:
            return _evaluate_circle(theta, self.k_max)
        return _evaluate_sphere(theta, self.k_max)

    def function(self, mode: ModeIndex) -> Callable[[np.ndarray], np.ndarray]:
        """Single-mode evaluator theta -> Y_{k,ell}(theta)."""
        mode = ModeIndex(*mode)
        if mode.k > self.k_max:
            raise DomainError(f"mode {tuple(mode)} beyond k_max={self.k_max}")
        sub = HarmonicBasis(self.n, mode.k)
        pos = sub.position(mode)

        def y(points: np.ndarray) -> np.ndarray:
            return sub.evaluate(points)[:, pos]

        return y


def _evaluate_circle(theta: np.ndarray, k_max: int) -> np.ndarray:
    phi = np.arctan2(theta[:, 1], theta[:, 0])
    out = np.empty((len(theta), mode_count(2, k_max)))
    out[:, 0] = 1.0
    root2 = math.sqrt(2.0)
    for k in range(1, k_max + 1):
        out[:, 2 * k - 1] = root2 * np.cos(k * phi)
        out[:, 2 * k] = root2 * np.sin(k * phi)
    return out


def _evaluate_sphere(theta: np.ndarray, k_max: int) -> np.ndarray:
    # Legendre functions scaled so that (1/2) * int_{-1}^{1} P^2 dx = 1,
    # no Condon-Shortley phase; order-m harmonics get an extra sqrt(2).
    # The recurrence runs in k with every order m handled at once.
    x = np.clip(theta[:, 2], -1.0, 1.0)
    s = np.hypot(theta[:, 0], theta[:, 1])
    phi = np.arctan2(theta[:, 1], theta[:, 0])
    npts = len(theta)
    m = np.arange(k_max + 1)
    diag = np.empty((k_max + 1, npts))
    diag[0] = 1.0
    for j in range(1, k_max + 1):
        diag[j] = math.sqrt((2.0 * j + 1.0) / (2.0 * j)) * s * diag[j - 1]
    mphi = m[1:, None] * phi[None, :]
    cos_m = math.sqrt(2.0) * np.cos(mphi)
    sin_m = math.sqrt(2.0) * np.sin(mphi)

    out = np.empty((mode_count(3, k_max), npts))
    prev2 = np.zeros((k_max + 1, npts))
    prev = np.zeros((k_max + 1, npts))
    for k in range(k_max + 1):
        cur = np.empty((k_max + 1, npts))
        if k >= 2:
            mm = m[: k - 1].astype(float)
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - mm * mm))
            b = np.sqrt((2.0 * k + 1.0) * (k - 1.0 - mm) * (k - 1.0 + mm) / ((2.0 * k - 3.0) * (k * k - mm * mm)))
            cur[: k - 1] = a[:, None] * x * prev[: k - 1] - b[:, None] * prev2[: k - 1]
        if k >= 1:
            cur[k - 1] = math.sqrt(2.0 * k + 1.0) * x * diag[k - 1]
        cur[k] = diag[k]
        base = k * k
        out[base] = cur[0]
        out[base + 1 : base + 2 * k + 1 : 2] = cur[1 : k + 1] * cos_m[:k]
        out[base + 2 : base + 2 * k + 1 : 2] = cur[1 : k + 1] * sin_m[:k]
        prev2, prev = prev, cur
    return out.T


def build_basis(n: int, k_max: int, max_degree: int = DEFAULT_MAX_DEGREE) -> HarmonicBasis:
    """Orthonormal real spherical harmonics on S^{n-1} up to degree ``k_max``.

    Parameters
    ----------
    n : int
        Ambient dimension, 2 or 3.
    k_max : int
        Highest degree.
    max_degree : int, optional
        Safety cap on ``k_max`` (default 64); the Legendre recurrence is
        well conditioned well beyond it, but quadrature cost grows as k^3.

    Returns
    -------
    HarmonicBasis
    """
    _check_dimension(n)
    k_max = int(k_max)
    if k_max < 0:
        raise DomainError(f"k_max must be >= 0, got {k_max}")
    if k_max > max_degree:
        raise DomainError(f"k_max={k_max} exceeds the cap {max_degree}")
    return HarmonicBasis(n=n, k_max=k_max)


def gram_matrix(basis: HarmonicBasis, q: QuadratureRule) -> np.ndarray:
    """Gram matrix of the basis under the quadrature scalar product."""
    y = basis.evaluate(q.nodes)
    return (y * q.weights[:, None]).T @ y
