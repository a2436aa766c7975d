"""Built-in analytic test functions on the ball."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

import numpy as np

from polyharm.errors import DomainError
from polyharm.harmonics import HarmonicBasis, ModeIndex, mode_position
from polyharm.radial import BallFunction


def constant(n: int, R: float, value: float = 1.0) -> BallFunction:
    value = float(value)
    return BallFunction(n, float(R), lambda x: np.full(len(x), value))


def zero(n: int, R: float) -> BallFunction:
    return constant(n, R, 0.0)


def gaussian(n: int, R: float, center: Optional[Sequence[float]] = None, scale: float = 1.0) -> BallFunction:
    """exp(-scale * |x - center|^2); centred at the origin by default (a single radial mode)."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    if c.shape != (n,):
        raise DomainError(f"gaussian center needs {n} coordinates, got {c.tolist()}")
    scale = float(scale)

    def f(x):
        d = x - c
        return np.exp(-scale * np.sum(d * d, axis=1))

    return BallFunction(n, float(R), f)


def exp_linear(n: int, R: float, direction: Sequence[float]) -> BallFunction:
    """exp(a . x)."""
    a = np.asarray(direction, dtype=float)
    if a.shape != (n,):
        raise DomainError(f"exp-linear direction needs {n} coordinates, got {a.tolist()}")
    return BallFunction(n, float(R), lambda x: np.exp(x @ a))


def _mode_sum(n: int, R: float, k_max: int, radial) -> BallFunction:
    """sum_p radial(p, r) * Y_p(theta) with ``radial`` returning (len(r), M) values."""
    basis = HarmonicBasis(n, k_max)

    def f(x):
        x = np.atleast_2d(x)
        r = np.linalg.norm(x, axis=1)
        theta = np.array(x, dtype=float)
        at_origin = r == 0.0
        theta[at_origin] = 0.0
        theta[at_origin, -1] = 1.0
        y = basis.evaluate(theta)
        return np.sum(y * radial(r), axis=1)

    return BallFunction(n, float(R), f)


def finite_mode(n: int, R: float, coefficients: Mapping[tuple, Sequence[float]]) -> BallFunction:
    """sum over listed modes of g_{k,ell}(r^2) r^k Y_{k,ell}(theta).

    ``coefficients[(k, ell)]`` lists the ascending monomial coefficients of
    g_{k,ell}; with all lists of length <= N the function is polyharmonic of
    order N.
    """
    table = {ModeIndex(*m): np.asarray(c, dtype=float) for m, c in coefficients.items()}
    k_max = max((m.k for m in table), default=0)
    width = max((len(c) for c in table.values()), default=1)
    M = HarmonicBasis(n, k_max).modes
    coeffs = np.zeros((len(M), width))
    degrees = np.array([m.k for m in M])
    for m, c in table.items():
        coeffs[mode_position(n, m), : len(c)] = c

    def radial(r):
        t = r * r
        g = np.zeros((len(r), len(M)))
        for j in range(width - 1, -1, -1):
            g = g * t[:, None] + coeffs[None, :, j]
        return g * r[:, None] ** degrees[None, :]

    return _mode_sum(n, R, k_max, radial)


def example_geometric(n: int, R: float, C: float, k_max: int) -> BallFunction:
    """sum_{k <= k_max} (C r)^k Y_{k,1}(theta): every sphere trace has phi_{k,1} = (C r)^k."""
    if n not in (2, 3):
        HarmonicBasis(n, k_max)  # raises the usual dimension error
    C = float(C)
    k_max = int(k_max)

    # Y_{k,1} is sqrt(2k+1) P_k(cos polar angle) on S^2 and sqrt(2) cos(k phi)
    # on the circle, so the sum runs a three-term recurrence per point.
    def f(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        safe = np.where(r > 0.0, r, 1.0)
        c = x[:, -1] / safe if n == 3 else x[:, 0] / safe
        c = np.where(r > 0.0, np.clip(c, -1.0, 1.0), 1.0)
        cr = C * r
        total = np.ones_like(r)
        prev, cur = np.ones_like(r), c
        power = np.ones_like(r)
        for k in range(1, k_max + 1):
            power = power * cr
            if n == 3:
                total = total + power * np.sqrt(2.0 * k + 1.0) * cur
                prev, cur = cur, ((2 * k + 1) * c * cur - k * prev) / (k + 1)
            else:
                total = total + power * np.sqrt(2.0) * cur
                prev, cur = cur, 2.0 * c * cur - prev
        return total

    return BallFunction(n, float(R), f)
