"""Convergence conditions, error-bound shape and the divergence construction.

* general knots: ``R * ||f|_N < 1`` with error shape ``R^{2N} ||f|_N^{N+1}``;
* concentric-sphere knots: ``R * max_j exp(-eta_j) / r_j < 1``;
* the divergent family ``phi^j_{k,1} = (C r_j)^k``, for which every mode
  polynomial collapses to the constant C^k because the Lagrange fundamental
  functions sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from polyharm.errors import BoundaryCaseError, DomainError
from polyharm.harmonics import ModeIndex, QuadratureRule, mode_count, mode_dimension, mode_offset
from polyharm.interp import (
    KnotSet,
    PolyharmonicInterpolant,
    interpolate_general,
    interpolate_spheres,
    l2_error_on_sphere,
    l2_norm_ball,
)
from polyharm.radial import BallFunction, DecayEstimate, RadialProfile, SeminormEstimate, SphereTrace, estimate_decay, seminorm


def theorem1_bound(R: float, N: int, seminorm_value: float) -> float:
    """Error-bound shape ``R^{2N} * s^{N+1}`` (the unspecified constant taken as 1)."""
    if seminorm_value < 0:
        raise DomainError(f"seminorm must be >= 0, got {seminorm_value}")
    return float(R) ** (2 * N) * float(seminorm_value) ** (N + 1)


@dataclass(frozen=True)
class Theorem1Report:
    R: float
    N: int
    seminorm_value: float
    product: float
    satisfied: bool
    bound_shape: float
    measured_errors: tuple
    max_error: float
    empirical_ratio: float


def _ratio(err: float, bound: float) -> float:
    if bound > 0.0:
        return err / bound
    return 0.0 if err == 0.0 else math.inf


def check_theorem1(
    R: float,
    N: int,
    seminorm_est: SeminormEstimate,
    interpolant: PolyharmonicInterpolant,
    f: BallFunction,
    radii_probe: Sequence[float],
    quadrature: QuadratureRule,
) -> Theorem1Report:
    """Evaluate the general-knot condition and compare measured errors with the bound shape."""
    if seminorm_est.N != N or interpolant.N != N:
        raise DomainError(f"seminorm (N={seminorm_est.N}) and interpolant (N={interpolant.N}) must use N={N}")
    s = seminorm_est.value
    product = R * s
    bound = theorem1_bound(R, N, s)
    errors = tuple((float(r), l2_error_on_sphere(f, interpolant, r, quadrature)) for r in radii_probe)
    max_error = max((e for _, e in errors), default=0.0)
    return Theorem1Report(
        R=float(R),
        N=int(N),
        seminorm_value=s,
        product=product,
        satisfied=product < 1.0,
        bound_shape=bound,
        measured_errors=errors,
        max_error=max_error,
        empirical_ratio=_ratio(max_error, bound),
    )


def sweep_theorem1(
    f: BallFunction,
    profiles: Dict[ModeIndex, RadialProfile],
    orders: Sequence[int],
    knots_for: Callable[[int], KnotSet],
    quadrature: QuadratureRule,
    radii_probe: Sequence[float],
    k_tail: Optional[int] = None,
) -> List[Theorem1Report]:
    """Run :func:`check_theorem1` for several orders on the same f and profiles."""
    k_max = max(m.k for m in profiles)
    reports = []
    for N in orders:
        h = interpolate_general(profiles, knots_for(N), n=f.n, R=f.R, k_max=k_max)
        est = seminorm(profiles, N, f.R, k_tail=k_tail)
        reports.append(check_theorem1(f.R, N, est, h, f, radii_probe, quadrature))
    return reports


# ---------------------------------------------------------------------------
# Concentric spheres
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Theorem2Report:
    R: float
    radii: tuple
    decays: tuple
    etas: tuple
    ratios: tuple
    M: float
    product: float
    satisfied: bool
    delta: float
    partial_sums: np.ndarray
    tail_ratio: float
    tail_ok: Optional[bool]


def _tail_ratio(increments: np.ndarray) -> float:
    if len(increments) < 2 or increments[-2] == 0.0:
        return 0.0
    return float(increments[-1] / increments[-2])


def _floored(trace: SphereTrace, floor: float, rel_floor: float) -> SphereTrace:
    c = trace.coefficients
    cut = max(floor, rel_floor * float(np.max(np.abs(c))))
    return SphereTrace(trace.radius, trace.n, trace.k_max, np.where(np.abs(c) > cut, c, 0.0))


def check_theorem2(
    R: float,
    traces: Sequence[SphereTrace],
    radii: Optional[Sequence[float]] = None,
    floor: float = 1e-300,
    rel_floor: float = 0.0,
    margin: float = 0.05,
) -> Theorem2Report:
    """Evaluate ``R * max_j exp(-eta_j) / r_j < 1`` from fitted decay rates.

    The interpolant's ball-norm partial sums are attached; when the condition
    holds, the last increment ratio must not exceed ``(R M)^2 + margin``.
    Coefficients under the decay-fit floor are zeroed before interpolating
    so that noise does not masquerade as a slowly decaying tail.
    """
    traces = [_floored(tr, floor, rel_floor) for tr in traces]
    radii = [tr.radius for tr in traces] if radii is None else [float(r) for r in radii]
    decays = [estimate_decay(tr, floor=floor, rel_floor=rel_floor) for tr in traces]
    ratios = [d.ratio(r) for d, r in zip(decays, radii)]
    M = max(ratios)
    product = R * M
    x = np.square(radii)
    delta = float(np.min(np.diff(x))) if len(x) > 1 else math.inf
    h = interpolate_spheres(traces, radii=radii, R=R)
    norm = l2_norm_ball(h)
    tail = _tail_ratio(norm.per_degree)
    satisfied = product < 1.0
    return Theorem2Report(
        R=float(R),
        radii=tuple(radii),
        decays=tuple(decays),
        etas=tuple(d.eta for d in decays),
        ratios=tuple(ratios),
        M=M,
        product=product,
        satisfied=satisfied,
        delta=delta,
        partial_sums=norm.partial_sums,
        tail_ratio=tail,
        tail_ok=(tail <= product * product + margin) if satisfied else None,
    )


def geometric_traces(
    a: float, radii: Sequence[float], k_max: int, n: int = 3, all_ell: bool = False
) -> List[SphereTrace]:
    """Traces with ``phi^j_{k,ell} = (a r_j)^k`` on ell = 1 (or every ell)."""
    out = []
    for r in radii:
        coeffs = np.zeros(mode_count(n, k_max))
        for k in range(k_max + 1):
            start = mode_offset(n, k)
            stop = start + (mode_dimension(n, k) if all_ell else 1)
            coeffs[start:stop] = (a * r) ** k
        out.append(SphereTrace(radius=float(r), n=n, k_max=k_max, coefficients=coeffs))
    return out


# ---------------------------------------------------------------------------
# Divergence construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DivergenceDemo:
    C: float
    R: float
    N: int
    n: int
    radii: tuple
    k_max: int
    all_ell: bool
    per_mode_integrals: np.ndarray
    increments: np.ndarray
    partial_sums: np.ndarray
    closed_form_terms: np.ndarray
    lower_bound_terms: np.ndarray
    increasing_from: Optional[int]
    tail_ratio: float
    verdict: str


def _increasing_from(increments: np.ndarray) -> Optional[int]:
    """Smallest k0 such that increments[k0:] is strictly increasing (None if only the last term qualifies)."""
    k0 = len(increments) - 1
    while k0 > 0 and increments[k0 - 1] < increments[k0]:
        k0 -= 1
    return k0 if k0 < len(increments) - 1 else None


def divergence_demo(
    C: float,
    R: float,
    N: int,
    radii: Sequence[float],
    k_max: int,
    n: int = 3,
    all_ell: bool = False,
    growth_threshold: float = 1e6,
) -> DivergenceDemo:
    """Build the interpolant of ``phi^j_{k,1} = (C r_j)^k`` and track its ball-norm series.

    Verdicts: ``diverging`` when C R > 1, the partial sum exceeds
    ``growth_threshold * S_0`` and increments increase strictly from some
    degree on; ``converging`` when C R < 1 and the last increment ratio is
    below one; ``inconclusive`` otherwise (e.g. k_max too small).
    """
    C, R = float(C), float(R)
    if C <= 0.0:
        raise DomainError(f"C must be positive, got {C}")
    if math.isclose(C * R, 1.0, rel_tol=1e-12, abs_tol=0.0):
        raise BoundaryCaseError("C * R = 1 is the unresolved boundary case")
    knots = KnotSet.spheres(radii)
    if knots.N != N:
        raise DomainError(f"{knots.N} radii given for order N={N}")
    traces = geometric_traces(C, knots.radii, k_max, n=n, all_ell=all_ell)
    h = interpolate_spheres(traces, R=R)
    norm = l2_norm_ball(h)

    k = np.arange(k_max + 1, dtype=float)
    base = C ** (2 * k) * R ** (2 * k + 1) / (2 * k + 1)
    mult = np.array([mode_dimension(n, kk) if all_ell else 1 for kk in range(k_max + 1)], dtype=float)
    closed = mult * base
    lower = k ** (n - 2) * base

    increments = norm.per_degree
    partial = norm.partial_sums
    inc_from = _increasing_from(increments)
    tail = _tail_ratio(increments)
    if C * R > 1.0:
        grew = partial[-1] > growth_threshold * partial[0]
        verdict = "diverging" if grew and inc_from is not None else "inconclusive"
    else:
        verdict = "converging" if k_max >= 1 and tail < 1.0 else "inconclusive"
    return DivergenceDemo(
        C=C,
        R=R,
        N=int(N),
        n=n,
        radii=tuple(float(r) for r in knots.radii),
        k_max=int(k_max),
        all_ell=all_ell,
        per_mode_integrals=norm.per_mode,
        increments=increments,
        partial_sums=partial,
        closed_form_terms=closed,
        lower_bound_terms=lower,
        increasing_from=inc_from,
        tail_ratio=tail,
        verdict=verdict,
    )
