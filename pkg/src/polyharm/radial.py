"""Radial mode profiles of functions on the ball and analyticity diagnostics.

A smooth f on B_R splits as

    f(r theta) = sum_{k, ell} f_{k,ell}(r^2) r^k Y_{k,ell}(theta),

where the sphere-trace coefficient at radius r is
``phi_{k,ell}(r) = <f(r .), Y_{k,ell}>`` and the profile is
``f_{k,ell}(t) = phi_{k,ell}(sqrt t) / t^{k/2}``.
"""

from __future__ import annotations

import csv
import math
import weakref
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np
from numpy.polynomial import Chebyshev

from polyharm._parallel import ordered_map
from polyharm.errors import (
    DomainError,
    IllConditionedDerivativeError,
    InconsistentInputError,
    InsufficientSamplesError,
    ZeroTraceError,
)
from polyharm.harmonics import (
    HarmonicBasis,
    ModeIndex,
    QuadratureRule,
    mode_count,
    mode_dimension,
    mode_offset,
    mode_position,
)

DEFAULT_N_CHEB = 32
UNDERFLOW_FLOOR = 1e-300
# Noise level of trace coefficients, as a fraction of the sphere's L2 norm.
TRACE_NOISE = 1e-14
# Noise level assumed for exactly evaluated profiles, relative to max |g|.
EXACT_NOISE = 1e-15
# Degrees below this fraction of the peak are ignored by decay fits on traces.
DECAY_REL_FLOOR = 1e-13
_RADIUS_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Functions on the ball
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallFunction:
    """A function on the closed ball of radius R in R^n.

    ``func`` maps an ``(m, n)`` array of points to ``m`` values.
    """

    n: int
    R: float
    func: Callable[[np.ndarray], np.ndarray]

    def _check_radius(self, r: float) -> float:
        r = float(r)
        if r < 0.0 or r > self.R * (1.0 + _RADIUS_SLACK):
            raise DomainError(f"radius {r!r} outside [0, R={self.R!r}]")
        return r

    def on_sphere(self, r: float, nodes: np.ndarray) -> np.ndarray:
        """Values of f at ``r * nodes``."""
        r = self._check_radius(r)
        return np.asarray(self.func(r * np.asarray(nodes, dtype=float)), dtype=float).reshape(len(nodes))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.atleast_2d(points)), dtype=float)


@dataclass(frozen=True, eq=False)
class SampledBallFunction(BallFunction):
    """Ball function known only on a radius x quadrature-node grid."""

    radii: np.ndarray = field(default_factory=lambda: np.empty(0))
    samples: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    nodes: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def on_sphere(self, r: float, nodes: np.ndarray) -> np.ndarray:
        r = self._check_radius(r)
        hits = np.flatnonzero(np.isclose(self.radii, r, rtol=1e-12, atol=1e-15))
        if len(hits) == 0:
            raise DomainError(f"radius {r!r} not among the sampled radii")
        nodes = np.asarray(nodes, dtype=float)
        if nodes.shape != self.nodes.shape or not np.allclose(nodes, self.nodes, atol=1e-13):
            raise InconsistentInputError("sampled function queried on nodes other than its quadrature nodes")
        return self.samples[hits[0]].copy()

    @classmethod
    def from_csv(cls, path, n: int, R: float, quadrature: QuadratureRule) -> "SampledBallFunction":
        """Read samples from a CSV with header ``r,node_index,f_value``.

        ``node_index`` refers to ``quadrature.nodes``; every radius must list
        every node exactly once.
        """
        table: Dict[float, Dict[int, float]] = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"r", "node_index", "f_value"} - set(reader.fieldnames or ())
            if missing:
                raise InconsistentInputError(f"{path}: missing columns {sorted(missing)}")
            for line, row in enumerate(reader, start=2):
                try:
                    r = float(row["r"])
                    i = int(row["node_index"])
                    v = float(row["f_value"])
                except ValueError as exc:
                    raise InconsistentInputError(f"{path}:{line}: {exc}") from None
                table.setdefault(r, {})[i] = v
        m = len(quadrature)
        radii = np.array(sorted(table))
        samples = np.empty((len(radii), m))
        for a, r in enumerate(radii):
            row = table[r]
            if sorted(row) != list(range(m)):
                raise InconsistentInputError(f"{path}: radius {r!r} does not cover node indices 0..{m - 1}")
            samples[a] = [row[i] for i in range(m)]
        if len(radii) and radii[-1] > R * (1.0 + _RADIUS_SLACK):
            raise DomainError(f"{path}: sample radius {radii[-1]!r} exceeds R={R!r}")

        def unsampled(points):
            raise DomainError("sampled function has no values off its grid")

        return cls(n=n, R=float(R), func=unsampled, radii=radii, samples=samples, nodes=np.array(quadrature.nodes))


# ---------------------------------------------------------------------------
# Sphere traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SphereTrace:
    """Harmonic coefficients of theta -> f(r theta) for all modes with k <= k_max."""

    radius: float
    n: int
    k_max: int
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.shape != (mode_count(self.n, self.k_max),):
            raise InconsistentInputError(
                f"expected {mode_count(self.n, self.k_max)} coefficients for n={self.n}, k_max={self.k_max}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise InconsistentInputError("trace coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    def coefficient(self, mode: ModeIndex) -> float:
        return float(self.coefficients[mode_position(self.n, mode)])

    def degree_magnitudes(self) -> np.ndarray:
        """``max_ell |phi_{k,ell}|`` for k = 0..k_max."""
        out = np.empty(self.k_max + 1)
        for k in range(self.k_max + 1):
            start = mode_offset(self.n, k)
            out[k] = np.max(np.abs(self.coefficients[start : start + mode_dimension(self.n, k)]))
        return out

    def denoised(self, rel: float = TRACE_NOISE) -> "SphereTrace":
        """Copy with coefficients at or below ``rel`` times the trace's L2 norm set to zero."""
        c = self.coefficients
        cut = rel * float(np.sqrt(np.sum(c * c)))
        return SphereTrace(self.radius, self.n, self.k_max, np.where(np.abs(c) > cut, c, 0.0))

    @classmethod
    def from_mapping(cls, n: int, radius: float, k_max: int, values: Mapping) -> "SphereTrace":
        """Build a trace from ``{(k, ell): value}``; unlisted modes are zero."""
        coeffs = np.zeros(mode_count(n, k_max))
        for mode, v in values.items():
            coeffs[mode_position(n, ModeIndex(*mode))] = v
        return cls(radius=float(radius), n=n, k_max=k_max, coefficients=coeffs)


_projectors: "weakref.WeakKeyDictionary[QuadratureRule, dict]" = weakref.WeakKeyDictionary()


def _projector(basis: HarmonicBasis, q: QuadratureRule) -> np.ndarray:
    """Weighted basis matrix ``w_i * Y_p(theta_i)``, cached per quadrature rule."""
    if basis.n != q.n:
        raise InconsistentInputError(f"basis dimension {basis.n} != quadrature dimension {q.n}")
    if q.exactness_degree < 2 * basis.k_max:
        raise InconsistentInputError(
            f"quadrature exactness {q.exactness_degree} < 2*k_max = {2 * basis.k_max}"
        )
    per_rule = _projectors.setdefault(q, {})
    mat = per_rule.get(basis.k_max)
    if mat is None:
        mat = basis.evaluate(q.nodes) * q.weights[:, None]
        mat.setflags(write=False)
        per_rule[basis.k_max] = mat
    return mat


def sphere_trace_coefficients(
    f: BallFunction, r: float, basis: HarmonicBasis, quadrature: QuadratureRule
) -> SphereTrace:
    """Coefficients ``<f(r .), Y_{k,ell}>`` for every mode of ``basis``."""
    if f.n != basis.n:
        raise InconsistentInputError(f"function dimension {f.n} != basis dimension {basis.n}")
    r = float(r)
    if r <= 0.0:
        raise DomainError(f"trace radius must be positive, got {r!r}")
    proj = _projector(basis, quadrature)
    values = f.on_sphere(r, quadrature.nodes)
    coeffs = values @ proj
    return SphereTrace(radius=r, n=basis.n, k_max=basis.k_max, coefficients=coeffs)


def trace_table(
    f: BallFunction,
    radii: Sequence[float],
    basis: HarmonicBasis,
    quadrature: QuadratureRule,
    threads: Optional[int] = 1,
) -> list:
    """Sphere traces at several radii (parallel over radii, order preserved)."""
    return ordered_map(lambda r: sphere_trace_coefficients(f, r, basis, quadrature), list(radii), threads)


# ---------------------------------------------------------------------------
# Radial profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """The profile t -> f_{k,ell}(t) of one mode, as a Chebyshev series in t = r^2.

    ``radii``/``trace`` hold the sampled raw trace; ``cheb`` is fitted on
    ``[radii[0]**2, radii[-1]**2]`` and evaluated polynomially outside it.
    """

    mode: ModeIndex
    R: float
    radii: np.ndarray
    trace: np.ndarray
    cheb: Chebyshev
    n_cheb: int = DEFAULT_N_CHEB

    def __call__(self, t):
        return self.cheb(np.asarray(t, dtype=float))

    @property
    def t_min(self) -> float:
        return float(self.cheb.domain[0])

    def trace_at(self, r):
        """Reconstructed raw trace ``f_{k,ell}(r^2) * r^k``."""
        r = np.asarray(r, dtype=float)
        return self.cheb(r * r) * r ** self.mode.k

    def derivative(self, order: int) -> Chebyshev:
        return self.cheb.deriv(order) if order > 0 else self.cheb

    @classmethod
    def from_callable(
        cls, mode: ModeIndex, g: Callable, R: float, n_cheb: int = DEFAULT_N_CHEB
    ) -> "RadialProfile":
        """Chebyshev representation of a known profile g(t) on [0, R^2]."""
        t = _cheb_points(0.0, R * R, 2 * n_cheb + 1)
        radii = np.sqrt(t)
        values = np.asarray(g(t), dtype=float) * np.ones_like(t)
        sigma = np.full_like(t, EXACT_NOISE * max(float(np.max(np.abs(values))), UNDERFLOW_FLOOR))
        cheb = _fit_profile(t, values, np.ones_like(t), sigma, n_cheb, [0.0, R * R])
        mode = ModeIndex(*mode)
        return cls(mode=mode, R=float(R), radii=radii, trace=values * radii**mode.k, cheb=cheb, n_cheb=n_cheb)


def _fit_profile(t, values, weights, sigma, n_cheb: int, domain) -> Chebyshev:
    """Least-squares Chebyshev fit of ``values`` with the smallest adequate degree.

    Residuals are measured as ``weights * (p(t) - values) / sigma`` and the
    degree is the smallest (up to ``n_cheb``) whose squared residual sum
    drops to the number of samples. Data indistinguishable from noise give
    the zero series. One complete QR factorization yields the residual of
    every degree at once.
    """
    m = len(t)
    x = (2.0 * t - (domain[0] + domain[1])) / (domain[1] - domain[0])
    scale = weights / sigma
    a = np.polynomial.chebyshev.chebvander(x, n_cheb) * scale[:, None]
    y = values * scale
    q, r = np.linalg.qr(a, mode="complete")
    z = q.T @ y
    tail = np.cumsum((z * z)[::-1])[::-1]
    if tail[0] <= m:
        return Chebyshev([0.0], domain=domain)
    ok = np.flatnonzero(tail[1 : n_cheb + 2] <= m)
    d = int(ok[0]) if len(ok) else n_cheb
    return Chebyshev(np.linalg.solve(r[: d + 1, : d + 1], z[: d + 1]), domain=domain)


def _cheb_points(a: float, b: float, m: int) -> np.ndarray:
    """Chebyshev points of the first kind on [a, b], ascending."""
    j = np.arange(m)
    x = -np.cos((2 * j + 1) * np.pi / (2 * m))
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def default_radii(R: float, n_cheb: int = DEFAULT_N_CHEB, r_min: Optional[float] = None) -> np.ndarray:
    """``2*n_cheb + 1`` radii whose squares are Chebyshev points on [r_min^2, R^2]."""
    r_min = R / 20.0 if r_min is None else float(r_min)
    return np.sqrt(_cheb_points(r_min * r_min, R * R, 2 * n_cheb + 1))


def _check_radii(radii, R: float, n_cheb: int, r_min: float) -> np.ndarray:
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 2 * n_cheb:
        raise InsufficientSamplesError(
            f"need at least {2 * n_cheb} radii for a degree-{n_cheb} Chebyshev fit, got {radii.size}"
        )
    if np.any(np.diff(radii) <= 0):
        raise DomainError("radii must be strictly increasing")
    if radii[0] < r_min * (1.0 - 1e-12):
        raise DomainError(f"smallest radius {radii[0]!r} below r_min={r_min!r}")
    if radii[-1] > R * (1.0 + _RADIUS_SLACK):
        raise DomainError(f"largest radius {radii[-1]!r} exceeds R={R!r}")
    return radii


def radial_profiles(
    f: BallFunction,
    basis: HarmonicBasis,
    quadrature: QuadratureRule,
    radii: Optional[Sequence[float]] = None,
    n_cheb: int = DEFAULT_N_CHEB,
    r_min: Optional[float] = None,
    rel_noise: float = TRACE_NOISE,
    threads: Optional[int] = 1,
) -> Dict[ModeIndex, RadialProfile]:
    """Profiles f_{k,ell} for every mode of ``basis``.

    Traces are sampled on ``radii`` (default: :func:`default_radii`) and
    fitted by a Chebyshev series in t = r^2 with r^k p(t) matching the
    trace. Each coefficient is treated as carrying noise ``rel_noise``
    times the L2 norm of f on its sphere; the degree (at most ``n_cheb``)
    is the smallest that fits the trace to that level. High degrees whose
    content sits below the noise near r = 0 therefore get low-degree
    profiles instead of amplified noise, and absent modes get exact zeros.
    """
    R = f.R
    r_min = R / 20.0 if r_min is None else float(r_min)
    if radii is None:
        radii = default_radii(R, n_cheb, r_min)
    radii = _check_radii(radii, R, n_cheb, r_min)

    traces = trace_table(f, radii, basis, quadrature, threads)
    table = np.array([tr.coefficients for tr in traces])
    sigma = rel_noise * np.sqrt(np.sum(table * table, axis=1))
    sigma = np.maximum(sigma, UNDERFLOW_FLOOR)

    t = radii * radii
    domain = [float(t[0]), float(t[-1])]

    def fit(p: int) -> RadialProfile:
        mode = basis.modes[p]
        column = table[:, p]
        rk = radii**mode.k
        cheb = _fit_profile(t, column / rk, rk, sigma, n_cheb, domain)
        return RadialProfile(mode=mode, R=float(R), radii=radii, trace=column, cheb=cheb, n_cheb=n_cheb)

    fitted = ordered_map(fit, range(len(basis.modes)), threads)
    return dict(zip(basis.modes, fitted))


def radial_profile(
    f: BallFunction,
    mode: ModeIndex,
    basis: HarmonicBasis,
    quadrature: QuadratureRule,
    radii: Optional[Sequence[float]] = None,
    n_cheb: int = DEFAULT_N_CHEB,
    r_min: Optional[float] = None,
    rel_noise: float = TRACE_NOISE,
) -> RadialProfile:
    """Profile of a single mode; see :func:`radial_profiles`."""
    mode = ModeIndex(*mode)
    basis.position(mode)
    return radial_profiles(f, basis, quadrature, radii, n_cheb, r_min, rel_noise)[mode]


# ---------------------------------------------------------------------------
# Exponential decay of sphere-trace coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayEstimate:
    """Envelope ``max_ell |phi_{k,ell}| <= K exp(-eta k)`` over ``k_range``.

    ``eta == inf`` marks a trace with fewer than five nonzero degrees
    (a finite expansion, decaying faster than any exponential).
    """

    K: float
    eta: float
    residual: float
    k_range: tuple

    @property
    def finite_expansion(self) -> bool:
        return math.isinf(self.eta)

    def ratio(self, r: float) -> float:
        """``exp(-eta) / r``, the per-sphere quantity entering the sphere-knot condition."""
        return 0.0 if self.finite_expansion else math.exp(-self.eta) / r


MIN_FIT_DEGREES = 5


def estimate_decay(
    trace: SphereTrace,
    floor: float = UNDERFLOW_FLOOR,
    rel_floor: float = 0.0,
    window: Optional[tuple] = None,
) -> DecayEstimate:
    """Fit log(max_ell |phi_{k,ell}|) = log K - eta k by least squares.

    Degrees whose magnitude is at or below ``max(floor, rel_floor * peak)``
    are skipped. The default window is the upper half of the remaining
    degrees (at least five). K is raised by the largest positive
    log-deviation so the envelope holds on the window.
    """
    mags = trace.degree_magnitudes()
    peak = float(np.max(mags))
    cut = max(floor, rel_floor * peak)
    avail = np.flatnonzero(mags > cut)
    if len(avail) == 0:
        raise ZeroTraceError(f"all coefficients of the trace at r={trace.radius!r} are below {cut:g}")
    if window is not None:
        lo, hi = window
        avail = avail[(avail >= lo) & (avail <= hi)]
    elif len(avail) >= MIN_FIT_DEGREES:
        keep = max(MIN_FIT_DEGREES, math.ceil(len(avail) / 2))
        avail = avail[-keep:]
    if len(avail) < MIN_FIT_DEGREES:
        if window is not None:
            raise InsufficientSamplesError(f"fit window {window} holds fewer than {MIN_FIT_DEGREES} degrees")
        k_hit = np.flatnonzero(mags > cut)
        return DecayEstimate(K=peak, eta=math.inf, residual=0.0, k_range=(int(k_hit[0]), int(k_hit[-1])))

    k = avail.astype(float)
    y = np.log(mags[avail])
    design = np.column_stack([np.ones_like(k), k])
    (intercept, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    dev = y - (intercept + slope * k)
    return DecayEstimate(
        K=float(math.exp(intercept + max(0.0, float(dev.max())))),
        eta=float(-slope),
        residual=float(np.max(np.abs(dev))),
        k_range=(int(avail[0]), int(avail[-1])),
    )


# ---------------------------------------------------------------------------
# Seminorm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeminormEstimate:
    """Finite-mode proxy for the order-N seminorm.

    ``per_mode[(k, ell)] = (sup_t |f_{k,ell}^{(N)}(t)| / N!)^(1/(k+N+1))``
    over t in [0, R^2]; ``value`` is the maximum over modes with
    ``k >= k_tail``.
    """

    N: int
    value: float
    per_mode: dict
    k_tail: int


def seminorm(
    profiles: Mapping[ModeIndex, RadialProfile] | Sequence[RadialProfile],
    N: int,
    R: float,
    k_tail: Optional[int] = None,
    n_grid: int = 2049,
) -> SeminormEstimate:
    """Estimate the order-N seminorm from Chebyshev profiles.

    The limsup over modes is replaced by a max over ``k >= k_tail``
    (default ``k_max // 2``). Derivatives are taken exactly on the
    Chebyshev coefficients; the sup is over ``n_grid`` equispaced t in
    [0, R^2].
    """
    items = list(profiles.values()) if isinstance(profiles, Mapping) else list(profiles)
    if not items:
        raise InsufficientSamplesError("no profiles given")
    N = int(N)
    if N < 0:
        raise DomainError(f"order N must be >= 0, got {N}")
    k_max = max(p.mode.k for p in items)
    if k_tail is None:
        k_tail = k_max // 2
    if k_tail > k_max:
        raise DomainError(f"k_tail={k_tail} exceeds the largest profiled degree {k_max}")

    t = np.linspace(0.0, R * R, n_grid)
    nfact = math.factorial(N)
    per_mode = {}
    for p in sorted(items, key=lambda p: (p.mode.k, p.mode.ell)):
        if N > p.n_cheb / 2:
            raise IllConditionedDerivativeError(
                f"derivative order {N} exceeds half the Chebyshev degree {p.n_cheb} of mode {tuple(p.mode)}"
            )
        sup = float(np.max(np.abs(p.derivative(N)(t)))) / nfact
        per_mode[p.mode] = sup ** (1.0 / (p.mode.k + N + 1))
    value = max(v for m, v in per_mode.items() if m.k >= k_tail)
    return SeminormEstimate(N=N, value=float(value), per_mode=per_mode, k_tail=int(k_tail))
