"""Polyharmonic interpolation of order N by per-mode Lagrange polynomials in t = r^2.

The interpolant is

    h(r theta) = sum_{k <= k_max} sum_ell h_{k,ell}(r^2) r^k Y_{k,ell}(theta)

with every h_{k,ell} of degree <= N - 1, so Delta^N h = 0.  Two knot layouts
are supported: per-mode radii (``KnotSet.general``), where profile values
f_{k,ell}(r^2) are interpolated directly, and concentric spheres
(``KnotSet.spheres``), where the data are sphere-trace coefficients phi^j and
the interpolated values are phi^j / r_j^k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from polyharm.errors import (
    DegenerateKnotsError,
    DomainError,
    IncompleteInputError,
    InconsistentInputError,
    MagnitudeError,
)
from polyharm.harmonics import HarmonicBasis, ModeIndex, QuadratureRule, iter_modes, mode_count, mode_offset
from polyharm.radial import BallFunction, SphereTrace, sphere_trace_coefficients

MAX_ORDER = 16
FORMAT_TAG = "polyharm-interpolant"
FORMAT_VERSION = 1
_RADIUS_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Lagrange machinery
# ---------------------------------------------------------------------------


def barycentric_weights(knots_t: np.ndarray) -> np.ndarray:
    """Weights ``1 / prod_{i != j} (x_j - x_i)`` along the last axis."""
    x = np.asarray(knots_t, dtype=float)
    diff = x[..., :, None] - x[..., None, :]
    n = x.shape[-1]
    diff[..., np.arange(n), np.arange(n)] = 1.0
    if np.any(diff == 0.0):
        raise DegenerateKnotsError("interpolation knots must be pairwise distinct")
    return 1.0 / np.prod(diff, axis=-1)


def _barycentric_eval(knots_t, weights, values, t) -> np.ndarray:
    """Second-form barycentric evaluation.

    ``knots_t``, ``weights``, ``values`` have shape (M, N); ``t`` shape (P,).
    Returns shape (M, P).
    """
    t = np.asarray(t, dtype=float)
    diff = t[None, None, :] - knots_t[:, :, None]
    exact = diff == 0.0
    safe = np.where(exact, 1.0, diff)
    terms = weights[:, :, None] / safe
    numer = np.sum(terms * values[:, :, None], axis=1)
    denom = np.sum(terms, axis=1)
    # away from the knots denom = 1 / prod(t - x_j) != 0; knot hits are overwritten below
    with np.errstate(divide="ignore", invalid="ignore"):
        out = numer / denom
    if np.any(exact):
        m_idx, j_idx, p_idx = np.nonzero(exact)
        out[m_idx, p_idx] = values[m_idx, j_idx]
    return out


def lagrange_basis(knots_t: Sequence[float], t) -> np.ndarray:
    """Lagrange fundamental functions omega_j(t) for the knots x_0..x_{N-1}.

    Evaluated in barycentric form; exact unit vectors at the knots.
    Returns shape ``t.shape + (N,)``.
    """
    x = np.asarray(knots_t, dtype=float)
    w = barycentric_weights(x)
    t_arr = np.asarray(t, dtype=float)
    flat = t_arr.reshape(-1)
    diff = flat[:, None] - x[None, :]
    exact = diff == 0.0
    terms = w[None, :] / np.where(exact, 1.0, diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = terms / np.sum(terms, axis=1, keepdims=True)
    rows = np.flatnonzero(exact.any(axis=1))
    if len(rows):
        out[rows] = exact[rows].astype(float)
    return out.reshape(t_arr.shape + (len(x),))


def _lagrange_monomials(knots_t: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Row j holds the ascending monomial coefficients of omega_j."""
    n = len(knots_t)
    rows = np.empty((n, n))
    for j in range(n):
        others = np.delete(knots_t, j)
        rows[j] = weights[j] * (P.polyfromroots(others) if n > 1 else np.ones(1))
    return rows


def _monomial_eval(coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Horner evaluation of (M, N) ascending coefficient rows at t (P,) -> (M, P)."""
    out = np.zeros((coeffs.shape[0], len(t)))
    for j in range(coeffs.shape[1] - 1, -1, -1):
        out = out * t[None, :] + coeffs[:, j : j + 1]
    return out


# ---------------------------------------------------------------------------
# Knots
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KnotSet:
    """Interpolation radii: shared concentric spheres or per-mode families."""

    variant: str
    N: int
    radii: Optional[np.ndarray] = None
    per_mode: Dict[ModeIndex, np.ndarray] = field(default_factory=dict)
    default: Optional[np.ndarray] = None

    @classmethod
    def spheres(cls, radii: Sequence[float]) -> "KnotSet":
        r = np.asarray(radii, dtype=float)
        if r.ndim != 1 or len(r) == 0:
            raise DomainError("need at least one sphere radius")
        if np.any(np.diff(r) <= 0.0):
            raise DegenerateKnotsError("sphere radii must be strictly increasing")
        if r[0] <= 0.0:
            raise DegenerateKnotsError("sphere radii must be positive (data are divided by r_j^k)")
        _check_order(len(r))
        r.setflags(write=False)
        return cls(variant="spheres", N=len(r), radii=r)

    @classmethod
    def general(
        cls, per_mode: Mapping[tuple, Sequence[float]], default: Optional[Sequence[float]] = None
    ) -> "KnotSet":
        """Per-mode radii; modes missing from ``per_mode`` use ``default``."""
        table = {ModeIndex(*m): _sorted_distinct(v) for m, v in per_mode.items()}
        dflt = None if default is None else _sorted_distinct(default)
        sizes = {len(v) for v in table.values()} | ({len(dflt)} if dflt is not None else set())
        if len(sizes) != 1:
            raise InconsistentInputError(f"every mode needs the same number of knots, got sizes {sorted(sizes)}")
        N = sizes.pop()
        _check_order(N)
        return cls(variant="general", N=N, per_mode=table, default=dflt)

    def radii_for(self, mode: ModeIndex) -> np.ndarray:
        if self.variant == "spheres":
            return self.radii
        r = self.per_mode.get(ModeIndex(*mode), self.default)
        if r is None:
            raise IncompleteInputError(f"no knots for mode {tuple(mode)}")
        return r


def _check_order(N: int) -> None:
    if not 1 <= N <= MAX_ORDER:
        raise DomainError(f"order N must lie in 1..{MAX_ORDER}, got {N}")


def _sorted_distinct(radii: Sequence[float]) -> np.ndarray:
    r = np.sort(np.asarray(radii, dtype=float))
    if r.ndim != 1 or len(r) == 0:
        raise DomainError("need at least one knot")
    if np.any(r < 0.0):
        raise DomainError("knot radii must be nonnegative")
    if np.any(np.diff(r * r) <= 0.0):
        raise DegenerateKnotsError(f"knots {r.tolist()} are not pairwise distinct")
    r.setflags(write=False)
    return r


# ---------------------------------------------------------------------------
# Mode polynomials and the interpolant
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModePolynomial:
    """Degree <= N-1 polynomial h_{k,ell}(t) interpolating ``values_at_knots`` at ``knots_t``."""

    mode: ModeIndex
    knots_t: np.ndarray
    values_at_knots: np.ndarray
    weights: np.ndarray
    coefficients: np.ndarray

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = _barycentric_eval(
            self.knots_t[None], self.weights[None], self.values_at_knots[None], t_arr.reshape(-1)
        )
        return out[0].reshape(t_arr.shape)

    def monomial(self, t):
        t_arr = np.asarray(t, dtype=float)
        return _monomial_eval(self.coefficients[None], t_arr.reshape(-1))[0].reshape(t_arr.shape)

    @property
    def degree_bound(self) -> int:
        return len(self.knots_t) - 1


def _values_over_rk(data: np.ndarray, radii: np.ndarray, k: int, mode) -> np.ndarray:
    if k >= 1 and np.any(radii == 0.0):
        raise DegenerateKnotsError(f"zero knot radius with positive degree k={k} (mode {tuple(mode)})")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
        out = data / radii**k
    if not np.all(np.isfinite(out)):
        raise MagnitudeError(
            f"phi / r^k overflowed for mode {tuple(mode)}: data={data.tolist()}, radii={radii.tolist()}"
        )
    return out


def fit_mode_polynomial(mode: ModeIndex, knot_radii: Sequence[float], data: Sequence[float]) -> ModePolynomial:
    """Interpolate the values ``data[j] / r_j^k`` at ``t = r_j^2``.

    ``data`` are sphere-trace coefficients phi^j_{k,ell}; for k = 0 no
    division happens and a zero radius is allowed.
    """
    mode = ModeIndex(*mode)
    radii = np.asarray(knot_radii, dtype=float)
    data = np.asarray(data, dtype=float)
    if radii.shape != data.shape or radii.ndim != 1:
        raise InconsistentInputError("knot radii and data must be 1-D and of equal length")
    _check_order(len(radii))
    x = radii * radii
    w = barycentric_weights(x)
    values = _values_over_rk(data, radii, mode.k, mode)
    coeffs = values @ _lagrange_monomials(x, w)
    return ModePolynomial(mode=mode, knots_t=x, values_at_knots=values, weights=w, coefficients=coeffs)


@dataclass(frozen=True, eq=False)
class PolyharmonicInterpolant:
    """Truncated polyharmonic function of order N on B_R.

    Mode data are stored as ``(M, N)`` arrays in canonical (k, ell) order,
    M the number of modes with k <= k_max.
    """

    n: int
    N: int
    k_max: int
    R: float
    knot_variant: str
    knots_t: np.ndarray
    values: np.ndarray
    coefficients: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        M = mode_count(self.n, self.k_max)
        for name in ("knots_t", "values", "coefficients"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (M, self.N):
                raise InconsistentInputError(f"{name} has shape {arr.shape}, expected {(M, self.N)}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.weights is None:
            object.__setattr__(self, "weights", barycentric_weights(self.knots_t))

    @cached_property
    def modes(self) -> tuple:
        return tuple(iter_modes(self.n, self.k_max))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([m.k for m in self.modes], dtype=int)

    @cached_property
    def basis(self) -> HarmonicBasis:
        return HarmonicBasis(self.n, self.k_max)

    def polynomial(self, mode: ModeIndex) -> ModePolynomial:
        mode = ModeIndex(*mode)
        p = self.basis.position(mode)
        return ModePolynomial(
            mode=mode,
            knots_t=self.knots_t[p],
            values_at_knots=self.values[p],
            weights=self.weights[p],
            coefficients=self.coefficients[p],
        )

    def items(self):
        for mode in self.modes:
            yield mode, self.polynomial(mode)

    def profile_values(self, t) -> np.ndarray:
        """``h_{k,ell}(t)`` for every mode, shape (M, len(t))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return _barycentric_eval(self.knots_t, self.weights, self.values, t)

    def radial_factors(self, r: float) -> np.ndarray:
        """``h_{k,ell}(r^2) r^k`` for every mode."""
        return self.profile_values([r * r])[:, 0] * float(r) ** self.degrees

    def _check_radius(self, r: float) -> float:
        r = float(r)
        if r < 0.0 or r > self.R * (1.0 + _RADIUS_SLACK):
            raise DomainError(f"radius {r!r} outside [0, R={self.R!r}]")
        return r

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        radii = np.linalg.norm(pts, axis=1)
        out = np.empty(len(pts))
        for r in np.unique(radii):
            sel = radii == r
            if r == 0.0:
                theta = np.zeros((int(sel.sum()), self.n))
                theta[:, -1] = 1.0
            else:
                theta = pts[sel] / r
            out[sel] = evaluate(self, r, theta)
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        header = {
            "format": FORMAT_TAG,
            "version": FORMAT_VERSION,
            "n": self.n,
            "N": self.N,
            "k_max": self.k_max,
            "R": self.R,
            "knot_variant": self.knot_variant,
        }
        lines = ["{"]
        for key, val in header.items():
            lines.append(f"  {json.dumps(key)}: {json.dumps(val)},")
        lines.append('  "modes": [')
        records = []
        for p, mode in enumerate(self.modes):
            rec = {
                "k": mode.k,
                "ell": mode.ell,
                "knots_t": [float(v) for v in self.knots_t[p]],
                "monomial_coeffs": [float(v) for v in self.coefficients[p]],
                "values_at_knots": [float(v) for v in self.values[p]],
            }
            records.append("    " + json.dumps(rec))
        lines.append(",\n".join(records))
        lines.append("  ]")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PolyharmonicInterpolant":
        doc = json.loads(text)
        if doc.get("format") != FORMAT_TAG or doc.get("version") != FORMAT_VERSION:
            raise InconsistentInputError("not a polyharm interpolant file (format/version mismatch)")
        n, N, k_max = int(doc["n"]), int(doc["N"]), int(doc["k_max"])
        expected = list(iter_modes(n, k_max))
        recs = doc["modes"]
        if [(r["k"], r["ell"]) for r in recs] != [tuple(m) for m in expected]:
            raise InconsistentInputError("mode records missing or out of canonical order")
        return cls(
            n=n,
            N=N,
            k_max=k_max,
            R=float(doc["R"]),
            knot_variant=str(doc["knot_variant"]),
            knots_t=np.array([r["knots_t"] for r in recs], dtype=float).reshape(len(recs), N),
            values=np.array([r["values_at_knots"] for r in recs], dtype=float).reshape(len(recs), N),
            coefficients=np.array([r["monomial_coeffs"] for r in recs], dtype=float).reshape(len(recs), N),
        )


def _assemble(n, k_max, R, variant, knots_t, values) -> PolyharmonicInterpolant:
    """Build an interpolant from per-mode knots and values, grouping shared knot rows."""
    weights = barycentric_weights(knots_t)
    coeffs = np.empty_like(values)
    groups: Dict[bytes, list] = {}
    for p in range(len(knots_t)):
        groups.setdefault(knots_t[p].tobytes(), []).append(p)
    for rows in groups.values():
        lag = _lagrange_monomials(knots_t[rows[0]], weights[rows[0]])
        coeffs[rows] = values[rows] @ lag
    return PolyharmonicInterpolant(
        n=n,
        N=knots_t.shape[1],
        k_max=k_max,
        R=float(R),
        knot_variant=variant,
        knots_t=knots_t,
        values=values,
        coefficients=coeffs,
        weights=weights,
    )


def interpolate_general(
    profiles: Mapping[tuple, Callable],
    knots: KnotSet,
    n: int,
    R: float,
    k_max: Optional[int] = None,
) -> PolyharmonicInterpolant:
    """Interpolate profile values f_{k,ell}(r_{k,ell,j}^2) mode by mode.

    ``profiles`` maps (k, ell) to any callable of t (for example a
    :class:`~polyharm.radial.RadialProfile`). Knots may include r = 0.
    """
    profiles = {ModeIndex(*m): g for m, g in profiles.items()}
    if k_max is None:
        k_max = max(m.k for m in profiles)
    modes = list(iter_modes(n, k_max))
    N = knots.N
    knots_t = np.empty((len(modes), N))
    values = np.empty((len(modes), N))
    for p, mode in enumerate(modes):
        g = profiles.get(mode)
        if g is None:
            raise IncompleteInputError(f"no profile for mode {tuple(mode)}")
        r = knots.radii_for(mode)
        if r[-1] > R * (1.0 + _RADIUS_SLACK):
            raise DomainError(f"knot radius {r[-1]!r} of mode {tuple(mode)} exceeds R={R!r}")
        x = r * r
        knots_t[p] = x
        values[p] = np.asarray(g(x), dtype=float) * np.ones(N)
    return _assemble(n, k_max, R, knots.variant, knots_t, values)


def interpolate_spheres(
    traces: Sequence[SphereTrace],
    radii: Optional[Sequence[float]] = None,
    k_max: Optional[int] = None,
    R: Optional[float] = None,
) -> PolyharmonicInterpolant:
    """Interpolate full sphere traces on N concentric spheres.

    For every mode the values ``phi^j_{k,ell} / r_j^k`` are interpolated at
    ``t = r_j^2``; the resulting h satisfies h(r_j theta) = f(r_j theta) up to
    the truncation at ``k_max``.
    """
    traces = list(traces)
    if not traces:
        raise IncompleteInputError("no sphere traces given")
    n = traces[0].n
    kmaxes = {tr.k_max for tr in traces}
    if len(kmaxes) != 1 or {tr.n for tr in traces} != {n}:
        raise InconsistentInputError(f"traces disagree on k_max/dimension: {sorted(kmaxes)}")
    trace_kmax = kmaxes.pop()
    k_max = trace_kmax if k_max is None else int(k_max)
    if k_max > trace_kmax:
        raise InconsistentInputError(f"k_max={k_max} exceeds the traces' k_max={trace_kmax}")
    if radii is None:
        radii = [tr.radius for tr in traces]
    knots = KnotSet.spheres(radii)
    if not np.allclose(knots.radii, [tr.radius for tr in traces], rtol=1e-14, atol=0.0):
        raise InconsistentInputError("radii do not match the traces' radii")
    R = float(knots.radii[-1]) if R is None else float(R)
    if knots.radii[-1] > R * (1.0 + _RADIUS_SLACK):
        raise DomainError(f"largest sphere radius {knots.radii[-1]!r} exceeds R={R!r}")

    M = mode_count(n, k_max)
    data = np.array([tr.coefficients[:M] for tr in traces]).T
    r = knots.radii
    degrees = np.array([m.k for m in iter_modes(n, k_max)])
    with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
        powers = r[None, :] ** degrees[:, None]
        values = data / powers
    bad = ~np.isfinite(values).all(axis=1)
    if np.any(bad):
        p = int(np.flatnonzero(bad)[0])
        raise MagnitudeError(f"phi / r^k overflowed at mode k={degrees[p]} (radii {r.tolist()})")
    knots_t = np.broadcast_to(r * r, (M, len(r))).copy()
    return _assemble(n, k_max, R, "spheres", knots_t, values)


# ---------------------------------------------------------------------------
# Evaluation and norms
# ---------------------------------------------------------------------------


def evaluate(h: PolyharmonicInterpolant, r: float, theta) -> np.ndarray:
    """h(r theta) for unit vectors ``theta`` of shape (m, n)."""
    r = h._check_radius(r)
    y = h.basis.evaluate(theta)
    return np.sum(y * h.radial_factors(r)[None, :], axis=1)


def l2_error_on_sphere(f: BallFunction, h: PolyharmonicInterpolant, r: float, quadrature: QuadratureRule) -> float:
    """Normalized L2 norm over the unit sphere of theta -> f(r theta) - h(r theta)."""
    r = h._check_radius(r)
    diff = f.on_sphere(r, quadrature.nodes) - evaluate(h, r, quadrature.nodes)
    return float(np.sqrt(quadrature.integrate(diff * diff)))


def l2_error_parseval(f: BallFunction, h: PolyharmonicInterpolant, r: float, quadrature: QuadratureRule) -> float:
    """Same quantity as :func:`l2_error_on_sphere`, summed over modes k <= k_max.

    Exact when f has no content above ``h.k_max`` and the quadrature resolves
    degree 2 * k_max.
    """
    r = h._check_radius(r)
    if r == 0.0:
        f0 = float(f.on_sphere(0.0, quadrature.nodes[:1])[0])
        return abs(f0 - float(h.radial_factors(0.0)[0]))
    trace = sphere_trace_coefficients(f, r, h.basis, quadrature)
    diff = trace.coefficients - h.radial_factors(r)
    return float(np.sqrt(np.sum(diff * diff)))


@dataclass(frozen=True)
class BallNorm:
    """Squared-norm series of an interpolant over the ball.

    ``per_mode[p] = integral_0^R r^{2k} h_p(r^2)^2 dr`` (times r^{n-1} when
    the Jacobian is included); ``partial_sums[K]`` accumulates degrees <= K.
    """

    total: float
    partial_sums: np.ndarray
    per_degree: np.ndarray
    per_mode: np.ndarray
    jacobian: bool


def l2_norm_ball(h: PolyharmonicInterpolant, jacobian: bool = False) -> BallNorm:
    """Per-mode radial integrals by Gauss-Legendre on [0, R], exact for the polynomial integrand.

    By default the measure is plain dr, the quantity whose finiteness decides
    convergence of the mode series; ``jacobian=True`` uses r^{n-1} dr, the
    physical L2(B_R) norm up to the sphere area.
    """
    per_mode = np.empty(len(h.modes))
    per_degree = np.empty(h.k_max + 1)
    extra = h.n - 1 if jacobian else 0
    for k in range(h.k_max + 1):
        degree = 2 * k + 4 * (h.N - 1) + extra
        npts = degree // 2 + 1
        x, w = _gauss_legendre(npts)
        r = 0.5 * h.R * (x + 1.0)
        w = 0.5 * h.R * w
        start, stop = mode_offset(h.n, k), mode_offset(h.n, k + 1)
        hv = _barycentric_eval(h.knots_t[start:stop], h.weights[start:stop], h.values[start:stop], r * r)
        weight = w * r ** (2 * k + extra)
        per_mode[start:stop] = np.sum(hv * hv * weight[None, :], axis=1)
        per_degree[k] = np.sum(per_mode[start:stop])
    partial = np.cumsum(per_degree)
    return BallNorm(
        total=float(partial[-1]), partial_sums=partial, per_degree=per_degree, per_mode=per_mode, jacobian=jacobian
    )


_gl_cache: Dict[int, tuple] = {}


def _gauss_legendre(npts: int):
    rule = _gl_cache.get(npts)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(npts)
        _gl_cache[npts] = rule
    return rule


# ---------------------------------------------------------------------------
# Polyharmonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeCoefficientTable:
    """Monomial coefficients in t per mode, e.g. the image of Delta^p."""

    n: int
    k_max: int
    degrees: np.ndarray
    coefficients: np.ndarray

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coefficients))) if self.coefficients.size else 0.0


def radial_laplacian_power(h: PolyharmonicInterpolant, p: int) -> ModeCoefficientTable:
    """Apply Delta^p term by term.

    Uses Delta(r^s Y_k) = [s(s+n-2) - k(k+n-2)] r^{s-2} Y_k with s = k + 2m,
    which maps the coefficient of t^m to ``2m (2k + 2m + n - 2)`` times the
    coefficient of t^{m-1}.
    """
    if p < 0:
        raise DomainError(f"power p must be >= 0, got {p}")
    c = np.array(h.coefficients, dtype=float)
    k = h.degrees[:, None].astype(float)
    m = np.arange(c.shape[1], dtype=float)[None, :]
    factor = 2.0 * m * (2.0 * k + 2.0 * m + h.n - 2.0)
    for _ in range(p):
        shifted = np.zeros_like(c)
        shifted[:, :-1] = (c * factor)[:, 1:]
        c = shifted
    return ModeCoefficientTable(n=h.n, k_max=h.k_max, degrees=h.degrees.copy(), coefficients=c)


def polyharmonic_certificate(h: PolyharmonicInterpolant) -> float:
    """``max |Delta^N coefficients| / max |coefficients|`` (0 for the zero interpolant)."""
    scale = float(np.max(np.abs(h.coefficients))) if h.coefficients.size else 0.0
    if scale == 0.0:
        return 0.0
    return radial_laplacian_power(h, h.N).max_abs() / scale


def knot_residuals(h: PolyharmonicInterpolant) -> np.ndarray:
    """|monomial form - interpolated value| at each knot, shape (M, N)."""
    out = np.empty_like(h.values)
    for j in range(h.N):
        t = h.knots_t[:, j]
        acc = np.zeros(len(t))
        for i in range(h.N - 1, -1, -1):
            acc = acc * t + h.coefficients[:, i]
        out[:, j] = np.abs(acc - h.values[:, j])
    return out
