import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyharm import functions
from polyharm.errors import (
    DomainError,
    IllConditionedDerivativeError,
    InconsistentInputError,
    InsufficientSamplesError,
    ZeroTraceError,
)
from polyharm.harmonics import ModeIndex, build_basis, build_quadrature, mode_count, mode_position
from polyharm.radial import (
    RadialProfile,
    SampledBallFunction,
    SphereTrace,
    default_radii,
    estimate_decay,
    radial_profile,
    radial_profiles,
    seminorm,
    sphere_trace_coefficients,
)
from polyharm.theory import geometric_traces


def double_factorial(m):
    return math.prod(range(m, 0, -2)) if m > 0 else 1


def exp_z_profile(k, t, terms=40):
    """Profile of exp(z) in the zonal mode (k, 1): sqrt(2k+1) sum_j (t/2)^j / (j! (2k+2j+1)!!)."""
    t = np.asarray(t, dtype=float)
    s = sum((t / 2) ** j / (math.factorial(j) * double_factorial(2 * k + 2 * j + 1)) for j in range(terms))
    return math.sqrt(2 * k + 1) * s


@pytest.fixture(scope="module")
def basis8():
    return build_basis(3, 8)


@pytest.fixture(scope="module")
def quad20():
    return build_quadrature(3, 20)


# -- sphere traces ---------------------------------------------------------


def test_constant_trace(basis8, quad20):
    tr = sphere_trace_coefficients(functions.constant(3, 1.0, 2.5), 0.7, basis8, quad20)
    assert math.isclose(tr.coefficients[0], 2.5, rel_tol=1e-14)
    assert np.max(np.abs(tr.coefficients[1:])) < 1e-14


def test_exp_z_trace_matches_bessel_series(basis8, quad20):
    f = functions.exp_linear(3, 1.0, [0.0, 0.0, 1.0])
    r = 0.8
    tr = sphere_trace_coefficients(f, r, basis8, quad20)
    for k in range(9):
        expected = exp_z_profile(k, r * r) * r**k
        assert abs(tr.coefficient((k, 1)) - expected) < 1e-14
        for ell in range(2, 2 * k + 2):
            assert abs(tr.coefficient((k, ell))) < 1e-14


def test_exp_x_trace_against_monte_carlo(basis8, quad20):
    # zonal mode about e1 is Y_{1,2} = sqrt(3) x; plain sampling oracle
    f = functions.exp_linear(3, 1.0, [1.0, 0.0, 0.0])
    tr = sphere_trace_coefficients(f, 1.0, basis8, quad20)
    rng = np.random.default_rng(20240501)
    u = rng.normal(size=(10**6, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    samples = np.exp(u[:, 0]) * math.sqrt(3) * u[:, 0]
    mean = samples.mean()
    se = samples.std() / math.sqrt(len(samples))
    assert abs(tr.coefficient((1, 2)) - mean) < 3 * se


def test_trace_rejects_bad_input(basis8, quad20):
    f = functions.constant(3, 1.0)
    with pytest.raises(DomainError):
        sphere_trace_coefficients(f, 0.0, basis8, quad20)
    with pytest.raises(DomainError):
        sphere_trace_coefficients(f, 1.5, basis8, quad20)
    with pytest.raises(InconsistentInputError):
        sphere_trace_coefficients(f, 0.5, basis8, build_quadrature(3, 10))
    with pytest.raises(InconsistentInputError):
        sphere_trace_coefficients(functions.constant(2, 1.0), 0.5, basis8, quad20)


def test_trace_from_mapping_and_magnitudes():
    tr = SphereTrace.from_mapping(3, 0.5, 2, {(1, 3): -4.0, (2, 2): 1.5})
    assert tr.coefficient((1, 3)) == -4.0
    assert tr.degree_magnitudes().tolist() == [0.0, 4.0, 1.5]
    with pytest.raises(InconsistentInputError):
        SphereTrace(0.5, 3, 2, np.zeros(5))


# -- profiles --------------------------------------------------------------


def test_gaussian_profile_is_exp_minus_t(basis8, quad20):
    f = functions.gaussian(3, 1.0)
    prof = radial_profiles(f, basis8, quad20)
    t = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(prof[ModeIndex(0, 1)](t) - np.exp(-t))) < 1e-12
    for mode, p in prof.items():
        if mode.k > 0:
            assert not np.any(p.cheb.coef)


def test_exp_z_profiles_match_series(basis8, quad20):
    f = functions.exp_linear(3, 1.0, [0.0, 0.0, 1.0])
    prof = radial_profiles(f, basis8, quad20)
    t = np.linspace(0.0, 1.0, 57)
    for k in range(5):
        got = prof[ModeIndex(k, 1)](t)
        assert np.max(np.abs(got - exp_z_profile(k, t))) < 1e-9 * exp_z_profile(k, 1.0)
    # higher degrees are only determined to the trace noise level
    r = np.linspace(0.05, 1.0, 40)
    for k in range(9):
        err = prof[ModeIndex(k, 1)].trace_at(r) - exp_z_profile(k, r * r) * r**k
        assert np.max(np.abs(err)) < 1e-13


def test_profile_round_trip_reconstructs_trace(basis8, quad20):
    f = functions.gaussian(3, 1.0, center=[0.1, -0.2, 0.15])
    p = radial_profile(f, (2, 4), basis8, quad20)
    r = np.array([0.3, 0.55, 0.9])
    direct = [sphere_trace_coefficients(f, ri, basis8, quad20).coefficient((2, 4)) for ri in r]
    assert np.allclose(p.trace_at(r), direct, rtol=1e-9, atol=1e-15)


def test_finite_mode_profile_is_exact(basis8, quad20):
    f = functions.finite_mode(3, 1.0, {(2, 3): [0.5, -1.0, 2.0]})
    p = radial_profile(f, (2, 3), basis8, quad20)
    t = np.linspace(0, 1, 11)
    assert np.max(np.abs(p(t) - (0.5 - t + 2 * t * t))) < 1e-12


def test_profile_needs_enough_radii(basis8, quad20):
    f = functions.constant(3, 1.0)
    with pytest.raises(InsufficientSamplesError):
        radial_profiles(f, basis8, quad20, radii=np.linspace(0.1, 1.0, 10))


def test_default_radii_layout():
    r = default_radii(2.0, n_cheb=8)
    assert len(r) == 17
    assert np.all(np.diff(r) > 0)
    assert r[0] > 0.1 and r[-1] < 2.0


def test_from_callable_matches_function():
    p = RadialProfile.from_callable((0, 1), lambda t: np.cos(t), R=1.5)
    t = np.linspace(0, 2.25, 33)
    assert np.max(np.abs(p(t) - np.cos(t))) < 1e-13


def test_threads_do_not_change_profiles(basis8, quad20):
    f = functions.gaussian(3, 1.0, center=[0.2, 0.0, -0.1])
    a = radial_profiles(f, basis8, quad20, threads=1)
    b = radial_profiles(f, basis8, quad20, threads=4)
    for m in a:
        assert np.array_equal(a[m].cheb.coef, b[m].cheb.coef)


def test_sampled_function_from_csv(tmp_path, quad20):
    q = build_quadrature(3, 6)
    basis = build_basis(3, 3)
    f = functions.exp_linear(3, 1.0, [0.3, 0.0, 0.4])
    lines = ["r,node_index,f_value"]
    for r in (0.5, 1.0):
        vals = f.on_sphere(r, q.nodes)
        lines += [f"{r!r},{i},{float(v)!r}" for i, v in enumerate(vals)]
    path = tmp_path / "s.csv"
    path.write_text("\n".join(lines) + "\n")
    g = SampledBallFunction.from_csv(path, 3, 1.0, q)
    assert np.array_equal(g.on_sphere(1.0, q.nodes), f.on_sphere(1.0, q.nodes))
    a = sphere_trace_coefficients(f, 0.5, basis, q).coefficients
    b = sphere_trace_coefficients(g, 0.5, basis, q).coefficients
    assert np.array_equal(a, b)


# -- decay -----------------------------------------------------------------


@pytest.mark.parametrize("a", [0.3, 0.8, 1.2, 2.0])
def test_decay_recovers_geometric_rate(a):
    (tr,) = geometric_traces(a, [0.75], k_max=30)
    d = estimate_decay(tr)
    assert abs(math.exp(-d.eta) - a * 0.75) < 1e-12
    assert abs(d.ratio(0.75) - a) < 1e-12
    assert d.residual < 1e-10


def test_decay_finite_expansion_sentinel():
    tr = SphereTrace.from_mapping(3, 0.5, 6, {(0, 1): 1.0, (2, 1): 0.1})
    d = estimate_decay(tr)
    assert d.finite_expansion and d.eta == math.inf
    assert d.ratio(0.5) == 0.0


def test_decay_zero_trace_raises():
    with pytest.raises(ZeroTraceError):
        estimate_decay(SphereTrace(0.5, 3, 4, np.zeros(mode_count(3, 4))))


def test_decay_window():
    (tr,) = geometric_traces(0.6, [1.0], k_max=20)
    d = estimate_decay(tr, window=(2, 9))
    assert d.k_range == (2, 9)
    assert abs(d.eta + math.log(0.6)) < 1e-12
    with pytest.raises(InsufficientSamplesError):
        estimate_decay(tr, window=(2, 4))


def test_decay_envelope_holds():
    rng = np.random.default_rng(7)
    coeffs = np.zeros(mode_count(3, 25))
    for k in range(26):
        coeffs[mode_position(3, (k, 1))] = 0.7**k * rng.uniform(0.5, 1.5)
    d = estimate_decay(SphereTrace(1.0, 3, 25, coeffs))
    mags = SphereTrace(1.0, 3, 25, coeffs).degree_magnitudes()
    k = np.arange(d.k_range[0], d.k_range[1] + 1)
    assert np.all(mags[k] <= d.K * np.exp(-d.eta * k) * (1 + 1e-12))


# -- seminorm --------------------------------------------------------------


@pytest.mark.parametrize("N", [1, 2, 4, 6])
def test_seminorm_gaussian(basis8, quad20, N):
    prof = radial_profiles(functions.gaussian(3, 1.0), basis8, quad20)
    s = seminorm(prof, N, 1.0, k_tail=0)
    expected = (1.0 / math.factorial(N)) ** (1.0 / (N + 1))
    assert abs(s.value - expected) < 1e-4 * expected
    assert s.per_mode[ModeIndex(3, 2)] == 0.0


def test_seminorm_polynomial_profile_vanishes():
    p = RadialProfile.from_callable((2, 1), lambda t: 1 + 3 * t, R=1.0)
    assert seminorm([p], 2, 1.0).value < 1e-6


def test_seminorm_scale_covariance():
    base = RadialProfile.from_callable((3, 1), lambda t: np.exp(2 * t), R=1.0)
    scaled = RadialProfile.from_callable((3, 1), lambda t: 50 * np.exp(2 * t), R=1.0)
    for N in (1, 3):
        s0 = seminorm([base], N, 1.0).value
        s1 = seminorm([scaled], N, 1.0).value
        assert math.isclose(s1, 50 ** (1 / (3 + N + 1)) * s0, rel_tol=1e-9)


def test_seminorm_exp_z_against_series(basis8, quad20):
    # f^{(N)} of the zonal profile is sqrt(2k+1) sum_j (1/2)^j t^{j-N} .../(j-N)! (2k+2j+1)!!; max at t = R^2
    prof = radial_profiles(functions.exp_linear(3, 1.0, [0, 0, 1.0]), basis8, quad20)
    N, k = 2, 4
    d = sum(
        0.5**j / (math.factorial(j - N) * double_factorial(2 * k + 2 * j + 1)) for j in range(N, 40)
    ) * math.sqrt(2 * k + 1)
    expected = (d / math.factorial(N)) ** (1 / (k + N + 1))
    s = seminorm(prof, N, 1.0, k_tail=k)
    assert math.isclose(s.per_mode[ModeIndex(k, 1)], expected, rel_tol=1e-6)


def test_seminorm_rejects_high_order():
    p = RadialProfile.from_callable((0, 1), np.exp, R=1.0, n_cheb=8)
    with pytest.raises(IllConditionedDerivativeError):
        seminorm([p], 5, 1.0)
    with pytest.raises(DomainError):
        seminorm([p], 1, 1.0, k_tail=3)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.25, 3.0), st.integers(1, 4))
def test_seminorm_of_exponential_profile(c, N):
    # g(t) = exp(c t): sup |g^{(N)}| / N! = c^N exp(c) / N!; derivative noise grows
    # about a decade per order, so stay where the N-th derivative is well resolved
    p = RadialProfile.from_callable((0, 1), lambda t: np.exp(c * t), R=1.0)
    expected = (c**N * math.exp(c) / math.factorial(N)) ** (1 / (N + 1))
    assert math.isclose(seminorm([p], N, 1.0).value, expected, rel_tol=1e-5)


def test_decay_exact_log_linear():
    coeffs = np.zeros(mode_count(3, 30))
    for k in range(31):
        coeffs[mode_position(3, (k, 1))] = 3 * math.exp(-0.7 * k)
    d = estimate_decay(SphereTrace(1.0, 3, 30, coeffs))
    assert abs(d.eta - 0.7) < 1e-6
    assert 3.0 <= d.K * (1 + 1e-12) and d.K <= 3.0001
    assert d.residual < 1e-12


def test_decay_with_alternating_ripple():
    coeffs = np.zeros(mode_count(3, 40))
    for k in range(41):
        coeffs[mode_position(3, (k, 1))] = math.exp(-0.5 * k) * (1 + 0.01 * (-1) ** k)
    tr = SphereTrace(1.0, 3, 40, coeffs)
    d = estimate_decay(tr)
    assert abs(d.eta - 0.5) < 1e-2
    k = np.arange(d.k_range[0], d.k_range[1] + 1)
    assert np.all(tr.degree_magnitudes()[k] <= d.K * np.exp(-d.eta * k) * (1 + 1e-12))


def test_decay_of_geometric_function_trace():
    f = functions.example_geometric(3, 1.0, 0.4, 16)
    tr = sphere_trace_coefficients(f, 1.0, build_basis(3, 16), build_quadrature(3, 32))
    d = estimate_decay(tr)
    assert abs(d.eta + math.log(0.4)) < 1e-6


def test_profile_of_r4_y21():
    # r^4 Y_{2,1} = t * r^2 Y_{2,1}
    f = functions.finite_mode(3, 1.0, {(2, 1): [0.0, 1.0]})
    p = radial_profile(f, (2, 1), build_basis(3, 2), build_quadrature(3, 4))
    t = np.linspace(0, 1, 21)
    assert np.max(np.abs(p(t) - t)) < 1e-9


def test_constant_profile_is_one():
    p = radial_profile(functions.constant(3, 1.0), (0, 1), build_basis(3, 0), build_quadrature(3, 0))
    assert np.max(np.abs(p(np.linspace(0, 1, 5)) - 1.0)) < 1e-13


def test_round_trip_known_profiles():
    g = {
        (0, 1): lambda t: np.cos(2 * t),
        (1, 3): lambda t: np.exp(-t) - 0.5,
        (3, 2): lambda t: 1 / (2 + t),
        (5, 7): lambda t: np.sin(t) + 0.25,
    }
    basis = build_basis(3, 5)
    q = build_quadrature(3, 12)

    def func(x):
        r = np.linalg.norm(x, axis=1)
        y = basis.evaluate(np.where(r[:, None] > 0, x, [0.0, 0.0, 1.0]))
        return sum(gm(r * r) * r ** m[0] * y[:, basis.position(m)] for m, gm in g.items())

    from polyharm.radial import BallFunction

    prof = radial_profiles(BallFunction(3, 1.0, func), basis, q)
    for m, gm in g.items():
        p = prof[ModeIndex(*m)]
        t = np.linspace(p.t_min, 1.0, 200)
        assert np.max(np.abs(p(t) - gm(t))) < 1e-8, m
        # reproduces the sampled trace
        assert np.max(np.abs(p.trace_at(p.radii) - p.trace)) < 1e-13


@pytest.mark.parametrize("lam", [2.0, 10.0])
def test_seminorm_scale_covariance_small_factors(lam):
    base = RadialProfile.from_callable((2, 1), lambda t: np.exp(t), R=1.0)
    scaled = RadialProfile.from_callable((2, 1), lambda t: lam * np.exp(t), R=1.0)
    for N in (1, 2, 3):
        ratio = seminorm([scaled], N, 1.0).value / seminorm([base], N, 1.0).value
        assert math.isclose(ratio, lam ** (1 / (2 + N + 1)), rel_tol=1e-9)


def test_gaussian_seminorms_bounded_over_n(basis8, quad20):
    prof = radial_profiles(functions.gaussian(3, 1.0), basis8, quad20)
    vals = [seminorm(prof, N, 1.0, k_tail=0).value for N in range(0, 9)]
    # (1/N!)^(1/(N+1)) after N = 0: decreasing, bounded by the N = 0 value
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert max(vals) == vals[0] == pytest.approx(1.0, rel=1e-12)
