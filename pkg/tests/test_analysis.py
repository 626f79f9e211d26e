import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sineqpe.analysis import (
    OutcomeDistribution,
    density_curve,
    fourier_density,
    min_holevo_variance,
    pdf_optimal,
    pdf_uniform,
    sharpness_canonical,
    stats_from_distribution,
    stats_from_errors,
    stats_from_records,
    stats_from_samples,
)
from sineqpe.protocol import (
    ProtocolConfig,
    canonical_distribution,
    enumerate_branches,
    run_streaming,
    sample_trials,
)
from sineqpe.sinestate import SineStateParams, amplitudes, sine_amplitudes


def direct_fourier(theta, amps):
    """Plain-loop (1/2pi)|sum a_n e^{i n theta}|^2."""
    s = sum(a * complex(math.cos(n * theta), math.sin(n * theta)) for n, a in enumerate(amps))
    return abs(s) ** 2 / (2 * math.pi)


def test_pdf_values_at_zero():
    assert pdf_optimal(0.0, 10) == pytest.approx(1.53043, abs=1e-4)
    assert pdf_optimal(0.0, 10) == pytest.approx(direct_fourier(0.0, sine_amplitudes(10)), abs=1e-12)
    assert pdf_uniform(0.0, 10) == pytest.approx(1.750704, abs=1e-6)
    assert pdf_uniform(0.0, 10) == pytest.approx(11 / (2 * math.pi), abs=1e-12)


def test_uniform_first_zero():
    assert pdf_uniform(2 * math.pi / 11, 10) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("N", [1, 2, 7, 10, 31])
def test_densities_normalise(N):
    for pdf in (pdf_optimal, pdf_uniform):
        assert density_curve(pdf, N, 20001).integral() == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("N", [2, 10, 15, 63])
def test_optimal_closed_form_matches_fourier_sum(N):
    thetas = np.linspace(-math.pi, math.pi, 1001)
    closed = pdf_optimal(thetas, N)
    direct = fourier_density(thetas, sine_amplitudes(N))
    assert np.max(np.abs(closed - direct)) <= 1e-9
    for t in thetas[::97]:
        assert closed[list(thetas).index(t)] == pytest.approx(direct_fourier(t, sine_amplitudes(N)), abs=1e-9)


def test_uniform_closed_form_matches_fourier_sum():
    thetas = np.linspace(-math.pi, math.pi, 1001)
    flat = np.full(11, 1 / math.sqrt(11))
    assert np.max(np.abs(pdf_uniform(thetas, 10) - fourier_density(thetas, flat))) <= 1e-9


def test_singular_points_are_finite():
    N = 10
    x = math.pi / (N + 2)
    for t in (x, -x, x + 1e-10, x - 3e-9):
        val = pdf_optimal(t, N)
        assert math.isfinite(val)
        assert val == pytest.approx(direct_fourier(t, sine_amplitudes(N)), abs=1e-7)
    assert pdf_uniform(1e-12, N) == pytest.approx(11 / (2 * math.pi), abs=1e-9)


def test_densities_nonnegative():
    curve = density_curve(pdf_optimal, 10)
    assert np.all(curve.densities >= 0)
    assert curve.thetas[0] == -math.pi and curve.thetas[-1] == math.pi


def test_optimal_stays_below_uniform_envelope_in_tails():
    # the sinc oscillates to zero, so compare with its envelope 1/(2pi(N+1) sin^2(theta/2))
    N = 10
    thetas = np.linspace(math.pi / 4, math.pi, 20001)
    envelope = 1 / (2 * math.pi * (N + 1) * np.sin(thetas / 2) ** 2)
    assert np.all(pdf_optimal(thetas, N) < envelope)
    assert np.all(pdf_optimal(-thetas, N) < envelope)


def test_optimal_tail_mass_far_smaller():
    curve_opt = density_curve(pdf_optimal, 10, 200001)
    curve_uni = density_curve(pdf_uniform, 10, 200001)
    tail = np.abs(curve_opt.thetas) >= math.pi / 4
    mass_opt = np.trapezoid(np.where(tail, curve_opt.densities, 0), curve_opt.thetas)
    mass_uni = np.trapezoid(np.where(tail, curve_uni.densities, 0), curve_uni.thetas)
    assert mass_opt < mass_uni / 10


@pytest.mark.parametrize("N, expected", [(2, 1.0), (3, 0.527864), (10, 0.0717968)])
def test_min_holevo_values(N, expected):
    assert min_holevo_variance(N) == pytest.approx(expected, abs=1e-6)


def test_min_holevo_rejects_zero():
    with pytest.raises(ValueError):
        min_holevo_variance(0)


def test_sharpness_examples():
    assert sharpness_canonical([0.371748, 0.601501, 0.601501, 0.371748]) == pytest.approx(0.809017, abs=1e-6)
    for m in (1, 2, 5, 9):
        d = 2 ** m
        assert sharpness_canonical(np.full(d, 1 / math.sqrt(d))) == pytest.approx((d - 1) / d, abs=1e-14)
    d = 4
    v = sharpness_canonical(np.full(d, 1 / math.sqrt(d)))
    assert v ** -2 - 1 == pytest.approx(7 / 9, abs=1e-14)


@pytest.mark.parametrize("m", range(1, 13))
def test_sharpness_identity(m):
    p = SineStateParams(m)
    s = sharpness_canonical(amplitudes(p))
    assert s == pytest.approx(math.cos(math.pi / p.M), abs=1e-13)
    assert abs(1 / s ** 2 - 1 - min_holevo_variance(p.N)) <= 1e-12


def test_stats_all_zero_errors():
    s = stats_from_errors(np.zeros(10))
    assert s.holevo == 0 and s.cost_luis == 0 and s.holevo_unbiased == 0
    assert s.sample_count == 10


@given(st.floats(0.01, 1.5))
def test_stats_symmetric_pair(x):
    s = stats_from_errors([x, -x])
    assert s.sharpness.real == pytest.approx(math.cos(x), abs=1e-14)
    assert abs(s.sharpness.imag) <= 1e-15
    assert s.holevo == pytest.approx(s.holevo_unbiased, rel=1e-12)


def test_stats_empty_input():
    with pytest.raises(ValueError):
        stats_from_samples([], 0.0)
    with pytest.raises(ValueError):
        stats_from_records([])


def test_stats_flat_distribution_is_infinite():
    errors = 2 * math.pi * np.arange(8) / 8 - math.pi
    s = stats_from_errors(errors)
    assert s.holevo == math.inf
    assert s.holevo_unbiased == math.inf
    assert s.cost_luis == pytest.approx(2, abs=1e-12)


def test_stats_from_samples_wraps():
    s = stats_from_samples([0.1 + 2 * math.pi, 6.2], [0.1, 6.2 - 2 * math.pi])
    assert s.holevo == pytest.approx(0, abs=1e-12)


def test_stats_invariants(rng):
    s = stats_from_errors(rng.normal(scale=0.8, size=1000))
    assert abs(s.sharpness) <= 1
    assert s.holevo >= 0
    assert 0 <= s.cost_luis <= 4
    assert set(s.as_dict()) == {"sharpness_re", "sharpness_im", "sharpness_abs", "holevo",
                                "holevo_unbiased", "cost_luis", "sample_count"}


def test_stats_from_records():
    p = SineStateParams(3)
    rng = np.random.default_rng(4)
    recs = [run_streaming(ProtocolConfig(p, 0.5), rng) for _ in range(50)]
    a = stats_from_records(recs)
    b = stats_from_samples([r.estimate for r in recs], 0.5)
    assert a.holevo == pytest.approx(b.holevo, abs=1e-14)


def test_indicator_distribution_has_zero_variance():
    p = SineStateParams(3)
    probs = np.zeros(8)
    probs[5] = 1
    dist = OutcomeDistribution(p, probs, phase=2 * math.pi * 5 / 8)
    s = stats_from_distribution(dist)
    assert s.holevo == pytest.approx(0, abs=1e-12)


def test_distribution_stats_examples():
    d = canonical_distribution(SineStateParams(3), 0.4)
    assert stats_from_distribution(d, True).holevo == pytest.approx(0.132474, abs=1e-6)
    assert abs(stats_from_distribution(d, True).holevo - math.tan(math.pi / 9) ** 2) <= 1e-8
    u = canonical_distribution(SineStateParams(2), 0.4, state_kind="uniform")
    assert abs(stats_from_distribution(u, True).holevo - 7 / 9) <= 1e-8


@pytest.mark.parametrize("m", range(1, 11))
def test_oracle_chain(m):
    p = SineStateParams(m)
    d = canonical_distribution(p, 1.3)
    averaged = stats_from_distribution(d, True).holevo
    assert abs(averaged - min_holevo_variance(p.N)) <= 1e-8
    assert abs(averaged - (sharpness_canonical(amplitudes(p)) ** -2 - 1)) <= 1e-8


def test_offset_quadrature_converged():
    # the rectangle rule is already exact with few points
    d = canonical_distribution(SineStateParams(5), 0.2)
    values = [stats_from_distribution(d, True, points=n).holevo for n in (8, 64, 200)]
    assert max(values) - min(values) <= 1e-12


def test_enumerated_source_matches_canonical():
    p = SineStateParams(4)
    d = enumerate_branches(ProtocolConfig(p, 0.7))
    a = stats_from_distribution(d, True, source="enumerated", points=16).holevo
    b = stats_from_distribution(d, True, source="canonical", points=16).holevo
    assert a == pytest.approx(b, abs=1e-12)


def test_callable_source():
    p = SineStateParams(3)
    d = canonical_distribution(p, 0.0)
    s = stats_from_distribution(d, True, source=lambda pr, ph, off, kind: canonical_distribution(pr, ph, off, kind))
    assert s.holevo == pytest.approx(min_holevo_variance(p.N), abs=1e-10)


def test_monte_carlo_error_shrinks_like_inverse_sqrt():
    p = SineStateParams(4)
    exact = min_holevo_variance(p.N)
    spread = {}
    for n in (2_000, 32_000):
        vals = [stats_from_samples(b.estimates, b.phase).holevo_unbiased
                for b in (sample_trials(p, 0.3, n, seed=s, covariant=True) for s in range(24))]
        spread[n] = np.sqrt(np.mean((np.array(vals) - exact) ** 2))
    ratio = spread[2_000] / spread[32_000]
    # ideal ratio is sqrt(16) = 4
    assert 2.5 < ratio < 6.5
