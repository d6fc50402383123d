import math

import numpy as np
import pytest
from scipy import integrate

from collapse_bounds.core import NoiseSpectrum, SpectrumKind
from collapse_bounds.errors import NumericalError, ValidationError
from collapse_bounds.spectral import (
    BrownianRunRecord,
    decompose_white_plus_colored,
    fit_powerlaw_decay,
    n_segments,
    simulate_oscillator,
    stationary_variance,
    viscous_susceptibility,
    welch_psd,
)


def quad_variance(M, wm, Q, S):
    """Oracle: integrate S |chi|^2 over frequency numerically."""
    f0 = wm / (2 * math.pi)

    def integrand(u):
        f = math.exp(u)
        return S * abs(viscous_susceptibility(M, wm, Q, f)) ** 2 * f

    val, _ = integrate.quad(integrand, math.log(f0 * 1e-6), math.log(f0 * 1e5),
                            points=[math.log(f0)], limit=800)
    return val


def test_stationary_variance_formula_against_quadrature():
    for M, wm, Q in [(1.0, 0.05, 20.0), (2.0, 6.3e-3, 100.0), (0.3, 1.0, 5.0)]:
        assert stationary_variance(M, wm, Q, 1.7) == pytest.approx(quad_variance(M, wm, Q, 1.7), rel=1e-4)


def test_zero_force_zero_trajectory():
    run = simulate_oscillator(1.0, 0.05, 10.0, 0.0, 1.0, 2**14, seed=1)
    assert np.all(run.trajectory == 0.0)
    assert np.all(run.force_trace == 0.0)


def test_determinism_and_seed_sensitivity():
    a = simulate_oscillator(1.0, 0.05, 10.0, 1.0, 1.0, 2**14, seed=7)
    b = simulate_oscillator(1.0, 0.05, 10.0, 1.0, 1.0, 2**14, seed=7)
    c = simulate_oscillator(1.0, 0.05, 10.0, 1.0, 1.0, 2**14, seed=8)
    assert np.array_equal(a.trajectory, b.trajectory)
    assert not np.array_equal(a.trajectory, c.trajectory)
    assert a.rng == "numpy.PCG64"


def test_simulator_preconditions():
    with pytest.raises(ValidationError, match="resolved"):
        simulate_oscillator(1.0, 1.0, 10.0, 1.0, 0.2, 2**14, seed=0)
    with pytest.raises(ValidationError):
        simulate_oscillator(1.0, 0.05, 10.0, 1.0, 1.0, 100, seed=0)


def test_equilibrium_variance():
    M, wm, Q, S = 1.0, 0.05, 20.0, 1.0
    n = 2**20  # ~2600 amplitude decay times
    assert n * 1.0 >= 100 * Q / wm
    run = simulate_oscillator(M, wm, Q, S, 1.0, n, seed=11, start="stationary")
    assert run.trajectory.var() == pytest.approx(quad_variance(M, wm, Q, S), rel=0.10)


def test_force_trace_white_level():
    run = simulate_oscillator(1.0, 0.05, 10.0, 3.0, 0.5, 2**16, seed=2)
    spec = welch_psd(run.force_trace, run.dt, 256, kind=SpectrumKind.ForcePSD)
    assert spec.values.mean() == pytest.approx(3.0, rel=0.05)


def test_welch_white_gaussian():
    x = np.random.default_rng(5).standard_normal(2**16)
    assert n_segments(x.size, 512) >= 200
    spec = welch_psd(x, 1.0, 512)
    assert spec.values.mean() == pytest.approx(2.0, rel=0.05)
    df = spec.freqs[1] - spec.freqs[0]
    assert spec.values.sum() * df == pytest.approx(x.var(), rel=0.02)


def test_welch_tone_power():
    dt, A, f0 = 0.01, 3.0, 5.0
    t = np.arange(2**15) * dt
    x = A * np.sin(2 * np.pi * f0 * t)
    spec = welch_psd(x, dt, 1024)
    df = spec.freqs[1] - spec.freqs[0]
    peak = np.abs(spec.freqs - f0) < 4 * df
    assert spec.values[peak].sum() * df == pytest.approx(A**2 / 2, rel=0.03)


def test_welch_zero_and_errors():
    spec = welch_psd(np.zeros(1024), 1.0, 128)
    assert np.all(spec.values == 0)
    with pytest.raises(ValidationError):
        welch_psd(np.zeros(100), 1.0, 128)
    with pytest.raises(ValidationError):
        welch_psd(np.zeros(1024), 1.0, 128, overlap=0.95)
    with pytest.raises(ValidationError):
        welch_psd(np.zeros(1024), 1.0, 128, window="boxcar")


FREQS = np.geomspace(1e-4, 1e-1, 200)


def test_decompose_noise_free():
    s = NoiseSpectrum(FREQS, 3.0 + 2.0 / FREQS, SpectrumKind.AccelPSD)
    d = decompose_white_plus_colored(s)
    assert d.white_level == pytest.approx(3.0, rel=0.01)
    assert d.colored_coeff == pytest.approx(2.0, rel=0.01)
    assert d.residual < 1e-6


def test_decompose_pure_white():
    d = decompose_white_plus_colored(NoiseSpectrum(FREQS, np.full(FREQS.shape, 5.0), SpectrumKind.AccelPSD))
    assert d.white_level == pytest.approx(5.0, rel=1e-9)
    assert d.colored_coeff == pytest.approx(0.0, abs=1e-12)


def test_decompose_chi2_statistics():
    # Welch-like linear grid; white/colored corner at 0.67 mHz. When 1/f
    # dominates the whole band the white level is not identifiable to 5%.
    f = np.arange(1, 1001) * 1e-4
    rng = np.random.default_rng(2024)
    K = 100  # averages per bin
    truth = 3.0 + 2e-3 / f
    errs = []
    for _ in range(50):
        noisy = truth * rng.chisquare(2 * K, f.size) / (2 * K)
        d = decompose_white_plus_colored(NoiseSpectrum(f, noisy, SpectrumKind.AccelPSD))
        errs.append(d.white_level / 3.0 - 1)
    assert max(abs(e) for e in errs) < 0.05
    assert abs(np.mean(errs)) < 0.005


def test_decompose_free_exponent():
    s = NoiseSpectrum(FREQS, 3.0 + 2.0 * FREQS**-1.5, SpectrumKind.AccelPSD)
    d = decompose_white_plus_colored(s, free_exponent=True)
    assert d.exponent == pytest.approx(-1.5, abs=0.01)
    assert d.white_level == pytest.approx(3.0, rel=0.02)


def test_decompose_errors():
    narrow = np.linspace(1e-3, 5e-3, 20)
    with pytest.raises(ValidationError, match="decade"):
        decompose_white_plus_colored(NoiseSpectrum(narrow, np.ones(20), SpectrumKind.AccelPSD))
    spike = np.zeros(FREQS.size)
    spike[10] = 1.0
    with pytest.raises(NumericalError):
        decompose_white_plus_colored(NoiseSpectrum(FREQS, spike, SpectrumKind.AccelPSD))


def synthetic_runs(seed, exponent=-0.8, amp=7.0, noise=0.01):
    rng = np.random.default_rng(seed)
    t = np.linspace(30, 500, 10)
    S = amp * t**exponent * (1 + noise * rng.standard_normal(t.size))
    return [BrownianRunRecord(ti, si, noise * si, f"run{i}") for i, (ti, si) in enumerate(zip(t, S))]


def test_powerlaw_recovers_exponent():
    fit = fit_powerlaw_decay(synthetic_runs(0))
    assert fit.exponent == pytest.approx(-0.8, abs=0.05)
    assert fit.amplitude == pytest.approx(7.0, rel=0.2)
    assert 0 < fit.exponent_stderr < 0.05


def test_powerlaw_constant():
    runs = [BrownianRunRecord(t, 2.0, 0.1) for t in (10.0, 50.0, 200.0, 400.0)]
    fit = fit_powerlaw_decay(runs)
    assert abs(fit.exponent) <= fit.exponent_stderr


def test_powerlaw_weight_limit():
    runs = synthetic_runs(3)
    outlier = runs[4]
    runs[4] = BrownianRunRecord(outlier.t, outlier.S_brown * 3, outlier.sigma * 1e3, outlier.label)
    with_inflated = fit_powerlaw_decay(runs)
    without = fit_powerlaw_decay(runs[:4] + runs[5:])
    assert with_inflated.exponent == pytest.approx(without.exponent, rel=0.01)
    assert with_inflated.amplitude == pytest.approx(without.amplitude, rel=0.01)


def test_powerlaw_errors():
    with pytest.raises(ValidationError):
        fit_powerlaw_decay(synthetic_runs(0)[:2])
    with pytest.raises(ValidationError):
        fit_powerlaw_decay([BrownianRunRecord(t, 1.0, 0.1) for t in (-1.0, 2.0, 3.0)])
    with pytest.raises(ValidationError):
        fit_powerlaw_decay([BrownianRunRecord(t, 1.0, 0.1) for t in (1.0, 1.0, 3.0)])
    with pytest.raises(ValidationError):
        BrownianRunRecord(1.0, 0.0, 0.1)
