"""Time-domain oscillator simulation, Welch PSD estimation and spectral fits.

These routines are the numerical cross-check of the analytic force-noise
chain: a white force is injected into a damped oscillator, the trajectory is
turned back into a spectrum, and the force level is recovered.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.signal

from .core import NoiseSpectrum, SpectrumKind
from .errors import NumericalError, ValidationError

RNG_ALGORITHM = "numpy.PCG64"
MIN_SAMPLES = 2**14


@dataclass(frozen=True, eq=False)
class SimulationRun:
    dt: float
    n_samples: int
    seed: int
    trajectory: np.ndarray  # m
    force_trace: np.ndarray  # N, zero-order-hold samples
    rng: str = RNG_ALGORITHM

    @property
    def time(self):
        return np.arange(self.n_samples) * self.dt


@dataclass(frozen=True)
class BrownianRunRecord:
    t: float  # days since mission start
    S_brown: float  # fm^2 s^-4 / Hz
    sigma: float  # 1-sigma, same units
    label: str = ""

    def __post_init__(self):
        if not (self.S_brown > 0 and self.sigma > 0):
            raise ValidationError(f"run {self.label!r}: S_brown and sigma must be > 0")


def viscous_susceptibility(M_eff, omega_m, Q, f):
    """chi(f) = 1 / (M (omega_m^2 - omega^2 + i omega omega_m / Q))."""
    w = 2 * np.pi * np.asarray(f, dtype=float)
    return 1.0 / (M_eff * (omega_m**2 - w**2 + 1j * w * omega_m / Q))


def stationary_variance(M_eff, omega_m, Q, force_white_psd):
    """Steady-state position variance under a white one-sided force PSD."""
    return force_white_psd * Q / (4 * M_eff**2 * omega_m**3)


def _discretize(M_eff, omega_m, Q, dt):
    A = np.array([[0.0, 1.0], [-(omega_m**2), -omega_m / Q]])
    B = np.array([[0.0], [1.0 / M_eff]])
    # Van Loan block exponential gives Phi and the zero-order-hold input matrix.
    aug = np.zeros((3, 3))
    aug[:2, :2] = A
    aug[:2, 2:] = B
    E = scipy.linalg.expm(aug * dt)
    return E[:2, :2], E[:2, 2:]


def simulate_oscillator(M_eff, omega_m, Q, force_white_psd, dt, n, seed, start="rest"):
    """Integrate x'' + (omega_m/Q) x' + omega_m^2 x = F/M_eff.

    The force is a zero-order-hold sequence of independent Gaussians with
    variance S/(2 dt), whose one-sided PSD is S well below the Nyquist
    frequency. Between samples the linear dynamics are propagated exactly.
    ``start`` is ``"rest"`` (x = v = 0) or ``"stationary"`` (initial state
    drawn from the equilibrium distribution).
    """
    n = int(n)
    if dt <= 0 or not math.isfinite(dt):
        raise ValidationError(f"dt must be > 0, got {dt!r}")
    if dt * omega_m >= 0.1:
        raise ValidationError(
            f"dt * omega_m = {dt * omega_m:.3g} >= 0.1; resonance is not resolved"
        )
    if n < MIN_SAMPLES:
        raise ValidationError(f"n must be >= {MIN_SAMPLES}, got {n}")
    if force_white_psd < 0 or M_eff <= 0 or omega_m <= 0 or Q <= 0:
        raise ValidationError("need force_white_psd >= 0 and positive M_eff, omega_m, Q")
    if start not in ("rest", "stationary"):
        raise ValidationError(f"start must be 'rest' or 'stationary', got {start!r}")

    rng = np.random.Generator(np.random.PCG64(seed))
    force = math.sqrt(force_white_psd / (2 * dt)) * rng.standard_normal(n)

    Phi, Gam = _discretize(M_eff, omega_m, Q, dt)
    b, a = scipy.signal.ss2tf(Phi, Gam, np.array([[1.0, 0.0]]), np.array([[0.0]]))
    b = np.real(b[0])
    a = np.real(a)
    x = scipy.signal.lfilter(b, a, force)

    if start == "stationary":
        var_x = stationary_variance(M_eff, omega_m, Q, force_white_psd)
        x0 = rng.standard_normal(2) * np.sqrt([var_x, var_x * omega_m**2])
        mu, V = np.linalg.eig(Phi)
        coeff = np.linalg.solve(V, x0)
        k = np.arange(n)
        x = x + np.real((V[0] * coeff)[None, :] * mu[None, :] ** k[:, None]).sum(axis=1)

    return SimulationRun(dt=float(dt), n_samples=n, seed=seed, trajectory=x, force_trace=force)


def welch_psd(x, dt, segment_len, overlap=0.5, window="hann", kind=SpectrumKind.DisplacementPSD,
              detrend="constant"):
    """One-sided Welch PSD of samples ``x`` taken every ``dt`` seconds.

    Density-normalized, so the PSD integrated over frequency matches the
    variance. The DC bin is dropped.
    """
    x = np.asarray(x, dtype=float)
    segment_len = int(segment_len)
    if window != "hann":
        raise ValidationError(f"unsupported window {window!r}")
    if not 0 <= overlap <= 0.9:
        raise ValidationError(f"overlap must be in [0, 0.9], got {overlap}")
    if segment_len < 4 or segment_len > x.size:
        raise ValidationError(
            f"segment_len must be in [4, {x.size}], got {segment_len}"
        )
    noverlap = int(round(overlap * segment_len))
    if noverlap >= segment_len:
        raise ValidationError("overlap leaves no stride between segments")
    f, p = scipy.signal.welch(
        x,
        fs=1.0 / dt,
        window="hann",
        nperseg=segment_len,
        noverlap=noverlap,
        detrend=detrend,
        scaling="density",
        return_onesided=True,
    )
    return NoiseSpectrum(f[1:], p[1:], kind)


def n_segments(n, segment_len, overlap=0.5):
    step = segment_len - int(round(overlap * segment_len))
    return (n - segment_len) // step + 1


def recover_force_psd(run, M_eff, omega_m, Q, segment_len, overlap=0.5):
    """Welch estimate of the trajectory divided by the oscillator |chi|^2."""
    disp = welch_psd(run.trajectory, run.dt, segment_len, overlap, detrend="linear")
    chi2 = np.abs(viscous_susceptibility(M_eff, omega_m, Q, disp.freqs)) ** 2
    return NoiseSpectrum(disp.freqs, disp.values / chi2, SpectrumKind.ForcePSD)


@dataclass(frozen=True)
class Decomposition:
    white_level: float
    colored_coeff: float
    residual: float  # RMS relative residual
    exponent: float = -1.0


def _model(f, A, B, k):
    return A + B * f**k


def decompose_white_plus_colored(s, color_exponent=-1.0, free_exponent=False, iterations=3):
    """Fit S(f) ~ A + B f**k with A, B >= 0 by relative weighted least squares.

    With ``free_exponent`` the exponent k is fitted too (diagnostic only).
    Weights start from the data and are refined from the model, which removes
    the downward bias of data weighting on noisy spectra.
    """
    f = np.asarray(s.freqs, dtype=float)
    S = np.asarray(s.values, dtype=float)
    keep = (f > 0) & (S > 0)
    f, S = f[keep], S[keep]
    if f.size < 3:
        raise NumericalError("need at least three bins with non-zero power")
    if f[-1] / f[0] < 10 * (1 - 1e-12):
        raise ValidationError(
            f"spectrum spans {f[-1] / f[0]:.3g}x in frequency; need at least one decade"
        )
    if S.max() > 0.999 * S.sum():
        raise NumericalError("ill-conditioned fit: all power in one bin")

    if free_exponent:
        def resid(p):
            return _model(f, p[0], p[1], p[2]) / S - 1

        A0, B0 = S.min(), max(S[0] - S.min(), 0) * f[0]
        sol = scipy.optimize.least_squares(
            resid, [A0, B0, color_exponent],
            bounds=([0, 0, -4], [np.inf, np.inf, 0]),
            x_scale=[max(A0, 1e-300), max(B0, 1e-300), 1.0],
        )
        A, B, k = sol.x
        return Decomposition(float(A), float(B), float(np.sqrt(np.mean(sol.fun**2))), float(k))

    k = float(color_exponent)
    design = np.column_stack([np.ones_like(f), f**k])
    weights = 1.0 / S
    coef = None
    for _ in range(max(1, iterations)):
        scale = np.sqrt(np.sum((design * weights[:, None]) ** 2, axis=0))
        if np.any(scale == 0):
            raise NumericalError("degenerate design matrix")
        coef, _ = scipy.optimize.nnls(design * weights[:, None] / scale, S * weights)
        coef = coef / scale
        model = design @ coef
        if np.any(model <= 0):
            break
        weights = 1.0 / model
    model = design @ coef
    residual = float(np.sqrt(np.mean((S / np.where(model > 0, model, np.inf) - 1) ** 2)))
    if not np.all(np.isfinite(coef)):
        raise NumericalError("fit did not converge")
    return Decomposition(float(coef[0]), float(coef[1]), residual, k)


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    amplitude: float  # S at t = 1 day
    exponent_stderr: float
    amplitude_stderr: float


def fit_powerlaw_decay(runs):
    """Weighted least squares of log S against log t.

    Log-space uncertainties are sigma/S; the returned standard errors come
    from the weighted normal matrix with the given sigmas taken as absolute.
    """
    runs = list(runs)
    if len(runs) < 3:
        raise ValidationError(f"need at least 3 runs, got {len(runs)}")
    t = np.array([r.t for r in runs], dtype=float)
    if np.any(t <= 0):
        raise ValidationError("all run times must be > 0")
    if np.unique(t).size < 3:
        raise ValidationError("need at least 3 distinct run times")
    S = np.array([r.S_brown for r in runs], dtype=float)
    sig = np.array([r.sigma for r in runs], dtype=float) / S
    X = np.column_stack([np.ones_like(t), np.log(t)])
    w = 1.0 / sig
    coef, *_ = np.linalg.lstsq(X * w[:, None], np.log(S) * w, rcond=None)
    cov = np.linalg.inv((X * w[:, None]).T @ (X * w[:, None]))
    amp = math.exp(coef[0])
    return PowerLawFit(
        exponent=float(coef[1]),
        amplitude=amp,
        exponent_stderr=float(math.sqrt(cov[1, 1])),
        amplitude_stderr=float(amp * math.sqrt(cov[0, 0])),
    )
