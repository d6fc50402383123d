"""Turning a white acceleration noise level into collapse-model bounds."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .collapse_models import r_valid_max as _r_valid_max
from .core import CODATA2018, CslParams
from .errors import RegimeError, ValidationError

log = logging.getLogger(__name__)

LABEL_LPF_2016 = "LPF-2016"
LABEL_LPF_UPDATED = "LPF-updated"
LABEL_UNDERGROUND = "underground-proposal"

# Reference white acceleration PSD levels, m^2 s^-4 / Hz.
SA_LPF_2016 = (5.2e-15) ** 2
SA_LPF_UPDATED = 0.075e-30


@dataclass(frozen=True)
class Benchmark:
    name: str
    lam: float
    r: float
    log10_spread: float = 0.0

    @property
    def params(self):
        return CslParams(self.lam, self.r)


BENCHMARKS = (
    Benchmark("GRW", 1e-16, 1e-7),
    Benchmark("Adler-1e-7", 1e-8, 1e-7, 2.0),
    Benchmark("Adler-1e-6", 1e-6, 1e-6, 2.0),
)


def _check_sa(sa_white):
    sa_white = float(sa_white)
    if not math.isfinite(sa_white) or sa_white < 0:
        raise ValidationError(f"acceleration PSD must be finite and >= 0, got {sa_white!r}")
    return sa_white


def csl_lambda_bound(sa_white, tm, r, constants=CODATA2018):
    """Largest CSL rate compatible with a white acceleration PSD ``sa_white``.

    lambda = m0^2 / (32 pi hbar^2 r^2) * (M/rho)^2 / b^2 * S_a, valid while
    r <= b/10.
    """
    sa_white = _check_sa(sa_white)
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise ValidationError(f"r must be finite and > 0, got {r!r}")
    rmax = _r_valid_max(tm)
    if r > rmax:
        raise RegimeError(
            f"r = {r:g} m outside the small-r regime (r_valid_max = {rmax:g} m)", rmax
        )
    return (
        constants.m0**2
        / (32.0 * math.pi * constants.hbar**2 * r**2)
        * (tm.mass / tm.density) ** 2
        / tm.side**2
        * sa_white
    )


def dp_sigma_bound(sa_white, tm, constants=CODATA2018):
    """Smallest DP cut-off length compatible with ``sa_white`` (m)."""
    sa_white = _check_sa(sa_white)
    if sa_white == 0:
        raise ValidationError("DP bound diverges for a zero noise level")
    inner = (
        2.0 * constants.hbar * constants.G / (3.0 * math.sqrt(math.pi))
        * tm.density / tm.mass / sa_white
    )
    return tm.lattice_a * inner ** (1.0 / 3.0)


@dataclass(frozen=True, eq=False)
class ExclusionCurve:
    """Boundary lambda_max(r); parameters above it are excluded."""

    r: np.ndarray
    lambda_max: np.ndarray
    source_label: str
    r_valid_max: float
    dropped: tuple = field(default=())

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        lam = np.array(self.lambda_max, dtype=float)
        if r.size == 0 or r.shape != lam.shape:
            raise ValidationError("curve needs matching, non-empty r and lambda arrays")
        if np.any(np.diff(r) <= 0):
            raise ValidationError("curve r values must be strictly increasing")
        if np.any(lam <= 0):
            raise ValidationError("curve lambda_max must be > 0")
        r.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "lambda_max", lam)

    @property
    def points(self):
        return list(zip(self.r.tolist(), self.lambda_max.tolist()))

    def lambda_at(self, r):
        r = float(r)
        if r < self.r[0] or r > self.r[-1]:
            raise ValidationError(
                f"r = {r:g} m outside curve range [{self.r[0]:g}, {self.r[-1]:g}] m"
            )
        hit = np.flatnonzero(self.r == r)
        if hit.size:
            return float(self.lambda_max[hit[0]])
        return float(np.exp(np.interp(np.log(r), np.log(self.r), np.log(self.lambda_max))))


def exclusion_curve(sa_white, tm, r_grid, source_label=LABEL_LPF_UPDATED, constants=CODATA2018):
    """Evaluate :func:`csl_lambda_bound` over ``r_grid``.

    Grid points beyond the validity cutoff are dropped and listed in
    ``curve.dropped``; an empty remainder is an error.
    """
    r_grid = np.sort(np.asarray(r_grid, dtype=float))
    if r_grid.size == 0 or np.any(r_grid <= 0):
        raise ValidationError("r grid must be non-empty and positive")
    rmax = _r_valid_max(tm)
    keep = r_grid <= rmax
    dropped = tuple(r_grid[~keep].tolist())
    if dropped:
        log.warning("dropped %d grid points above r_valid_max = %g m", len(dropped), rmax)
    if not np.any(keep):
        raise RegimeError(
            f"no grid point within the validity regime r <= {rmax:g} m", rmax
        )
    r_ok = r_grid[keep]
    lam = np.array([csl_lambda_bound(sa_white, tm, r, constants) for r in r_ok])
    return ExclusionCurve(r_ok, lam, source_label, rmax, dropped)


def excludes(curve, p):
    """True iff ``p`` lies strictly above ``curve`` (the boundary is allowed)."""
    return p.lam > curve.lambda_at(p.r)
