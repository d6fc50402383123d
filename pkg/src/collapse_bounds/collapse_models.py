"""Effective white force noise of the CSL and Diosi-Penrose models.

A collapse model acts on a rigid test mass as a delta-correlated stochastic
force, <F(t) F(t + tau)> = D delta(tau). The one-sided force PSD level is
identified with D itself (not 2D); this is the normalization under which the
published LPF bounds are recovered.
"""

import math
import warnings
from dataclasses import dataclass

from .core import CODATA2018, CslParams, DpParams
from .errors import RegimeError, ValidationError


class RegimeWarning(UserWarning):
    """r is outside the comfortable range of the small-r geometry factor."""


# Beyond this fraction of the cube edge the small-r geometry factor is
# considered unreliable.
VALID_R_FRACTION = 0.1


def r_valid_max(tm):
    return VALID_R_FRACTION * tm.side


@dataclass(frozen=True)
class CslDiffusion:
    D: float  # N^2 s
    alpha: float  # dimensionless


@dataclass(frozen=True)
class DpDiffusion:
    D: float  # N^2 s


def csl_geometry_factor(tm, r, constants=CODATA2018):
    """Geometry factor alpha = 8 pi rho^2 r^4 b^2 / m0^2 for r << b.

    Counts the nucleon pairs within a correlation length of the two faces
    normal to the motion; dimensionless. Warns above b/10 and raises
    :class:`RegimeError` for r >= b.
    """
    r = float(r)
    if not (r > 0 and math.isfinite(r)):
        raise ValidationError(f"r must be finite and > 0, got {r!r}")
    if r >= tm.side:
        raise RegimeError(
            f"r = {r:g} m >= cube side {tm.side:g} m; small-r geometry factor is meaningless",
            r_valid_max(tm),
        )
    if r > r_valid_max(tm):
        warnings.warn(
            f"r = {r:g} m exceeds b/10 = {r_valid_max(tm):g} m; geometry factor is approximate",
            RegimeWarning,
            stacklevel=2,
        )
    return 8.0 * math.pi * tm.density**2 * r**4 * tm.side**2 / constants.m0**2


def csl_diffusion(p, tm, constants=CODATA2018):
    alpha = csl_geometry_factor(tm, p.r, constants)
    D = p.lam * (constants.hbar / p.r) ** 2 * alpha
    return CslDiffusion(D=D, alpha=alpha)


def csl_force_psd(p, tm, constants=CODATA2018):
    """White one-sided CSL force PSD level in N^2/Hz."""
    return csl_diffusion(p, tm, constants).D


def dp_diffusion(p, tm, constants=CODATA2018):
    D = (
        constants.G
        * constants.hbar
        / (6.0 * math.sqrt(math.pi))
        * (tm.lattice_a / p.sigma) ** 3
        * tm.mass
        * tm.density
    )
    return DpDiffusion(D=D)


def dp_force_psd(p, tm, constants=CODATA2018):
    """White one-sided DP force PSD level in N^2/Hz."""
    return dp_diffusion(p, tm, constants).D


def csl_correlator(separation, p, constants=CODATA2018):
    """Spatial CSL correlator lambda/m0^2 exp(-|x-y|^2 / 4 r^2)."""
    return p.lam / constants.m0**2 * math.exp(-(separation**2) / (4.0 * p.r**2))


def dp_correlator(separation, constants=CODATA2018):
    """Spatial DP correlator G / (hbar |x-y|)."""
    if separation <= 0:
        raise ValidationError("DP correlator diverges at zero separation")
    return constants.G / constants.hbar / separation


__all__ = [
    "CslDiffusion",
    "CslParams",
    "DpDiffusion",
    "DpParams",
    "RegimeWarning",
    "VALID_R_FRACTION",
    "csl_correlator",
    "csl_diffusion",
    "csl_force_psd",
    "csl_geometry_factor",
    "dp_correlator",
    "dp_diffusion",
    "dp_force_psd",
    "r_valid_max",
]
