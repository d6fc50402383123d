"""Physical constants, the shared data model and spectrum kind conversions.

All PSDs are one-sided; the amplitude spectral density is ``sqrt(PSD)``.
"""

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConversionError, ValidationError

# CODATA 2018, exact to double precision.
HBAR = 1.054571817e-34  # J s
G_NEWTON = 6.67430e-11  # m^3 kg^-1 s^-2
K_BOLTZMANN = 1.380649e-23  # J / K
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
PROTON_MASS = 1.67262192369e-27  # kg
SPEED_OF_LIGHT = 299792458.0  # m / s

ANGSTROM = 1e-10
FEMTOMETRE = 1e-15


def _check_positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be finite and > 0, got {value!r}")
    return value


def _check_nonnegative(name, value):
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValidationError(f"{name} must be finite and >= 0, got {value!r}")
    return value


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants used by the collapse-model formulas (SI units).

    ``m0`` is the reference nucleon mass of the CSL model. The atomic mass
    unit is the default; pass ``m0=PROTON_MASS`` for the proton convention.
    """

    hbar: float = HBAR
    G: float = G_NEWTON
    k_B: float = K_BOLTZMANN
    m0: float = ATOMIC_MASS_UNIT
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        for name in ("hbar", "G", "k_B", "m0", "c"):
            object.__setattr__(self, name, _check_positive(name, getattr(self, name)))

    @property
    def label(self):
        if self == CODATA2018:
            return "CODATA2018/m0=amu"
        if self == replace(CODATA2018, m0=PROTON_MASS):
            return "CODATA2018/m0=proton"
        return "custom"


CODATA2018 = PhysicalConstants()


@dataclass(frozen=True)
class TestMass:
    """A cuboid test mass.

    Attributes:
        mass: mass M in kg.
        density: mass density rho in kg/m^3.
        side: cube edge b in m.
        lattice_a: crystal lattice constant a in m.
    """

    __test__ = False  # not a pytest class

    mass: float
    density: float
    side: float
    lattice_a: float

    def __post_init__(self):
        for name in ("mass", "density", "side", "lattice_a"):
            object.__setattr__(self, name, _check_positive(name, getattr(self, name)))
        if not self.is_consistent:
            warnings.warn(
                f"test mass inconsistent: |M - rho b^3|/M = {self.consistency:.3f} > 0.25",
                stacklevel=3,
            )

    @classmethod
    def from_mass_density(cls, mass, density, lattice_a):
        """Build a solid cube, deriving the side from ``(M/rho)**(1/3)``."""
        side = (float(mass) / float(density)) ** (1.0 / 3.0)
        return cls(mass=mass, density=density, side=side, lattice_a=lattice_a)

    @property
    def consistency(self):
        """Relative mismatch between M and rho*b^3."""
        return abs(self.mass - self.density * self.side**3) / self.mass

    @property
    def is_consistent(self):
        return self.consistency <= 0.25


# LISA Pathfinder Au-Pt test mass.
LPF_MASS = TestMass(mass=1.928, density=19881.0, side=0.046, lattice_a=4.0 * ANGSTROM)
# Fused-silica cube of the proposed torsion balance.
FUSED_SILICA_MASS = TestMass.from_mass_density(1.0, 2330.0, 5.0 * ANGSTROM)


@dataclass(frozen=True)
class CslParams:
    """CSL collapse rate ``lam`` (1/s) and correlation length ``r`` (m)."""

    lam: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_nonnegative("lambda", self.lam))
        object.__setattr__(self, "r", _check_positive("r", self.r))


@dataclass(frozen=True)
class DpParams:
    """Diosi-Penrose regularization length ``sigma`` (m)."""

    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_positive("sigma", self.sigma))


class SpectrumKind(enum.Enum):
    AccelPSD = "m^2 s^-4 Hz^-1"
    ForcePSD = "N^2 Hz^-1"
    TorquePSD = "N^2 m^2 Hz^-1"
    DisplacementPSD = "m^2 Hz^-1"
    AnglePSD = "rad^2 Hz^-1"

    @property
    def unit(self):
        return self.value

    @classmethod
    def parse(cls, text):
        text = text.strip()
        try:
            return cls[text]
        except KeyError:
            raise ValidationError(
                f"unknown spectrum kind {text!r}; expected one of {[k.name for k in cls]}"
            ) from None


def _frozen_array(values, name):
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NoiseSpectrum:
    """One-sided PSD sampled on a strictly increasing frequency grid."""

    freqs: np.ndarray
    values: np.ndarray
    kind: SpectrumKind

    def __post_init__(self):
        freqs = _frozen_array(self.freqs, "freqs")
        values = _frozen_array(self.values, "values")
        if freqs.size < 1:
            raise ValidationError("spectrum needs at least one sample")
        if freqs.shape != values.shape:
            raise ValidationError(
                f"freqs and values differ in length ({freqs.size} != {values.size})"
            )
        if np.any(np.diff(freqs) <= 0):
            raise ValidationError("frequencies must be strictly increasing")
        if np.any(values < 0):
            raise ValidationError("PSD values must be >= 0")
        if not isinstance(self.kind, SpectrumKind):
            raise ValidationError(f"kind must be a SpectrumKind, got {self.kind!r}")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.freqs.size

    def __eq__(self, other):
        if not isinstance(other, NoiseSpectrum):
            return NotImplemented
        return (
            self.kind is other.kind
            and np.array_equal(self.freqs, other.freqs)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @property
    def asd(self):
        return np.sqrt(self.values)

    def scaled(self, factor):
        return NoiseSpectrum(self.freqs, self.values * factor, self.kind)

    def interpolate(self, freqs):
        """Resample onto ``freqs`` by linear interpolation in (log f, log S).

        Zero-valued samples are handled by interpolating linearly in S
        between them. Requesting frequencies outside the grid is an error.
        """
        freqs = np.asarray(freqs, dtype=float)
        lo, hi = self.freqs[0], self.freqs[-1]
        if np.any(freqs < lo * (1 - 1e-12)) or np.any(freqs > hi * (1 + 1e-12)):
            raise ValidationError(
                f"requested band [{freqs.min():g}, {freqs.max():g}] Hz outside "
                f"spectrum coverage [{lo:g}, {hi:g}] Hz"
            )
        freqs = np.clip(freqs, lo, hi)
        if len(self) == 1:
            return np.full(freqs.shape, self.values[0])
        if np.all(self.values > 0):
            return np.exp(np.interp(np.log(freqs), np.log(self.freqs), np.log(self.values)))
        return np.interp(np.log(freqs), np.log(self.freqs), self.values)

    @classmethod
    def white(cls, level, freqs, kind):
        freqs = np.asarray(freqs, dtype=float)
        return cls(freqs, np.full(freqs.shape, float(level)), kind)


@dataclass(frozen=True)
class ConversionContext:
    """Quantities needed to move between spectrum kinds.

    Attributes:
        mass: single test-mass mass M (kg); force <-> differential acceleration.
        lever_arm: distance from the torsion axis to the force point (m).
        susceptibility: callable ``f -> chi(f)`` in m/N for the force-referred
            mode; force <-> displacement.
    """

    mass: Optional[float] = None
    lever_arm: Optional[float] = None
    susceptibility: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )

    def require(self, name, target):
        value = getattr(self, name)
        if value is None:
            raise ConversionError(f"conversion to/from {target} needs context field {name!r}")
        return value


def _factor_to_force(kind, freqs, ctx):
    """Pointwise factor k such that ForcePSD = k * S_kind."""
    K = SpectrumKind
    if kind is K.ForcePSD:
        return np.ones_like(freqs)
    if kind is K.AccelPSD:
        # Differential two-mass readout: S_a = 4 S_F / M^2.
        M = ctx.require("mass", kind.name)
        return np.full_like(freqs, M**2 / 4.0)
    if kind is K.TorquePSD:
        arm = ctx.require("lever_arm", kind.name)
        return np.full_like(freqs, 1.0 / arm**2)
    if kind is K.DisplacementPSD:
        chi = ctx.require("susceptibility", kind.name)
        return 1.0 / np.abs(chi(freqs)) ** 2
    if kind is K.AnglePSD:
        arm = ctx.require("lever_arm", kind.name)
        chi = ctx.require("susceptibility", kind.name)
        return arm**2 / np.abs(chi(freqs)) ** 2
    raise ConversionError(f"no conversion path for kind {kind!r}")


def convert_spectrum(s, target, ctx=None):
    """Convert ``s`` to spectrum kind ``target``.

    Every kind is routed through ForcePSD, so any pair with the needed
    context fields is reachable. Same-kind conversion returns ``s`` itself.
    """
    if not isinstance(target, SpectrumKind):
        raise ConversionError(f"target must be a SpectrumKind, got {target!r}")
    if target is s.kind:
        return s
    ctx = ctx or ConversionContext()
    to_force = _factor_to_force(s.kind, s.freqs, ctx)
    from_force = 1.0 / _factor_to_force(target, s.freqs, ctx)
    return NoiseSpectrum(s.freqs, s.values * (to_force * from_force), target)


def log_grid(f_min, f_max, n_points):
    if not (0 < f_min < f_max):
        raise ValidationError(f"need 0 < f_min < f_max, got [{f_min}, {f_max}]")
    if int(n_points) < 2:
        raise ValidationError(f"n_points must be >= 2, got {n_points}")
    return np.geomspace(f_min, f_max, int(n_points))
