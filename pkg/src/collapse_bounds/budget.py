"""Noise budget of the dual torsion balance.

Forces are referred to the torsion mode at the test-mass position: a torque
tau corresponds to a force tau / (L/2), and the mode's effective inertial mass
is I / (L/2)^2 = 2M for two point-like cubes. Displacements are referred to the
same point, x = theta * L/2.
"""

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .core import (
    CODATA2018,
    FUSED_SILICA_MASS,
    NoiseSpectrum,
    SpectrumKind,
    TestMass,
    log_grid,
)
from .errors import ValidationError

N2_MOLECULE_MASS = 4.65e-26  # kg

# Rotational ground-motion surrogate: ASD(f) = asd_1mHz * (1 mHz / f)**index.
# The level is chosen so that the 10% residual after dual-balance
# subtraction is 1e-17 N/rtHz at 1 mHz for the default device.
SEISMIC_ROTATION_ASD_1MHZ = 2.53e-11  # rad / rtHz
SEISMIC_ROTATION_INDEX = 1.0

COMPONENTS = (
    "thermal",
    "gas",
    "seismic_rotation",
    "laser_rp",
    "laser_frequency",
    "thermoelastic",
    "newtonian",
    "shot",
    "sql",
)
# Removed from the residual once T, p_air and Q are measured.
CALIBRATED = ("thermal", "gas")

GAS_FORMULA = "S_F = 2 (1 + pi/8) p b^2 sqrt(512 m_gas k_B T / pi) [free molecular flow, isolated cubes]"


@dataclass(frozen=True)
class DeviceConfig:
    """Torsion-balance experiment description; defaults are the design values."""

    tm: TestMass = FUSED_SILICA_MASS
    L: float = 0.1  # arm length, m
    omega_m: float = 2 * math.pi * 1e-3  # rad/s
    Q: float = 1e6
    T: float = 300.0  # K
    dT: float = 1e-4  # K/rtHz
    p_air: float = 1e-7  # Pa
    laser_power: float = 1e-3  # W
    laser_wavelength: float = 1064e-9  # m
    rin_1mHz: float = 1e-5  # 1/rtHz
    freq_noise_1mHz: float = 1e4  # Hz/rtHz
    alpha_E: float = 5.5e-7  # 1/K
    cmrr_seismic: float = 0.1
    cmrr_thermal: float = 1e-4  # residual of thermoelastic common-mode rejection
    rp_residual: float = 0.1  # differential fraction of radiation-pressure noise
    arm_mismatch: float = 1e-3  # interferometer arm-length mismatch, m
    gas_mass: float = N2_MOLECULE_MASS
    seismic_rotation_asd_1mHz: float = SEISMIC_ROTATION_ASD_1MHZ
    seismic_rotation_index: float = SEISMIC_ROTATION_INDEX
    seismic_rotation: Optional[NoiseSpectrum] = field(default=None, compare=False)
    newtonian: Optional[NoiseSpectrum] = field(default=None, compare=False)
    shot: Optional[NoiseSpectrum] = field(default=None, compare=False)

    _positive = ("L", "omega_m", "Q", "T", "laser_wavelength", "gas_mass")
    _fractions = ("cmrr_thermal", "rp_residual")

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float) or isinstance(value, int):
                if not math.isfinite(value) or value < 0:
                    raise ValidationError(f"{f.name} must be finite and >= 0, got {value!r}")
        for name in self._positive:
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0")
        if not (0 < self.cmrr_seismic <= 1):
            raise ValidationError(f"cmrr_seismic must be in (0, 1], got {self.cmrr_seismic}")
        for name in self._fractions:
            if getattr(self, name) > 1:
                raise ValidationError(f"{name} must be in [0, 1]")
        for name, kind in (
            ("seismic_rotation", SpectrumKind.AnglePSD),
            ("newtonian", SpectrumKind.ForcePSD),
            ("shot", SpectrumKind.DisplacementPSD),
        ):
            spec = getattr(self, name)
            if spec is not None and spec.kind is not kind:
                raise ValidationError(f"{name} spectrum must be {kind.name}, got {spec.kind.name}")

    @property
    def f_m(self):
        return self.omega_m / (2 * math.pi)

    @property
    def lever_arm(self):
        return self.L / 2

    @property
    def inertia(self):
        return 2 * self.tm.mass * self.lever_arm**2

    @property
    def M_eff(self):
        return self.inertia / self.lever_arm**2

    def with_(self, **changes):
        return replace(self, **changes)


TABLE1 = DeviceConfig()


def _freqs(f):
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValidationError("frequencies must be > 0")
    return f


def susceptibility(cfg, f):
    """Complex force-to-displacement response chi(f) in m/N (structural damping)."""
    w = 2 * np.pi * _freqs(f)
    wm2 = cfg.omega_m**2
    return 1.0 / (cfg.M_eff * (wm2 - w**2 + 1j * wm2 / cfg.Q))


def thermal_force_psd(cfg, f, constants=CODATA2018):
    """Suspension thermal force PSD, 4 k_B T M_eff omega_m^2 / (Q omega)."""
    w = 2 * np.pi * _freqs(f)
    return 4 * constants.k_B * cfg.T * cfg.M_eff * cfg.omega_m**2 / (cfg.Q * w)


def gas_damping_psd(cfg, f, constants=CODATA2018):
    """Residual-gas force PSD on both cubes (white)."""
    f = _freqs(f)
    b = cfg.tm.side
    single = (
        (1 + math.pi / 8)
        * cfg.p_air
        * b**2
        * math.sqrt(512 * cfg.gas_mass * constants.k_B * cfg.T / math.pi)
    )
    return np.full(f.shape, 2 * single)


def laser_noise_psd(cfg, f, constants=CODATA2018):
    """Laser noise as ``(radiation-pressure ForcePSD, sensing DisplacementPSD)``.

    Both follow 1/f amplitude laws anchored at 1 mHz. The radiation-pressure
    term keeps only the differential residual ``rp_residual`` since both
    cubes are probed by phase-locked beams of the same source.
    """
    f = _freqs(f)
    scale = 1e-3 / f
    rin = cfg.rin_1mHz * scale
    rp_asd = cfg.rp_residual * 2 * cfg.laser_power / constants.c * rin
    nu = constants.c / cfg.laser_wavelength
    sensing_asd = cfg.freq_noise_1mHz * scale / nu * cfg.arm_mismatch
    return rp_asd**2, sensing_asd**2


def thermoelastic_psd(cfg, f):
    """Residual thermoelastic displacement PSD after common-mode rejection."""
    f = _freqs(f)
    asd = cfg.alpha_E * cfg.tm.side * cfg.dT * cfg.cmrr_thermal
    return np.full(f.shape, asd**2)


def rotation_angle_psd(cfg, f):
    """Ground rotation angle PSD, from ingested data or the power-law surrogate."""
    f = _freqs(f)
    if cfg.seismic_rotation is not None:
        return cfg.seismic_rotation.interpolate(f)
    asd = cfg.seismic_rotation_asd_1mHz * (1e-3 / f) ** cfg.seismic_rotation_index
    return asd**2


def seismic_rotation_psd(cfg, f):
    """Force PSD from ground rotation coupled through the fiber spring."""
    s_phi = rotation_angle_psd(cfg, f)
    torque = (cfg.inertia * cfg.omega_m**2) ** 2 * s_phi
    return torque / cfg.lever_arm**2 * cfg.cmrr_seismic**2


def sql_force_psd(m_eff, f, constants=CODATA2018):
    """Free-mass standard quantum limit hbar M (2 pi f)^2."""
    return constants.hbar * m_eff * (2 * np.pi * _freqs(f)) ** 2


@dataclass(frozen=True, eq=False)
class BudgetReport:
    freqs: np.ndarray
    force: dict  # name -> ForcePSD NoiseSpectrum
    displacement: dict  # name -> DisplacementPSD NoiseSpectrum
    total: NoiseSpectrum
    total_displacement: NoiseSpectrum
    residual: NoiseSpectrum
    residual_displacement: NoiseSpectrum
    band: tuple
    notes: tuple = ()

    def asd_at(self, f, which="residual"):
        spec = getattr(self, which)
        return float(np.sqrt(spec.interpolate([f])[0]))


def _sum(spectra, freqs, kind):
    total = np.zeros_like(freqs)
    for s in spectra:
        total = total + s.values
    return NoiseSpectrum(freqs, total, kind)


def build_budget(cfg, band, n_points, components=COMPONENTS, constants=CODATA2018):
    """Evaluate every enabled component on a log grid over ``band``.

    Components are combined as an uncorrelated power sum. The residual
    excludes the calibrated thermal and gas-damping terms.
    """
    unknown = set(components) - set(COMPONENTS)
    if unknown:
        raise ValidationError(f"unknown budget components: {sorted(unknown)}")
    freqs = log_grid(band[0], band[1], n_points)
    chi2 = np.abs(susceptibility(cfg, freqs)) ** 2

    force_vals = {}
    disp_vals = {}
    if "thermal" in components:
        force_vals["thermal"] = thermal_force_psd(cfg, freqs, constants)
    if "gas" in components:
        force_vals["gas"] = gas_damping_psd(cfg, freqs, constants)
    if "seismic_rotation" in components:
        force_vals["seismic_rotation"] = seismic_rotation_psd(cfg, freqs)
    rp, sensing = laser_noise_psd(cfg, freqs, constants)
    if "laser_rp" in components:
        force_vals["laser_rp"] = rp
    if "laser_frequency" in components:
        disp_vals["laser_frequency"] = sensing
    if "thermoelastic" in components:
        disp_vals["thermoelastic"] = thermoelastic_psd(cfg, freqs)
    if "newtonian" in components and cfg.newtonian is not None:
        force_vals["newtonian"] = cfg.newtonian.interpolate(freqs)
    if "shot" in components and cfg.shot is not None:
        disp_vals["shot"] = cfg.shot.interpolate(freqs)
    if "sql" in components:
        force_vals["sql"] = sql_force_psd(cfg.M_eff, freqs, constants)

    force, displacement = {}, {}
    for name in COMPONENTS:
        if name in force_vals:
            fv = force_vals[name]
            dv = fv * chi2
        elif name in disp_vals:
            dv = disp_vals[name]
            fv = dv / chi2
        else:
            continue
        force[name] = NoiseSpectrum(freqs, fv, SpectrumKind.ForcePSD)
        displacement[name] = NoiseSpectrum(freqs, dv, SpectrumKind.DisplacementPSD)

    F, X = SpectrumKind.ForcePSD, SpectrumKind.DisplacementPSD
    kept = [n for n in force if n not in CALIBRATED]
    notes = (
        "thermal: structural damping, S_F = 4 k_B T M_eff omega_m^2 / (Q omega)",
        "gas: " + GAS_FORMULA,
        "seismic_rotation: "
        + ("ingested AnglePSD" if cfg.seismic_rotation is not None else "power-law surrogate")
        + f", residual fraction {cfg.cmrr_seismic:g}",
        f"laser_frequency: arm mismatch {cfg.arm_mismatch:g} m",
        "newtonian: " + ("ingested ForcePSD" if cfg.newtonian is not None else "disabled"),
        "shot: " + ("ingested DisplacementPSD" if cfg.shot is not None else "disabled"),
        "residual: total minus " + " and ".join(CALIBRATED),
    )
    return BudgetReport(
        freqs=freqs,
        force=force,
        displacement=displacement,
        total=_sum(force.values(), freqs, F),
        total_displacement=_sum(displacement.values(), freqs, X),
        residual=_sum([force[n] for n in kept], freqs, F),
        residual_displacement=_sum([displacement[n] for n in kept], freqs, X),
        band=(float(band[0]), float(band[1])),
        notes=notes,
    )


def arm_mismatch_sensitivity(cfg, f, factors=(0.1, 1.0, 10.0)):
    """Residual force ASD at ``f`` for scaled arm-length mismatches."""
    out = {}
    for k in factors:
        report = build_budget(cfg.with_(arm_mismatch=cfg.arm_mismatch * k), (f, 10 * f), 2)
        out[cfg.arm_mismatch * k] = report.asd_at(f)
    return out
