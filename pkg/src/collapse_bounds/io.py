"""Configuration grammar, CSV schemas and artifact writing.

Config grammar (one statement per line, ``#`` starts a comment)::

    profile = "table1"          # optional, "table1" or "lpf"

    [mass]
    mass = 1 kg
    density = 2.33 g/cm3
    side = 46 mm
    lattice_a = 5.0 A

    [device]
    arm_length = 0.1 m
    f_torsion = 1 mHz
    seismic_rotation_file = "rotation.csv"

    [constants]
    m0 = "proton"

Numbers take an optional unit suffix and are normalized to SI; a suffix with
the wrong dimension for its key is an error.
"""

import hashlib
import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .budget import TABLE1, DeviceConfig
from .core import (
    ANGSTROM,
    CODATA2018,
    LPF_MASS,
    PROTON_MASS,
    ATOMIC_MASS_UNIT,
    NoiseSpectrum,
    PhysicalConstants,
    SpectrumKind,
    TestMass,
)
from .errors import ConfigError, ValidationError
from .spectral import BrownianRunRecord

# unit text -> (scale to SI, dimension)
UNITS = {
    "": (1.0, "1"),
    "kg": (1.0, "kg"),
    "g": (1e-3, "kg"),
    "kg/m3": (1.0, "kg/m3"),
    "g/cm3": (1e3, "kg/m3"),
    "m": (1.0, "m"),
    "cm": (1e-2, "m"),
    "mm": (1e-3, "m"),
    "um": (1e-6, "m"),
    "nm": (1e-9, "m"),
    "A": (ANGSTROM, "m"),
    "angstrom": (ANGSTROM, "m"),
    "fm": (1e-15, "m"),
    "Hz": (1.0, "Hz"),
    "mHz": (1e-3, "Hz"),
    "rad/s": (1.0, "rad/s"),
    "K": (1.0, "K"),
    "mK": (1e-3, "K"),
    "K/rtHz": (1.0, "K/rtHz"),
    "mK/rtHz": (1e-3, "K/rtHz"),
    "Pa": (1.0, "Pa"),
    "mbar": (100.0, "Pa"),
    "W": (1.0, "W"),
    "mW": (1e-3, "W"),
    "1/rtHz": (1.0, "1/rtHz"),
    "Hz/rtHz": (1.0, "Hz/rtHz"),
    "kHz/rtHz": (1e3, "Hz/rtHz"),
    "rad/rtHz": (1.0, "rad/rtHz"),
    "1/K": (1.0, "1/K"),
    "J s": (1.0, "J s"),
    "m3/kg/s2": (1.0, "m3/kg/s2"),
    "J/K": (1.0, "J/K"),
    "m/s": (1.0, "m/s"),
}

_MASS_KEYS = {
    "mass": ("mass", "kg"),
    "density": ("density", "kg/m3"),
    "side": ("side", "m"),
    "lattice_a": ("lattice_a", "m"),
}

_DEVICE_KEYS = {
    "arm_length": ("L", "m"),
    "f_torsion": ("omega_m", "Hz"),
    "omega_m": ("omega_m", "rad/s"),
    "Q": ("Q", "1"),
    "temperature": ("T", "K"),
    "dT": ("dT", "K/rtHz"),
    "p_air": ("p_air", "Pa"),
    "laser_power": ("laser_power", "W"),
    "wavelength": ("laser_wavelength", "m"),
    "rin_1mHz": ("rin_1mHz", "1/rtHz"),
    "freq_noise_1mHz": ("freq_noise_1mHz", "Hz/rtHz"),
    "alpha_E": ("alpha_E", "1/K"),
    "cmrr_seismic": ("cmrr_seismic", "1"),
    "cmrr_thermal": ("cmrr_thermal", "1"),
    "rp_residual": ("rp_residual", "1"),
    "arm_mismatch": ("arm_mismatch", "m"),
    "gas_mass": ("gas_mass", "kg"),
    "seismic_rotation_asd_1mHz": ("seismic_rotation_asd_1mHz", "rad/rtHz"),
    "seismic_rotation_index": ("seismic_rotation_index", "1"),
    "seismic_rotation_file": ("seismic_rotation", "path"),
    "newtonian_file": ("newtonian", "path"),
    "shot_noise_file": ("shot", "path"),
}

_CONSTANT_KEYS = {
    "hbar": ("hbar", "J s"),
    "G": ("G", "m3/kg/s2"),
    "k_B": ("k_B", "J/K"),
    "m0": ("m0", "kg"),
    "c": ("c", "m/s"),
}

_SECTIONS = {"mass": _MASS_KEYS, "device": _DEVICE_KEYS, "constants": _CONSTANT_KEYS}

PROFILES = {
    "table1": (TABLE1.tm, TABLE1),
    "lpf": (LPF_MASS, None),
}

_NUMBER = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(.*)$")


@dataclass(frozen=True)
class ConfigDocument:
    mass: TestMass
    device: Optional[DeviceConfig]
    constants: PhysicalConstants
    profile: Optional[str]
    digest: str  # sha256 of the source text
    comments: tuple = ()


def parse_quantity(text, dimension, line=None, column=None, path=None):
    """Parse ``"46 mm"`` style text into an SI float, checking its dimension."""
    m = _NUMBER.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse number from {text!r}", line, column, path)
    value = float(m.group(1))
    unit = m.group(2).strip()
    if unit not in UNITS:
        raise ConfigError(f"unknown unit {unit!r}", line, column, path)
    scale, dim = UNITS[unit]
    if dim != dimension:
        expected = dimension if dimension != "1" else "dimensionless"
        raise ConfigError(
            f"unit mismatch: {unit or 'dimensionless'!r} given, expected {expected}",
            line, column, path,
        )
    return value * scale


def _parse_lines(text, path=None):
    """Yield ``(section, key, raw_value, line, value_column, key_column)``."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw
        if "#" in line:
            # '#' inside a quoted string is kept
            quoted = False
            for i, ch in enumerate(line):
                if ch == '"':
                    quoted = not quoted
                elif ch == "#" and not quoted:
                    line = line[:i]
                    break
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, col, path)
            section = stripped[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(
                    f"unknown section [{section}]; expected one of {sorted(_SECTIONS)}",
                    lineno, col, path,
                )
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", lineno, col, path)
        key, _, value = line.partition("=")
        vcol = len(key) + 2 + (len(value) - len(value.lstrip()))
        yield section, key.strip(), value.strip(), lineno, vcol, col


def _string_value(value, line, column, path):
    if len(value) >= 2 and value[0] == value[-1] == '"':
        return value[1:-1]
    raise ConfigError(f"expected a quoted string, got {value!r}", line, column, path)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=path) from exc
    return parse_config(text, path=path)


def parse_config(text, path=None):
    """Parse config ``text`` into a validated :class:`ConfigDocument`."""
    base = Path(path).parent if path is not None else Path.cwd()
    profile = None
    values = {"mass": {}, "device": {}, "constants": {}}
    seen = set()
    for section, key, value, line, vcol, kcol in _parse_lines(text, path):
        if section is None:
            if key != "profile":
                raise ConfigError(f"unknown key {key!r} outside a section", line, kcol, path)
            profile = _string_value(value, line, vcol, path)
            if profile not in PROFILES:
                raise ConfigError(
                    f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}",
                    line, vcol, path,
                )
            continue
        keys = _SECTIONS[section]
        if key not in keys:
            raise ConfigError(f"unknown key {key!r} in [{section}]", line, kcol, path)
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", line, kcol, path)
        seen.add((section, key))
        field_name, dim = keys[key]
        if dim == "path":
            rel = _string_value(value, line, vcol, path)
            spec_path = (base / rel) if not os.path.isabs(rel) else Path(rel)
            try:
                values[section][field_name] = read_spectrum(spec_path)
            except (OSError, ValidationError) as exc:
                raise ConfigError(f"{key}: {exc}", line, vcol, path) from exc
        elif section == "constants" and key == "m0" and value.startswith('"'):
            name = _string_value(value, line, vcol, path)
            choices = {"amu": ATOMIC_MASS_UNIT, "proton": PROTON_MASS}
            if name not in choices:
                raise ConfigError(f"m0 must be 'amu', 'proton' or a mass", line, vcol, path)
            values[section][field_name] = choices[name]
        else:
            q = parse_quantity(value, dim, line, vcol, path)
            if key == "f_torsion":
                q = 2 * math.pi * q
            values[section][field_name] = q

    try:
        constants = replace(CODATA2018, **values["constants"])
        if profile is not None:
            tm, device = PROFILES[profile]
        else:
            tm, device = None, None
        if values["mass"]:
            if tm is None:
                missing = {"mass", "density", "lattice_a"} - set(values["mass"])
                if missing:
                    raise ConfigError(f"missing required [mass] keys: {sorted(missing)}", path=path)
                if "side" not in values["mass"]:
                    tm = TestMass.from_mass_density(**values["mass"])
                else:
                    tm = TestMass(**values["mass"])
            else:
                tm = replace(tm, **values["mass"])
        if tm is None:
            raise ConfigError("no profile and no [mass] section", path=path)
        if values["device"] or (device is not None):
            device = replace(device or TABLE1, tm=tm, **values["device"])
    except ConfigError:
        raise
    except (ValidationError, TypeError) as exc:
        raise ConfigError(str(exc), path=path) from exc

    digest = hashlib.sha256(text.encode()).hexdigest()
    comments = tuple(
        l.strip()[1:].strip() for l in text.splitlines() if l.strip().startswith("#")
    )
    return ConfigDocument(tm, device, constants, profile, digest, comments)


def profile_config(name):
    """ConfigDocument for a built-in profile with no overrides."""
    if name not in PROFILES:
        raise ValidationError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}")
    return parse_config(f'profile = "{name}"\n')


# ---------------------------------------------------------------------------
# CSV


def fmt(x):
    return format(float(x), ".17g")


def metadata_lines(**extra):
    meta = {"tool": f"collapse-bounds {__version__}"}
    meta.update({k: v for k, v in extra.items() if v is not None})
    return [f"# {k}: {v}" for k, v in meta.items()]


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, columns, rows, meta=None):
    """Write a comma-separated table with ``# key: value`` header comments."""
    lines = list(meta or [])
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_table(path):
    """Return ``(meta dict, column names, list of row lists of str)``."""
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, val = line[1:].partition(":")
                if sep:
                    meta[key.strip()] = val.strip()
                continue
            cells = [c.strip() for c in line.split(",")]
            if header is None:
                header = cells
            else:
                if len(cells) != len(header):
                    raise ValidationError(
                        f"{path}: line {lineno}: expected {len(header)} columns, got {len(cells)}"
                    )
                rows.append(cells)
    if header is None:
        raise ValidationError(f"{path}: no header row")
    return meta, header, rows


def _column(path, header, rows, name):
    if name not in header:
        raise ValidationError(f"{path}: missing column {name!r}; found {header}")
    i = header.index(name)
    try:
        return np.array([float(r[i]) for r in rows])
    except ValueError as exc:
        raise ValidationError(f"{path}: column {name!r}: {exc}") from exc


def write_spectrum(path, s, meta=None):
    lines = [f"# kind: {s.kind.name}", f"# unit: {s.kind.unit}"] + list(meta or [])
    write_table(path, ["frequency_hz", "psd_value"], zip(s.freqs, s.values), lines)


def read_spectrum(path):
    meta, header, rows = read_table(path)
    if "kind" not in meta:
        raise ValidationError(f"{path}: missing '# kind:' header line")
    kind = SpectrumKind.parse(meta["kind"])
    f = _column(path, header, rows, "frequency_hz")
    v = _column(path, header, rows, "psd_value")
    return NoiseSpectrum(f, v, kind)


def write_run(path, run, meta=None):
    t = run.time
    write_table(
        path,
        ["time_s", "position_m", "force_n"],
        zip(t, run.trajectory, run.force_trace),
        list(meta or []) + [f"# dt: {fmt(run.dt)}", f"# seed: {run.seed}", f"# rng: {run.rng}"],
    )


def read_run(path):
    """Return ``(dt, position array)`` from a run CSV."""
    meta, header, rows = read_table(path)
    x = _column(path, header, rows, "position_m")
    if "dt" in meta:
        dt = float(meta["dt"])
    else:
        t = _column(path, header, rows, "time_s")
        if t.size < 2:
            raise ValidationError(f"{path}: cannot infer dt from fewer than 2 samples")
        dt = float(t[1] - t[0])
    if dt <= 0:
        raise ValidationError(f"{path}: dt must be > 0")
    return dt, x


def write_runs_table(path, runs, meta=None):
    write_table(
        path,
        ["t_days", "s_brown", "sigma", "label"],
        ([r.t, r.S_brown, r.sigma, r.label] for r in runs),
        meta,
    )


def read_runs_table(path):
    """Brownian run records: columns t_days, s_brown, sigma[, label]."""
    meta, header, rows = read_table(path)
    t = _column(path, header, rows, "t_days")
    s = _column(path, header, rows, "s_brown")
    sig = _column(path, header, rows, "sigma")
    labels = [r[header.index("label")] for r in rows] if "label" in header else [""] * len(rows)
    return [BrownianRunRecord(*vals) for vals in zip(t, s, sig, labels)]


def write_curve(path, curve, meta=None):
    lines = [f"# source_label: {curve.source_label}", f"# r_valid_max: {fmt(curve.r_valid_max)}"]
    write_table(path, ["r_m", "lambda_max_s_inv"], zip(curve.r, curve.lambda_max),
                lines + list(meta or []))


def read_two_column(path):
    """Read a whitespace- or comma-separated two-column numeric file."""
    data = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = re.split(r"[,\s]+", line)
            try:
                data.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                continue  # header row
    if not data:
        raise ValidationError(f"{path}: no numeric rows")
    return np.array(data)


def write_plot_data(directory, name, x, y):
    """Gnuplot-ready two-column file ``<directory>/<name>.dat``."""
    text = "".join(f"{fmt(a)} {fmt(b)}\n" for a, b in zip(x, y))
    _atomic_write(Path(directory) / f"{name}.dat", text)


def write_json(path, obj):
    _atomic_write(path, dumps(obj) + "\n")


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True)
