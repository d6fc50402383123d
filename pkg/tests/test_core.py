import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collapse_bounds.budget import TABLE1, susceptibility
from collapse_bounds.core import (
    CODATA2018,
    FUSED_SILICA_MASS,
    LPF_MASS,
    PROTON_MASS,
    ConversionContext,
    CslParams,
    DpParams,
    NoiseSpectrum,
    PhysicalConstants,
    SpectrumKind,
    TestMass,
    convert_spectrum,
)
from collapse_bounds.errors import ConversionError, ValidationError

K = SpectrumKind
FULL_CTX = ConversionContext(
    mass=1.928,
    lever_arm=TABLE1.lever_arm,
    susceptibility=lambda f: susceptibility(TABLE1, f),
)


def test_constants_codata2018():
    assert CODATA2018.hbar == 1.054571817e-34
    assert CODATA2018.G == 6.67430e-11
    assert CODATA2018.k_B == 1.380649e-23
    assert CODATA2018.m0 == 1.66053906660e-27
    assert CODATA2018.label == "CODATA2018/m0=amu"
    proton = PhysicalConstants(m0=PROTON_MASS)
    assert proton.label == "CODATA2018/m0=proton"


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_constants_reject_nonpositive(bad):
    with pytest.raises(ValidationError):
        PhysicalConstants(hbar=bad)


def test_test_mass_validation():
    with pytest.raises(ValidationError):
        TestMass(mass=-1, density=1, side=1, lattice_a=1)
    with pytest.raises(ValidationError):
        TestMass(mass=1, density=float("nan"), side=1, lattice_a=1)


def test_test_mass_consistency_is_a_warning():
    with pytest.warns(UserWarning, match="inconsistent"):
        tm = TestMass(mass=1.0, density=1000.0, side=1.0, lattice_a=1e-10)
    assert not tm.is_consistent


def test_reference_masses_consistent():
    assert LPF_MASS.is_consistent
    assert FUSED_SILICA_MASS.side == pytest.approx(0.0754307, rel=1e-6)
    assert FUSED_SILICA_MASS.consistency < 1e-12


def test_params_validation():
    assert CslParams(0.0, 1e-7).lam == 0.0
    with pytest.raises(ValidationError):
        CslParams(-1e-8, 1e-7)
    with pytest.raises(ValidationError):
        CslParams(1e-8, 0)
    with pytest.raises(ValidationError):
        DpParams(0)


def test_spectrum_invariants():
    with pytest.raises(ValidationError):
        NoiseSpectrum([1, 1], [1, 1], K.ForcePSD)
    with pytest.raises(ValidationError):
        NoiseSpectrum([1, 2], [1, -1], K.ForcePSD)
    with pytest.raises(ValidationError):
        NoiseSpectrum([1, 2], [1], K.ForcePSD)
    with pytest.raises(ValidationError):
        NoiseSpectrum([], [], K.ForcePSD)
    with pytest.raises(ValidationError):
        NoiseSpectrum([1, 2], [1, np.nan], K.ForcePSD)
    s = NoiseSpectrum([1, 2], [3, 4], K.ForcePSD)
    with pytest.raises(ValueError):
        s.values[0] = 1.0


def test_force_to_accel_example():
    s = NoiseSpectrum([1e-3], [1e-34], K.ForcePSD)
    a = convert_spectrum(s, K.AccelPSD, ConversionContext(mass=1.928))
    assert a.kind is K.AccelPSD
    assert a.values[0] == pytest.approx(4e-34 / 1.928**2, rel=1e-15)
    assert a.values[0] == pytest.approx(1.076e-34, rel=1e-3)


def test_accel_to_force_example():
    s = NoiseSpectrum([1e-3], [2.704e-29], K.AccelPSD)
    f = convert_spectrum(s, K.ForcePSD, ConversionContext(mass=1.928))
    assert f.values[0] == pytest.approx(2.513e-29, rel=1e-3)
    back = convert_spectrum(f, K.AccelPSD, ConversionContext(mass=1.928))
    assert back.values[0] == pytest.approx(2.704e-29, rel=1e-15)


@pytest.mark.parametrize("kind", list(K))
def test_identity_conversion(kind):
    s = NoiseSpectrum([1e-3, 1e-2], [1.0, 2.0], kind)
    assert convert_spectrum(s, kind) is s


def test_missing_context():
    s = NoiseSpectrum([1e-3], [1.0], K.ForcePSD)
    with pytest.raises(ConversionError, match="mass"):
        convert_spectrum(s, K.AccelPSD)
    with pytest.raises(ConversionError, match="susceptibility"):
        convert_spectrum(s, K.DisplacementPSD, ConversionContext(mass=1.0))
    with pytest.raises(ConversionError):
        convert_spectrum(s, "AccelPSD", FULL_CTX)


def test_displacement_uses_susceptibility():
    f = np.array([1e-4, 1e-3, 1e-2])
    s = NoiseSpectrum(f, [1.0, 1.0, 1.0], K.ForcePSD)
    x = convert_spectrum(s, K.DisplacementPSD, FULL_CTX)
    np.testing.assert_allclose(x.values, np.abs(susceptibility(TABLE1, f)) ** 2, rtol=1e-14)


def test_torque_and_angle_paths():
    f = np.array([1e-3, 1e-2])
    torque = NoiseSpectrum(f, [4.0, 4.0], K.TorquePSD)
    force = convert_spectrum(torque, K.ForcePSD, FULL_CTX)
    np.testing.assert_allclose(force.values, 4.0 / TABLE1.lever_arm**2, rtol=1e-15)
    angle = convert_spectrum(torque, K.AnglePSD, FULL_CTX)
    disp = convert_spectrum(torque, K.DisplacementPSD, FULL_CTX)
    np.testing.assert_allclose(angle.values * TABLE1.lever_arm**2, disp.values, rtol=1e-13)


spectra = st.lists(
    st.floats(min_value=1e-40, max_value=1e-10, allow_nan=False), min_size=1, max_size=8
)


@settings(max_examples=200, deadline=None)
@given(values=spectra, a=st.sampled_from(list(K)), b=st.sampled_from(list(K)))
def test_round_trip(values, a, b):
    f = np.geomspace(1e-4, 1e-1, len(values))
    s = NoiseSpectrum(f, values, a)
    back = convert_spectrum(convert_spectrum(s, b, FULL_CTX), a, FULL_CTX)
    np.testing.assert_allclose(back.values, s.values, rtol=1e-12, atol=0)


@settings(max_examples=200, deadline=None)
@given(values=spectra, target=st.sampled_from(list(K)), exp=st.integers(-20, 20))
def test_linearity(values, target, exp):
    f = np.geomspace(1e-4, 1e-1, len(values))
    s = NoiseSpectrum(f, values, K.ForcePSD)
    c = 2.0**exp  # powers of two scale exactly
    lhs = convert_spectrum(s.scaled(c), target, FULL_CTX).values
    rhs = convert_spectrum(s, target, FULL_CTX).values * c
    assert np.array_equal(lhs, rhs)


def test_interpolate_log_linear():
    s = NoiseSpectrum([1e-3, 1e-1], [1.0, 1e-4], K.ForcePSD)
    # pure power law is reproduced exactly in log-log
    assert s.interpolate([1e-2])[0] == pytest.approx(1e-2, rel=1e-12)
    with pytest.raises(ValidationError, match="outside"):
        s.interpolate([1.0])
