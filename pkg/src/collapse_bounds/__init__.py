"""Collapse-model bounds from test-mass acceleration noise."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CODATA2018,
    FUSED_SILICA_MASS,
    LPF_MASS,
    ConversionContext,
    CslParams,
    DpParams,
    NoiseSpectrum,
    PhysicalConstants,
    SpectrumKind,
    TestMass,
    convert_spectrum,
)
from .collapse_models import (  # noqa: E402
    csl_force_psd,
    csl_geometry_factor,
    dp_force_psd,
)
from .constraints import (  # noqa: E402
    ExclusionCurve,
    csl_lambda_bound,
    dp_sigma_bound,
    exclusion_curve,
    excludes,
)
from .budget import TABLE1, DeviceConfig, build_budget  # noqa: E402
