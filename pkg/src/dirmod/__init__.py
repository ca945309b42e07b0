"""Directional-modulation beamforming for secure M-PSK links."""

__version__ = "0.1.0"

from .errors import (
    DirmodError,
    ConfigError,
    NumericalFailure,
    InfeasibleStructureError,
    QpInfeasibleError,
    PrecoderUndefinedError,
    EstimationImpossibleError,
)

__all__ = [
    "__version__",
    "DirmodError",
    "ConfigError",
    "NumericalFailure",
    "InfeasibleStructureError",
    "QpInfeasibleError",
    "PrecoderUndefinedError",
    "EstimationImpossibleError",
]
