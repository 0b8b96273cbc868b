"""Numerical laboratory for the long-wave unstable thin-film equation.

Simulates the regularized equation with a mass-conservative implicit
scheme, monitors its conserved and dissipated functionals, and checks the
algebra behind the alpha-energy estimates.
"""

from .errors import ThinFilmError
from .grid import Grid, State
from .params import (DiscParams, ModelParams, RegParams, ValidatedConfig, default_config,
                     load, loads, validate)
from .solver import Trajectory, run, step

__version__ = "0.1.0"

__all__ = [
    "ThinFilmError", "Grid", "State", "DiscParams", "ModelParams", "RegParams",
    "ValidatedConfig", "default_config", "load", "loads", "validate", "Trajectory", "run",
    "step", "__version__",
]
