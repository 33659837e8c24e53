"""Extremal graphical models with Husler-Reiss distributions."""
from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    InvalidPrecisionError,
    InvalidVariogramError,
    StructureError,
    XGraphError,
)
from .graphs import Dag, UndirectedGraph
from .hr import FittedModel, gamma_to_theta, hr_chi, theta_to_gamma

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "Dag",
    "FittedModel",
    "InvalidPrecisionError",
    "InvalidVariogramError",
    "StructureError",
    "UndirectedGraph",
    "XGraphError",
    "gamma_to_theta",
    "hr_chi",
    "theta_to_gamma",
]
