"""Simulation lab for 1D Schroedinger operators with random decaying potentials.

Prüfer-phase eigenvalue extraction, the limiting phase/Riccati diffusions,
explosion-time analytics and the statistical checks that tie them together.
"""

from prufer_lab.errors import (
    BracketError,
    ConfigError,
    DegeneratePotentialError,
    DimensionError,
    OutOfScopeError,
    ParameterError,
    QuadratureError,
    SingularResolventError,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConfigError",
    "DegeneratePotentialError",
    "DimensionError",
    "OutOfScopeError",
    "ParameterError",
    "QuadratureError",
    "SingularResolventError",
]
