"""Two-layer q-voter model of photovoltaic adoption.

Monte Carlo dynamics on a square lattice (adoption layer) coupled to a
two-dimensional Watts-Strogatz graph (opinion layer), the mean-field ODE
system with its analytic stationary states, and a sweep harness.
"""

from pvqvoter.errors import (
    ConfigurationError,
    ConstructionFailed,
    InvalidEnsemble,
    InvalidIndex,
    InvalidParameter,
    PvqvoterError,
    SolverError,
    UnsupportedParameter,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ConstructionFailed",
    "InvalidEnsemble",
    "InvalidIndex",
    "InvalidParameter",
    "PvqvoterError",
    "SolverError",
    "UnsupportedParameter",
]
