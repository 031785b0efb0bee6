"""Special Lagrangian cones over minimal Legendrian tori in S^5.

Modules:

* :mod:`slcone.liecore` - su(3), its order-six automorphisms and grading;
* :mod:`slcone.tzsolve` - the Tzitzeica equation on periodic lattices;
* :mod:`slcone.framerec` - Toda frames, Legendrian surfaces and cone meshes;
* :mod:`slcone.speccurve` - genus-four spectral curves and elliptic periods;
* :mod:`slcone.cli` - the ``slcone`` command.
"""

from .exceptions import (
    BifurcationError,
    ConvergenceError,
    DegenerateCurveError,
    DegenerateCurveWarning,
    DomainError,
    IntegrationError,
    NumericalError,
    SLConeError,
)

__version__ = "0.1.0"

__all__ = [
    "BifurcationError",
    "ConvergenceError",
    "DegenerateCurveError",
    "DegenerateCurveWarning",
    "DomainError",
    "IntegrationError",
    "NumericalError",
    "SLConeError",
]
