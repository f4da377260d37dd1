"""Spherical mean transform with centers on the unit sphere in odd dimensions.

Modules: ``jets`` (Taylor arithmetic), ``radial`` (profiles and the D = (1/t) d/dt
calculus), ``special`` (Gegenbauer, Funk-Hecke, kernel powers, L operators,
spherical harmonics), ``transform`` (M, P, inversion, Riesz potential),
``analysis`` (range, kernel and counterexample checks), ``verification``
(acceptance suite) and ``cli``.
"""

from .errors import (
    CalibrationError,
    CapabilityError,
    ConstraintError,
    DecompositionError,
    DegenerateInputError,
    DomainError,
    NotInDPowerImage,
    NotInKernel,
    PreconditionError,
    SphMeanError,
)
from .special import Dimension
from .transform import QuadratureSpec, RadialBump, RadialPhantom, Bump3D, Sum3DPhantom

__version__ = "0.1.0"
