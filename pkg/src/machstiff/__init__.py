"""Static stiffness identification of turning machine systems.

Turns force/displacement load campaigns into 6x6 stiffness matrices, error
matrices, principal deformation directions and the rotation (stiffness)
center of the tool block.
"""

__version__ = "0.1.0"

from machstiff.errors import (
    ComplexSpectrum,
    MachStiffError,
    NumericalError,
    ValidationError,
)
from machstiff.torsor import Twist, Wrench, eig3_real

__all__ = [
    "__version__",
    "ComplexSpectrum",
    "MachStiffError",
    "NumericalError",
    "ValidationError",
    "Twist",
    "Wrench",
    "eig3_real",
]
