"""Numerical Bergman kernels, exponents and geometry of worm domains."""
__version__ = "0.1.0"

from .errors import AccuracyError, ConfigurationError, DomainError, SingularityError, WormkitError
from .quad import QuadConfig
from .domains import DomainParams, EtaProfile, PointC2, Variant
from .kernel import C_NORM, kernel_prime, kernel_unprime

__all__ = [
    "__version__",
    "AccuracyError",
    "ConfigurationError",
    "DomainError",
    "SingularityError",
    "WormkitError",
    "QuadConfig",
    "DomainParams",
    "EtaProfile",
    "PointC2",
    "Variant",
    "C_NORM",
    "kernel_prime",
    "kernel_unprime",
]
