"""Stability, Krein-signature and block-Toeplitz analysis of quadratic bosonic Hamiltonians."""

__version__ = "0.1.0"

from .errors import KreinStabError, InvalidSpecError, StructureViolationError
from .tolerances import DEFAULT_TOL, Tolerances
from .nambu import QBHSpec, build_effective_sph
from .spectral import eigendecompose, detect_jordan_structure
from .krein import (
    canonicalize_jordan_basis,
    detect_krein_collisions,
    dynamical_stability,
    krein_report,
    krein_signature,
    kpr,
)
from .gbt import BBTSpec, eigen_search, generalized_kernel

__all__ = [
    "__version__",
    "KreinStabError",
    "InvalidSpecError",
    "StructureViolationError",
    "DEFAULT_TOL",
    "Tolerances",
    "QBHSpec",
    "build_effective_sph",
    "eigendecompose",
    "detect_jordan_structure",
    "canonicalize_jordan_basis",
    "detect_krein_collisions",
    "dynamical_stability",
    "krein_report",
    "krein_signature",
    "kpr",
    "BBTSpec",
    "eigen_search",
    "generalized_kernel",
]
