"""Covariant phase observables on a truncated number basis.

Phase matrices, phase effects ``E(X)``, phase distributions and the
commutation / complementarity diagnostics built on them.
"""

from .effects import ArcSet, Effect, build_effect, complementarity_probe, covariance_residual
from .errors import (
    ConfigError,
    ConstructionError,
    DomainError,
    GuardError,
    PhasekitError,
    PreconditionError,
    StructuralError,
)
from .observables import (
    Canonical,
    Conjugated,
    Elementary,
    FromVectors,
    GroundState,
    Mixture,
    PhaseFamily,
    Sparse,
    Trivial,
    family_from_json,
)
from .statistics import PhaseDistribution, min_variance, phase_density

__version__ = "0.1.0"

__all__ = [
    "ArcSet", "Effect", "build_effect", "complementarity_probe", "covariance_residual",
    "ConfigError", "ConstructionError", "DomainError", "GuardError", "PhasekitError",
    "PreconditionError", "StructuralError",
    "Canonical", "Conjugated", "Elementary", "FromVectors", "GroundState", "Mixture",
    "PhaseFamily", "Sparse", "Trivial", "family_from_json",
    "PhaseDistribution", "min_variance", "phase_density",
]
