"""Exception hierarchy shared by all phasekit modules."""


class PhasekitError(Exception):
    """Base class for every error raised by phasekit."""


class StructuralError(PhasekitError, ValueError):
    """Input matrix lacks a required structure (e.g. it is not Hermitian)."""


class DomainError(PhasekitError, ValueError):
    """Argument lies outside the domain of an operation."""


class ConstructionError(PhasekitError, ValueError):
    """A phase family or effect could not be constructed from its parameters."""


class PreconditionError(PhasekitError, ValueError):
    """A documented precondition does not hold (e.g. E(X) is O or I)."""


class GuardError(PhasekitError, ValueError):
    """A numerical guard is violated: truncation tail, aliasing or dimension."""


class ConfigError(PhasekitError, ValueError):
    """Experiment configuration is malformed."""
