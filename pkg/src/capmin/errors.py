"""Exception types shared across the package."""


class CapminError(Exception):
    """Base class for all capmin errors."""


class ParamError(CapminError):
    """Potential parameters violate a family constraint."""


class NoMinimizerError(CapminError):
    """Parameters for which no finite-energy state exists (m >= 3)."""


class DomainError(CapminError):
    """Evaluation requested outside the admissible numeric domain."""


class ResolutionError(CapminError):
    """Zero structure of the landscape is ambiguous at maximum refinement."""


class NotAdmissible(CapminError):
    """Requested maximal height lies outside the admissible set."""


class QuadratureError(CapminError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class StepError(CapminError):
    """ODE integration lost monotonicity or failed to terminate."""


class NoBracket(CapminError):
    """No monotone mass segment brackets the requested mass."""


class NotApplicable(CapminError):
    """Operation undefined for this potential family or regime."""


class UsageError(CapminError):
    """Malformed command-line invocation."""
