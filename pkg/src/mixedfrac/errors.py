"""Exception types shared across the package."""


class MixedFracError(Exception):
    """Base class for all package errors."""


class InvalidDomain(MixedFracError):
    """Domain dimensions are non-positive or inconsistent."""


class InvalidPartition(MixedFracError):
    """Boundary partition violates its invariants (empty, overlapping arcs, ...)."""


class AlphaOutOfRange(MixedFracError):
    """Requested Dirichlet measure lies outside [eps, |boundary|]."""


class TooCoarse(MixedFracError):
    """Grid resolution below the minimum node count."""


class EmptyDirichletSet(MixedFracError):
    """No Dirichlet node on the grid; the operator would be singular."""


class ConvergenceFailure(MixedFracError):
    """Iterative eigensolver did not reach the requested tolerance.

    Carries a ``diagnostics`` dict (iterations, worst residual, subspace size).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BasisMismatch(MixedFracError):
    """Grid function and eigenbasis live on different grids."""


class InvalidFracOrder(MixedFracError):
    """Fractional order s outside (1/2, 1)."""


class SubcriticalDimension(MixedFracError):
    """N <= 2s: the critical trace exponent 2N/(N-2s) is undefined."""


class BadGrading(MixedFracError):
    """Cylinder mesh grading parameters are invalid."""


class SolverDivergence(MixedFracError):
    """Conjugate-gradient solve failed to reach the residual target."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ExponentViolation(MixedFracError):
    """Integrability exponent p <= N/(2s); the sup bound does not apply."""


class EmptyBall(MixedFracError):
    """A requested ball contains no grid node."""


class DegenerateProfile(MixedFracError):
    """Oscillation profile has too few positive values to fit an exponent."""


class BadExponent(MixedFracError):
    """Iteration-lemma exponents outside their admissible range."""


class ConfigError(MixedFracError):
    """Study configuration file is malformed or inconsistent."""


class MissingField(ConfigError):
    """A required configuration key is absent."""


class NoData(MixedFracError):
    """Result emission requested with no rows."""
