"""Exception hierarchy shared by all starspec modules.

Two branches matter for the CLI exit codes: ``ValidationError`` (bad inputs
or infeasible configuration, exit code 2) and ``NumericalError`` (a
computation that was attempted but failed, exit code 3).
"""


class StarspecError(Exception):
    """Base class for all errors raised by starspec."""


class ValidationError(StarspecError):
    """Invalid input data or configuration."""


class InfeasibleEpsilonError(ValidationError):
    """The thickening parameter is too large for the given weights.

    Raised when a tube waist reaches circumference >= 1 or a patch area
    budget goes below its floor.  The message names the violated budget.
    """


class InfeasibleAreaError(ValidationError):
    """The requested total area cannot be realized with the given gap bound."""


class MeshingError(ValidationError):
    """Mesh generation failed (under-resolved feature, seam mismatch...)."""


class NumericalError(StarspecError):
    """A numerical computation failed (solver breakdown, non-convergence)."""


class DegenerateSpectrumError(NumericalError):
    """Eigenvalues too close for the perturbation formulas to apply."""


class SolverConvergenceError(NumericalError):
    """Eigenvalue or Newton iteration did not converge within its cap."""
