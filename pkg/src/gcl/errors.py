"""Exception hierarchy shared across the package.

Every error carries the CLI exit code it maps to: 2 for bad input,
3 for insufficient data, 4 for exhausted budgets, 1 for everything
that signals a violated invariant.
"""


class GclError(Exception):
    exit_code = 1


class InputError(GclError):
    exit_code = 2


class InsufficientData(GclError):
    exit_code = 3


class BudgetExceeded(GclError):
    exit_code = 4


class NotHyperbolic(GclError):
    """Matrix is not a hyperbolic isometry (|trace| <= 2 within tolerance)."""


class DegenerateSpec(InputError):
    """Surface data too degenerate to construct reliably."""


class DegenerateDecomposition(GclError):
    """Hexagon decomposition failed a geometric sanity check."""


class RadiusTooSmall(InputError):
    """Systole search radius cannot certify exhaustiveness."""


class VertexDegeneracy(GclError):
    """A geodesic passes too close to a hexagon vertex to code reliably."""


class OnSkeleton(GclError):
    """The geodesic lies on the decomposition's one-skeleton (a cuff)."""


class EdgeAmbiguity(GclError):
    """A crossing sits on a hexagon edge and single-counting failed."""


class WindowTooSmall(InputError):
    """Lift enumeration window below the certified radius."""


class TransitivityViolation(GclError):
    """Pairwise point ordering failed the transitivity audit."""


class InconsistentWords(GclError):
    """Edge words do not describe a closed curve."""


class GuardViolated(InputError):
    """Counting-bound guard assumptions not met."""


class TooLarge(BudgetExceeded):
    """Exact enumeration would exceed the configured budget."""
