"""
Exception hierarchy for OPA Lab
Every solver failure carries a diagnostics dict so the CLI can report it per row
"""


class OpaLabError(Exception):
    """Base class for all library errors"""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DomainError(OpaLabError):
    """Input outside the mathematical domain (non-finite value, p <= 1, k < 1)"""


class ZeroAtOrigin(OpaLabError):
    """f(0) = 0, so every optimal polynomial approximant is identically zero"""


class BracketFailure(OpaLabError):
    """Root finder found no sign change on its bracket"""


class NonConvergence(OpaLabError):
    """Iteration budget exhausted; the best iterate is attached"""

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.best = best


class NotARoot(OpaLabError):
    """Deflation point is not a zero of the approximant"""


class UnsupportedExponent(OpaLabError):
    """Exponent inside the p = 2 guard band"""


class CapExceeded(OpaLabError):
    """Search ran past its configured cap"""


class InvalidBranch(OpaLabError):
    """Lagrange system converged to a root with non-positive coefficients"""


class Singularity(OpaLabError):
    """Evaluation at the x = t pole of Phi or Psi when p < 2"""


class PoleAtZero(OpaLabError):
    """Psi evaluated at x = 0"""


class BranchMiss(OpaLabError):
    """Value outside the range of the requested monotone piece of Phi"""

    def __init__(self, message, partial=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.partial = partial


class OutOfRange(OpaLabError):
    """Parameter outside the analysed range (for example t < 1)"""


class Degenerate(OpaLabError):
    """Roots coalesce (t = 1)"""
