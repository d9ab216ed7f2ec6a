"""Exception hierarchy shared by all modules.

Every error carries a stable machine-readable ``code`` so the CLI can emit
structured diagnostics and map failures to exit codes.
"""


class FractalStringError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "Error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class SpecInvariantError(FractalStringError):
    """A string spec violates an initiator invariant (parse-level error)."""

    code = "SpecInvariant"


class PoleError(FractalStringError):
    """Zeta evaluated at (numerically) a complex dimension."""

    code = "Pole"


class ContourThroughRoot(FractalStringError):
    """Window boundary could not be perturbed off a root."""

    code = "ContourThroughRoot"


class NonConvergence(FractalStringError):
    """Winding-number quadrature or subdivision failed to settle."""

    code = "NonConvergence"


class PolynomialSolveFailure(FractalStringError):
    """Companion-matrix eigensolve residual too large, fallback failed too."""

    code = "PolynomialSolveFailure"


class MultiplePole(FractalStringError):
    """Residue requested at a pole that is not simple."""

    code = "MultiplePole"


class MultiplePoleUnsupported(FractalStringError):
    """Explicit tube sum hit a non-simple pole with the general term disabled."""

    code = "MultiplePoleUnsupported"


class PrecisionExhausted(FractalStringError):
    """Continued fraction asked for more terms than the precision supports."""

    code = "PrecisionExhausted"


class BudgetExceeded(FractalStringError):
    """Enumeration would exceed the configured entry limit."""

    code = "BudgetExceeded"


class CutoffTooCoarse(FractalStringError):
    """Tube volume requested at 2*eps below the table cutoff."""

    code = "CutoffTooCoarse"


class LatticeNotMeasurable(FractalStringError):
    """Minkowski content requested for a lattice string."""

    code = "LatticeNotMeasurable"


class NotLattice(FractalStringError):
    """Lattice-only operation applied to a nonlattice string."""

    code = "NotLattice"


class NotNonlattice(FractalStringError):
    """Nonlattice-only operation applied to a lattice string."""

    code = "NotNonlattice"


class MultiGap(FractalStringError):
    """Single-gap-only operation applied to a multi-gap string."""

    code = "MultiGap"


class DegenerateOverlap(FractalStringError):
    """Shift overlap vanished at every ladder point."""

    code = "DegenerateOverlap"


class TruncationUnsound(FractalStringError):
    """psi_w truncation would undercount orbits."""

    code = "TruncationUnsound"


class DivergentRegion(FractalStringError):
    """Euler product evaluated at Re(s) <= D."""

    code = "DivergentRegion"


class UnknownConstant(FractalStringError):
    """Dimension-free region for N > 2 requested before the empirical fit."""

    code = "UnknownConstant"


class NewtonDiverged(FractalStringError):
    """Newton refinement left its trust region."""

    code = "NewtonDiverged"
