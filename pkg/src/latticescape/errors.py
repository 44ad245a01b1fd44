"""Exception hierarchy shared across the package."""


class LatticescapeError(Exception):
    """Base class for all package-specific errors."""


class IndexOutOfRange(LatticescapeError):
    """A site index (linear or coordinate form) is not valid for the geometry."""


class NotApplicable(LatticescapeError):
    """Operation undefined for the given boundary condition or dimension."""


class DimensionMismatch(LatticescapeError):
    """Vector or field length does not match the lattice site count."""


class OddPeriodicDual(LatticescapeError):
    """Dual construction on a periodic lattice with odd side length.

    The parity transform maps periodic states to anti-periodic ones when the
    side length is odd, so the transformed state leaves the space.
    """


class AlreadyDual(LatticescapeError):
    """Dual construction applied to an operator that is already in dual form."""


class InvalidPotential(LatticescapeError):
    """Potential violates a solvability hypothesis (sign, range, or triviality)."""


class SolverDiverged(LatticescapeError):
    """Iterative linear solve failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EigenSolverFailed(LatticescapeError):
    """Eigenpair computation did not converge or the request is unsupported."""


class EmptyWells(LatticescapeError):
    """Threshold set is empty, so distances to it would be infinite."""


class TooLargeForOracle(LatticescapeError):
    """Instance exceeds the combinatorial guard of the brute-force oracle."""


class HypothesisNotMet(LatticescapeError):
    """Eigenvalue lies outside the admissible band of a decay theorem."""


class InvalidAlpha(LatticescapeError):
    """Decay rate parameter outside its admissible range."""
