"""Exception types raised by the library.

Every domain failure derives from :class:`DomainError` so the CLI can map
them onto a single exit code.
"""


class DomainError(ValueError):
    """A mathematically undefined operation was requested."""


class LightlikeInversion(DomainError):
    """Inversion of a momentum with vanishing Minkowski square."""


class SingularSpecialConformal(DomainError):
    """The special conformal denominator vanishes."""


class ProjectiveInfinity(DomainError):
    """Cone vector with kappa_5 + kappa_6 = 0 (image of q^2 = infinity)."""


class NotPseudoOrthogonal(DomainError):
    """Matrix fails the metric-preservation check."""


class StepError(DomainError):
    """A step of a conformal word failed; carries the step index."""

    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"step {index}: {cause}")


class StepDiverged(DomainError):
    """Fifth-coordinate integration exceeded the overflow guard."""


class ResonantPole(DomainError):
    """q5 + M*eta = 0: the source-to-constraint map is singular."""


class AnchorMismatch(DomainError):
    """Profiles to be combined do not share the same anchor."""


class GridMismatch(DomainError):
    """Operands live on different quadrature grids."""


class OffLattice(DomainError):
    """Momentum is not on the box's discrete momentum lattice."""


class NoRealBranch(DomainError):
    """|pi| > f_pi: the interpolating-field inverse has no real solution."""


class PionPole(DomainError):
    """|pi| -> 0, where the sigma-model interaction has its 1/pi^2 pole."""


class FitConditioning(DomainError):
    """Series fit design matrix is too ill-conditioned to trust."""
