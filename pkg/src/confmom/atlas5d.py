"""The two de Sitter shells q^2 + q5^2 = M^2 and q^2 - q5^2 = -M^2.

Every value of q^2 is assigned to one of four regions; regions I and III
live on the internal shell, II and IV on the external one.  Inversion maps
I <-> II and III <-> IV.  The fifth momentum is kept non-negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .conformal4d import _check_scale, invert, mdot, minkowski_sq
from .errors import DomainError

SHELL_TOL = 1e-10


class Branch(enum.IntEnum):
    """Shell label; the integer value is the index a in (-1)^(a-1)."""

    INTERNAL = 1
    EXTERNAL = 2

    @property
    def sign(self) -> int:
        """(-1)^(a-1): +1 internal, -1 external."""
        return 1 if self is Branch.INTERNAL else -1

    def flipped(self) -> "Branch":
        return Branch.EXTERNAL if self is Branch.INTERNAL else Branch.INTERNAL

    @classmethod
    def parse(cls, value) -> "Branch":
        if isinstance(value, Branch):
            return value
        key = str(value).strip().lower()
        if key in ("1", "inr", "internal", "int"):
            return cls.INTERNAL
        if key in ("2", "ext", "external"):
            return cls.EXTERNAL
        raise ValueError(f"unknown branch {value!r}")


class Region(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"

    @property
    def branch(self) -> Branch:
        return Branch.INTERNAL if self in (Region.I, Region.III) else Branch.EXTERNAL

    @property
    def dual(self) -> "Region":
        return _DUAL[self]


_DUAL = {Region.I: Region.II, Region.II: Region.I, Region.III: Region.IV, Region.IV: Region.III}


def classify(q_sq: float, M: float) -> Region:
    """Region of q^2: I = [0, M^2], II = (M^2, inf), III = (-inf, -M^2), IV = [-M^2, 0)."""
    M2 = _check_scale(M) ** 2
    if q_sq >= 0.0:
        return Region.I if q_sq <= M2 else Region.II
    return Region.IV if q_sq >= -M2 else Region.III


def shell_value(q_sq: float, q5_sq: float, branch: Branch) -> float:
    """q^2 + q5^2 on the internal shell, q^2 - q5^2 on the external one."""
    return q_sq + q5_sq if branch is Branch.INTERNAL else q_sq - q5_sq


def shell_residual(q_sq: float, q5_sq: float, branch: Branch, M: float) -> float:
    """q^2 +- q5^2 -+ M^2 for the given branch (zero on shell)."""
    target = M * M if branch is Branch.INTERNAL else -M * M
    return shell_value(q_sq, q5_sq, branch) - target


@dataclass(frozen=True, eq=False)
class HyperboloidPoint:
    q: np.ndarray
    q5: float
    branch: Branch
    region: Region
    M: float
    transition: bool = False

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        if self.q5 < 0:
            raise ValueError("q5 is canonicalized to be non-negative")
        M2 = self.M * self.M
        resid = shell_residual(self.q_sq, self.q5 ** 2, self.branch, self.M)
        if abs(resid) > SHELL_TOL * (M2 + abs(self.q_sq)):
            raise DomainError(f"point is off its {self.branch.name.lower()} shell by {resid:.3e}")
        if classify(self.q_sq, self.M) is not self.region:
            raise DomainError("region label inconsistent with q^2")

    @property
    def q_sq(self) -> float:
        return minkowski_sq(self.q)

    @property
    def q5_sq(self) -> float:
        return self.q5 * self.q5

    @property
    def residual(self) -> float:
        return shell_residual(self.q_sq, self.q5_sq, self.branch, self.M)


def _on_branch(q: np.ndarray, branch: Branch, M: float, transition: bool = False) -> HyperboloidPoint:
    q_sq = minkowski_sq(q)
    rad = M * M - q_sq if branch is Branch.INTERNAL else M * M + q_sq
    return HyperboloidPoint(q, math.sqrt(max(rad, 0.0)), branch, classify(q_sq, M), M, transition)


def attach(q, M: float) -> HyperboloidPoint:
    """Place q on the shell that owns its region and assign q5 >= 0."""
    M = _check_scale(M)
    q = np.asarray(q, dtype=float)
    return _on_branch(q, classify(minkowski_sq(q), M).branch, M)


def invert_point(p: HyperboloidPoint) -> HyperboloidPoint:
    """Inversion q -> -M^2 q/q^2 with q5 reassigned on the image's own shell.

    Away from the fixed loci q^2 = +-M^2 this swaps I <-> II, III <-> IV and
    flips the branch; on those loci the image has the same q^2 and stays put.
    """
    return attach(invert(p.q, p.M), p.M)


def lambda_of_sq(q_sq: float, M: float) -> float:
    """Scale parameter with |q^2| = M^2 exp(-2 lambda)."""
    M = _check_scale(M)
    if q_sq == 0.0:
        raise DomainError("lambda diverges at q^2 = 0")
    return -0.5 * math.log(abs(q_sq) / (M * M))


def lambda_of(p: HyperboloidPoint) -> float:
    return lambda_of_sq(p.q_sq, p.M)


def point_of_lambda(lam: float, M: float, timelike: bool = True) -> tuple[float, float, Region]:
    """q^2, q5^2 and region for a scale parameter.

    ``timelike`` selects the q^2 >= 0 column pair (regions I, II), otherwise
    regions III, IV.
    """
    M2 = _check_scale(M) ** 2
    e = math.exp(-2.0 * lam)
    q_sq = M2 * e if timelike else -M2 * e
    region = classify(q_sq, M)
    q5_sq = M2 * (1.0 - e) if region in (Region.I, Region.IV) else M2 * (1.0 + e)
    return q_sq, q5_sq, region


def _reshell(p: HyperboloidPoint, q_new: np.ndarray, q5_sq_new: float) -> HyperboloidPoint:
    q_sq = minkowski_sq(q_new)
    if q5_sq_new >= -SHELL_TOL * (p.M * p.M + abs(q_sq)):
        region = classify(q_sq, p.M)
        return HyperboloidPoint(q_new, math.sqrt(max(q5_sq_new, 0.0)), p.branch, region, p.M,
                                region.branch is not p.branch)
    # no real q5 on the original shell: move to the shell owning the new region
    return _on_branch(q_new, p.branch.flipped(), p.M, transition=True)


def translate_on_shell(p: HyperboloidPoint, h) -> HyperboloidPoint:
    """Four-momentum translation with the compensating q5 shift.

    q5^2 -> q5^2 -+ (2 h.q + h^2), so q^2 +- q5^2 is unchanged.  When the new
    q^2 leaves the regions of the original shell the result has
    ``transition=True``; if q5^2 would turn negative it is moved to the other
    shell.
    """
    h = np.asarray(h, dtype=float)
    dq = 2.0 * mdot(h, p.q) + minkowski_sq(h)
    q5_sq_new = p.q5_sq - dq if p.branch is Branch.INTERNAL else p.q5_sq + dq
    return _reshell(p, p.q + h, q5_sq_new)


def gauge_shift(p: HyperboloidPoint, A, e_charge: float) -> HyperboloidPoint:
    """Momentum shift q -> q - e A with q5 fixed by the branch shell condition."""
    if e_charge == 0.0:
        return p
    q_new = p.q - e_charge * np.asarray(A, dtype=float)
    q_sq = minkowski_sq(q_new)
    M2 = p.M * p.M
    q5_sq_new = M2 - q_sq if p.branch is Branch.INTERNAL else M2 + q_sq
    return _reshell(p, q_new, q5_sq_new)


def naive_gauge_q5_sq(p: HyperboloidPoint, A, e_charge: float) -> float:
    """q5^2 shifted term by term, q5^2 -+ 2e A.q + e^2 A^2.

    Kept for comparison only: it does not preserve the shell form, unlike
    :func:`gauge_shift`, which re-imposes the shell.
    """
    A = np.asarray(A, dtype=float)
    lin = 2.0 * e_charge * mdot(A, p.q)
    quad = e_charge ** 2 * minkowski_sq(A)
    return p.q5_sq - lin + quad if p.branch is Branch.INTERNAL else p.q5_sq + lin + quad
