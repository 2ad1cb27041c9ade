"""Linear realization of the momentum conformal group on the 6D null cone.

Cone vectors are arrays ``(k0, k1, k2, k3, k5, k6)`` with metric
``diag(+1, -1, -1, -1, +1, -1)``.  The light-cone pair
``k_plus = (k5 + k6)/M`` and ``k_minus = (k5 - k6)/M`` turns the cone
condition into ``k.k + M^2 k_plus k_minus = 0`` and the projection into
``q = k_mu / k_plus``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .conformal4d import (
    METRIC4,
    ConformalElement,
    ConformalWord,
    Dilatation,
    Inversion,
    Lorentz,
    SpecialConformal,
    Translation,
    _check_scale,
    minkowski_sq,
)
from .errors import NotPseudoOrthogonal, ProjectiveInfinity

METRIC6 = np.diag([1.0, -1.0, -1.0, -1.0, 1.0, -1.0])
METRIC6.setflags(write=False)

CONE_TOL = 1e-12
ORTHO_TOL = 1e-12


def light_cone_basis(M: float) -> np.ndarray:
    """Matrix taking (k_mu, k5, k6) to (k_mu, k_plus, k_minus)."""
    B = np.eye(6)
    B[4, 4:] = [1.0 / M, 1.0 / M]
    B[5, 4:] = [1.0 / M, -1.0 / M]
    return B


def light_cone_basis_inverse(M: float) -> np.ndarray:
    """Inverse of :func:`light_cone_basis`: k5 = M(k+ + k-)/2, k6 = M(k+ - k-)/2."""
    Binv = np.eye(6)
    Binv[4, 4:] = [M / 2.0, M / 2.0]
    Binv[5, 4:] = [M / 2.0, -M / 2.0]
    return Binv


def cone_sq(kappa) -> float:
    k = np.asarray(kappa, dtype=float)
    return float(k @ METRIC6 @ k)


def cone_residual(kappa) -> float:
    """|kappa.kappa| relative to the Euclidean norm squared."""
    k = np.asarray(kappa, dtype=float)
    n2 = float(k @ k)
    return abs(cone_sq(k)) / n2 if n2 > 0 else 0.0


def kappa_plus(kappa, M: float) -> float:
    return float((kappa[4] + kappa[5]) / M)


def kappa_minus(kappa, M: float) -> float:
    return float((kappa[4] - kappa[5]) / M)


@dataclass(frozen=True, eq=False)
class SixRotation:
    """A 6x6 matrix preserving METRIC6, validated at construction."""

    G: np.ndarray

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.shape != (6, 6):
            raise ValueError(f"expected 6x6 matrix, got {G.shape}")
        resid = pseudo_orthogonality_residual(G)
        if resid > ORTHO_TOL * max(1.0, float(np.max(np.abs(G)))) ** 2:
            raise NotPseudoOrthogonal(f"G^T eta G - eta residual {resid:.3e}")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)

    def __matmul__(self, other):
        if isinstance(other, SixRotation):
            return SixRotation(self.G @ other.G)
        return self.G @ np.asarray(other, dtype=float)


def pseudo_orthogonality_residual(G) -> float:
    G = np.asarray(G, dtype=float)
    return float(np.max(np.abs(G.T @ METRIC6 @ G - METRIC6)))


def lift(q, kplus: float = 1.0, M: float = 1.0) -> np.ndarray:
    """Put a four-momentum on the cone with projective scale ``kplus``."""
    M = _check_scale(M)
    if kplus == 0.0:
        raise ValueError("kappa_plus must be nonzero")
    q = np.asarray(q, dtype=float)
    kminus = -minkowski_sq(q) * kplus / (M * M)
    out = np.empty(6)
    out[:4] = q * kplus
    out[4] = 0.5 * M * (kplus + kminus)
    out[5] = 0.5 * M * (kplus - kminus)
    return out


def project(kappa, M: float = 1.0) -> np.ndarray:
    """Projective map back to four-momentum, q = M k_mu / (k5 + k6)."""
    M = _check_scale(M)
    k = np.asarray(kappa, dtype=float)
    s = k[4] + k[5]
    if abs(s) <= CONE_TOL * float(np.sqrt(k @ k)):
        raise ProjectiveInfinity("k5 + k6 vanishes: point at q^2 = infinity")
    return M * k[:4] / s


def _translation_lc(h, M: float) -> np.ndarray:
    # (k_mu, k+, k-) -> (k_mu + h k+, k+, k- - 2 h.k / M^2 - h^2 k+ / M^2).
    # The minus signs are forced by q^2 = -M^2 k-/k+ together with
    # q'^2 = q^2 + 2 h.q + h^2; with plus signs the map leaves the cone.
    h = np.asarray(h, dtype=float)
    T = np.eye(6)
    T[:4, 4] = h
    T[5, :4] = -2.0 * (METRIC4 @ h) / (M * M)
    T[5, 4] = -minkowski_sq(h) / (M * M)
    return T


def rotation_matrix(e: ConformalElement | ConformalWord, M: float = 1.0) -> SixRotation:
    """6x6 pseudo-rotation realizing a group element on the cone."""
    M = _check_scale(M)
    if isinstance(e, ConformalWord) or isinstance(e, (list, tuple)):
        mats = [rotation_matrix(x, M).G for x in e]
        return SixRotation(reduce(np.matmul, mats, np.eye(6)))
    match e:
        case Inversion():
            return SixRotation(np.diag([1.0, 1.0, 1.0, 1.0, 1.0, -1.0]))
        case Translation(h=h):
            B, Binv = light_cone_basis(M), light_cone_basis_inverse(M)
            return SixRotation(Binv @ _translation_lc(h, M) @ B)
        case Dilatation(lam=lam):
            # k+ -> e^{-lam} k+, k- -> e^{lam} k-: a boost in the (5, 6) plane
            G = np.eye(6)
            ch, sh = np.cosh(lam), np.sinh(lam)
            G[4, 4] = G[5, 5] = ch
            G[4, 5] = G[5, 4] = -sh
            return SixRotation(G)
        case Lorentz(matrix=L):
            G = np.eye(6)
            G[:4, :4] = L
            return SixRotation(G)
        case SpecialConformal(b=b):
            I = rotation_matrix(Inversion(), M).G
            T = rotation_matrix(Translation(b), M).G
            return SixRotation(I @ T @ I)
    raise TypeError(f"not a conformal element: {e!r}")


def act(e: ConformalElement | ConformalWord, q, M: float = 1.0, kplus: float = 1.0) -> np.ndarray:
    """Transform q through the cone: project(G lift(q))."""
    G = rotation_matrix(e, M)
    return project(G @ lift(q, kplus, M), M)
