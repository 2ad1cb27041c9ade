"""Conformal group acting on off-shell four-momenta.

Four-momenta are plain ``numpy`` arrays of shape ``(4,)`` holding the
contravariant components ``(q0, q1, q2, q3)``; the metric is
``diag(+1, -1, -1, -1)`` everywhere.  Group elements are small immutable
dataclasses, and all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import (
    LightlikeInversion,
    NotPseudoOrthogonal,
    SingularSpecialConformal,
    StepError,
)

METRIC4 = np.diag([1.0, -1.0, -1.0, -1.0])
METRIC4.setflags(write=False)

LIGHTLIKE_TOL = 1e-12
LORENTZ_TOL = 1e-12

#: Scale dimension of a scalar field in the scale-invariant case.  Kept for
#: reference only; c-number momentum maps do not use it.
SCALE_DIMENSION = -3


def four(*components) -> np.ndarray:
    """Build a read-only four-momentum from 4 numbers or one length-4 iterable."""
    if len(components) == 1:
        components = tuple(components[0])
    q = np.array(components, dtype=float)
    if q.shape != (4,):
        raise ValueError(f"four-momentum needs 4 components, got {q.shape}")
    q.setflags(write=False)
    return q


def mdot(p: np.ndarray, q: np.ndarray) -> float:
    return float(p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3])


def minkowski_sq(q: np.ndarray) -> float:
    return mdot(q, q)


def _check_scale(M: float) -> float:
    M = float(M)
    if not M > 0.0:
        raise ValueError(f"scale M must be positive, got {M}")
    return M


def is_lightlike(q: np.ndarray, M: float) -> bool:
    q2 = minkowski_sq(q)
    return abs(q2) < LIGHTLIKE_TOL * (float(np.dot(q, q)) + M * M)


def _frozen(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


# -- group elements ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Translation:
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", _frozen(self.h, (4,)))


@dataclass(frozen=True, eq=False)
class Lorentz:
    matrix: np.ndarray

    def __post_init__(self):
        L = _frozen(self.matrix, (4, 4))
        resid = np.max(np.abs(L.T @ METRIC4 @ L - METRIC4))
        if resid > LORENTZ_TOL * max(1.0, float(np.max(np.abs(L))) ** 2):
            raise NotPseudoOrthogonal(f"Lambda^T g Lambda - g residual {resid:.3e}")
        object.__setattr__(self, "matrix", L)


@dataclass(frozen=True)
class Dilatation:
    lam: float


@dataclass(frozen=True)
class Inversion:
    pass


@dataclass(frozen=True, eq=False)
class SpecialConformal:
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", _frozen(self.b, (4,)))


ConformalElement = Union[Translation, Lorentz, Dilatation, Inversion, SpecialConformal]


@dataclass(frozen=True)
class ConformalWord:
    """Finite product of elements, applied right-to-left like matrix products."""

    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


# -- Lorentz factories --------------------------------------------------------


def boost(rapidity: float, axis: int = 1) -> Lorentz:
    """Pure boost along spatial ``axis`` (1, 2 or 3)."""
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    L = np.eye(4)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    L[0, 0] = L[axis, axis] = ch
    L[0, axis] = L[axis, 0] = -sh
    return Lorentz(L)


def rotation(angle: float, axis: int = 3) -> Lorentz:
    """Spatial rotation by ``angle`` about ``axis`` (1, 2 or 3)."""
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    i, j = [k for k in (1, 2, 3) if k != axis]
    L = np.eye(4)
    c, s = np.cos(angle), np.sin(angle)
    L[i, i] = L[j, j] = c
    L[i, j] = -s
    L[j, i] = s
    return Lorentz(L)


def boost_velocity(beta) -> Lorentz:
    """Boost into the rest frame of an observer moving with velocity ``beta`` (|beta| < 1)."""
    beta = np.asarray(beta, dtype=float)
    b2 = float(beta @ beta)
    if b2 == 0.0:
        return Lorentz(np.eye(4))
    if b2 >= 1.0:
        raise ValueError("superluminal boost velocity")
    g = 1.0 / np.sqrt(1.0 - b2)
    L = np.eye(4)
    L[0, 0] = g
    L[0, 1:] = L[1:, 0] = -g * beta
    L[1:, 1:] += (g - 1.0) * np.outer(beta, beta) / b2
    return Lorentz(L)


# -- action ----------------------------------------------------------------


def invert(q: np.ndarray, M: float) -> np.ndarray:
    """Momentum inversion q -> -M^2 q / q^2."""
    M = _check_scale(M)
    q = np.asarray(q, dtype=float)
    if is_lightlike(q, M):
        raise LightlikeInversion(f"q^2 = {minkowski_sq(q):.3e} is lightlike within tolerance")
    return -M * M * q / minkowski_sq(q)


def _special_conformal(q: np.ndarray, b: np.ndarray, M: float) -> np.ndarray:
    q2 = minkowski_sq(q)
    M2 = M * M
    t1 = 2.0 * mdot(q, b) / M2
    t2 = minkowski_sq(b) * q2 / (M2 * M2)
    den = 1.0 - t1 + t2
    if abs(den) < LIGHTLIKE_TOL * (1.0 + abs(t1) + abs(t2)):
        raise SingularSpecialConformal(f"denominator {den:.3e} vanishes")
    return (q - b * q2 / M2) / den


def apply(e: ConformalElement, q, M: float) -> np.ndarray:
    """Transform a four-momentum by a single group element."""
    M = _check_scale(M)
    q = np.asarray(q, dtype=float)
    match e:
        case Translation(h=h):
            return q + h
        case Lorentz(matrix=L):
            return L @ q
        case Dilatation(lam=lam):
            return np.exp(lam) * q
        case Inversion():
            return invert(q, M)
        case SpecialConformal(b=b):
            return _special_conformal(q, b, M)
    if isinstance(e, ConformalWord):
        return apply_word(e, q, M)
    raise TypeError(f"not a conformal element: {e!r}")


def apply_word(w: ConformalWord | Sequence[ConformalElement], q, M: float) -> np.ndarray:
    """Right-to-left fold of :func:`apply`; failures carry the step index."""
    elements = list(w)
    q = np.asarray(q, dtype=float)
    for idx in range(len(elements) - 1, -1, -1):
        try:
            q = apply(elements[idx], q, M)
        except (LightlikeInversion, SingularSpecialConformal) as exc:
            raise StepError(idx, exc) from exc
    return q


def inverse(e: ConformalElement) -> ConformalElement:
    match e:
        case Translation(h=h):
            return Translation(-h)
        case Lorentz(matrix=L):
            return Lorentz(METRIC4 @ L.T @ METRIC4)
        case Dilatation(lam=lam):
            return Dilatation(-lam)
        case Inversion():
            return Inversion()
        case SpecialConformal(b=b):
            return SpecialConformal(-b)
    raise TypeError(f"not a conformal element: {e!r}")


def conjugate_by_inversion(e: ConformalElement) -> ConformalElement:
    """Return I e I expressed as a single element.

    Translations and special conformal maps swap, dilatations flip sign,
    Lorentz transformations and the inversion itself are unchanged.
    """
    match e:
        case Translation(h=h):
            return SpecialConformal(h)
        case SpecialConformal(b=b):
            return Translation(b)
        case Dilatation(lam=lam):
            return Dilatation(-lam)
        case Lorentz() | Inversion():
            return e
    raise TypeError(f"not a conformal element: {e!r}")


def infinitesimal_variation(q, dh=None, domega=None, dlam: float = 0.0, db=None, M: float = 1.0) -> np.ndarray:
    """First-order change of q under the infinitesimal group parameters.

    ``domega`` is the covariant antisymmetric tensor omega_{mu nu}; its action
    on q^nu goes through the metric, so ``expm(eps * domega @ METRIC4)`` is
    the corresponding finite Lorentz matrix.  The special conformal part is
    ``(q^2 db - 2 (q.db) q) / M^2``, which is the tangent of
    ``SpecialConformal(-eps * db)`` under :func:`apply`.
    """
    M = _check_scale(M)
    q = np.asarray(q, dtype=float)
    dq = np.zeros(4)
    if dh is not None:
        dq += np.asarray(dh, dtype=float)
    if domega is not None:
        w = np.asarray(domega, dtype=float)
        if np.max(np.abs(w + w.T)) > 1e-12 * max(1.0, float(np.max(np.abs(w)))):
            raise ValueError("domega must be antisymmetric")
        dq += w @ METRIC4 @ q
    dq += dlam * q
    if db is not None:
        db = np.asarray(db, dtype=float)
        dq += (minkowski_sq(q) * db - 2.0 * mdot(q, db) * q) / (M * M)
    return dq


def invariant_split(f: Callable[[np.ndarray], float], q, M: float) -> tuple[float, float]:
    """Split f into inversion-invariant and anti-invariant parts at q."""
    q = np.asarray(q, dtype=float)
    qi = invert(q, M)
    fq, fi = f(q), f(qi)
    return 0.5 * (fq + fi), 0.5 * (fq - fi)


def random_element(rng: np.random.Generator, kind: str, scale: float = 0.5) -> ConformalElement:
    """Draw a random element of one family; used by the verification sweeps."""
    match kind:
        case "translation":
            return Translation(rng.normal(scale=scale, size=4))
        case "lorentz":
            L = boost_velocity(rng.uniform(-0.5, 0.5, size=3) / np.sqrt(3.0)).matrix
            for ax in (1, 2, 3):
                L = rotation(rng.uniform(-np.pi, np.pi), ax).matrix @ L
            return Lorentz(L)
        case "dilatation":
            return Dilatation(rng.uniform(-1.0, 1.0))
        case "inversion":
            return Inversion()
        case "special_conformal":
            return SpecialConformal(rng.normal(scale=scale, size=4))
    raise ValueError(f"unknown element kind {kind!r}")


ELEMENT_KINDS = ("translation", "lorentz", "dilatation", "inversion", "special_conformal")


def parse_element(spec: str) -> ConformalElement:
    """Parse the CLI element syntax: ``inv``, ``dil:0.5``, ``trans:h0,h1,h2,h3``,
    ``sct:b0,b1,b2,b3``, ``boost:rapidity[,axis]``, ``rot:angle[,axis]``."""
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    nums = [float(x) for x in arg.split(",")] if arg else []
    if name in ("inv", "inversion") and not nums:
        return Inversion()
    if name in ("dil", "dilatation") and len(nums) == 1:
        return Dilatation(nums[0])
    if name in ("trans", "translation") and len(nums) == 4:
        return Translation(nums)
    if name in ("sct", "special") and len(nums) == 4:
        return SpecialConformal(nums)
    if name == "boost" and len(nums) in (1, 2):
        return boost(nums[0], int(nums[1]) if len(nums) == 2 else 1)
    if name == "rot" and len(nums) in (1, 2):
        return rotation(nums[0], int(nums[1]) if len(nums) == 2 else 3)
    raise ValueError(f"cannot parse element spec {spec!r}")


def parse_word(specs: Iterable[str]) -> ConformalWord:
    return ConformalWord(tuple(parse_element(s) for s in specs))
