"""Interaction models on the two branches: phi^4, nonlinear sigma and Higgs.

Every model has a constraint term ``l``, a source ``j`` and an interaction
Lagrangian ``L_int`` with ``j = dL_int/dphi``.  The internal and external
branches differ by the overall sign ``s = (-1)^(a-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq, minimize_scalar

from .atlas5d import Branch
from .conformal4d import _check_scale, mdot
from .errors import FitConditioning, NoRealBranch, PionPole
from .fifthdim import BranchSpec, SpectralMode

F_PI_DEFAULT = 93.0  # MeV
PION_POLE_TOL = 1e-8


@dataclass(frozen=True)
class Note:
    """A computed quantity next to the reference value it is checked against."""

    quantity: str
    computed: float
    reference: float
    remark: str

    @property
    def agrees(self) -> bool:
        return math.isclose(self.computed, self.reference, rel_tol=1e-9, abs_tol=1e-12)


@dataclass(frozen=True)
class StationaryPoint:
    x: float
    curvature: float
    kind: str  # "minimum", "maximum" or "degenerate"


def _classify(d2: float, scale: float) -> str:
    if abs(d2) <= 1e-6 * scale:
        return "degenerate"
    return "minimum" if d2 > 0 else "maximum"


def second_derivative(fn: Callable[[float], float], x: float, step: float) -> float:
    """Five-point centred second derivative."""
    h = step
    return (-fn(x + 2 * h) + 16 * fn(x + h) - 30 * fn(x) + 16 * fn(x - h) - fn(x - 2 * h)) / (12 * h * h)


def find_roots(fn: Callable[[float], float], lo: float, hi: float, n: int = 2001,
               touch_tol: float = 1e-12) -> list[float]:
    """All roots of ``fn`` on [lo, hi]: sign changes refined with brentq plus
    touching roots (local minima of |fn| that reach zero)."""
    xs = np.linspace(lo, hi, n)
    ys = np.array([fn(x) for x in xs])
    scale = max(1.0, float(np.max(np.abs(ys))))
    roots = []
    for i in range(n - 1):
        if ys[i] == 0.0:
            roots.append(float(xs[i]))
        elif ys[i] * ys[i + 1] < 0:
            roots.append(brentq(fn, xs[i], xs[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
    if ys[-1] == 0.0:
        roots.append(float(xs[-1]))
    a = np.abs(ys)
    for i in range(1, n - 1):
        if a[i] <= a[i - 1] and a[i] <= a[i + 1] and ys[i] != 0.0 and ys[i - 1] * ys[i + 1] > 0:
            res = minimize_scalar(lambda x: abs(fn(x)), bounds=(xs[i - 1], xs[i + 1]),
                                  method="bounded", options={"xatol": 1e-13})
            if abs(fn(res.x)) <= touch_tol * scale:
                roots.append(float(res.x))
    roots.sort()
    merged = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-9 * max(1.0, abs(r)):
            merged.append(r)
    return merged


def stationary_points(dfn: Callable[[float], float], fn: Callable[[float], float],
                      lo: float, hi: float, step: float, curvature_scale: float) -> list[StationaryPoint]:
    """Roots of ``dfn`` classified by the numeric second derivative of ``fn``.

    A point is degenerate when |d2| <= 1e-6 * ``curvature_scale``.
    """
    out = []
    for x in find_roots(dfn, lo, hi):
        d2 = second_derivative(fn, x, step)
        out.append(StationaryPoint(x, d2, _classify(d2, curvature_scale)))
    return out


# -- phi^4 --------------------------------------------------------------------


@dataclass(frozen=True)
class Phi4Params:
    """Coupling and branch; ``eta_override`` replaces the mass-derived eta."""

    g: float
    spec: BranchSpec
    eta_override: float | None = None

    @property
    def sign(self) -> int:
        return self.spec.sign

    @property
    def eta(self) -> float:
        return self.spec.eta if self.eta_override is None else self.eta_override


def phi4_l(phi, p: Phi4Params):
    return p.g * phi * phi


def phi4_source(phi, p: Phi4Params):
    """s M^2 (3 g eta phi^2 + 2 g^2 phi^3)."""
    g, et, M = p.g, p.eta, p.spec.M
    return p.sign * M * M * (3 * g * et * phi ** 2 + 2 * g * g * phi ** 3)


def phi4_L_int(phi, p: Phi4Params):
    """s M^2 (g eta phi^3 + g^2 phi^4 / 2)."""
    g, et, M = p.g, p.eta, p.spec.M
    return p.sign * M * M * (g * et * phi ** 3 + 0.5 * g * g * phi ** 4)


@dataclass(frozen=True)
class StationaryReport:
    points: list
    zeros: list
    notes: list = field(default_factory=list)

    def nonzero(self, tol: float = 1e-9) -> list:
        return [s for s in self.points if abs(s.x) > tol]


def phi4_stationary_points(p: Phi4Params) -> StationaryReport:
    """Stationary points and zeros of the phi^4 interaction.

    The derivative phi^2 (3 eta + 2 g phi) vanishes at 0 (degenerate) and at
    -3 eta / (2 g); the Lagrangian itself vanishes at 0 and -2 eta / g.
    """
    if p.g == 0:
        raise ValueError("stationary points need g != 0")
    et, M = p.eta, p.spec.M
    scale = max(et, 1e-3) / abs(p.g)
    lo, hi = -4.0 * scale, 4.0 * scale
    fn = lambda x: phi4_L_int(x, p)
    pts = stationary_points(lambda x: phi4_source(x, p), fn, lo, hi, 1e-3 * scale,
                            M * M * max(et, 1e-3) ** 2)
    zeros = find_roots(fn, lo, hi)
    notes = []
    if et > 0:
        nz = [s.x for s in pts if abs(s.x) > 1e-9 * scale]
        notes.append(Note("phi4 nonzero extremum", nz[0] if nz else float("nan"), -2.0 * et / p.g,
                          "the reference location -2 eta/g is a zero of L_int; the derivative "
                          "vanishes at -3 eta/(2 g)"))
    return StationaryReport(pts, zeros, notes)


# -- nonlinear sigma model ----------------------------------------------------------


@dataclass(frozen=True)
class SigmaParams:
    M: float
    branch: Branch = Branch.EXTERNAL
    f_pi: float = F_PI_DEFAULT

    def __post_init__(self):
        if not self.f_pi > 0:
            raise ValueError("f_pi must be positive")
        _check_scale(self.M)
        object.__setattr__(self, "branch", Branch.parse(self.branch))

    @property
    def sign(self) -> int:
        return self.branch.sign


def _vec3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("isospin vectors have three components")
    return v


def sigma_chi_to_pi(chi, p: SigmaParams) -> np.ndarray:
    """pi = chi / (1 + chi^2 / (4 f^2))."""
    chi = _vec3(chi)
    return chi / (1.0 + float(chi @ chi) / (4.0 * p.f_pi ** 2))


def sigma_pi_to_chi(pi, p: SigmaParams) -> np.ndarray:
    """Inverse of :func:`sigma_chi_to_pi` on the branch with chi -> pi as pi -> 0.

    In terms of sigma = sqrt(f^2 - pi^2) this is chi = 2 f pi / (f + sigma),
    which avoids the cancellation in the textbook quadratic root.
    """
    pi = _vec3(pi)
    return 2.0 * p.f_pi * pi / (p.f_pi + sigma_of_pi(pi, p))


def chi_constraint_residual(chi, pi, p: SigmaParams) -> np.ndarray:
    """chi - pi - chi^2 pi / (4 f^2)."""
    chi, pi = _vec3(chi), _vec3(pi)
    return chi - pi - float(chi @ chi) * pi / (4.0 * p.f_pi ** 2)


def sigma_of_pi(pi, p: SigmaParams, negative: bool = False) -> float:
    """sigma on the chiral circle; the positive root unless ``negative``."""
    pi = _vec3(pi)
    pi_sq = float(pi @ pi)
    if pi_sq > p.f_pi ** 2:
        raise NoRealBranch(f"|pi| = {math.sqrt(pi_sq):.6g} exceeds f_pi = {p.f_pi}")
    s = math.sqrt(p.f_pi ** 2 - pi_sq)
    return -s if negative else s


def sigma_chir_penalty(pi, sigma: float, p: SigmaParams) -> float:
    """(pi^2 + sigma^2 - f^2)^2."""
    pi = _vec3(pi)
    return (float(pi @ pi) + sigma * sigma - p.f_pi ** 2) ** 2


def _sigma_parts(pi, p: SigmaParams) -> tuple[float, float, float]:
    pi = _vec3(pi)
    pi_sq = float(pi @ pi)
    f = p.f_pi
    if pi_sq <= (PION_POLE_TOL * f) ** 2:
        raise PionPole("the sigma interaction has a 1/pi^2 pole at pi = 0")
    sigma = sigma_of_pi(pi, p)
    return pi_sq, sigma, pi_sq / (f + sigma)  # last entry is f - sigma, computed stably


def _sigma_bracket(pi, p: SigmaParams) -> float:
    _, sigma, f_minus = _sigma_parts(pi, p)
    f = p.f_pi
    return f * sigma + 0.5 * sigma ** 2 + f * (f + sigma) ** 2 / f_minus


def sigma_L_int(pi, p: SigmaParams) -> float:
    """-s M^2 (f sigma + sigma^2/2 + f (f + sigma)^2 / (f - sigma))."""
    return -p.sign * p.M ** 2 * _sigma_bracket(pi, p)


def sigma_source(pi, p: SigmaParams) -> np.ndarray:
    """s M^2 (f + sigma)/sigma [1 + f (3f - sigma)/(f - sigma)^2] pi."""
    pi = _vec3(pi)
    _, sigma, f_minus = _sigma_parts(pi, p)
    f = p.f_pi
    if sigma == 0.0:
        raise NoRealBranch("source is singular on the chiral circle edge |pi| = f_pi")
    return p.sign * p.M ** 2 * (f + sigma) / sigma * (1.0 + f * (3 * f - sigma) / f_minus ** 2) * pi


SERIES_EXPECTED = {"c_const": -4.5, "c_inv": 8.0, "c_2": -1.0, "c_4": -0.25}
SERIES_POWERS = {"c_const": 2, "c_inv": 4, "c_2": 0, "c_4": -2}  # expected value times f_pi**power
SERIES_DEGREE = 8
COND_LIMIT = 1e12


@dataclass(frozen=True)
class SeriesFit:
    coefficients: dict
    expected: dict
    residual: float
    condition: float

    def relative_errors(self) -> dict:
        return {k: abs(self.coefficients[k] - v) / abs(v) for k, v in self.expected.items()}

    def rows(self) -> list[dict]:
        rel = self.relative_errors()
        return [{"coefficient": k, "fitted": self.coefficients[k], "expected": self.expected[k],
                 "relative_error": rel[k]} for k in self.expected]


def sigma_series_coefficients(p: SigmaParams, lo: float = 0.05, hi: float = 0.3,
                              n: int = 400, degree: int = SERIES_DEGREE) -> SeriesFit:
    """Fit the bracket of the sigma interaction by a Laurent series in pi^2.

    The bracket B = L_int / (-s M^2) is sampled at |pi| in [lo f, hi f];
    pi^2 B is fitted as a polynomial in pi^2 of ``degree``.  Coefficient 0 of
    that polynomial is the 1/pi^2 term, 1 the constant, 2 the pi^2 term and 3
    the pi^4 term; the rest absorb the higher orders that would otherwise
    bias the low ones.
    """
    f = p.f_pi
    r = np.linspace(lo * f, hi * f, n)
    x = r * r
    y = np.array([xi * _sigma_bracket([ri, 0.0, 0.0], p) for xi, ri in zip(x, r)])
    t = x / (f * f)
    poly = Polynomial.fit(t, y / f ** 4, degree)
    # Polynomial.fit solves in the variable mapped onto [-1, 1]; guard that system
    mapped = poly.mapparms()[0] + poly.mapparms()[1] * t
    cond = float(np.linalg.cond(np.vander(mapped, degree + 1, increasing=True)))
    if cond > COND_LIMIT:
        raise FitConditioning(f"design matrix condition number {cond:.3e}")
    poly = poly.convert()
    c = poly.coef
    fitted = {"c_inv": c[0] * f ** 4, "c_const": c[1] * f ** 2, "c_2": c[2], "c_4": c[3] / f ** 2}
    resid = float(np.max(np.abs(poly(t) * f ** 4 - y) / x))
    expected = {k: v * f ** SERIES_POWERS[k] for k, v in SERIES_EXPECTED.items()}
    return SeriesFit(fitted, expected, resid, cond)


def pion_mass_sq(branch, M: float, f_pi: float = F_PI_DEFAULT) -> float:
    """Signed pion mass coefficient 2 s M^2 c_2 read from the series fit.

    The pi^2 term of L_int is -s M^2 c_2 pi^2 = -(1/2) m^2 pi^2, so
    m^2 = 2 s M^2 c_2: +2 M^2 on the external branch and -2 M^2 internally.
    """
    branch = Branch.parse(branch)
    if M == 0.0:
        return 0.0
    fit = sigma_series_coefficients(SigmaParams(M, branch, f_pi))
    return 2.0 * branch.sign * M * M * fit.coefficients["c_2"]


def scale_from_pion_mass(m_pi: float) -> float:
    """M = m_pi / sqrt(2)."""
    return m_pi / math.sqrt(2.0)


# -- Higgs sector ----------------------------------------------------------------------


HIGGS_NORMALIZATION = 0.5  # canonical field h = sqrt(2) u, so d^2L/dh^2 = (1/2) d^2L/du^2


@dataclass(frozen=True)
class HiggsParams:
    f: float
    M: float
    branch: Branch = Branch.INTERNAL

    def __post_init__(self):
        if not self.f > 0:
            raise ValueError("f must be positive")
        _check_scale(self.M)
        object.__setattr__(self, "branch", Branch.parse(self.branch))

    @property
    def sign(self) -> int:
        return self.branch.sign

    @property
    def vev(self) -> float:
        """3M/f on the internal branch, 0 on the external one."""
        return 3.0 * self.M / self.f if self.branch is Branch.INTERNAL else 0.0


def _abs_branch(phi, branch_sign):
    """|phi| for real input; the holomorphic continuation s*phi for complex input."""
    if branch_sign is None:
        return np.abs(phi)
    return branch_sign * phi


def higgs_l(phi, p: HiggsParams, branch_sign=None):
    """-(f/M) phi |phi|."""
    return -(p.f / p.M) * phi * _abs_branch(phi, branch_sign)


def higgs_source(phi, p: HiggsParams, branch_sign=None):
    """s (-3 f M phi |phi| + 2 f^2 phi^3), the gradient of :func:`higgs_L_int`."""
    return p.sign * (-3.0 * p.f * p.M * phi * _abs_branch(phi, branch_sign) + 2.0 * p.f ** 2 * phi ** 3)


def higgs_source_scaled(phi, p: HiggsParams):
    """M^2 times :func:`higgs_source`; equals the gradient of L_int only at M = 1."""
    return p.M ** 2 * higgs_source(phi, p)


def higgs_L_int(phi, p: HiggsParams):
    """s (-f M phi^2 |phi| + f^2 phi^4 / 2)."""
    return p.sign * (-p.f * p.M * phi ** 2 * np.abs(phi) + 0.5 * p.f ** 2 * phi ** 4)


def higgs_L_int_shifted(phi_shift, p: HiggsParams):
    """s (-(f M / 4) u^2 |u| + (f^2 / 16) u^4) with u = phi' + vev."""
    u = phi_shift + p.vev
    return p.sign * (-0.25 * p.f * p.M * u ** 2 * np.abs(u) + p.f ** 2 / 16.0 * u ** 4)


def _higgs_shifted_derivative(u, p: HiggsParams):
    return p.sign * (-0.75 * p.f * p.M * u * abs(u) + 0.25 * p.f ** 2 * u ** 3)


def higgs_stationary_points(p: HiggsParams, form: str = "unshifted") -> StationaryReport:
    """Stationary points of the Higgs interaction.

    ``unshifted``: extrema at |phi| = 3M/(2f), zeros at 0 and |phi| = 2M/f.
    ``shifted``: points are reported in u = phi' + vev, extrema at |u| = 3M/f.
    """
    scale = p.M / p.f
    lo, hi = -6.0 * scale, 6.0 * scale
    if form == "unshifted":
        fn = lambda x: higgs_L_int(x, p)
        dfn = lambda x: higgs_source(x, p)
        reference = 1.5 * scale
    elif form == "shifted":
        fn = lambda u: higgs_L_int_shifted(u - p.vev, p)
        dfn = lambda u: _higgs_shifted_derivative(u, p)
        reference = 3.0 * scale
    else:
        raise ValueError(f"unknown form {form!r}")
    pts = stationary_points(dfn, fn, lo, hi, 1e-3 * scale, p.M * p.M)
    zeros = find_roots(fn, lo, hi)
    nz = [s.x for s in pts if s.x > 1e-9 * scale]
    notes = [Note(f"higgs {form} extremum", nz[0] if nz else float("nan"), reference, "")]
    return StationaryReport(pts, zeros, notes)


@dataclass(frozen=True)
class HiggsMass:
    raw: float
    normalization: float
    mass_sq: float
    u_star: float


def higgs_mass_sq(p: HiggsParams) -> HiggsMass:
    """Mass coefficient from the curvature of the shifted interaction at u* = 3M/f.

    The raw second derivative d^2L/du^2 there is 9M^2/4 (internal branch).
    The canonical field is h = sqrt(2) u, so the mass coefficient is
    ``HIGGS_NORMALIZATION * raw`` = 9M^2/8.
    """
    if p.branch is not Branch.INTERNAL:
        raise ValueError("the Higgs mass is defined on the internal branch")
    u_star = 3.0 * p.M / p.f
    fn = lambda u: higgs_L_int_shifted(u - p.vev, p)
    raw = second_derivative(fn, u_star, 1e-3 * u_star)
    return HiggsMass(raw, HIGGS_NORMALIZATION, HIGGS_NORMALIZATION * raw, u_star)


# -- scalar QED source ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaugeMode:
    """Plane-wave gauge field epsilon_mu * amplitude * exp(-i k.x - i k5 x5)."""

    k: np.ndarray
    k5: float
    polarization: np.ndarray
    amplitude: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "k", np.array(self.k, dtype=float))
        object.__setattr__(self, "polarization", np.array(self.polarization, dtype=float))


def sed_source(phi: SpectralMode, A: GaugeMode, e_charge: float) -> list[SpectralMode]:
    """(i e d.A + i e A.d - e^2 A.A) phi for plane waves.

    The derivative acts on everything to its right, so the linear term is
    e (k + 2q).eps * a_A * a_phi at momentum q + k and the quadratic term is
    -e^2 eps.eps * a_A^2 * a_phi at q + 2k.  Outputs with equal momenta are
    merged.
    """
    if e_charge == 0.0:
        return []
    eps, a, q, k = A.polarization, A.amplitude, phi.q, A.k
    lin = e_charge * mdot(k + 2.0 * q, eps) * a * phi.amplitude
    quad = -e_charge ** 2 * mdot(eps, eps) * a * a * phi.amplitude
    terms = [(q + k, phi.q5 + A.k5, lin), (q + 2.0 * k, phi.q5 + 2.0 * A.k5, quad)]
    out: list[SpectralMode] = []
    for mom, m5, amp in terms:
        for i, prev in enumerate(out):
            if np.array_equal(prev.q, mom) and prev.q5 == m5:
                out[i] = SpectralMode(mom, m5, prev.amplitude + amp, phi.branch, phi.M)
                break
        else:
            out.append(SpectralMode(mom, m5, amp, phi.branch, phi.M))
    return out
