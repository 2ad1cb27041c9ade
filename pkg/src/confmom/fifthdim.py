"""Fifth-coordinate constraint dynamics.

Each branch field obeys the first-order constraint

    (i/M) d phi/dx5 = eta phi + l(phi, x5)

and its 4D source follows from ``j = s M^2 ((i/M) d/dx5 + eta) l`` with
``s = +1`` on the internal branch and ``-1`` on the external one.  Profiles
are sampled on a uniform x5 grid containing the anchor ``t5``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .atlas5d import Branch, Region, classify, shell_residual
from .conformal4d import _check_scale, minkowski_sq
from .errors import AnchorMismatch, GridMismatch, ResonantPole, StepDiverged

DEFAULT_POINTS = 2049
DEFAULT_HALF_WIDTH = 10.0  # in units of 1/M
OVERFLOW_GUARD = 1e12


@dataclass(frozen=True)
class BranchSpec:
    branch: Branch
    m: float
    M: float

    def __post_init__(self):
        object.__setattr__(self, "branch", Branch.parse(self.branch))
        _check_scale(self.M)
        if self.m < 0:
            raise ValueError("mass must be non-negative")

    @property
    def eta(self) -> float:
        return eta(self)

    @property
    def sign(self) -> int:
        return self.branch.sign


def eta(spec: BranchSpec) -> float:
    """sqrt|1 - m^2/M^2| (internal) or sqrt(1 + m^2/M^2) (external)."""
    r = (spec.m / spec.M) ** 2
    if spec.branch is Branch.INTERNAL:
        return math.sqrt(abs(1.0 - r))
    return math.sqrt(1.0 + r)


# -- grids and profiles --------------------------------------------------------


def make_grid(M: float, t5: float = 0.0, n: int = DEFAULT_POINTS,
              half_width: float | None = None) -> np.ndarray:
    """Uniform x5 grid of ``n`` (odd) points centred on the anchor ``t5``.

    ``half_width`` defaults to 10/M.
    """
    M = _check_scale(M)
    if n < 5 or n % 2 == 0:
        raise ValueError("grid needs an odd number of points >= 5 so t5 is a node")
    if half_width is None:
        half_width = DEFAULT_HALF_WIDTH / M
    k = np.arange(n) - n // 2
    return t5 + k * (half_width / (n // 2))


@dataclass(frozen=True, eq=False)
class FifthProfile:
    x5: np.ndarray
    values: np.ndarray
    t5: float

    def __post_init__(self):
        x = np.array(self.x5, dtype=float)
        v = np.array(self.values, dtype=complex)
        if x.ndim != 1 or x.shape != v.shape or x.size < 5:
            raise ValueError("x5 and values must be equal-length 1-D arrays (>= 5 points)")
        dx = np.diff(x)
        if np.any(dx <= 0) or np.max(np.abs(dx - dx[0])) > 1e-9 * abs(dx[0]):
            raise GridMismatch("x5 grid must be strictly increasing and uniform")
        idx = int(np.argmin(np.abs(x - self.t5)))
        if abs(x[idx] - self.t5) > 1e-9 * abs(dx[0]):
            raise AnchorMismatch(f"anchor t5={self.t5} is not a grid point")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x5", x)
        object.__setattr__(self, "values", v)

    @property
    def dx(self) -> float:
        return float(self.x5[1] - self.x5[0])

    @property
    def anchor_index(self) -> int:
        return int(np.argmin(np.abs(self.x5 - self.t5)))

    @property
    def anchor_value(self) -> complex:
        return complex(self.values[self.anchor_index])

    def with_values(self, values) -> "FifthProfile":
        return FifthProfile(self.x5, values, self.t5)

    def to_csv(self, fh=None) -> str | None:
        """Write ``x5,re,im`` rows; returns the text when no handle is given."""
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x5", "re", "im"])
        for x, v in zip(self.x5, self.values):
            w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])
        return out.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, text: str, t5: float = 0.0) -> "FifthProfile":
        rows = list(csv.DictReader(io.StringIO(text)))
        x = [float(r["x5"]) for r in rows]
        v = [complex(float(r["re"]), float(r["im"])) for r in rows]
        return cls(np.array(x), np.array(v), t5)


def derivative(values, dx: float, method: str = "fd") -> np.ndarray:
    """d/dx5 of uniformly sampled values.

    ``fd``: 4th-order centred stencil, 4th-order one-sided at the two edge
    points on each side.  ``spectral``: FFT derivative assuming periodicity.
    """
    f = np.asarray(values, dtype=complex)
    n = f.size
    if method == "spectral":
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
        return np.fft.ifft(1j * k * np.fft.fft(f))
    if method != "fd":
        raise ValueError(f"unknown derivative method {method!r}")
    if n < 5:
        raise ValueError("need at least 5 samples")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dx)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12.0 * dx)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12.0 * dx)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12.0 * dx)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12.0 * dx)
    return d


def second_derivative(values, dx: float) -> np.ndarray:
    """4th-order centred second derivative; edge points use 2nd-order stencils."""
    f = np.asarray(values, dtype=complex)
    d = np.empty_like(f)
    d[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12.0 * dx * dx)
    d[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (dx * dx)
    d[1] = (f[0] - 2 * f[1] + f[2]) / (dx * dx)
    d[-2] = (f[-3] - 2 * f[-2] + f[-1]) / (dx * dx)
    d[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (dx * dx)
    return d


# -- constraint solver -------------------------------------------------------------


def free_solution(spec: BranchSpec, phi0: complex, x5, t5: float = 0.0) -> np.ndarray:
    """Closed-form l = 0 solution phi(t5) exp(-i M eta (x5 - t5))."""
    x5 = np.asarray(x5, dtype=float)
    return phi0 * np.exp(-1j * spec.M * spec.eta * (x5 - t5))


def solve_constraint(spec: BranchSpec, phi0: complex,
                     l_fn: Callable[[complex, float], complex] | None,
                     x5=None, t5: float = 0.0,
                     guard: float = OVERFLOW_GUARD) -> FifthProfile:
    """Integrate (i/M) phi' = eta phi + l(phi, x5) outward from phi(t5) = phi0.

    Classical RK4 is applied to psi = exp(i M eta (x5 - t5)) phi, which
    removes the linear part exactly: for l = 0 the result is the closed form
    up to rounding.  Raises :class:`StepDiverged` if |phi| exceeds
    ``guard * max(1, |phi0|)``.
    """
    M, et = spec.M, spec.eta
    if x5 is None:
        x5 = make_grid(M, t5)
    x5 = np.asarray(x5, dtype=float)
    probe = FifthProfile(x5, np.zeros_like(x5, dtype=complex), t5)
    i0 = probe.anchor_index
    phi = np.empty(x5.size, dtype=complex)
    phi[i0] = phi0
    if l_fn is None:
        return probe.with_values(free_solution(spec, phi0, x5, t5))

    limit = guard * max(1.0, abs(phi0))

    def rhs(x, psi):
        ph = np.exp(-1j * M * et * (x - t5))
        return -1j * M * l_fn(psi * ph, x) / ph

    for stop, step in ((x5.size, 1), (-1, -1)):
        psi = complex(phi0)
        for i in range(i0, stop - step, step):
            x, h = x5[i], x5[i + step] - x5[i]
            k1 = rhs(x, psi)
            k2 = rhs(x + 0.5 * h, psi + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h, psi + 0.5 * h * k2)
            k4 = rhs(x + h, psi + h * k3)
            psi = psi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if not np.isfinite(psi) or abs(psi) > limit:
                raise StepDiverged(f"|phi| exceeded {limit:.3e} at x5 = {x5[i + step]:.6g}")
            phi[i + step] = psi * np.exp(-1j * M * et * (x5[i + step] - t5))
    return probe.with_values(phi)


def constraint_defect(spec: BranchSpec, phi: FifthProfile, l_values, method: str = "fd") -> np.ndarray:
    """(i/M) phi' - eta phi - l on the grid."""
    d = derivative(phi.values, phi.dx, method)
    return 1j / spec.M * d - spec.eta * phi.values - np.asarray(l_values, dtype=complex)


def apply_source_operator(spec: BranchSpec, values, dx: float, method: str = "fd") -> np.ndarray:
    """M^2 ((i/M) d/dx5 + eta) applied to sampled values (no branch sign)."""
    v = np.asarray(values, dtype=complex)
    return spec.M ** 2 * (1j / spec.M * derivative(v, dx, method) + spec.eta * v)


def second_order_defect(spec: BranchSpec, phi: FifthProfile, l_values) -> np.ndarray:
    """(d^2/dx5^2 + M^2 eta^2) phi + M^2 ((i/M) d/dx5 + eta) l.

    For m <= M (or any m on the external branch) M^2 eta^2 = M^2 -+ m^2 and
    this is the second-order x5 equation written as LHS - RHS.  It equals
    minus the source operator applied to :func:`constraint_defect`.
    """
    M, et = spec.M, spec.eta
    d2 = second_derivative(phi.values, phi.dx)
    return d2 + (M * et) ** 2 * phi.values + apply_source_operator(spec, l_values, phi.dx)


def source_from_l(spec: BranchSpec, l: FifthProfile, method: str = "fd") -> FifthProfile:
    """j = s M^2 ((i/M) d/dx5 + eta) l, s = +1 internal / -1 external."""
    return l.with_values(spec.sign * apply_source_operator(spec, l.values, l.dx, method))


def plane_wave_source(l_amplitude: complex, q5: float, spec: BranchSpec) -> complex:
    """Source amplitude for l proportional to exp(-i q5 x5): s M (q5 + M eta) l."""
    return spec.sign * spec.M * (q5 + spec.M * spec.eta) * l_amplitude


def l_from_source(j_amplitude: complex, q5: float, spec: BranchSpec) -> complex:
    """Invert :func:`plane_wave_source`: l = s j / (M (q5 + M eta))."""
    den = spec.M * (q5 + spec.M * spec.eta)
    if abs(q5 + spec.M * spec.eta) <= 1e-12 * (abs(q5) + spec.M * spec.eta + spec.M):
        raise ResonantPole(f"q5 = {q5} sits on the pole -M*eta")
    return spec.sign * j_amplitude / den


def plane_wave(amplitude: complex, q5: float, x5) -> np.ndarray:
    return amplitude * np.exp(-1j * q5 * np.asarray(x5, dtype=float))


# -- spectral modes -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralMode:
    """Plane-wave component (q, q5) with a complex amplitude.

    Construction does not enforce the shell; use :func:`check_shell_support`
    or :meth:`on_shell` for that, since products of modes are off shell.
    """

    q: np.ndarray
    q5: float
    amplitude: complex
    branch: Branch
    M: float

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "branch", Branch.parse(self.branch))

    @classmethod
    def on_shell(cls, q, amplitude: complex, M: float) -> "SpectralMode":
        """Mode whose branch and q5 >= 0 follow from the region of q^2."""
        q = np.asarray(q, dtype=float)
        q_sq = minkowski_sq(q)
        branch = classify(q_sq, M).branch
        rad = M * M - q_sq if branch is Branch.INTERNAL else M * M + q_sq
        return cls(q, math.sqrt(max(rad, 0.0)), amplitude, branch, M)

    @property
    def residual(self) -> float:
        return shell_residual(minkowski_sq(self.q), self.q5 ** 2, self.branch, self.M)


def shell_operator(mode: SpectralMode) -> complex:
    """(q^2 +- q5^2 -+ M^2) times the amplitude: zero for modes on their shell."""
    return mode.residual * mode.amplitude


def _window_ok(q_sq: float, branch: Branch, M: float) -> bool:
    return classify(q_sq, M).branch is branch


@dataclass(frozen=True)
class ModeCheck:
    index: int
    residual: float
    region: Region
    in_window: bool
    passed: bool


@dataclass(frozen=True)
class ShellReport:
    checks: tuple
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violators(self) -> list[int]:
        return [c.index for c in self.checks if not c.passed]

    @property
    def max_residual(self) -> float:
        return max((abs(c.residual) for c in self.checks), default=0.0)


def check_shell_support(modes: Iterable[SpectralMode], tol: float = 1e-10) -> ShellReport:
    """Shell residual and region-window compliance for each mode."""
    checks = []
    for i, mode in enumerate(modes):
        q_sq = minkowski_sq(mode.q)
        r = mode.residual
        ok_window = _window_ok(q_sq, mode.branch, mode.M)
        ok = abs(r) <= tol * mode.M ** 2 and ok_window
        checks.append(ModeCheck(i, r, classify(q_sq, mode.M), ok_window, ok))
    return ShellReport(tuple(checks), tol)


# -- 4D reduction ------------------------------------------------------------------


def _anchor_value(p: FifthProfile | None, t5: float) -> complex:
    if p is None:
        return 0.0 + 0.0j
    if abs(p.t5 - t5) > 1e-12 * max(1.0, abs(t5)):
        raise AnchorMismatch(f"profile anchored at {p.t5}, expected {t5}")
    return p.anchor_value


def reduce_to_4d(phi1: FifthProfile | None, phi2: FifthProfile | None,
                 j1: FifthProfile | None = None, j2: FifthProfile | None = None,
                 t5: float | None = None) -> tuple[complex, complex]:
    """Phi = phi_1(t5) + phi_2(t5) and J = j_1(t5) + j_2(t5).

    Missing profiles count as zero.  ``t5`` defaults to the anchor of the
    first profile given; every profile must share it.
    """
    present = [p for p in (phi1, phi2, j1, j2) if p is not None]
    if t5 is None:
        if not present:
            return 0j, 0j
        t5 = present[0].t5
    Phi = _anchor_value(phi1, t5) + _anchor_value(phi2, t5)
    J = _anchor_value(j1, t5) + _anchor_value(j2, t5)
    return Phi, J


def kg_residual(q, m: float, Phi: complex, J: complex) -> complex:
    """Momentum-space Klein-Gordon residual (-q^2 + m^2) Phi - J."""
    return (m * m - minkowski_sq(np.asarray(q, dtype=float))) * Phi - J
