"""Klein-Gordon mode functions in a periodic box.

The continuum delta function is replaced by box normalization, so

    i * int d^3x  f*  <-d0->  g  =  2 (p0 - h0) L^3  (same lattice momentum)

with ``A <-d0-> B = A dB/dx0 - (dA/dx0) B``.  Mode functions are
``exp(-i E x0 + i k.x)``; a mode with label p and shift h has spatial
momentum p - h and energy omega_p - h0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, OffLattice

LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class BoxGrid:
    L: float
    N: int

    def __post_init__(self):
        if self.N < 16 or self.N % 2:
            raise ValueError("N must be even and at least 16")
        if not self.L > 0:
            raise ValueError("box length must be positive")

    @property
    def step(self) -> float:
        return self.L / self.N

    @property
    def volume(self) -> float:
        return self.L ** 3

    @property
    def cell(self) -> float:
        return self.step ** 3

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.L

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.arange(self.N) * self.step
        return np.meshgrid(x, x, x, indexing="ij")

    def momentum(self, n) -> np.ndarray:
        """Lattice momentum 2 pi n / L for an integer triple n."""
        return self.dk * np.asarray(n, dtype=float)

    def lattice_index(self, k) -> np.ndarray:
        """Integer triple for a lattice momentum; raises :class:`OffLattice`."""
        n = np.asarray(k, dtype=float) / self.dk
        r = np.rint(n)
        if np.max(np.abs(n - r)) > LATTICE_TOL * max(1.0, float(np.max(np.abs(n)))):
            raise OffLattice(f"momentum {k} is not a multiple of 2 pi / L")
        return r.astype(int)

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """FFT-ordered lattice momenta on the full mesh."""
        k = self.dk * np.fft.fftfreq(self.N, d=1.0 / self.N)
        return np.meshgrid(k, k, k, indexing="ij")


def omega(k, m: float) -> float:
    k = np.asarray(k, dtype=float)
    return math.sqrt(float(k @ k) + m * m)


@dataclass(frozen=True, eq=False)
class PlaneMode:
    """Mode with spatial label ``p`` (on the lattice), mass ``m`` and shift ``h``."""

    p: np.ndarray
    m: float
    h: np.ndarray = field(default_factory=lambda: np.zeros(4))
    amplitude: complex = 1.0

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        h = np.array(self.h, dtype=float)
        if p.shape != (3,) or h.shape != (4,):
            raise ValueError("p is a spatial 3-vector and h a four-vector")
        if self.m < 0:
            raise ValueError("mass must be non-negative")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "h", h)

    @property
    def p0(self) -> float:
        return omega(self.p, self.m)

    @property
    def four_momentum(self) -> np.ndarray:
        return np.concatenate([[self.p0], self.p])

    @property
    def energy(self) -> float:
        return self.p0 - self.h[0]

    @property
    def wavevector(self) -> np.ndarray:
        return self.p - self.h[1:]


def mode_values(energy: float, k, grid: BoxGrid, x0: float) -> np.ndarray:
    """exp(-i E x0 + i k.x) on the mesh."""
    X, Y, Z = grid.coords()
    k = np.asarray(k, dtype=float)
    return np.exp(-1j * energy * x0 + 1j * (k[0] * X + k[1] * Y + k[2] * Z))


def _check_lattice(mode: PlaneMode, grid: BoxGrid) -> None:
    grid.lattice_index(mode.p)
    grid.lattice_index(mode.h[1:])


def kg_inner_product(f: PlaneMode, g: PlaneMode, grid: BoxGrid, x0: float = 0.0,
                     conjugate: bool = True) -> complex:
    """i * sum f* <-d0-> g * dV over the box.

    With ``conjugate=False`` the first mode is not conjugated, giving the
    pairing of two positive-frequency modes.
    """
    for mode in (f, g):
        _check_lattice(mode, grid)
    fv = mode_values(f.energy, f.wavevector, grid, x0)
    gv = mode_values(g.energy, g.wavevector, grid, x0)
    if conjugate:
        # d0 f* = i E_f f*, d0 g = -i E_g g
        integrand = np.conj(fv) * gv * (-1j * g.energy - 1j * f.energy)
    else:
        integrand = fv * gv * (-1j * g.energy + 1j * f.energy)
    return complex(1j * grid.cell * np.sum(integrand))


@dataclass(frozen=True, eq=False)
class FieldSnapshot:
    """Field values and their x0 derivative on the mesh at time ``x0``."""

    grid: BoxGrid
    values: np.ndarray
    dt: np.ndarray
    x0: float = 0.0

    def __post_init__(self):
        shape = (self.grid.N,) * 3
        v = np.array(self.values, dtype=complex)
        d = np.array(self.dt, dtype=complex)
        if v.shape != shape or d.shape != shape:
            raise GridMismatch(f"field arrays must have shape {shape}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dt", d)

    @property
    def is_real(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return bool(np.max(np.abs(self.values.imag)) <= 1e-12 * scale
                    and np.max(np.abs(self.dt.imag)) <= 1e-12 * max(1.0, float(np.max(np.abs(self.dt)))))


def build_field(grid: BoxGrid, m: float, positive: dict, negative: dict | None = None,
                x0: float = 0.0, neutral: bool = False) -> FieldSnapshot:
    """Superposition sum_k c_k f_k + sum_k d_k* f_k* of lattice modes.

    ``positive`` and ``negative`` map integer triples to amplitudes.  With
    ``neutral=True`` the negative-frequency amplitudes equal the positive
    ones, so the field is real.
    """
    if neutral:
        negative = positive
    vals = np.zeros((grid.N,) * 3, dtype=complex)
    dts = np.zeros_like(vals)
    for amps, sign in ((positive, 1.0), (negative or {}, -1.0)):
        for n, c in amps.items():
            k = grid.momentum(n)
            w = omega(k, m)
            f = mode_values(w, k, grid, x0)
            if sign > 0:
                vals += c * f
                dts += -1j * w * c * f
            else:
                vals += np.conj(c) * np.conj(f)
                dts += 1j * w * np.conj(c) * np.conj(f)
    return FieldSnapshot(grid, vals, dts, x0)


def project(field: FieldSnapshot, energy: float, k, grid: BoxGrid) -> complex:
    """Normalized KG projection onto exp(-i E x0 + i k.x)."""
    if field.grid != grid:
        raise GridMismatch("field sampled on a different grid")
    grid.lattice_index(k)
    f = mode_values(energy, k, grid, field.x0)
    inner = 1j * grid.cell * np.sum(np.conj(f) * (field.dt - 1j * energy * field.values))
    return complex(inner / (2.0 * energy * grid.volume))


def extract_coefficient(field: FieldSnapshot, p, grid: BoxGrid, m: float) -> complex:
    """Amplitude of the positive-frequency mode with spatial momentum ``p``."""
    p = np.asarray(p, dtype=float)
    return project(field, omega(p, m), p, grid)


def translate_charged(field: FieldSnapshot, h) -> FieldSnapshot:
    """Multiply by exp(i h.x) = exp(i (h0 x0 - h.x))."""
    h = np.asarray(h, dtype=float)
    g = field.grid
    g.lattice_index(h[1:])
    X, Y, Z = g.coords()
    phase = np.exp(1j * (h[0] * field.x0 - (h[1] * X + h[2] * Y + h[3] * Z)))
    return FieldSnapshot(g, phase * field.values, phase * (field.dt + 1j * h[0] * field.values), field.x0)


def _positive_part_fft(field: FieldSnapshot, m: float) -> tuple[np.ndarray, np.ndarray]:
    """FFT amplitudes c_k exp(-i omega_k x0) of a real field, plus omega_k."""
    g = field.grid
    KX, KY, KZ = g.wavenumbers()
    w = np.sqrt(KX ** 2 + KY ** 2 + KZ ** 2 + m * m)
    if np.any(w == 0):
        raise ValueError("massless zero mode has no frequency split")
    phi_k = np.fft.fftn(field.values) / g.N ** 3
    dt_k = np.fft.fftn(field.dt) / g.N ** 3
    return 0.5 * (phi_k + 1j * dt_k / w), w


def translate_neutral(field: FieldSnapshot, h, m: float) -> FieldSnapshot:
    """Relabel each mode k -> k - h with energy omega_{k-h} - h0, keeping the field real.

    The positive-frequency amplitudes are read off by FFT, moved to the
    shifted labels and the negative-frequency half is rebuilt as the complex
    conjugate.
    """
    h = np.asarray(h, dtype=float)
    g = field.grid
    a, w = _positive_part_fft(field, m)
    c = a * np.exp(1j * w * field.x0)
    KX, KY, KZ = g.wavenumbers()
    energy = np.sqrt((KX - h[1]) ** 2 + (KY - h[2]) ** 2 + (KZ - h[3]) ** 2 + m * m) - h[0]
    # moving label k to k - h is a roll of the FFT lattice by the integer offset of h
    shift = tuple(int(-v) for v in g.lattice_index(h[1:]))
    plus = np.roll(c * np.exp(-1j * energy * field.x0), shift, axis=(0, 1, 2))
    dplus = np.roll(-1j * energy * c * np.exp(-1j * energy * field.x0), shift, axis=(0, 1, 2))
    vals = np.fft.ifftn(plus) * g.N ** 3
    dts = np.fft.ifftn(dplus) * g.N ** 3
    vals = vals + np.conj(vals)
    dts = dts + np.conj(dts)
    return FieldSnapshot(g, vals, dts, field.x0)


def translate_and_extract(field: FieldSnapshot, h, p, grid: BoxGrid, m: float,
                          kind: str = "charged") -> complex:
    """Coefficient at the shifted label after translating the field by ``h``.

    ``charged``: multiply by exp(i h.x) and project on energy omega_p - h0,
    momentum p - h.  ``neutral``: relabel modes and project on energy
    omega_{p-h} - h0, momentum p - h.  Either way the result should equal
    ``extract_coefficient(field, p, ...)``.
    """
    h = np.asarray(h, dtype=float)
    p = np.asarray(p, dtype=float)
    k = p - h[1:]
    if kind == "charged":
        shifted = translate_charged(field, h)
        return project(shifted, omega(p, m) - h[0], k, grid)
    if kind == "neutral":
        shifted = translate_neutral(field, h, m)
        return project(shifted, omega(k, m) - h[0], k, grid)
    raise ValueError(f"unknown translation kind {kind!r}")
