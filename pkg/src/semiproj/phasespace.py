"""Wigner/Weyl transforms, phase-space translations and Gaussian smoothing.

Phase-space fields live on the position grid ``x_j`` times the dual grid
``xi_m = m * pi * hbar / (2 L)``, ``m = -M/2 .. M/2 - 1``.  The Wigner sum
uses the substitution ``y = 2 k dx`` so both kernel arguments stay on grid
nodes.  Translations act exactly on the periodic grid when the shift is a
multiple of ``dx`` in position and of ``pi hbar / L`` in momentum.

Only one space dimension is supported here (phase fields are 2-d arrays).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .grid import Grid, GridOperator

__all__ = [
    "PhaseField",
    "PhasePoint",
    "IncompatibleShiftError",
    "wigner",
    "weyl_quantize",
    "translate",
    "weyl_heisenberg_unitary",
    "semiclassical_convolve",
    "husimi",
    "gaussian_smooth",
    "wick_quantize",
    "coherent_projector",
    "field_gradient",
]

log = logging.getLogger(__name__)

WRAP_DECAY_TOL = 1e-8


class IncompatibleShiftError(ValueError):
    """Raised when a phase-space shift does not map the grid onto itself."""


class PhasePoint(NamedTuple):
    x: float
    xi: float


def _require_1d(grid: Grid):
    if grid.dim != 1:
        raise NotImplementedError("phase-space transforms are implemented for d = 1")


def _signed_modes(M: int) -> np.ndarray:
    return np.arange(-M // 2, M // 2)


@dataclass(eq=False)
class PhaseField:
    """Samples ``f(x_j, xi_m)``; rows index position, columns momentum."""

    values: np.ndarray
    grid: Grid
    hbar: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _require_1d(self.grid)
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.M, self.grid.M):
            raise ValueError(f"field shape {self.values.shape} does not match grid")

    @property
    def x(self) -> np.ndarray:
        return self.grid.axis_nodes

    @property
    def dxi(self) -> float:
        return np.pi * self.hbar / (2 * self.grid.L)

    @property
    def xi(self) -> np.ndarray:
        return _signed_modes(self.grid.M) * self.dxi

    @property
    def cell(self) -> float:
        return self.grid.dx * self.dxi

    def mesh(self):
        return np.meshgrid(self.x, self.xi, indexing="ij")

    def integral(self) -> complex:
        return self.values.sum() * self.cell

    def lp_norm(self, p: float, mask=None) -> float:
        v = np.abs(self.values)
        if mask is not None:
            v = v[mask]
        if np.isinf(p):
            return float(v.max()) if v.size else 0.0
        return float((v**p).sum() * self.cell) ** (1 / p)

    def like(self, values) -> "PhaseField":
        return PhaseField(values, self.grid, self.hbar)

    def to_csv(self, path):
        from .io import write_phase_field_csv
        write_phase_field_csv(self, path)

    def to_bin(self, path):
        from .io import write_phase_field_bin
        write_phase_field_bin(self, path)


def _check_same(field: PhaseField, grid: Grid, hbar: float):
    if field.grid != grid or not np.isclose(field.hbar, hbar, rtol=1e-14):
        raise ValueError("phase field and operator live on different grids")


def _pair_indices(M: int, odd: bool):
    j = np.arange(M)[:, None]
    k = _signed_modes(M)[None, :]
    a = j + k + (1 if odd else 0)
    b = j - k
    valid = (a >= 0) & (a < M) & (b >= 0) & (b < M)
    return a, b, valid


def wigner(op: GridOperator) -> PhaseField:
    """Wigner transform ``f(x, xi) = int exp(-i y xi / hbar) A(x + y/2, x - y/2) dy``."""
    grid = op.grid
    _require_1d(grid)
    M = grid.M
    if M % 2:
        raise ValueError("Wigner transform needs an even number of points")
    K = op.kernel
    a, b, valid = _pair_indices(M, odd=False)
    g = np.where(valid, K[a % M, b % M], 0.0)
    edge = np.abs(g[:, [0, -1]]).max() if M > 2 else 0.0
    scale = max(np.abs(K).max(), 1e-300)
    if edge > WRAP_DECAY_TOL * scale:
        log.warning("kernel not decayed at the Wigner wrap boundary (%.1e relative)", edge / scale)
    spec = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(g, axes=1), axis=1), axes=1)
    vals = 2 * grid.dx * spec
    meta = {}
    if op.is_hermitian(1e-10):
        imag = np.abs(vals.imag).max()
        meta["discarded_imag"] = float(imag)
        if imag > 1e-10 * max(1.0, np.abs(vals).max()):
            log.warning("Wigner transform of Hermitian input has imaginary part %.1e", imag)
        vals = vals.real
    return PhaseField(vals, grid, op.hbar, meta)


def _half_shift_x(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectral interpolation of rows to ``x_j + dx/2``."""
    kap = grid.wavenumbers
    phase = np.exp(1j * kap * grid.dx / 2)
    phase[grid.M // 2] = 0.0  # Nyquist mode is ambiguous under a half shift
    out = np.fft.ifft(np.fft.fft(values, axis=0) * phase[:, None], axis=0)
    return out.real if np.isrealobj(values) else out


def weyl_quantize(f: PhaseField, grid: Grid | None = None, hbar: float | None = None) -> GridOperator:
    """Weyl quantization of a phase field, the discrete inverse of :func:`wigner`.

    Kernel entries with an even index difference are obtained exactly from
    ``f`` by an inverse DFT in momentum; odd differences sit at half-grid
    midpoints and use spectral interpolation of ``f`` in position.
    """
    if grid is not None:
        _check_same(f, grid, f.hbar if hbar is None else hbar)
    grid = f.grid
    M = grid.M
    real = np.isrealobj(f.values)
    vals = f.values
    kernel = np.zeros((M, M), dtype=complex)

    g = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(vals, axes=1), axis=1), axes=1) / (2 * grid.dx)
    a, b, valid = _pair_indices(M, odd=False)
    kernel[a[valid], b[valid]] = g[valid]

    half = _half_shift_x(vals, grid)
    m = _signed_modes(M)
    twisted = half * np.exp(1j * np.pi * m / M)[None, :]
    g_odd = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(twisted, axes=1), axis=1), axes=1) / (2 * grid.dx)
    a, b, valid = _pair_indices(M, odd=True)
    kernel[a[valid], b[valid]] = g_odd[valid]

    if real:
        kernel = (kernel + kernel.conj().T) / 2
    return GridOperator(kernel, grid, f.hbar)


def _shift_steps(grid: Grid, hbar: float, z) -> tuple[int, int]:
    x0, xi0 = float(z[0]), float(z[1])
    xi_step = np.pi * hbar / grid.L
    s = x0 / grid.dx
    r = xi0 / xi_step
    si, ri = int(round(s)), int(round(r))
    if abs(s - si) > 1e-9 or abs(r - ri) > 1e-9:
        raise IncompatibleShiftError(
            f"shift ({x0:.6g}, {xi0:.6g}) is not grid-compatible; nearest compatible point is "
            f"({si * grid.dx:.6g}, {ri * xi_step:.6g})"
        )
    return si, ri


def snap(grid: Grid, hbar: float, z) -> PhasePoint:
    """Nearest grid-compatible phase-space point."""
    xi_step = np.pi * hbar / grid.L
    return PhasePoint(round(z[0] / grid.dx) * grid.dx, round(z[1] / xi_step) * xi_step)


def _translate_steps(op: GridOperator, s: int, r: int) -> GridOperator:
    K = op.kernel
    if s:
        K = np.roll(K, (s, s), axis=(0, 1))
    if r:
        x = op.grid.axis_nodes
        ph = np.exp(1j * r * np.pi * (x - x[0]) / op.grid.L)
        K = ph[:, None] * K * ph.conj()[None, :]
    return GridOperator(K, op.grid, op.hbar)


def translate(op: GridOperator, z) -> GridOperator:
    """Phase-space translation ``W_z op W_z*`` by a grid-compatible point."""
    _require_1d(op.grid)
    s, r = _shift_steps(op.grid, op.hbar, z)
    return _translate_steps(op, s, r)


def weyl_heisenberg_unitary(grid: Grid, hbar: float, z, convention: str = "symmetric") -> np.ndarray:
    """Dense unitary on sample vectors implementing ``W_z``.

    ``symmetric``: ``(W phi)(x) = exp(i xi0 (x - x0/2)/hbar) phi(x - x0)``;
    ``shift_first``: ``exp(i xi0 (x - x0)/hbar) phi(x - x0)``.
    """
    s, r = _shift_steps(grid, hbar, z)
    x0, xi0 = s * grid.dx, r * np.pi * hbar / grid.L
    x = grid.axis_nodes
    shift = np.roll(np.eye(grid.M), s, axis=0)
    if convention == "symmetric":
        ph = np.exp(1j * xi0 * (x - x0 / 2) / hbar)
    elif convention == "shift_first":
        ph = np.exp(1j * xi0 * (x - x0) / hbar)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return ph[:, None] * shift


def _compatible_weights(f: PhaseField):
    """Weights on the translation-compatible sub-lattice (even momentum modes)."""
    m = _signed_modes(f.grid.M)
    even = m % 2 == 0
    w = f.values[:, even] * (f.grid.dx * 2 * f.dxi)
    return w, m[even] // 2


def semiclassical_convolve(f, op: GridOperator) -> GridOperator:
    """Quadrature of ``sum_z f(z) T_z op`` over translation-compatible points.

    ``f`` is a :class:`PhaseField` (sampled on even momentum modes with cell
    ``dx * 2 dxi``) or an iterable of ``(x0, xi0, weight)`` triples.
    """
    grid = op.grid
    _require_1d(grid)
    M = grid.M
    if isinstance(f, PhaseField):
        _check_same(f, grid, op.hbar)
        w, r_modes = _compatible_weights(f)
        # node x_j is the shift by (j - M/2) dx, since x_{M/2} = 0
        shifts = np.arange(M) - M // 2
        table = {int(s): (w[j], r_modes) for j, s in enumerate(shifts) if np.any(w[j] != 0)}
    else:
        table = {}
        for x0, xi0, weight in f:
            s, r = _shift_steps(grid, op.hbar, (x0, xi0))
            ws, rs = table.get(s, ([], []))
            table[s] = (list(ws) + [weight], list(rs) + [r])
    out = np.zeros((M, M), dtype=complex)
    diff = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
    for s, (ws, rs) in table.items():
        rs = np.asarray(rs)
        ws = np.asarray(ws, dtype=complex)
        # phase exp(i r pi (x_a - x_b)/L) depends on (a - b) mod M only
        spec = np.zeros(M, dtype=complex)
        np.add.at(spec, rs % M, ws)
        F = np.fft.ifft(spec) * M
        K = np.roll(op.kernel, (s, s), axis=(0, 1)) if s else op.kernel
        out += F[diff] * K
    return GridOperator(out, grid, op.hbar)


def _gaussian_table(f: PhaseField, scale: float = 1.0) -> np.ndarray:
    """``g_h`` (optionally with variance scaled) sampled on periodic offsets, unit mass."""
    M = f.grid.M
    offs = np.fft.fftfreq(M, d=1.0 / M)
    X = offs[:, None] * f.grid.dx
    XI = offs[None, :] * f.dxi
    hbar = f.hbar * scale
    g = (2 / (2 * np.pi * hbar)) * np.exp(-(X**2 + XI**2) / hbar)
    return g / (g.sum() * f.cell)


def gaussian_smooth(f: PhaseField) -> PhaseField:
    """``g_h * f`` with ``g_h(z) = (2/h) exp(-|z|^2/hbar)`` via periodic FFT convolution."""
    g = _gaussian_table(f)
    spec = np.fft.fft2(f.values) * np.fft.fft2(g)
    out = np.fft.ifft2(spec) * f.cell
    if np.isrealobj(f.values):
        out = out.real
    return PhaseField(out, f.grid, f.hbar)


def husimi(op: GridOperator) -> PhaseField:
    """Husimi transform ``g_h * f_op``."""
    out = gaussian_smooth(wigner(op))
    out.meta["min"] = float(np.min(out.values.real))
    return out


def coherent_projector(grid: Grid, hbar: float) -> GridOperator:
    """``|psi_0><psi_0|``, the oscillator ground state centred at the origin."""
    x = grid.axis_nodes
    psi = (np.pi * hbar) ** -0.25 * np.exp(-(x**2) / (2 * hbar))
    return GridOperator(np.outer(psi, psi).astype(complex), grid, hbar)


def wick_quantize(f: PhaseField) -> GridOperator:
    """Anti-Wick (Toeplitz) quantization ``f * Op_{g_h}``, with ``Op_{g_h} = |psi_0><psi_0| / h``."""
    base = coherent_projector(f.grid, f.hbar) * (1 / (2 * np.pi * f.hbar))
    out = semiclassical_convolve(f, base)
    if np.isrealobj(f.values):
        out.kernel = (out.kernel + out.kernel.conj().T) / 2
    return out


def field_gradient(f: PhaseField, kind: str) -> PhaseField:
    """Spectral derivative of a phase field along ``x`` or ``xi``."""
    M = f.grid.M
    if kind == "x":
        kap = 2 * np.pi * np.fft.fftfreq(M, d=f.grid.dx)
        kap[M // 2] = 0.0
        out = np.fft.ifft(1j * kap[:, None] * np.fft.fft(f.values, axis=0), axis=0)
    elif kind in ("xi", "ξ"):
        kap = 2 * np.pi * np.fft.fftfreq(M, d=f.dxi)
        kap[M // 2] = 0.0
        v = np.fft.ifftshift(f.values, axes=1)
        out = np.fft.fftshift(np.fft.ifft(1j * kap[None, :] * np.fft.fft(v, axis=1), axis=1), axes=1)
    else:
        raise ValueError(f"kind must be 'x' or 'xi', got {kind!r}")
    if np.isrealobj(f.values):
        out = out.real
    return PhaseField(out, f.grid, f.hbar)
