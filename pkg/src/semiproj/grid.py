"""Periodic position grids, potentials and discretized Schrodinger operators."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from .fock import FockOperator, hermite_samples

__all__ = [
    "Grid",
    "Potential",
    "GridOperator",
    "schrodinger_hamiltonian",
    "spectral_projection",
    "classical_phase_volume",
    "fock_to_grid",
    "derivative_matrix",
    "position_diagonal",
    "load_potential_csv",
    "quantum_gradient",
    "DEGENERACY_TOL",
]

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-10
BOUNDARY_DECAY_TOL = 1e-8
MAX_DENSE = 4096


@dataclass(frozen=True)
class Grid:
    half_width: float
    points_per_axis: int
    dim: int = 1

    def __post_init__(self):
        M = self.points_per_axis
        if M < 16 or M & (M - 1):
            raise ValueError(f"points_per_axis must be a power of two >= 16, got {M}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @property
    def M(self) -> int:
        return self.points_per_axis

    @property
    def L(self) -> float:
        return self.half_width

    @property
    def dx(self) -> float:
        return 2 * self.half_width / self.points_per_axis

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def axis_nodes(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.points_per_axis)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Periodic wavenumbers in FFT order, ``kappa_m = pi m / L``."""
        return 2 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.dx)

    def points(self) -> np.ndarray:
        """All nodes, shape ``(M**d, d)``, first axis slowest."""
        axes = np.meshgrid(*([self.axis_nodes] * self.dim), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    @property
    def cell(self) -> float:
        return self.dx**self.dim


def _bump_profile(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(1 - 1 / (1 - r[inside] ** 2))
    return out


@dataclass(frozen=True)
class Potential:
    """Confining potential ``U`` (the Hamiltonian uses ``V = -U``).

    ``harmonic_well``: ``u0 - |x|^2``.
    ``bump``: ``(u0 + eps) * phi(|x|/R) - eps`` with the smooth bump
    ``phi(r) = exp(1 - 1/(1 - r^2))``; equals ``-eps`` for ``|x| >= R``.
    ``rough_hoelder``: bump plus ``amplitude * phi(|x|/R) * W_alpha``, where
    ``W_alpha(x) = sum_k 2^(-alpha k) cos(2^k x)`` summed over axes.
    ``sampled``: linear interpolation of node values (1-d only).
    """

    kind: str
    u0: float = 1.0
    radius: float = 2.0
    eps: float = 1.0
    alpha: float = 0.5
    amplitude: float = 0.1
    kmax: int | str = "auto"
    nodes: tuple = field(default=(), repr=False)
    values: tuple = field(default=(), repr=False)

    KINDS = ("harmonic_well", "bump", "rough_hoelder", "sampled")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown potential type {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "sampled" and len(self.nodes) < 2:
            raise ValueError("sampled potential needs at least two nodes")

    @classmethod
    def from_config(cls, cfg: dict) -> "Potential":
        cfg = dict(cfg)
        if "type" not in cfg:
            raise KeyError("potential.type")
        kind = cfg.pop("type")
        if kind == "sampled":
            path = cfg.pop("path", None)
            if path is None:
                raise KeyError("potential.path")
            return load_potential_csv(path)
        return cls(kind=kind, **cfg)

    def resolve(self, grid: Grid) -> "Potential":
        """Fix ``kmax = ceil(log2(1/dx))`` when it was left on auto."""
        if self.kind == "rough_hoelder" and self.kmax == "auto":
            return replace(self, kmax=max(0, math.ceil(math.log2(1 / grid.dx))))
        return self

    def weierstrass(self, x) -> np.ndarray:
        kmax = self.kmax if self.kmax != "auto" else 10
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k in range(int(kmax) + 1):
            out += 2.0 ** (-self.alpha * k) * np.cos(2.0**k * x)
        return out

    def __call__(self, x) -> np.ndarray:
        """Evaluate at one-dimensional positions of any array shape."""
        x = np.asarray(x, dtype=float)
        return self.at_points(x[..., None])

    def at_points(self, pts) -> np.ndarray:
        """Evaluate at points of shape ``(..., d)``."""
        pts = np.asarray(pts, dtype=float)
        r = np.sqrt((pts**2).sum(axis=-1))
        if self.kind == "harmonic_well":
            return self.u0 - r**2
        if self.kind == "sampled":
            if pts.shape[-1] != 1:
                raise ValueError("sampled potentials are one-dimensional")
            return np.interp(pts[..., 0], self.nodes, self.values)
        phi = _bump_profile(r / self.radius)
        base = (self.u0 + self.eps) * phi - self.eps
        if self.kind == "bump":
            return base
        return base + self.amplitude * phi * self.weierstrass(pts).sum(axis=-1)

    @property
    def support_radius(self) -> float:
        """Radius outside which ``U <= 0``."""
        if self.kind == "harmonic_well":
            return math.sqrt(max(self.u0, 0.0))
        if self.kind == "sampled":
            return float(max(abs(self.nodes[0]), abs(self.nodes[-1])))
        return self.radius

    @property
    def radial(self) -> bool:
        return self.kind in ("harmonic_well", "bump")

    def to_config(self) -> dict:
        if self.kind == "harmonic_well":
            return {"type": self.kind, "u0": self.u0}
        if self.kind == "bump":
            return {"type": self.kind, "u0": self.u0, "radius": self.radius, "eps": self.eps}
        if self.kind == "rough_hoelder":
            return {"type": self.kind, "u0": self.u0, "radius": self.radius, "eps": self.eps,
                    "alpha": self.alpha, "amplitude": self.amplitude, "kmax": self.kmax}
        return {"type": self.kind, "n_nodes": len(self.nodes)}


def load_potential_csv(path) -> Potential:
    """Read a sampled potential from CSV with columns ``x`` and ``U``."""
    xs, us = [], []
    with open(Path(path), newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        if rows.fieldnames is None or not {"x", "U"} <= set(rows.fieldnames):
            raise KeyError(f"{path}: CSV needs columns 'x' and 'U'")
        for row in rows:
            xs.append(float(row["x"]))
            us.append(float(row["U"]))
    order = np.argsort(xs)
    return Potential("sampled", nodes=tuple(np.asarray(xs)[order]),
                     values=tuple(np.asarray(us)[order]))


@dataclass(eq=False)
class GridOperator:
    """Integral operator with kernel samples ``A(x_j, x_k)``.

    Action: ``(A phi)(x_j) = sum_k A(x_j, x_k) phi(x_k) dx^d``.
    """

    kernel: np.ndarray
    grid: Grid
    hbar: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kernel = np.asarray(self.kernel)
        n = self.grid.size
        if self.kernel.shape != (n, n):
            raise ValueError(f"kernel shape {self.kernel.shape} != ({n}, {n})")

    @classmethod
    def from_weighted(cls, matrix, grid, hbar, meta=None) -> "GridOperator":
        return cls(np.asarray(matrix) / grid.cell, grid, hbar, dict(meta or {}))

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def h(self) -> float:
        return 2 * np.pi * self.hbar

    def weighted(self) -> np.ndarray:
        """Matrix acting on sample vectors; its singular values are the operator's."""
        return self.kernel * self.grid.cell

    def trace(self) -> complex:
        return np.trace(self.kernel) * self.grid.cell

    def adjoint(self) -> "GridOperator":
        return GridOperator(self.kernel.conj().T, self.grid, self.hbar)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        k = self.kernel
        scale = max(np.abs(k).max(), 1.0)
        return bool(np.abs(k - k.conj().T).max() <= tol * scale)

    def compose(self, other: "GridOperator") -> "GridOperator":
        return GridOperator.from_weighted(self.weighted() @ other.weighted(), self.grid, self.hbar)

    def __add__(self, other):
        return GridOperator(self.kernel + other.kernel, self.grid, self.hbar)

    def __sub__(self, other):
        return GridOperator(self.kernel - other.kernel, self.grid, self.hbar)

    def __mul__(self, c):
        return GridOperator(self.kernel * c, self.grid, self.hbar)

    __rmul__ = __mul__


def _axis_operator(single: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    eye = np.eye(grid.M)
    out = None
    for k in range(1, grid.dim + 1):
        f = single if k == axis else eye
        out = f if out is None else np.kron(out, f)
    return out


def derivative_matrix(grid: Grid, axis: int = 1) -> np.ndarray:
    """Spectral d/dx on one axis, acting on sample vectors."""
    eye = np.eye(grid.M)
    kap = grid.wavenumbers
    d1 = np.fft.ifft(1j * kap[:, None] * np.fft.fft(eye, axis=0), axis=0)
    # real part drops the unpaired Nyquist mode, leaving an antisymmetric matrix
    d1 = d1.real
    return _axis_operator(d1, grid, axis)


def position_diagonal(grid: Grid, axis: int = 1) -> np.ndarray:
    return grid.points()[:, axis - 1]


def _kinetic_matrix(grid: Grid, hbar: float) -> np.ndarray:
    eye = np.eye(grid.M)
    kap = grid.wavenumbers
    t1 = np.fft.ifft((hbar * kap[:, None]) ** 2 * np.fft.fft(eye, axis=0), axis=0).real
    t1 = (t1 + t1.T) / 2
    total = np.zeros((grid.size, grid.size))
    for axis in range(1, grid.dim + 1):
        total += _axis_operator(t1, grid, axis)
    return total


def schrodinger_hamiltonian(grid: Grid, potential, hbar: float) -> GridOperator:
    """Discretized ``-hbar^2 Laplacian - U(x)`` with a spectral periodic Laplacian."""
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    if grid.size > MAX_DENSE:
        raise ValueError(f"dense eigensolve limited to M^d <= {MAX_DENSE}, got {grid.size}")
    if isinstance(potential, Potential):
        potential = potential.resolve(grid)
        u = potential.at_points(grid.points())
    else:
        u = np.asarray(potential, dtype=float).ravel()
        if u.size != grid.size:
            raise ValueError("potential samples do not match grid size")
    if not np.all(np.isfinite(u)):
        raise ValueError("potential samples must be finite")
    h_mat = _kinetic_matrix(grid, hbar) - np.diag(u)
    meta = {"potential": potential.to_config() if isinstance(potential, Potential) else "samples"}
    return GridOperator.from_weighted(h_mat, grid, hbar, meta)


def spectral_projection(H: GridOperator, threshold: float = 0.0) -> GridOperator:
    """Projection onto eigenvalues ``<= threshold`` (closed interval).

    Metadata records the eigenvalues, the rank ``N_hbar``, eigenvalues
    within ``DEGENERACY_TOL`` of the threshold (included and flagged), and
    the boundary decay of the retained eigenfunctions.
    """
    w = H.weighted()
    if not np.allclose(w, w.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(w).max())):
        raise ValueError("spectral_projection needs a Hermitian operator")
    try:
        evals, evecs = np.linalg.eigh((w + w.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    keep = evals <= threshold + DEGENERACY_TOL
    near = evals[np.abs(evals - threshold) <= DEGENERACY_TOL]
    v = evecs[:, keep]
    warnings = []
    if near.size:
        warnings.append(f"{near.size} eigenvalue(s) within {DEGENERACY_TOL:g} of threshold")
    boundary = 0.0
    if v.size:
        grid = H.grid
        on_edge = np.any(np.isclose(np.abs(grid.points()), grid.L), axis=1)
        boundary = float(np.abs(v[on_edge]).max() / math.sqrt(grid.cell)) if on_edge.any() else 0.0
        if boundary > BOUNDARY_DECAY_TOL:
            warnings.append(f"retained eigenfunctions reach {boundary:.1e} at the box edge")
    for msg in warnings:
        log.warning(msg)
    meta = {
        "eigenvalues": evals,
        "rank": int(keep.sum()),
        "threshold": threshold,
        "near_threshold": near,
        "degenerate": bool(near.size),
        "boundary_value": boundary,
        "warnings": warnings,
    }
    return GridOperator.from_weighted(v @ v.conj().T, H.grid, H.hbar, meta)


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _positive_intervals(f, a, b, n=4001):
    xs = np.linspace(a, b, n)
    vals = f(xs)
    roots = [a]
    for i in range(n - 1):
        if vals[i] == 0.0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(optimize.brentq(lambda t: float(f(t)[0]), xs[i], xs[i + 1], xtol=1e-14))
    roots.append(b)
    roots = sorted(set(roots))
    return [(lo, hi) for lo, hi in zip(roots[:-1], roots[1:]) if f(0.5 * (lo + hi))[0] > 0]


def classical_phase_volume(potential: Potential, d: int = 1, full_output: bool = False,
                           rtol: float = 1e-8):
    """Phase-space volume of ``{|xi|^2 <= U(x)}``: ``omega_d int U_+^(d/2) dx``."""
    omega = _unit_ball_volume(d)
    S = potential.support_radius
    if S <= 0:
        return (0.0, 0.0) if full_output else 0.0
    S = S * 1.000001 + 1e-12
    opts = dict(epsrel=rtol, epsabs=0.0, limit=500)
    if d == 1 or potential.radial:
        if d == 1:
            def g(x):
                return np.maximum(potential(np.atleast_1d(x)), 0.0) ** 0.5
            lo = -S if not potential.radial else 0.0
        else:
            def g(r):
                rr = np.atleast_1d(r)
                pts = np.zeros(rr.shape + (d,))
                pts[..., 0] = rr
                return np.maximum(potential.at_points(pts), 0.0) ** (d / 2) * rr ** (d - 1)
            lo = 0.0
        total, err = 0.0, 0.0
        for a, b in _positive_intervals(lambda t: _signed(potential, t, d), lo, S):
            val, e = integrate.quad(lambda t: float(g(t)[0]), a, b, **opts)
            total += val
            err += e
        if d == 1 and potential.radial:
            total, err = 2 * total, 2 * err
        if d > 1:
            sphere = d * _unit_ball_volume(d)
            total, err = total * sphere, err * sphere
        value, err = omega * total, omega * err
    else:
        def integrand(*xs):
            return max(float(potential.at_points(np.array(xs)[None, :])[0]), 0.0) ** (d / 2)
        val, e = integrate.nquad(integrand, [(-S, S)] * d, opts={"epsrel": rtol, "limit": 200})
        value, err = omega * val, omega * e
    if err > rtol * max(abs(value), 1e-300) * 10:
        log.warning("phase-volume quadrature error %.2e exceeds target", err)
    return (value, err) if full_output else value


def _signed(potential, t, d):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if d == 1:
        return potential(t)
    pts = np.zeros(t.shape + (d,))
    pts[..., 0] = t
    return potential.at_points(pts)


def fock_to_grid(op: FockOperator, grid: Grid) -> GridOperator:
    """Kernel ``sum psi_alpha(x) M_ab psi_beta(y)`` of a Fock-basis operator."""
    if grid.dim != op.dim:
        raise ValueError("grid and Fock space dimensions differ")
    s1 = hermite_samples(op.space, grid)
    s = s1
    for _ in range(op.dim - 1):
        s = np.kron(s, s1)
    kernel = s.T @ op.matrix @ s
    return GridOperator(kernel, grid, op.hbar, {"source": "fock", "normalized": op.normalized})


def quantum_gradient(op: GridOperator, kind: str, axis: int = 1) -> GridOperator:
    """Commutator gradient on the grid: ``[d/dx, op]`` or ``[x/(i hbar), op]``."""
    w = op.weighted()
    if kind == "x":
        D = derivative_matrix(op.grid, axis)
        out = D @ w - w @ D
    elif kind in ("xi", "ξ"):
        x = position_diagonal(op.grid, axis)
        out = (x[:, None] - x[None, :]) * w / (1j * op.hbar)
    else:
        raise ValueError(f"kind must be 'x' or 'xi', got {kind!r}")
    return GridOperator.from_weighted(out, op.grid, op.hbar)
