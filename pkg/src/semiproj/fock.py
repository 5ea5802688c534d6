"""Exact algebra in the Hermite (Fock) basis of the harmonic oscillator.

The one-particle Hamiltonian is ``|p|^2 + |x|^2`` with ``[x, p] = i hbar``.
Ladder operators are ``a = x + i p`` and ``a* = x - i p`` so that
``[a, a*] = 2 hbar``.  Basis vectors are the tensor products
``psi_alpha`` over a multi-index ``alpha`` with each entry below the cutoff.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from math import comb, factorial, pi, sqrt

import numpy as np

__all__ = [
    "FockSpace",
    "FockOperator",
    "CutoffError",
    "DomainTooNarrowError",
    "ladder_matrices",
    "position_matrix",
    "momentum_matrix",
    "harmonic_projection",
    "harmonic_hbar",
    "gradient_xi_schatten_exact",
    "gradient_ground_state_power",
    "quantum_gradient",
    "hermite_samples",
    "DEFAULT_MARGIN",
]

DEFAULT_MARGIN = 4


class CutoffError(ValueError):
    """Raised when a Fock cutoff is too small for the requested operation."""


class DomainTooNarrowError(ValueError):
    """Raised when sampled Hermite functions are not orthonormal on a grid."""


@dataclass(frozen=True)
class FockSpace:
    cutoff: int
    dim: int
    hbar: float

    def __post_init__(self):
        if self.cutoff < 1:
            raise CutoffError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def h(self) -> float:
        return 2 * pi * self.hbar

    @property
    def size(self) -> int:
        return self.cutoff**self.dim

    @cached_property
    def multi_indices(self) -> np.ndarray:
        """Lexicographic enumeration of multi-indices, shape ``(K**d, d)``."""
        grid = itertools.product(range(self.cutoff), repeat=self.dim)
        return np.array(list(grid), dtype=int).reshape(self.size, self.dim)

    def index_of(self, alpha) -> int:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or any(a < 0 or a >= self.cutoff for a in alpha):
            raise IndexError(f"multi-index {alpha} outside the enumeration")
        out = 0
        for a in alpha:
            out = out * self.cutoff + a
        return out

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """True for basis vectors touching the outermost (truncated) layer."""
        return np.any(self.multi_indices == self.cutoff - 1, axis=1)


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    space: FockSpace
    hermitian: bool = False
    normalized: bool = True
    truncation_affected: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.space.size, self.space.size):
            raise ValueError(
                f"matrix shape {m.shape} does not match enumeration size {self.space.size}"
            )
        if self.hermitian and not np.allclose(m, m.conj().T, rtol=0, atol=1e-12):
            raise ValueError("hermitian flag set but matrix is not self-adjoint")

    @property
    def hbar(self) -> float:
        return self.space.hbar

    @property
    def dim(self) -> int:
        return self.space.dim

    def weighted(self) -> np.ndarray:
        # the Fock basis is orthonormal: matrix entries are the operator
        return self.matrix

    def restricted(self) -> np.ndarray:
        """Matrix with truncation-affected rows and columns removed."""
        if self.truncation_affected is None:
            return self.matrix
        keep = ~self.truncation_affected
        return self.matrix[np.ix_(keep, keep)]

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix @ other.matrix, self.space)


def _check_axis(space: FockSpace, axis: int):
    if not 1 <= axis <= space.dim:
        raise ValueError(f"axis must be in 1..{space.dim}, got {axis}")


def _embed(single: np.ndarray, space: FockSpace, axis: int) -> np.ndarray:
    eye = np.eye(space.cutoff)
    factors = [single if k == axis else eye for k in range(1, space.dim + 1)]
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def ladder_matrices(space: FockSpace, axis: int = 1):
    """Annihilation and creation operators ``(a, a*)`` acting on one axis.

    ``a psi_n = sqrt(2 hbar n) psi_{n-1}``; the top level is truncated.
    """
    _check_axis(space, axis)
    if space.cutoff < 2:
        raise CutoffError("ladder operators need cutoff >= 2")
    k = np.arange(1, space.cutoff)
    lower = np.diag(np.sqrt(2 * space.hbar * k), 1).astype(complex)
    a = _embed(lower, space, axis)
    return FockOperator(a, space), FockOperator(a.conj().T, space)


def position_matrix(space: FockSpace, axis: int = 1) -> FockOperator:
    a, ad = ladder_matrices(space, axis)
    return FockOperator((a.matrix + ad.matrix) / 2, space, hermitian=True)


def momentum_matrix(space: FockSpace, axis: int = 1) -> FockOperator:
    a, ad = ladder_matrices(space, axis)
    return FockOperator((a.matrix - ad.matrix) / 2j, space, hermitian=True)


def harmonic_hbar(n: int, d: int) -> float:
    """hbar fixed by ``N h^d = 1`` with ``N = binom(d + n, d)``."""
    N = comb(d + n, d)
    return N ** (-1.0 / d) / (2 * pi)


def harmonic_projection(n: int, d: int = 1, cutoff: int | None = None,
                        hbar: float | None = None) -> FockOperator:
    """Projection onto the oscillator levels with ``|alpha|_1 <= n``.

    By default ``hbar`` follows the normalization ``N h^d = 1``.  Passing
    ``hbar`` explicitly is for exploratory runs and marks the result as
    non-normalized.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if cutoff is None:
        cutoff = n + 2 + DEFAULT_MARGIN
    if cutoff < n + 2:
        raise CutoffError(f"cutoff {cutoff} < n + 2 = {n + 2} truncates a ladder step")
    normalized = hbar is None
    if hbar is None:
        hbar = harmonic_hbar(n, d)
    space = FockSpace(cutoff, d, hbar)
    occupied = space.multi_indices.sum(axis=1) <= n
    return FockOperator(np.diag(occupied.astype(complex)), space,
                        hermitian=True, normalized=normalized)


def gradient_xi_schatten_exact(n: int, d: int, p: float) -> float:
    """Closed form of the scaled Schatten p-norm of the xi_1-gradient of the
    normalized harmonic projection of level ``n`` in dimension ``d``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    hbar = harmonic_hbar(n, d)
    h = 2 * pi * hbar
    if np.isinf(p):
        return sqrt((n + 1) / (2 * hbar))
    if d == 1:
        total = float(n + 1) ** (p / 2)
    else:
        total = sum(comb(d + n - k - 1, d - 2) * float(k) ** (p / 2)
                    for k in range(1, n + 2))
    return (2 * h**d * total / (2 * hbar) ** (p / 2)) ** (1 / p)


def gradient_ground_state_power(n: int, d: int, p: float,
                                cutoff: int | None = None) -> np.ndarray:
    """Diagonal of ``|grad_xi_1 P|^p`` predicted by the ladder computation."""
    P = harmonic_projection(n, d, cutoff)
    space = P.space
    hbar = space.hbar
    diag = np.zeros(space.size)
    e1 = np.zeros(d, dtype=int)
    e1[0] = 1
    for alpha in space.multi_indices:
        if alpha.sum() != n:
            continue
        w = (alpha[0] + 1) ** (p / 2) / (2 * hbar) ** (p / 2)
        diag[space.index_of(alpha)] += w
        diag[space.index_of(alpha + e1)] += w
    return diag


def quantum_gradient(op: FockOperator, kind: str, axis: int = 1) -> FockOperator:
    """Commutator gradient: ``x`` gives ``(i/hbar)[p, op]``, ``xi`` gives
    ``[x/(i hbar), op]``."""
    space = op.space
    hbar = space.hbar
    if kind == "x":
        gen = momentum_matrix(space, axis).matrix * (1j / hbar)
    elif kind in ("xi", "ξ"):
        gen = position_matrix(space, axis).matrix / (1j * hbar)
    else:
        raise ValueError(f"kind must be 'x' or 'xi', got {kind!r}")
    m = op.matrix
    return FockOperator(gen @ m - m @ gen, space, normalized=op.normalized,
                        truncation_affected=space.boundary_mask)


def hermite_samples(space: FockSpace, grid, check: bool = True) -> np.ndarray:
    """Rows ``psi_k(x_j)`` of the hbar-scaled Hermite functions on a 1-d grid.

    Uses the three-term recurrence
    ``psi_{k+1} = sqrt(2/(k+1)) (x/sqrt(hbar)) psi_k - sqrt(k/(k+1)) psi_{k-1}``.
    """
    hbar = space.hbar
    K = space.cutoff
    x = grid.axis_nodes
    need = sqrt(2 * hbar * (K + 1)) + 5 * sqrt(hbar)
    u = x / sqrt(hbar)
    out = np.empty((K, x.size))
    out[0] = (pi * hbar) ** -0.25 * np.exp(-u**2 / 2)
    if K > 1:
        out[1] = sqrt(2.0) * u * out[0]
    for k in range(1, K - 1):
        out[k + 1] = sqrt(2 / (k + 1)) * u * out[k] - sqrt(k / (k + 1)) * out[k - 1]
    if check:
        gram = out @ out.T * grid.dx
        err = np.abs(gram - np.eye(K)).max()
        if err > 1e-8:
            raise DomainTooNarrowError(
                f"Hermite functions not orthonormal on grid (max Gram error {err:.2e}); "
                f"half-width {grid.half_width:.4g} vs recommended >= {need:.4g}, "
                f"or spacing {grid.dx:.3g} too coarse"
            )
    return out


def factorial_bound_constants(d: int) -> dict:
    """Stated upper bounds on the normalized gradient norms, keyed by p."""
    fd = factorial(d)
    return {
        1: 2 * d * sqrt(pi) / sqrt(fd),
        "inf_times_h": sqrt(fd ** (1 / d) * pi),
    }
