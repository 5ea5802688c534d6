"""Scaled Schatten norms and quantum Sobolev/Besov seminorms.

Seminorms built from phase-space translations are evaluated on a truncated
set of sample shifts (:class:`QuadratureSpec`); every report carries the
truncation radii so that values from different runs are only compared on a
shared sample set.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fock as _fock
from . import grid as _grid
from .phasespace import _shift_steps, _translate_steps, snap

__all__ = [
    "NormReport",
    "QuadratureSpec",
    "DifferenceSamples",
    "singular_values",
    "scaled_schatten",
    "schatten",
    "sobolev1",
    "gradient_modulus_eigenvalues",
    "frac_sobolev",
    "besov",
    "field_besov",
    "commutator_exponential",
]


@dataclass
class NormReport:
    value: float
    kind: str
    hbar: float
    params: dict = field(default_factory=dict)
    sample_count: int = 0
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"{self.kind} norm is not finite")

    def __float__(self):
        return float(self.value)

    def to_json(self) -> str:
        return json.dumps(asdict(self), default=_jsonable, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")


def _is_hermitian(m: np.ndarray) -> bool:
    return np.allclose(m, m.conj().T, rtol=0, atol=1e-13 * max(1.0, np.abs(m).max()))


def singular_values(matrix: np.ndarray, hermitian: bool | None = None) -> np.ndarray:
    """Singular values; uses the Hermitian eigensolver when possible."""
    if hermitian is None:
        hermitian = _is_hermitian(matrix)
    if hermitian:
        return np.sort(np.abs(np.linalg.eigvalsh(matrix)))[::-1]
    return np.linalg.svd(matrix, compute_uv=False)


def scaled_schatten(sv: np.ndarray, p: float, hbar: float, d: int) -> float:
    """``h^(d/p) (sum sigma^p)^(1/p)``; operator norm for ``p = inf``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    sv = np.abs(np.asarray(sv, dtype=float))
    if sv.size == 0:
        return 0.0
    if np.isinf(p):
        return float(sv.max())
    h = 2 * math.pi * hbar
    top = sv.max()
    if top == 0:
        return 0.0
    # factor out the largest value to avoid overflow at large p
    return float(h ** (d / p) * top * ((sv / top) ** p).sum() ** (1 / p))


def _matrix_of(op) -> np.ndarray:
    if isinstance(op, _fock.FockOperator) and op.truncation_affected is not None:
        return op.restricted()
    return op.weighted()


def schatten(op, p: float) -> NormReport:
    """Scaled Schatten norm of a Fock or grid operator."""
    m = _matrix_of(op)
    sv = singular_values(m)
    flags = []
    if isinstance(op, _fock.FockOperator) and op.truncation_affected is not None:
        flags.append("fock boundary layer excluded")
    return NormReport(scaled_schatten(sv, p, op.hbar, op.dim), "schatten", op.hbar,
                      {"p": p}, flags=flags)


def _gradients(op):
    kinds = ("x", "xi")
    if isinstance(op, _fock.FockOperator):
        return [_fock.quantum_gradient(op, k, a) for k in kinds for a in range(1, op.dim + 1)]
    return [_grid.quantum_gradient(op, k, a) for k in kinds for a in range(1, op.dim + 1)]


def gradient_modulus_eigenvalues(op) -> np.ndarray:
    """Eigenvalues of ``|grad op| = (sum_i G_i* G_i)^(1/2)``.

    Computed as singular values of the stacked gradients, which avoids the
    square-root loss of precision near zero eigenvalues.
    """
    mats = [g.weighted() for g in _gradients(op)]
    if isinstance(op, _fock.FockOperator):
        keep = ~op.space.boundary_mask
        mats = [m[:, keep] for m in mats]
    return np.linalg.svd(np.vstack(mats), compute_uv=False)


def sobolev1(op, p: float) -> NormReport:
    """Quantum ``W^{1,p}`` seminorm: scaled Schatten norm of ``|grad op|``."""
    ev = gradient_modulus_eigenvalues(op)
    flags = ["fock boundary layer excluded"] if isinstance(op, _fock.FockOperator) else []
    return NormReport(scaled_schatten(ev, p, op.hbar, op.dim), "sobolev1", op.hbar,
                      {"p": p}, flags=flags)


@dataclass(frozen=True)
class QuadratureSpec:
    """Geometric shells of phase-space shifts with a fixed number of directions.

    ``r_min``/``r_max`` of ``None`` resolve per grid to ``2 dx`` and ``L/4``.
    """

    r_min: float | None = None
    r_max: float | None = None
    ratio: float = 2 ** 0.25
    directions: int = 8

    @classmethod
    def shared(cls, grids, **kw) -> "QuadratureSpec":
        """Common radii for a sweep: smallest ``2 dx`` and smallest ``L/4``."""
        grids = list(grids)
        return cls(min(2 * g.dx for g in grids), min(g.L / 4 for g in grids), **kw)

    def radii(self, grid: _grid.Grid) -> np.ndarray:
        r_min = 2 * grid.dx if self.r_min is None else self.r_min
        r_max = grid.L / 4 if self.r_max is None else self.r_max
        if not r_min < r_max:
            raise ValueError(f"quadrature needs r_min < r_max, got {r_min} >= {r_max}")
        n = int(math.floor(math.log(r_max / r_min) / math.log(self.ratio) + 1e-9)) + 1
        return r_min * self.ratio ** np.arange(n)

    def samples(self, grid: _grid.Grid, hbar: float):
        """Snapped sample shifts ``(x0, xi0, |z|, weight)`` and drop flags.

        The weight is the nominal measure ``r^(2d) ln(ratio) dtheta`` of the
        shell element so that ``sum weight * F(z) / |z|^(2d)`` approximates
        ``int F(z) dz / |z|^(2d)``.
        """
        if grid.dim != 1:
            raise NotImplementedError("translation quadrature is implemented for d = 1")
        xi_half_range = math.pi * hbar / grid.dx
        dtheta = 2 * math.pi / self.directions
        merged: dict = {}
        dropped = 0
        for r in self.radii(grid):
            for k in range(self.directions):
                th = k * dtheta
                z = snap(grid, hbar, (r * math.cos(th), r * math.sin(th)))
                if z.x == 0 and z.xi == 0:
                    dropped += 1
                    continue
                if abs(2 * z.x) > grid.L or abs(2 * z.xi) > xi_half_range:
                    dropped += 1
                    continue
                key = _shift_steps(grid, hbar, z)
                w = r ** 2 * math.log(self.ratio) * dtheta
                merged[key] = (z, merged.get(key, (z, 0.0))[1] + w)
        out = [(z.x, z.xi, math.hypot(z.x, z.xi), w) for z, w in merged.values()]
        flags = []
        if dropped:
            flags.append(f"{dropped} nominal samples dropped (zero after snapping or 2z outside box)")
        return out, flags

    def describe(self, grid, hbar) -> dict:
        r = self.radii(grid)
        return {"r_min": float(r[0]), "r_max": float(r[-1]), "shells": int(r.size),
                "directions": self.directions, "truncated": True}


class DifferenceSamples:
    """Singular values of first and second translation differences of one operator.

    Shifts ``z`` and ``-z`` give identical spectra (unitary invariance), so
    each pair is computed once.
    """

    def __init__(self, op: _grid.GridOperator, quad: QuadratureSpec | None = None):
        self.op = op
        self.quad = quad or QuadratureSpec()
        self.points, self.flags = self.quad.samples(op.grid, op.hbar)
        if not self.points:
            raise ValueError("quadrature sample set is empty")
        self.radius = np.array([p[2] for p in self.points])
        self.weight = np.array([p[3] for p in self.points])
        self._sv1 = None
        self._sv2 = None
        self.hermitian = op.is_hermitian(1e-12)

    def _spectra(self, order: int):
        cache = {}
        out = []
        for x0, xi0, _, _ in self.points:
            s, r = _shift_steps(self.op.grid, self.op.hbar, (x0, xi0))
            key = (s, r) if (s, r) >= (-s, -r) else (-s, -r)
            if key not in cache:
                t1 = _translate_steps(self.op, *key).kernel
                if order == 1:
                    diff = t1 - self.op.kernel
                else:
                    t2 = _translate_steps(self.op, 2 * key[0], 2 * key[1]).kernel
                    diff = t2 - 2 * t1 + self.op.kernel
                cache[key] = singular_values(diff * self.op.grid.cell, self.hermitian)
            out.append(cache[key])
        return out

    @property
    def first(self):
        if self._sv1 is None:
            self._sv1 = self._spectra(1)
        return self._sv1

    @property
    def second(self):
        if self._sv2 is None:
            self._sv2 = self._spectra(2)
        return self._sv2

    def norms(self, p: float, order: int = 2) -> np.ndarray:
        svs = self.second if order == 2 else self.first
        return np.array([scaled_schatten(sv, p, self.op.hbar, self.op.dim) for sv in svs])

    @property
    def count(self) -> int:
        return len(self.points)


def _samples(op, quad, samples):
    if samples is not None:
        return samples
    if isinstance(op, _fock.FockOperator):
        raise TypeError("translation-based seminorms need a grid operator (see fock_to_grid)")
    return DifferenceSamples(op, quad)


def besov(op, s: float, p: float, q: float, quad: QuadratureSpec | None = None,
          samples: DifferenceSamples | None = None) -> NormReport:
    """Truncated homogeneous Besov seminorm from second differences."""
    if not 0 < s < 2:
        raise ValueError("besov needs s in (0, 2)")
    ds = _samples(op, quad, samples)
    d = ds.op.dim
    num = ds.norms(p, 2)
    ratio = num / ds.radius**s
    if np.isinf(q):
        value = float(ratio.max())
    else:
        value = float((ds.weight * ratio**q / ds.radius ** (2 * d)).sum() ** (1 / q))
    params = {"s": s, "p": p, "q": q, **ds.quad.describe(ds.op.grid, ds.op.hbar)}
    return NormReport(value, "besov", ds.op.hbar, params, ds.count, list(ds.flags))


def frac_sobolev(op, s: float, p: float, quad: QuadratureSpec | None = None,
                 samples: DifferenceSamples | None = None, gamma: float = 1.0) -> NormReport:
    """Truncated fractional Sobolev seminorm from first differences."""
    if not 0 < s < 1:
        raise ValueError("frac_sobolev needs s in (0, 1)")
    if np.isinf(p):
        raise ValueError("frac_sobolev needs finite p")
    ds = _samples(op, quad, samples)
    d = ds.op.dim
    num = ds.norms(p, 1)
    total = gamma * (ds.weight * num**p / ds.radius ** (2 * d + s * p)).sum()
    params = {"s": s, "p": p, "gamma": gamma, **ds.quad.describe(ds.op.grid, ds.op.hbar)}
    return NormReport(float(total ** (1 / p)), "frac_sobolev", ds.op.hbar, params, ds.count,
                      list(ds.flags))


def exponential_unitary(grid: _grid.Grid, hbar: float, direction: str, w: float) -> np.ndarray:
    """``exp(2 i pi x w)`` (direction ``x``) or ``exp(2 i pi w p)`` (direction ``p``)."""
    if direction == "x":
        if abs(2 * grid.L * w - round(2 * grid.L * w)) > 1e-9:
            raise ValueError(f"frequency {w} is not grid-compatible (2 L w must be an integer)")
        return np.diag(np.exp(2j * math.pi * w * grid.axis_nodes))
    if direction == "p":
        shift = 2 * math.pi * hbar * w / grid.dx
        if abs(shift - round(shift)) > 1e-9:
            raise ValueError(f"frequency {w} is not grid-compatible (h w must be a multiple of dx)")
        phase = np.exp(1j * grid.wavenumbers * 2 * math.pi * hbar * w)
        eye = np.eye(grid.M)
        return np.fft.ifft(phase[:, None] * np.fft.fft(eye, axis=0), axis=0)
    raise ValueError(f"direction must be 'x' or 'p', got {direction!r}")


def commutator_exponential(op: _grid.GridOperator, direction: str, w: float, p: float,
                           s: float | None = None) -> NormReport:
    """Scaled Schatten norm of ``[exp(2 i pi x w), op]`` or ``[exp(2 i pi w p), op]``."""
    if op.grid.dim != 1:
        raise NotImplementedError("commutator_exponential is implemented for d = 1")
    U = exponential_unitary(op.grid, op.hbar, direction, w)
    m = op.weighted()
    value = scaled_schatten(singular_values(U @ m - m @ U, hermitian=False), p, op.hbar, 1)
    params = {"direction": direction, "w": w, "p": p}
    if s is not None:
        params["s"] = s
        params["ratio"] = value / (op.hbar * abs(w)) ** s if w else 0.0
    return NormReport(value, "commutator_exp", op.hbar, params)


def field_besov(f, s: float, p: float, q: float, quad: QuadratureSpec | None = None) -> NormReport:
    """Truncated Besov seminorm of a phase field on the same shift samples as :func:`besov`.

    Shifts act by periodic rolls, so every sample is exact on the phase grid.
    """
    if not 0 < s < 2:
        raise ValueError("besov needs s in (0, 2)")
    quad = quad or QuadratureSpec()
    pts, flags = quad.samples(f.grid, f.hbar)
    v = f.values
    num, rad, wts = [], [], []
    for x0, xi0, r, w in pts:
        a, b = _shift_steps(f.grid, f.hbar, (x0, xi0))
        # one momentum step of a translation is two dual-grid steps
        t1 = np.roll(v, (a, 2 * b), axis=(0, 1))
        t2 = np.roll(v, (2 * a, 4 * b), axis=(0, 1))
        num.append(f.like(t2 - 2 * t1 + v).lp_norm(p))
        rad.append(r)
        wts.append(w)
    ratio = np.array(num) / np.array(rad) ** s
    if np.isinf(q):
        value = float(ratio.max())
    else:
        value = float((np.array(wts) * ratio**q / np.array(rad) ** 2).sum() ** (1 / q))
    params = {"s": s, "p": p, "q": q, **quad.describe(f.grid, f.hbar)}
    return NormReport(value, "field_besov", f.hbar, params, len(pts), flags)
