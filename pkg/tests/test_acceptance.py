"""Acceptance criteria 1-9, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the criterion lines are
written straight to the terminal even when output is captured.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from semiproj import experiments as ex
from semiproj.fock import harmonic_projection
from semiproj.grid import Grid, GridOperator, Potential, quantum_gradient
from semiproj.grid import schrodinger_hamiltonian, spectral_projection
from semiproj.norms import QuadratureSpec, besov, frac_sobolev, schatten, singular_values, sobolev1
from semiproj.phasespace import coherent_projector, field_gradient, snap, translate
from semiproj.phasespace import weyl_quantize, wigner

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(request, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n" + line)
    assert ok, line


def load(name, family=None):
    with open(CONFIGS / name, "rb") as fh:
        return ex.SweepConfig.from_dict(tomllib.load(fh), family)


@pytest.fixture(scope="module")
def harmonic_cfg():
    return ex.SweepConfig.from_dict({"family": "harmonic", "sweep": {"n": [8, 16, 32, 64, 128]}})


@pytest.fixture(scope="module")
def harmonic_result(harmonic_cfg):
    t0 = time.perf_counter()
    res = ex.harmonic_sweep(harmonic_cfg)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def well_result():
    cfg = ex.SweepConfig.from_dict({
        "family": "schrodinger",
        "sweep": {"hbar": [0.2, 0.1, 0.05, 0.025]},
        "grid": {"half_width": 3.5, "points": 256},
        "potential": {"type": "harmonic_well", "u0": 1.0},
    })
    t0 = time.perf_counter()
    res = ex.weyl_law_sweep(cfg)
    return res, time.perf_counter() - t0


def test_criterion_1_exact_l2_law(request, harmonic_result):
    res, elapsed = harmonic_result
    v = res.verdict("l2_gradient_law")
    ok = v.ok and elapsed <= 10
    report(request, 1, ok, f"closed-form err {v.detail['closed_form_rel_err']:.2e}, "
           f"matrix err {v.detail['matrix_rel_err']:.2e}, {elapsed:.1f}s")


def test_criterion_2_constants_and_slopes(request, harmonic_result):
    res, _ = harmonic_result
    checks = ["gradient_constants", "gradient_slope_p1", "gradient_slope_p2",
              "gradient_slope_pinf", "x_xi_symmetry"]
    vs = [res.verdict(c) for c in checks]
    # the criterion's +-0.05 band on all three slopes
    slopes = {p: res.fits[f"matrix_xi_p{p}"].slope for p in ("1", "2", "inf")}
    band = all(abs(slopes[p] - t) <= 0.05 for p, t in (("1", 0), ("2", -0.5), ("inf", -1)))
    ok = all(v.ok for v in vs) and band
    report(request, 2, ok, "slopes " + ", ".join(f"p={p}: {s:.4f}" for p, s in slopes.items())
           + f"; max L1 {vs[0].detail['max_L1']:.4f} <= {vs[0].detail['bound_L1']:.4f}")


def test_criterion_3_weyl_law(request, well_result):
    res, elapsed = well_result
    final = res.verdict("weyl_final")
    dec = res.verdict("weyl_decreasing")
    strict = dec.detail["strict"]
    ok = final.ok and strict and elapsed <= 120
    devs = ", ".join(f"{d:.2e}" for d in dec.detail["deviations"])
    report(request, 3, ok, f"final rel err {final.detail['rel_deviation']:.2e}, "
           f"deviations [{devs}] strictly decreasing: {strict}, {elapsed:.1f}s")


def test_criterion_4_husimi_convergence(request, well_result):
    res, _ = well_result
    v = res.verdict("husimi_L1_decreasing")
    vals = ", ".join(f"{x:.4f}" for x in v.detail["values"])
    report(request, 4, v.ok, f"L1 distances [{vals}], inversions {v.detail['inversions']}")


def test_criterion_5_boundedness(request, harmonic_cfg):
    harm = ex.regularity_trend(harmonic_cfg, 0.5, 2, math.inf)
    bump_cfg = load("schrodinger_bump.toml")
    bump = ex.regularity_trend(bump_cfg, 0.5, 2, math.inf)
    weyl = ex.weyl_law_sweep(bump_cfg)
    sob = weyl.column("sobolev1_p1")
    med = float(np.median(sob))
    spread = float(np.abs(sob / med - 1).max())
    r_h = harm.verdicts[0].detail["max_over_min"]
    r_b = bump.verdicts[0].detail["max_over_min"]
    ok = r_h <= 2 and r_b <= 2 and spread <= 0.25
    report(request, 5, ok, f"max/min harmonic {r_h:.3f}, bump {r_b:.3f}; "
           f"sobolev1(p=1) spread {spread:.3f} around median {med:.3f}")


def test_criterion_6_blowup_trend(request, harmonic_cfg):
    cache = {}
    parts = []
    ok = True
    for s, p in ((1.0, 2.0), (0.75, 2.0), (0.9, 1.0)):
        res = ex.regularity_trend(harmonic_cfg, s, p, math.inf, samples_cache=cache)
        fit = res.fits["besov"]
        good = (res.verdicts[0].status == "growing" and fit.slope <= -0.05 and fit.r2 >= 0.9)
        ok = ok and good
        parts.append(f"(s={s:g},p={p:g}) {res.verdicts[0].status} slope {fit.slope:.3f} "
                     f"R2 {fit.r2:.3f}")
    report(request, 6, ok, "; ".join(parts))


def test_criterion_7_inequality_audit(request):
    harm = ex.audit_family(ex.SweepConfig.from_dict({"family": "harmonic"}), n=16)
    schr = ex.audit_family(load("schrodinger_bump.toml"), hbar=0.05)
    failed = [f"{r.meta['label']}:{v.check}" for r in (harm, schr) for v in r.verdicts if not v.ok]
    slack = min(v.detail["slack"] for r in (harm, schr) for v in r.verdicts)
    report(request, 7, not failed,
           f"{len(harm.verdicts) + len(schr.verdicts)} audits, min slack {slack:.3g}"
           + (f", failed {failed}" if failed else ""))


def _hermitian(grid, hbar, seed, rank=3):
    rng = np.random.default_rng(seed)
    x = grid.axis_nodes
    vecs = []
    for _ in range(rank):
        c, k, w = rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 1.5)
        vecs.append(np.exp(-((x - c) ** 2) / (2 * w)) * np.exp(1j * k * x / hbar))
    V = np.array(vecs).T
    return GridOperator((V * rng.uniform(-1, 1, size=rank)) @ V.conj().T, grid, hbar)


def test_criterion_8_transform_identities(request):
    grid, hbar = Grid(12.0, 256), 1.0
    errs = {}
    op = _hermitian(grid, hbar, 0)
    errs["round_trip"] = np.abs(weyl_quantize(wigner(op)).kernel - op.kernel).max() / np.abs(op.kernel).max()
    f = wigner(op)
    lhs = 2 * math.pi * hbar * np.trace(op.adjoint().compose(op).kernel).real * grid.dx
    errs["plancherel"] = abs((np.abs(f.values) ** 2).sum() * f.cell / lhs - 1)
    g = wigner(coherent_projector(grid, hbar))
    X, XI = g.mesh()
    errs["ground_wigner"] = np.abs(g.values - 2 * np.exp(-(X**2 + XI**2) / hbar)).max()
    z = snap(grid, hbar, (0.0, 0.8))
    d1 = translate(op, z).weighted() - op.weighted()
    E = np.exp(1j * grid.axis_nodes * z.xi / hbar)
    c = E[:, None] * op.weighted() * E.conj()[None, :] - op.weighted()
    errs["commutator"] = np.abs(singular_values(d1, False) - singular_values(c, False)).max()
    tol = {"round_trip": 1e-8, "plancherel": 1e-6, "ground_wigner": 1e-6, "commutator": 1e-10}
    ok = all(errs[k] <= tol[k] for k in tol)
    report(request, 8, ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))


def test_criterion_9_property_suite(request):
    errs = {}
    grid = Grid(6.0, 256)
    P = spectral_projection(schrodinger_hamiltonian(grid, Potential("bump", radius=3.0), 0.05))
    w = P.weighted()
    errs["idempotence"] = np.abs(w @ w - w).max()
    Pf = harmonic_projection(6)
    errs["idempotence_fock"] = np.abs(Pf.matrix @ Pf.matrix - Pf.matrix).max()

    op = _hermitian(Grid(8.0, 128), 0.5, 3)
    z1, z2 = snap(op.grid, op.hbar, (0.7, -0.4)), snap(op.grid, op.hbar, (-1.2, 0.9))
    t1 = translate(op, z1)
    errs["unitarity"] = max(abs(schatten(t1, p).value / schatten(op, p).value - 1)
                            for p in (1, 2, math.inf))
    both = translate(translate(op, z2), z1).kernel
    errs["composition"] = np.abs(both - translate(op, (z1.x + z2.x, z1.xi + z2.xi)).kernel).max()

    H = ex.harmonic_operator(5)
    T = translate(H, snap(H.grid, H.hbar, (0.4, -0.3)))
    quad = QuadratureSpec()
    inv = 0.0
    for fn in (lambda o: sobolev1(o, 1).value, lambda o: besov(o, 0.5, 2, math.inf, quad).value,
               lambda o: frac_sobolev(o, 0.5, 2, quad).value):
        inv = max(inv, abs(fn(T) / fn(H) - 1))
    errs["norm_invariance"] = inv

    gop = _hermitian(Grid(8.0, 256), 0.5, 14)
    f = wigner(gop)
    ratio = 0.0
    for kind in ("x", "xi"):
        ref = field_gradient(f, kind).values
        ratio = max(ratio, np.abs(wigner(quantum_gradient(gop, kind)).values - ref).max()
                    / np.abs(ref).max())
    errs["intertwining"] = ratio

    rng = np.random.default_rng(7)
    svd = 0.0
    for rank in (1, 2, 3):
        g = Grid(4.0, 64)
        U = rng.normal(size=(64, rank)) + 1j * rng.normal(size=(64, rank))
        A = GridOperator(U @ U.conj().T, g, 0.3)
        sv = np.linalg.svd(A.kernel * g.dx, compute_uv=False)
        for p in (1, 2, math.inf):
            ref = sv.max() if math.isinf(p) else (2 * math.pi * 0.3) ** (1 / p) * (sv**p).sum() ** (1 / p)
            svd = max(svd, abs(schatten(A, p).value / ref - 1))
    errs["svd_oracle"] = svd

    tol = {"idempotence": 1e-10, "idempotence_fock": 1e-12, "unitarity": 1e-12,
           "composition": 1e-12, "norm_invariance": 1e-10, "intertwining": 1e-5,
           "svd_oracle": 1e-12}
    ok = all(errs[k] <= tol[k] for k in tol)
    report(request, 9, ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
