import math
from math import comb, pi, sqrt

import numpy as np
import pytest

from semiproj import fock
from semiproj.fock import (
    CutoffError,
    DomainTooNarrowError,
    FockOperator,
    FockSpace,
    gradient_ground_state_power,
    gradient_xi_schatten_exact,
    harmonic_hbar,
    harmonic_projection,
    hermite_samples,
    ladder_matrices,
    momentum_matrix,
    position_matrix,
    quantum_gradient,
)
from semiproj.grid import Grid
from semiproj.norms import schatten


def test_enumeration_lexicographic_and_complete():
    sp = FockSpace(3, 2, 1.0)
    idx = sp.multi_indices
    assert idx.shape == (9, 2)
    assert [tuple(a) for a in idx] == sorted({tuple(a) for a in idx})
    for k, a in enumerate(idx):
        assert sp.index_of(a) == k
    with pytest.raises(IndexError):
        sp.index_of((3, 0))


def test_space_validation():
    with pytest.raises(CutoffError):
        FockSpace(0, 1, 1.0)
    with pytest.raises(ValueError):
        FockSpace(2, 0, 1.0)
    with pytest.raises(ValueError):
        FockSpace(2, 1, -1.0)


def test_operator_shape_and_hermitian_flag():
    sp = FockSpace(3, 1, 1.0)
    with pytest.raises(ValueError):
        FockOperator(np.zeros((2, 2)), sp)
    m = np.zeros((3, 3), dtype=complex)
    m[0, 1] = 1.0
    with pytest.raises(ValueError):
        FockOperator(m, sp, hermitian=True)


def test_ladder_two_level_commutator():
    sp = FockSpace(2, 1, 1.0)
    a, ad = ladder_matrices(sp)
    np.testing.assert_allclose(a.matrix, [[0, sqrt(2)], [0, 0]])
    comm = a.matrix @ ad.matrix - ad.matrix @ a.matrix
    assert comm[0, 0] == pytest.approx(2.0)


def test_ladder_single_step_and_vacuum():
    hbar = 0.3
    sp = FockSpace(8, 1, hbar)
    a, ad = ladder_matrices(sp)
    assert a.matrix[0, 1] == pytest.approx(sqrt(2 * hbar))
    assert ad.matrix[2, 1] == pytest.approx(sqrt(2 * hbar * 2))
    for d, K in [(1, 5), (2, 4), (3, 3)]:
        s = FockSpace(K, d, 0.7)
        for axis in range(1, d + 1):
            lower, _ = ladder_matrices(s, axis)
            assert np.all(lower.matrix[:, 0] == 0)


def test_ladder_errors():
    with pytest.raises(ValueError):
        ladder_matrices(FockSpace(4, 2, 1.0), axis=3)
    with pytest.raises(CutoffError):
        ladder_matrices(FockSpace(1, 1, 1.0))


def test_canonical_commutator_on_untruncated_block():
    hbar = 0.37
    sp = FockSpace(10, 1, hbar)
    x = position_matrix(sp).matrix
    p = momentum_matrix(sp).matrix
    c = (x @ p - p @ x)[:-1, :-1]
    np.testing.assert_allclose(c, 1j * hbar * np.eye(9), atol=1e-14)


def test_position_structure():
    x = position_matrix(FockSpace(6, 1, 0.5)).matrix
    assert np.allclose(x.imag, 0) and np.allclose(x, x.T)
    assert np.allclose(np.triu(x, 2), 0) and np.allclose(np.tril(x, -2), 0)
    x2 = position_matrix(FockSpace(2, 1, 1.0)).matrix
    np.testing.assert_allclose(x2, [[0, sqrt(2) / 2], [sqrt(2) / 2, 0]])


def test_projection_ground_state():
    P = harmonic_projection(0, 1)
    assert P.hbar == pytest.approx(1 / (2 * pi))
    assert P.space.h == pytest.approx(1.0)
    assert np.real(np.diag(P.matrix))[0] == 1 and np.all(np.diag(P.matrix)[1:] == 0)


@pytest.mark.parametrize("n,d", [(0, 1), (2, 2), (5, 1), (3, 3)])
def test_projection_count_trace_idempotent(n, d):
    P = harmonic_projection(n, d)
    N = comb(d + n, d)
    m = P.matrix
    assert np.trace(m).real == pytest.approx(N)
    assert np.trace(m @ m).real == pytest.approx(N)
    assert np.abs(m @ m - m).max() <= 1e-12
    assert np.trace(m).real * P.space.h**d == pytest.approx(1.0)
    assert P.normalized


def test_projection_count_n2_d2():
    assert np.trace(harmonic_projection(2, 2).matrix).real == 6


def test_projection_cutoff_and_override():
    with pytest.raises(CutoffError):
        harmonic_projection(4, 1, cutoff=5)
    P = harmonic_projection(3, 1, hbar=0.2)
    assert not P.normalized and P.hbar == 0.2


def test_harmonic_hbar_linkage():
    for n, d in [(8, 1), (3, 2)]:
        assert comb(d + n, d) * (2 * pi * harmonic_hbar(n, d)) ** d == pytest.approx(1.0)


@pytest.mark.parametrize("n", [0, 1, 7, 32])
def test_exact_l2_law(n):
    hbar = harmonic_hbar(n, 1)
    assert gradient_xi_schatten_exact(n, 1, 2) == pytest.approx(1 / sqrt(hbar), rel=1e-12)


def test_exact_n0_value():
    assert gradient_xi_schatten_exact(0, 1, 2) == pytest.approx(sqrt(2 * pi), rel=1e-12)
    assert gradient_xi_schatten_exact(0, 1, 2) == pytest.approx(2.50663, abs=1e-5)


def test_exact_l1_bound_and_errors():
    for n in range(0, 40, 3):
        assert gradient_xi_schatten_exact(n, 1, 1) <= 2 * sqrt(pi) * (1 + 1e-12)
    with pytest.raises(ValueError):
        gradient_xi_schatten_exact(3, 1, 0.5)


def test_exact_pinf():
    n = 5
    hbar = harmonic_hbar(n, 2)
    assert gradient_xi_schatten_exact(n, 2, math.inf) == pytest.approx(sqrt((n + 1) / (2 * hbar)))


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("n", [0, 1, 4, 8])
@pytest.mark.parametrize("p", [1, 2, 4, math.inf])
def test_exact_matches_matrix(n, d, p):
    P = harmonic_projection(n, d)
    G = quantum_gradient(P, "xi", 1)
    mat = schatten(G, p).value
    assert mat == pytest.approx(gradient_xi_schatten_exact(n, d, p), rel=1e-10)


def test_gradient_of_identity_is_zero():
    sp = FockSpace(6, 1, 0.4)
    I = FockOperator(np.eye(6, dtype=complex), sp)
    for kind in ("x", "xi"):
        assert np.abs(quantum_gradient(I, kind).restricted()).max() < 1e-14
    with pytest.raises(ValueError):
        quantum_gradient(I, "y")


def test_ground_state_gradient_square():
    P = harmonic_projection(0, 1)
    G = quantum_gradient(P, "xi").matrix
    sq = G.conj().T @ G
    hbar = P.hbar
    expect = np.zeros(P.space.size)
    expect[:2] = 1 / (2 * hbar)
    np.testing.assert_allclose(sq, np.diag(expect), atol=1e-12)


def test_gradient_entrywise_against_ladders():
    n = 3
    P = harmonic_projection(n, 1)
    hbar = P.hbar
    G = quantum_gradient(P, "xi").matrix
    # [x/(i hbar), P] only couples levels n and n+1 with weight sqrt(2 hbar (n+1)) / 2
    c = sqrt(2 * hbar * (n + 1)) / 2 / hbar
    expect = np.zeros_like(G)
    expect[n, n + 1] = -c / 1j
    expect[n + 1, n] = c / 1j
    np.testing.assert_allclose(G, expect, atol=1e-12)
    assert np.abs(G).max() * sqrt(2 * hbar) == pytest.approx(sqrt(n + 1))


@pytest.mark.parametrize("n,d,p", [(4, 1, 1), (4, 1, 3), (3, 2, 2), (2, 2, 1.5), (2, 3, 4)])
def test_ground_state_power_structure(n, d, p):
    P = harmonic_projection(n, d)
    G = quantum_gradient(P, "xi", 1).matrix
    lam, V = np.linalg.eigh(G.conj().T @ G)
    power = (V * np.clip(lam, 0, None) ** (p / 2)) @ V.conj().T
    predicted = np.diag(gradient_ground_state_power(n, d, p))
    np.testing.assert_allclose(power, predicted, atol=1e-10)


@pytest.mark.parametrize("p", [1, 4, math.inf])
def test_scaling_law_spread(p):
    vals = []
    for n in [8, 16, 32, 64, 128]:
        h = 2 * pi * harmonic_hbar(n, 1)
        pprime = 1.0 if math.isinf(p) else 1 - 1 / p
        vals.append(gradient_xi_schatten_exact(n, 1, p) * h**pprime)
    vals = np.array(vals)
    assert (vals.max() - vals.min()) / vals.mean() <= 0.10


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_x_and_xi_gradients_agree(d, p):
    P = harmonic_projection(5, d)
    gx = schatten(quantum_gradient(P, "x", 1), p).value
    gxi = schatten(quantum_gradient(P, "xi", 1), p).value
    assert gx == pytest.approx(gxi, rel=1e-10)


def test_truncation_flag():
    P = harmonic_projection(2, 1)
    G = quantum_gradient(P, "x")
    assert G.truncation_affected[-1] and not G.truncation_affected[:-1].any()
    assert G.restricted().shape == (P.space.size - 1,) * 2


def test_hermite_ground_state_and_orthonormality():
    hbar = 0.05
    sp = FockSpace(12, 1, hbar)
    g = Grid(4.0, 256)
    s = hermite_samples(sp, g)
    x = g.axis_nodes
    np.testing.assert_allclose(s[0], (pi * hbar) ** -0.25 * np.exp(-x**2 / (2 * hbar)), atol=1e-13)
    gram = s @ s.T * g.dx
    assert np.abs(gram - np.eye(12)).max() < 1e-8


def test_hermite_parity():
    g = Grid(5.0, 128)
    s = hermite_samples(FockSpace(4, 1, 0.2), g)
    # symmetric node set: x_j and -x_j for j >= 1, x_0 = -L has no partner
    x = g.axis_nodes
    j = np.arange(1, g.M)
    mirror = g.M - j
    assert np.allclose(x[mirror], -x[j])
    assert np.array_equal(s[1][mirror], -s[1][j])


def test_hermite_domain_too_narrow():
    with pytest.raises(DomainTooNarrowError, match="half-width"):
        hermite_samples(FockSpace(30, 1, 0.5), Grid(2.0, 64))


def test_factorial_constants():
    c = fock.factorial_bound_constants(1)
    assert c[1] == pytest.approx(2 * sqrt(pi))
    assert c["inf_times_h"] == pytest.approx(sqrt(pi))
