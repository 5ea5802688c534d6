# Eigenvalue counting and Husimi functions for -hbar^2 d^2/dx^2 - U(x).
#
# h N_hbar approaches the classical phase-space volume of {xi^2 <= U(x)},
# and the Husimi function of the spectral projection approaches the
# indicator of that set.
import numpy as np

from semiproj.grid import Grid, Potential, classical_phase_volume
from semiproj.experiments import schrodinger_projector
from semiproj.phasespace import husimi

grid = Grid(6.0, 256)
U = Potential("bump", u0=1.0, radius=3.0)
vol = classical_phase_volume(U)
print("classical volume:", vol)

for hbar in [0.2, 0.1, 0.05, 0.025]:
    P = schrodinger_projector(grid, U, hbar)
    N = P.meta["rank"]
    hu = husimi(P)
    chi = (hu.xi[None, :] ** 2 <= U(hu.x)[:, None]).astype(float)
    dist = np.abs(hu.values - chi).sum() * hu.cell
    print(f"hbar={hbar:<6} N={N:4d}  hN={2 * np.pi * hbar * N:.4f}  "
          f"L1(husimi - indicator)={dist:.4f}  min husimi={hu.values.min():.1e}")

# A well with U <= 0 everywhere has no negative eigenvalues at all.
P = schrodinger_projector(grid, Potential("bump", u0=-1.0, radius=3.0), 0.05)
print("rank for U <= 0:", P.meta["rank"])
