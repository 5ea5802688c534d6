# Wigner, Husimi and Weyl transforms on a periodic grid.
import numpy as np

from semiproj.grid import Grid
from semiproj.phasespace import coherent_projector, husimi, snap, translate
from semiproj.phasespace import weyl_quantize, wigner

grid, hbar = Grid(12.0, 256), 1.0
P0 = coherent_projector(grid, hbar)

f = wigner(P0)
X, XI = f.mesh()
print("Wigner vs 2 exp(-|z|^2/hbar):", np.abs(f.values - 2 * np.exp(-(X**2 + XI**2) / hbar)).max())

hu = husimi(P0)
print("Husimi vs exp(-|z|^2/(2 hbar)):", np.abs(hu.values - np.exp(-(X**2 + XI**2) / (2 * hbar))).max())

back = weyl_quantize(f)
print("Weyl(Wigner(P)) - P:", np.abs(back.kernel - P0.kernel).max())

# Translations only move by grid-compatible amounts; snap() finds the nearest one.
z = snap(grid, hbar, (2.0, -1.5))
moved = wigner(translate(P0, z))
i, j = np.unravel_index(np.argmax(moved.values), moved.values.shape)
print(f"requested (2.0, -1.5), snapped ({z.x:.4f}, {z.xi:.4f}), peak at ({moved.x[i]:.4f}, {moved.xi[j]:.4f})")
