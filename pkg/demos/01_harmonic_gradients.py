# Gradient norms of harmonic-oscillator projections.
#
# P_n projects onto the first N = n + 1 Hermite functions, with hbar tied to
# n by N h = 1.  The momentum-gradient [x/(i hbar), P] has a closed-form
# spectrum, so its scaled Schatten norms can be checked against matrices.
import math

from semiproj import fock
from semiproj.norms import schatten

print(f"{'n':>4} {'hbar':>10} {'L1':>9} {'L2*sqrt(hbar)':>14} {'h*Linf':>9}")
for n in [8, 16, 32, 64, 128]:
    P = fock.harmonic_projection(n)
    G = fock.quantum_gradient(P, "xi")
    h = 2 * math.pi * P.hbar
    l1 = schatten(G, 1).value
    l2 = schatten(G, 2).value
    linf = schatten(G, math.inf).value
    print(f"{n:4d} {P.hbar:10.3e} {l1:9.5f} {l2 * math.sqrt(P.hbar):14.10f} {h * linf:9.5f}")

# L2 is exactly 1/sqrt(hbar); L1 stays below 2 sqrt(pi) and h Linf below sqrt(pi).
print("2 sqrt(pi) =", 2 * math.sqrt(math.pi), " sqrt(pi) =", math.sqrt(math.pi))

# The position gradient gives the same numbers (x <-> xi symmetry of the oscillator).
P = fock.harmonic_projection(16)
for p in (1, 2, math.inf):
    gx = schatten(fock.quantum_gradient(P, "x"), p).value
    gxi = schatten(fock.quantum_gradient(P, "xi"), p).value
    print(f"p={p}: x-gradient {gx:.10f}  xi-gradient {gxi:.10f}")
