# Besov regularity of projections as hbar -> 0.
#
# besov(s, p, inf) stays bounded at the critical s = 1/p and grows like a
# negative power of hbar above it.  All rows share one quadrature so the
# numbers are comparable along the sweep.
import math

from semiproj import experiments as ex

cfg = ex.SweepConfig.from_dict({"family": "harmonic", "sweep": {"n": [8, 16, 32, 64, 128]}})
cache = {}
for s, p in [(0.5, 2), (0.75, 2), (1.0, 2), (0.9, 1)]:
    res = ex.regularity_trend(cfg, s, p, math.inf, samples_cache=cache)
    v = res.verdicts[0]
    vals = " ".join(f"{x:8.3f}" for x in res.column("besov"))
    print(f"s={s:<5} p={p}: {vals}   slope {res.fits['besov'].slope:+.3f}  -> {v.status}")

# (0.9, 1) sits below s = 1/p = 1, so it stays bounded like the critical row.
