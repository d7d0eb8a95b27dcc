# %% [markdown]
# Rate region and a five-mode scheduler table
# ===========================================
#
# Sweep every mode on the default grid, build the convex rate region and
# compare it with the private-beams-only (SDMA) and shared-beam-only
# (QAMA-BF) families. A full sweep takes a few seconds.

# %%
import math

from pxqama.geometry import make_channels
from pxqama.region import SweepGrid, build_region, select_modes, sweep

ch = make_channels(math.sqrt(10.0), math.sqrt(100.0), 0.8)

regions = {}
for family in ("pxqama", "sdma", "qama_bf"):
    regions[family] = build_region(sweep(ch, SweepGrid(family=family)))
    print(f"{family:8s} area {regions[family].area:.3f}")

# %%
full = regions["pxqama"]
print("gain over SDMA   :", full.area / regions["sdma"].area)
print("gain over QAMA-BF:", full.area / regions["qama_bf"].area)
print("hull vertices", full.n_frontier, "Pareto points", full.n_pareto)

# %% [markdown]
# Keep five modes: both single-user corners plus the three vertices that
# add the most area.

# %%
sel = select_modes(full, 5)
print(f"five modes keep {sel.ratio:.2%} of the area")
for i in sel.indices:
    m = full.sweep.mode(int(i))
    r1, r2 = full.points[i]
    print(f"sizes {m.sizes}  theta0 {m.theta0:.3f}  "
          f"powers {[round(a * a, 2) for a in m.alphas]}  R = ({r1:.3f}, {r2:.3f})")
