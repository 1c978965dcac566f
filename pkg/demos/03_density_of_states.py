"""Integrated density of states from Sturm counts, and its local scaling."""

# %%
# At zero coupling the counting function approaches the arccos law.
import numpy as np

from fibham import (
    PotentialSpec,
    dos_weighted_energies,
    ids_estimate,
    ids_free,
    local_scaling_exponent,
)

grid = np.linspace(-2.5, 2.5, 400)
est = ids_estimate(PotentialSpec(0.0), 10_000, grid)
print("sup |N - N_free| at L=1e4:", est.sup_distance(ids_free))

# %%
# With coupling the curve becomes a devil's staircase whose plateaux sit on
# gaps.  Different phases give the same curve up to O(1/L).
a = ids_estimate(PotentialSpec(0.5, 0.1), 10_000, grid)
b = ids_estimate(PotentialSpec(0.5, 0.7), 10_000, grid)
print("phase spread at V=0.5:", a.sup_distance(b))

# %%
# Local scaling exponents at energies typical for the density of states.
spec = PotentialSpec(0.3)
L = 100_000
exps = local_scaling_exponent(spec, L, dos_weighted_energies(spec, L, 9))
for e in exps:
    print(f"E={e.E:+.5f}  exponent={e.exponent:.4f}  rms residual={e.fit_residual:.3f}")
print("median:", np.median([e.exponent for e in exps]))
