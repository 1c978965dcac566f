"""Box dimension of the spectrum against the dimension of the density of states."""

# %%
import numpy as np

from fibham import band_cover, box_dimension, compare_report

for V in (0.05, 0.1, 0.2):
    est = box_dimension({k: band_cover(V, k) for k in range(4, 23)})
    print(f"V={V:4}  box dim={est.value:.4f} +- {est.error:.4f}  (1 - dim)/V = {(1 - est.value) / V:.3f}")

# %%
# One coupling, three routes.
rep = compare_report(0.3)
print(f"box dimension      {rep.box_dim:.4f} +- {rep.box_dim_err:.4f}")
print(f"d_V from orbits    {rep.d_V_dynamics:.4f} +- {rep.d_V_err:.4f}")
print(f"median DOS exponent {rep.dos_exponent_median:.4f}")
print("verdicts", rep.verdicts, "|", rep.inequality_status)
print("scales used:", np.round(rep.scales_used[[0, -1]], 8))
