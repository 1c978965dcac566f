"""Periodic orbits continued off the zero-coupling surface, and d_V."""

# %%
# Periodic points of the cat map, counted exactly.  Each one with
# A^n p = +-p gives a period-n point of the trace map on S_0.
from fractions import Fraction

from fibham import TorusPoint, continue_orbit, dv_estimate, periodic_points_A
from fibham.dynamics import seed_orbits

for n in (1, 3, 5, 8):
    print(f"n={n}: {len(periodic_points_A(n))} fixed points of A^n")
print("non-singular cycles dividing 14:", len(seed_orbits(14)))

# %%
# The period-2 orbit stays on the curve x = z, y = x / (2x - 1).
rec = continue_orbit(TorusPoint(Fraction(1, 5), Fraction(2, 5)), 2, 0.1)
for x, y, z in rec.points:
    print(f"({x:+.6f}, {y:+.6f}, {z:+.6f})  x/(2x-1) = {x / (2 * x - 1):+.6f}")

# %%
# Entropy from orbit counts divided by the mean unstable exponent.
for V in (0.05, 0.1, 0.2, 0.5):
    d = dv_estimate(V)
    print(
        f"V={V:4}  n={d.period}  lyap={d.lyap:.5f}  entropy={d.entropy:.5f}  "
        f"d_V={d.d_V:.4f} +- {d.error:.4f}  (constant-entropy variant {d.d_V_paper_constant:.3f})"
    )
