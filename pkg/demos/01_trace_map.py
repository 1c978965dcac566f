"""A tour of the trace map and its invariant surfaces.

Run with ``python demos/01_trace_map.py``.
"""

# %%
# The trace map sends a triple of half-traces to the next one and keeps the
# Fricke-Vogt function fixed.  Start on the line of initial conditions.
import math
from fractions import Fraction

import numpy as np

from fibham import (
    SINGULARITIES,
    TorusPoint,
    cat_map_step,
    fricke_vogt,
    line_point,
    semiconjugacy,
    trace_jacobian,
    trace_step,
)

E, V = 0.37, 0.4
p = line_point(E, V)
print("start", tuple(p), "G =", fricke_vogt(p), "V^2/4 =", V * V / 4)
for _ in range(8):
    p = trace_step(p)
print("after 8 steps", np.round(p.as_array(), 6).tolist(), "G =", fricke_vogt(p))

# %%
# At zero coupling the bounded part of the surface is a pinched torus.  The
# cat map on angles is carried to the trace map by the cosine parametrisation.
t = TorusPoint(0.13, 0.41)
lhs = semiconjugacy(cat_map_step(t)).as_array()
rhs = trace_step(semiconjugacy(t)).as_array()
print("F(A t) - T(F t):", np.max(np.abs(lhs - rhs)))
print("the four conic points:", [tuple(s) for s in SINGULARITIES])

# %%
# The fixed point (1, 1, 1) is one of them; its derivative has a neutral
# direction plus the golden-ratio-squared pair.
print("DT(1,1,1) eigenvalues:", np.sort(np.linalg.eigvals(trace_jacobian((1, 1, 1))).real))

# %%
# A six-cycle threads through the coordinate axes on every surface.
a = math.sqrt(1 + V * V / 4)
q = (0.0, 0.0, a)
cycle = []
for _ in range(6):
    q = trace_step(q)
    cycle.append(tuple(q))
print("six-cycle:", cycle)
print("torus seed", TorusPoint(Fraction(1, 4), 0), "maps to", tuple(semiconjugacy(TorusPoint(0.25, 0))))
