"""Band approximants of the spectrum and the escape criterion."""

# %%
# Level-k approximants are unions of F_k bands.  Their total length shrinks
# towards zero, the numerical face of a zero-measure Cantor spectrum.
import numpy as np

from fibham import band_cover, escape_test, fibonacci, gaps_from_cover

V = 0.5
for k in (6, 10, 14, 18):
    c = band_cover(V, k)
    print(f"k={k:2d}  bands={len(c):5d} (F_k={fibonacci(k)})  total length={c.total_length:.5f}")

# %%
# The widest gaps are already visible at moderate level and barely move.
c = band_cover(V, 14)
gaps = np.array(gaps_from_cover(c))
widest = gaps[np.argsort(gaps[:, 1] - gaps[:, 0])[::-1][:4]]
print("widest gaps at k=14:\n", np.round(widest, 5))

# %%
# Energies are classified by iterating half-traces until an escape is
# certified.  Band centres survive for a long time; gap centres escape fast.
for E in (0.5 * (widest[0, 0] + widest[0, 1]), float(np.mean(band_cover(V, 16).bands[100]))):
    v = escape_test(E, V, 2000)
    print(f"E={E:+.6f}: escaped={v.escaped} at index {v.escape_index}")
