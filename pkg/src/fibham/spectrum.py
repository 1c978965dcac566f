"""Band covers of the spectrum from half-trace approximants, plus the escape test.

The level-``k`` approximant is ``sigma_k = {E : |x_k(E)| <= 1}``.  It is the
spectrum of a periodic operator of period ``F_k`` and consists of exactly
``F_k`` bands when ``V > 0``.  Consecutive approximants nest,
``sigma_{k+1} ⊂ sigma_k ∪ sigma_{k-1}``, and ``Sigma_V`` is the intersection of
the unions ``sigma_k ∪ sigma_{k+1}``.

Band edges are found level by level inside the previous two levels.  Within
each parent interval we locate the critical points of ``x_k`` (one per gap of
``sigma_k``, none inside bands), so ``x_k`` is monotone between neighbouring
critical points and each band edge is a bracketed root of ``x_k = ±1``.
Critical points are separated by band widths, which at weak coupling are far
larger than the gaps themselves; this is what makes the search reliable
where a plain sign-change scan of ``|x_k| - 1`` would miss narrow gaps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ResolutionTooCoarse
from .serialize import SCHEMA_VERSION, csv_text, dumps
from .tracemap import fibonacci, half_trace_sequence, half_traces, HalfTraceSeed

__all__ = [
    "BandCover",
    "EscapeVerdict",
    "DEFAULT_RESOLUTION",
    "MAX_LEVEL",
    "band_cover",
    "spectral_cover",
    "escape_test",
    "escape_indices",
    "gaps_from_cover",
    "merge_intervals",
    "track_gap",
]

DEFAULT_RESOLUTION = 1e-10
MAX_LEVEL = 22
ALPHA = (5 ** 0.5 - 1) / 2

# |x_k| within this of 1 counts as inside; absorbs rounding at V = 0 tangencies
_EDGE_TOL = 1e-12


@dataclass
class BandCover:
    """Disjoint sorted closed intervals covering an approximant of the spectrum."""

    V: float
    level: int
    bands: np.ndarray
    resolution: float = DEFAULT_RESOLUTION

    def __post_init__(self):
        self.bands = np.asarray(self.bands, dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.bands)

    @property
    def total_length(self) -> float:
        return float(np.sum(self.bands[:, 1] - self.bands[:, 0]))

    @property
    def hull(self) -> tuple[float, float]:
        return float(self.bands[0, 0]), float(self.bands[-1, 1])

    def contains(self, E, tol: float = 0.0):
        """Membership test, vectorised over ``E``; ``tol`` widens every band."""
        E = np.asarray(E, dtype=float)
        j = np.searchsorted(self.bands[:, 0], E + tol, side="right") - 1
        jj = np.clip(j, 0, len(self.bands) - 1)
        inside = (j >= 0) & (E <= self.bands[jj, 1] + tol) & (E >= self.bands[jj, 0] - tol)
        return inside if inside.ndim else bool(inside)

    def to_csv(self) -> str:
        rows = ((self.level, i, float(a), float(b)) for i, (a, b) in enumerate(self.bands))
        return csv_text(["level", "band_index", "a", "b"], rows)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "V": self.V,
            "level": self.level,
            "resolution": self.resolution,
            "bands": self.bands.tolist(),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "BandCover":
        d = json.loads(text)
        return cls(V=d["V"], level=d["level"], bands=np.array(d["bands"]), resolution=d["resolution"])


@dataclass
class EscapeVerdict:
    """Outcome of the escape test.

    ``escaped=False`` means no escape was certified within the iteration
    budget, not that the energy is proven to be in the spectrum.
    ``witness`` holds ``(x_{n-1}, x_n, x_{n+1})`` at the certifying index.
    """

    escaped: bool
    escape_index: int | None = None
    witness: tuple[float, float, float] | None = field(default=None, repr=False)


def merge_intervals(iv: np.ndarray, gap: float = 0.0) -> np.ndarray:
    """Union of closed intervals; intervals closer than ``gap`` are joined."""
    iv = np.asarray(iv, dtype=float).reshape(-1, 2)
    if len(iv) == 0:
        return iv
    iv = iv[np.argsort(iv[:, 0], kind="stable")]
    out = [[iv[0, 0], iv[0, 1]]]
    for a, b in iv[1:]:
        if a <= out[-1][1] + gap:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return np.array(out)


def _bisect(lo, hi, f, res):
    """Vectorised bisection for a sign change of ``f`` between ``lo`` and ``hi``."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if lo.size == 0:
        return lo
    flo = f(lo) > 0
    while np.max(hi - lo) > res:
        mid = 0.5 * (lo + hi)
        same = (f(mid) > 0) == flo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _bands_in(V: float, k: int, parents: np.ndarray, samples: int, res: float) -> np.ndarray:
    """Bands of sigma_k inside the union of ``parents`` (sorted, disjoint)."""
    t = np.linspace(0.0, 1.0, samples)
    grid = parents[:, :1] + (parents[:, 1] - parents[:, 0])[:, None] * t[None, :]
    _, dx = half_traces(grid, V, k, derivative=True)
    s = np.sign(dx)
    rows, cols = np.nonzero(s[:, 1:] * s[:, :-1] < 0)
    crit = _bisect(
        grid[rows, cols], grid[rows, cols + 1], lambda e: half_traces(e, V, k, derivative=True)[1], res * 1e-2
    )

    lo_parts, hi_parts = [], []
    for r in range(len(parents)):
        pts = np.concatenate([[parents[r, 0]], crit[rows == r], [parents[r, 1]]])
        lo_parts.append(pts[:-1])
        hi_parts.append(pts[1:])
    lo = np.concatenate(lo_parts)
    hi = np.concatenate(hi_parts)
    xlo = half_traces(lo, V, k)
    xhi = half_traces(hi, V, k)

    # x_k is monotone on each [lo, hi]; the band there is its preimage of [-1, 1]
    up = xhi >= xlo
    lower = np.minimum(xlo, xhi)
    upper = np.maximum(xlo, xhi)
    nonempty = (upper >= -1.0 - _EDGE_TOL) & (lower <= 1.0 + _EDGE_TOL)

    # entering [-1, 1] from below when increasing, from above when decreasing
    start_inside = np.abs(xlo) <= 1.0 + _EDGE_TOL
    end_inside = np.abs(xhi) <= 1.0 + _EDGE_TOL
    need = nonempty & ~(start_inside & end_inside)
    c_minus = np.full_like(lo, np.nan)
    c_plus = np.full_like(lo, np.nan)
    if need.any():
        seg_lo, seg_hi = lo[need], hi[need]
        c_minus[need] = _bisect(seg_lo, seg_hi, lambda e: half_traces(e, V, k) + 1.0, res)
        c_plus[need] = _bisect(seg_lo, seg_hi, lambda e: half_traces(e, V, k) - 1.0, res)
    left = np.where(start_inside, lo, np.where(up, c_minus, c_plus))
    right = np.where(end_inside, hi, np.where(up, c_plus, c_minus))
    bands = np.stack([left, right], axis=1)[nonempty]
    # adjacent monotone pieces meeting at a closed gap join into one band
    return merge_intervals(bands, gap=res)


@lru_cache(maxsize=64)
def _ladder(V: float, k: int, resolution: float, samples: int) -> tuple:
    if k == 0:
        return (np.array([[-2.0, 2.0]]),)
    if k == 1:
        return _ladder(V, 0, resolution, samples) + (np.array([[V - 2.0, V + 2.0]]),)
    prev = _ladder(V, k - 1, resolution, samples)
    parents = merge_intervals(np.vstack([prev[k - 1], prev[k - 2]]))
    expected = fibonacci(k)
    dens = samples
    while True:
        bands = _bands_in(V, k, parents, dens, resolution)
        if V == 0.0 or len(bands) >= expected or dens >= 64 * samples:
            break
        dens *= 2
    if V > 0.0 and len(bands) != expected:
        raise ResolutionTooCoarse(
            f"level {k} at V={V}: resolved {len(bands)} of {expected} bands; "
            "some gaps are narrower than the resolution"
        )
    bands.setflags(write=False)
    return prev + (bands,)


def band_cover(
    V: float, k: int, resolution: float = DEFAULT_RESOLUTION, samples_per_band: int = 16
) -> BandCover:
    """Bands of the level-``k`` approximant ``{E : |x_k(E)| <= 1}``.

    Raises :class:`ResolutionTooCoarse` when fewer than ``F_k`` bands can be
    separated for ``V > 0`` even after refining the sampling.
    """
    if V < 0:
        raise ValueError("coupling must be >= 0")
    if k < 1:
        raise ValueError("level must be >= 1")
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    bands = _ladder(float(V), int(k), float(resolution), int(samples_per_band))[k]
    lo, hi = -2.0 - V, 2.0 + V
    bands = np.clip(bands, lo, hi)
    return BandCover(V=float(V), level=int(k), bands=bands.copy(), resolution=resolution)


def spectral_cover(V: float, k: int, resolution: float = DEFAULT_RESOLUTION) -> BandCover:
    """Union of approximants ``k`` and ``k + 1``; these unions decrease to the spectrum."""
    a = band_cover(V, k, resolution)
    b = band_cover(V, k + 1, resolution)
    return BandCover(V=a.V, level=k, bands=merge_intervals(np.vstack([a.bands, b.bands])), resolution=resolution)


def _escape_rule(prev, cur, nxt):
    ap, ac, an = np.abs(prev), np.abs(cur), np.abs(nxt)
    return (ap > 1.0) & (ac > 1.0) & (an > ac) & (an > ap)


def escape_test(E: float, V: float, max_iter: int = 1000) -> EscapeVerdict:
    """Certify that the half-trace orbit of ``E`` is unbounded.

    Escape is declared at the first ``n`` with ``|x_{n-1}| > 1``, ``|x_n| > 1``
    and ``|x_{n+1}| > max(|x_n|, |x_{n-1}|)``.  From such a triple the
    recursion grows monotonically, so the verdict has no false positives.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    seq = half_trace_sequence(HalfTraceSeed(E, V), max(max_iter, 1))
    x = seq.values
    for j in range(1, len(x) - 1):
        if _escape_rule(x[j - 1], x[j], x[j + 1]):
            n = j - 1
            return EscapeVerdict(True, n, (float(x[j - 1]), float(x[j]), float(x[j + 1])))
    if seq.overflow:
        n = seq.overflow_index
        return EscapeVerdict(True, n, (float(x[-3]), float(x[-2]), float(x[-1])))
    return EscapeVerdict(False)


def escape_indices(E, V: float, max_iter: int = 1000) -> np.ndarray:
    """Vectorised escape index for many energies; -1 where no escape was certified."""
    E = np.asarray(E, dtype=float)
    out = np.full(E.shape, -1, dtype=np.int64)
    c, b, a = np.ones_like(E), E / 2.0, (E - V) / 2.0  # x_-1, x_0, x_1
    # n indexes the middle term of the (x_{n-1}, x_n, x_{n+1}) window
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(0, max_iter):
            hit = (out < 0) & _escape_rule(c, b, a)
            out[hit] = n
            if n + 1 < max_iter:
                a, b, c = 2.0 * a * b - c, a, b
                # freeze escaped orbits before they overflow
                big = out >= 0
                a = np.where(big, 2.0, a)
                b = np.where(big, 2.0, b)
                c = np.where(big, 2.0, c)
    return out


def gaps_from_cover(cover: BandCover, window: tuple[float, float] | None = None) -> list[tuple[float, float]]:
    """Open gaps: connected components of ``window`` minus the bands, sorted."""
    bands = cover.bands
    if window is None:
        window = cover.hull
    lo, hi = window
    if len(bands) and (lo > bands[0, 0] + cover.resolution or hi < bands[-1, 1] - cover.resolution):
        raise ValueError("window must contain the hull of the cover")
    out = []
    if len(bands) == 0:
        return [(lo, hi)] if hi > lo else []
    if bands[0, 0] > lo:
        out.append((float(lo), float(bands[0, 0])))
    for (a0, b0), (a1, b1) in zip(bands[:-1], bands[1:]):
        if a1 > b0:
            out.append((float(b0), float(a1)))
    if bands[-1, 1] < hi:
        out.append((float(bands[-1, 1]), float(hi)))
    return out


def track_gap(
    gap: tuple[float, float],
    V_from: float,
    V_to: float,
    level: int = 12,
    step: float = 0.02,
) -> tuple[float, float]:
    """Follow a spectral gap as the coupling changes.

    At each step the gap is shifted by the change of the mean potential
    ``alpha * dV`` and matched to the unique overlapping gap of the new cover.
    Ambiguous or missing matches raise ``LookupError``.
    """
    n = max(1, int(np.ceil(abs(V_to - V_from) / step - 1e-9)))
    Vs = np.linspace(V_from, V_to, n + 1)
    g = np.asarray(gap, dtype=float)
    for v_prev, v in zip(Vs[:-1], Vs[1:]):
        cand = np.array(gaps_from_cover(band_cover(float(v), level))).reshape(-1, 2)
        shifted = g + ALPHA * (v - v_prev)
        overlap = np.minimum(cand[:, 1], shifted[1]) - np.maximum(cand[:, 0], shifted[0])
        hits = np.nonzero(overlap > 0)[0]
        if len(hits) != 1:
            raise LookupError(f"gap {tuple(g)} has {len(hits)} matches at V={v:.4g}")
        g = cand[hits[0]]
    return float(g[0]), float(g[1])
