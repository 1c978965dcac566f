"""Fibonacci trace map, its invariant surfaces and the zero-coupling torus model.

The trace map ``T(x, y, z) = (2xy - z, x, y)`` acts on half-traces of
transfer matrices over Fibonacci blocks.  It preserves the Fricke-Vogt
function ``G(x, y, z) = x^2 + y^2 + z^2 - 2xyz - 1`` and hence every cubic
surface ``S_V = {G = V^2/4}``.  Energies ``E`` of the Fibonacci Hamiltonian
with coupling ``V`` enter through the line ``((E - V)/2, E/2, 1) ⊂ S_V``.

At ``V = 0`` the bounded part of ``S_0`` is the image of the two-torus under
``(theta, phi) -> (cos 2pi(theta + phi), cos 2pi theta, cos 2pi phi)``, which
intertwines the cat map ``(theta, phi) -> (theta + phi, theta)`` with ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Union

import numpy as np

from .errors import NegativeInvariant

__all__ = [
    "SurfacePoint",
    "TorusPoint",
    "HalfTraceSeed",
    "HalfTraceSequence",
    "SINGULARITIES",
    "CAT_MATRIX",
    "DEFAULT_MAGNITUDE_CAP",
    "fibonacci",
    "trace_step",
    "trace_step_inv",
    "trace_jacobian",
    "fricke_vogt",
    "coupling_from_point",
    "line_point",
    "half_trace_sequence",
    "half_traces",
    "semiconjugacy",
    "cat_map_step",
]

DEFAULT_MAGNITUDE_CAP = 1e100

#: integer matrix of the cat map acting on column vectors (theta, phi)
CAT_MATRIX = np.array([[1, 1], [1, 0]], dtype=np.int64)


@dataclass(frozen=True)
class SurfacePoint:
    """A point of R^3 in trace coordinates."""

    x: float
    y: float
    z: float

    @property
    def invariant(self) -> float:
        """Fricke-Vogt value ``G`` of the point."""
        return fricke_vogt(self)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "SurfacePoint":
        x, y, z = (float(v) for v in a)
        return cls(x, y, z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))


PointLike = Union[SurfacePoint, "np.ndarray", tuple]

#: conic singular points of the bounded part of S_0
SINGULARITIES = (
    SurfacePoint(1.0, 1.0, 1.0),
    SurfacePoint(-1.0, -1.0, 1.0),
    SurfacePoint(1.0, -1.0, -1.0),
    SurfacePoint(-1.0, 1.0, -1.0),
)


@dataclass(frozen=True)
class TorusPoint:
    """Angle coordinates on R^2/Z^2, always reduced into [0, 1).

    Coordinates may be floats or :class:`fractions.Fraction`; rational input
    stays exact, which the periodic-point enumeration relies on.
    """

    theta: Real
    phi: Real

    def __post_init__(self):
        object.__setattr__(self, "theta", _mod1(self.theta))
        object.__setattr__(self, "phi", _mod1(self.phi))

    def negated(self) -> "TorusPoint":
        return TorusPoint(-self.theta, -self.phi)

    def as_floats(self) -> tuple[float, float]:
        return float(self.theta), float(self.phi)


def _mod1(v):
    if isinstance(v, (Fraction, int)):
        return Fraction(v) % 1
    r = float(v) % 1.0
    # float modulo can round a tiny negative number up to exactly 1.0
    return 0.0 if r >= 1.0 else r


@dataclass(frozen=True)
class HalfTraceSeed:
    """Energy and coupling defining the initial half-traces ``(x1, x0, x_-1)``."""

    E: float
    V: float

    def __post_init__(self):
        if self.V < 0:
            raise ValueError(f"coupling must be >= 0, got {self.V}")

    @property
    def triple(self) -> tuple[float, float, float]:
        return ((self.E - self.V) / 2.0, self.E / 2.0, 1.0)


@dataclass(frozen=True)
class HalfTraceSequence:
    """Half-traces ``x_{-1}, x_0, ..., x_n``.

    ``values[j]`` holds ``x_{j-1}``; use :meth:`at` for index arithmetic in the
    natural numbering.  When the magnitude cap was exceeded the sequence stops
    at the first offending term and ``overflow_index`` records its index.
    """

    values: np.ndarray
    overflow: bool = False
    overflow_index: int | None = None

    def at(self, k: int) -> float:
        return float(self.values[k + 1])

    @property
    def last_index(self) -> int:
        return len(self.values) - 2


def fibonacci(k: int) -> int:
    """Fibonacci numbers indexed so that ``x_k`` is a polynomial of degree ``F_k``.

    ``F_-1 = 0, F_0 = F_1 = 1, F_2 = 2, F_3 = 3, F_4 = 5, ...``
    """
    if k < -1:
        raise ValueError("fibonacci index must be >= -1")
    a, b = 0, 1
    for _ in range(k + 1):
        a, b = b, a + b
    return a


def _xyz(p: PointLike) -> tuple[float, float, float]:
    if isinstance(p, SurfacePoint):
        return p.x, p.y, p.z
    x, y, z = p
    return float(x), float(y), float(z)


def trace_step(p: PointLike) -> SurfacePoint:
    x, y, z = _xyz(p)
    return SurfacePoint(2.0 * x * y - z, x, y)


def trace_step_inv(p: PointLike) -> SurfacePoint:
    x, y, z = _xyz(p)
    return SurfacePoint(y, z, 2.0 * y * z - x)


def trace_jacobian(p: PointLike) -> np.ndarray:
    """Derivative of :func:`trace_step` at ``p``; determinant is -1 everywhere."""
    x, y, _ = _xyz(p)
    return np.array([[2.0 * y, 2.0 * x, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def fricke_vogt(p: PointLike) -> float:
    x, y, z = _xyz(p)
    return x * x + y * y + z * z - 2.0 * x * y * z - 1.0


def coupling_from_point(p: PointLike, tol: float = 1e-12) -> float:
    """Coupling ``V >= 0`` of the surface ``S_V`` through ``p``."""
    g = fricke_vogt(p)
    if g < -tol:
        raise NegativeInvariant(f"Fricke-Vogt value {g!r} < 0: point lies on no real S_V")
    return 2.0 * math.sqrt(max(g, 0.0))


def line_point(E: float, V: float) -> SurfacePoint:
    """Initial condition of energy ``E`` on the line of couplings ``V``."""
    if V < 0:
        raise ValueError(f"coupling must be >= 0, got {V}")
    return SurfacePoint((E - V) / 2.0, E / 2.0, 1.0)


def half_trace_sequence(
    seed: HalfTraceSeed, k_max: int, cap: float = DEFAULT_MAGNITUDE_CAP
) -> HalfTraceSequence:
    """Iterate ``x_{k+1} = 2 x_k x_{k-1} - x_{k-2}`` from the seed up to ``x_{k_max}``."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    x1, x0, xm1 = seed.triple
    vals = [xm1, x0, x1]
    if abs(x0) > cap or abs(x1) > cap:
        k = 0 if abs(x0) > cap else 1
        return HalfTraceSequence(np.array(vals[: k + 2]), True, k)
    a, b, c = x1, x0, xm1
    for k in range(2, k_max + 1):
        a, b, c = 2.0 * a * b - c, a, b
        vals.append(a)
        if not abs(a) <= cap:
            return HalfTraceSequence(np.array(vals), True, k)
    return HalfTraceSequence(np.array(vals), False, None)


def half_traces(E, V: float, k: int, derivative: bool = False):
    """Vectorised ``x_k(E)`` (and ``dx_k/dE`` when requested) for an array of energies.

    No overflow guard: callers pass energies near the spectrum where the
    values stay moderate, or tolerate ``inf``/``nan`` entries.
    """
    E = np.asarray(E, dtype=float)
    a = (E - V) / 2.0
    b = E / 2.0
    if k < 0:
        raise ValueError("k must be >= 0")
    if not derivative:
        if k == 0:
            return b.copy()
        c = np.ones_like(E)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(k - 1):
                a, b, c = 2.0 * a * b - c, a, b
        return a
    da = np.full_like(E, 0.5)
    if k == 0:
        return b.copy(), da
    db = np.full_like(E, 0.5)
    c = np.ones_like(E)
    dc = np.zeros_like(E)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(k - 1):
            a, b, c, da, db, dc = (
                2.0 * a * b - c,
                a,
                b,
                2.0 * (da * b + a * db) - dc,
                da,
                db,
            )
    return a, da


def semiconjugacy(t: TorusPoint) -> SurfacePoint:
    """Map the torus onto the bounded part of ``S_0``; two-to-one, even in ``t``."""
    th, ph = t.as_floats()
    tau = 2.0 * math.pi
    return SurfacePoint(math.cos(tau * (th + ph)), math.cos(tau * th), math.cos(tau * ph))


def cat_map_step(t: TorusPoint) -> TorusPoint:
    return TorusPoint(t.theta + t.phi, t.theta)
