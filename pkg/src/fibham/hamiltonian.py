"""Finite Dirichlet restrictions of the Fibonacci Hamiltonian.

The operator acts on sites ``n = 1..L`` as
``(H u)_n = u_{n+1} + u_{n-1} + v_n u_n`` with ``v_n = V`` when
``frac(n alpha + omega)`` lies in ``[1 - alpha, 1)`` and ``0`` otherwise.
Eigenvalues below an energy are counted from the inertia of ``H - E``
through the LDL^T pivot recursion, so no diagonalisation is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import EmptyWindow
from .serialize import SCHEMA_VERSION, csv_text, dumps

__all__ = [
    "ALPHA",
    "PotentialSpec",
    "IdsEstimate",
    "ScalingExponentEstimate",
    "potential_value",
    "potential_word",
    "fibonacci_word",
    "count_eigenvalues_below",
    "ids_free",
    "ids_estimate",
    "dos_interval",
    "default_eps_ladder",
    "local_scaling_exponent",
    "dos_weighted_energies",
]

ALPHA = (math.sqrt(5.0) - 1.0) / 2.0

# pivots smaller than this are replaced by a signed copy of it
_PIVOT_FLOOR = 1e-14


@dataclass(frozen=True)
class PotentialSpec:
    """Coupling and phase of the potential; the frequency is always ``ALPHA``."""

    V: float
    omega: float = 0.0

    def __post_init__(self):
        if self.V < 0:
            raise ValueError(f"coupling must be >= 0, got {self.V}")
        object.__setattr__(self, "omega", float(self.omega) % 1.0)

    @property
    def alpha(self) -> float:
        return ALPHA


@dataclass
class IdsEstimate:
    """Finite-volume integrated density of states sampled on an energy grid."""

    V: float
    omega: float
    L: int
    energies: np.ndarray
    values: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.energies.tolist(), self.values.tolist()))

    def sup_distance(self, other) -> float:
        """Sup-norm distance to another estimate on the same grid, or to a callable."""
        ref = other(self.energies) if callable(other) else other.values
        return float(np.max(np.abs(self.values - ref)))

    def to_csv(self) -> str:
        return csv_text(["E", "N"], zip(self.energies.tolist(), self.values.tolist()))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "V": self.V,
            "omega": self.omega,
            "L": self.L,
            "E": self.energies,
            "N": self.values,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


@dataclass
class ScalingExponentEstimate:
    """Slope of ``log N(E - eps, E + eps)`` against ``log eps``."""

    E: float
    V: float
    exponent: float
    epsilons: np.ndarray
    fit_residual: float
    masses: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "E": self.E,
            "V": self.V,
            "exponent": self.exponent,
            "epsilons": self.epsilons,
            "masses": self.masses,
            "fit_residual": self.fit_residual,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def potential_value(spec: PotentialSpec, n) -> float:
    """``V`` if ``frac(n alpha + omega)`` is in ``[1 - alpha, 1)``, else ``0``; vectorises over ``n``."""
    frac = np.mod(np.asarray(n, dtype=float) * ALPHA + spec.omega, 1.0)
    out = np.where(frac >= 1.0 - ALPHA, spec.V, 0.0)
    return out if out.ndim else float(out)


def potential_word(spec: PotentialSpec, L: int) -> np.ndarray:
    """Diagonal ``v_1, ..., v_L`` of the restriction to ``[1, L]``."""
    return potential_value(spec, np.arange(1, L + 1))


def fibonacci_word(length: int) -> np.ndarray:
    """Prefix of the fixed point of the substitution ``1 -> 10, 0 -> 1``."""
    w = [1]
    while len(w) < length:
        w = [s for c in w for s in ((1, 0) if c else (1,))]
    return np.array(w[:length], dtype=np.int8)


def _count_below(diag: np.ndarray, E) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    cnt = np.zeros(E.shape, dtype=np.int64)
    d = np.ones_like(E)
    first = True
    for v in diag:
        d = (v - E) if first else (v - E) - 1.0 / d
        first = False
        small = np.abs(d) < _PIVOT_FLOOR
        if small.any():
            d = np.where(small, np.where(d < 0, -_PIVOT_FLOOR, _PIVOT_FLOOR), d)
        cnt += d < 0
    return cnt


def count_eigenvalues_below(spec: PotentialSpec, L: int, E):
    """Number of eigenvalues of the ``L x L`` restriction strictly below ``E``.

    Sylvester inertia: the count equals the number of negative pivots of
    ``H - E``.  Accepts an array of energies; the cost is ``O(L)`` per energy.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    out = _count_below(potential_word(spec, L), E)
    return out if out.ndim else int(out)


def ids_free(E):
    """Integrated density of states of the free Laplacian on the integers."""
    E = np.asarray(E, dtype=float)
    out = np.arccos(-np.clip(E, -2.0, 2.0) / 2.0) / np.pi
    return out if out.ndim else float(out)


def ids_estimate(spec: PotentialSpec, L: int, energies) -> IdsEstimate:
    E = np.asarray(energies, dtype=float)
    if np.any(np.diff(E) < 0):
        raise ValueError("energies must be sorted")
    N = count_eigenvalues_below(spec, L, E) / L
    return IdsEstimate(V=spec.V, omega=spec.omega, L=int(L), energies=E, values=np.asarray(N, dtype=float))


def dos_interval(spec: PotentialSpec, L: int, a: float, b: float) -> float:
    """Fraction of eigenvalues in ``[a, b)``."""
    if not a < b:
        raise ValueError("need a < b")
    na, nb = count_eigenvalues_below(spec, L, np.array([a, b]))
    return float(nb - na) / L


def default_eps_ladder(L: int, top: float = 0.1, floor: float = 1e-4) -> np.ndarray:
    """Geometric ladder ``top * 2**-j`` stopping before ``max(floor, 10 / L)``."""
    stop = max(floor, 10.0 / L)
    n = int(math.floor(math.log2(top / stop) + 1e-12)) + 1
    return top * 0.5 ** np.arange(max(n, 0))


def _masses(spec: PotentialSpec, L: int, energies: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """``N_L(E - eps, E + eps)`` for every pair, as an array ``(len(E), len(eps))``."""
    lo = energies[:, None] - eps[None, :]
    hi = energies[:, None] + eps[None, :]
    c = count_eigenvalues_below(spec, L, np.concatenate([lo.ravel(), hi.ravel()]))
    c = np.asarray(c).reshape(2, *lo.shape)
    return (c[1] - c[0]) / L


def local_scaling_exponent(spec: PotentialSpec, L: int, E, eps_list=None):
    """Local scaling exponent of the density of states at ``E``.

    ``E`` may be a scalar or an array; a list of estimates is returned for
    arrays.  Raises :class:`EmptyWindow` if some window holds no eigenvalue.
    """
    eps = default_eps_ladder(L) if eps_list is None else np.asarray(eps_list, dtype=float)
    if len(eps) < 2 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise ValueError("eps_list must hold at least two strictly decreasing positive scales")
    scalar = np.ndim(E) == 0
    Es = np.atleast_1d(np.asarray(E, dtype=float))
    m = _masses(spec, L, Es, eps)
    out = []
    for e, row in zip(Es, m):
        if np.any(row <= 0):
            j = int(np.argmax(row <= 0))
            raise EmptyWindow(f"no eigenvalues within {eps[j]:.3g} of E={e:.6g} at L={L}")
        x, y = np.log(eps), np.log(row)
        slope, icpt = np.polyfit(x, y, 1)
        resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
        out.append(ScalingExponentEstimate(float(e), spec.V, float(slope), eps, resid, row))
    return out[0] if scalar else out


def dos_weighted_energies(spec: PotentialSpec, L: int, m: int = 9) -> np.ndarray:
    """Eigenvalues at evenly spaced quantiles ``(j + 1/2)/m`` of the finite-volume IDS.

    Energies drawn this way are typical for the density of states rather than
    for Lebesgue measure, which matters on a zero-measure spectrum.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    idx = np.floor((np.arange(m) + 0.5) / m * L).astype(np.int64)
    d = potential_word(spec, L)
    off = np.ones(L - 1)
    # one bisection per index; selecting a whole index range would cost O(L m)
    return np.array(
        [eigvalsh_tridiagonal(d, off, select="i", select_range=(int(i), int(i)))[0] for i in idx]
    )
