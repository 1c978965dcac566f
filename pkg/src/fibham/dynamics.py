"""Periodic orbits of the trace map and the dimension estimate built on them.

At ``V = 0`` the semiconjugacy turns periodic points of the cat map into
periodic points of ``T`` on ``S_0``: if ``A^n p = ±p`` then ``F(p)`` has
period ``n``.  Away from the four singular points these orbits are
hyperbolic and persist for ``V > 0``; we follow them by homotopy in ``V``
with a Gauss-Newton corrector and read off their unstable multipliers.

From the ensemble of period-``n`` orbits on ``S_V``,

* the Lyapunov exponent is the mean of ``log(multiplier)/n``;
* the entropy is ``log #Fix(T^n)/n``;
* the dimension of the density of states is their ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ContinuationLost, DegenerateSpectrum, EmptyEnsemble
from .serialize import SCHEMA_VERSION, csv_text, dumps
from .tracemap import (
    SINGULARITIES,
    SurfacePoint,
    TorusPoint,
    cat_map_step,
    fricke_vogt,
    semiconjugacy,
)

__all__ = [
    "PeriodicOrbitRecord",
    "DimensionComputation",
    "ENTROPY_CONSTANT",
    "periodic_points_A",
    "fixed_point_count",
    "lift_and_dedup",
    "seed_orbits",
    "periodic_orbit_from_point",
    "continue_orbit",
    "orbit_multiplier",
    "orbit_ensemble",
    "lyapunov_estimate",
    "entropy_estimate",
    "dv_estimate",
    "select_period",
    "ensemble_csv",
]

#: reference topological entropy, log((3 + sqrt 5)/2)
ENTROPY_CONSTANT = math.log((3.0 + math.sqrt(5.0)) / 2.0)

V_STEP = 0.01
CLOSURE_TOL = 1e-10
LOST_TOL = 1e-6
MAX_PERIOD = 20

_SINGULAR_SEEDS = frozenset(
    (Fraction(a, 2), Fraction(b, 2)) for a in (0, 1) for b in (0, 1)
)


@dataclass
class PeriodicOrbitRecord:
    """A periodic orbit of ``T`` on ``S_V`` together with its cat-map origin."""

    period: int
    torus_seed: TorusPoint | None
    points: np.ndarray
    V: float
    multiplier: float = float("nan")
    unstable_direction: np.ndarray | None = field(default=None, repr=False)
    converged: bool = False
    residual: float = float("inf")

    @property
    def surface_points(self) -> list[SurfacePoint]:
        return [SurfacePoint.from_array(p) for p in self.points]

    def to_dict(self) -> dict:
        seed = None if self.torus_seed is None else [str(self.torus_seed.theta), str(self.torus_seed.phi)]
        return {
            "schema_version": SCHEMA_VERSION,
            "period": self.period,
            "torus_seed": seed,
            "V": self.V,
            "points": self.points,
            "multiplier": self.multiplier,
            "unstable_direction": self.unstable_direction,
            "converged": self.converged,
            "residual": self.residual,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


@dataclass
class DimensionComputation:
    """Entropy, Lyapunov exponent and their ratio from one orbit ensemble.

    ``d_V`` uses the entropy counted from the same ensemble.  ``d_V_paper_constant``
    divides :data:`ENTROPY_CONSTANT` instead; it is reported alongside because
    the two normalisations differ by a factor of two.  ``normalization_to_one``
    names the variant whose small-``V`` limit is consistent with ``1``.
    """

    V: float
    period: int
    orbit_count: int
    point_count: int
    lyap: float
    entropy: float
    d_V: float
    d_V_paper_constant: float
    error: float
    lost: int = 0
    normalization_to_one: str = "self_consistent"

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["schema_version"] = SCHEMA_VERSION
        d["entropy_constant"] = ENTROPY_CONSTANT
        return d

    def to_json(self) -> str:
        return dumps(self.to_dict())


# --- periodic points of the cat map -------------------------------------


def _mat_pow(n: int) -> tuple[int, int, int, int]:
    a, b, c, d = 1, 0, 0, 1
    for _ in range(n):
        a, b, c, d = a + b, a, c + d, c
    return a, b, c, d


def fixed_point_count(n: int, sign: int = 1) -> int:
    """``|det(A^n - sign I)|``, the number of torus points with ``A^n p = sign p``."""
    a, b, c, d = _mat_pow(n)
    return abs((a - sign) * (d - sign) - b * c)


def periodic_points_A(n: int, sign: int = 1) -> list[TorusPoint]:
    """All torus points with ``A^n p = sign * p``, as exact rationals.

    The solutions form the finite group ``M^{-1} Z^2 / Z^2`` with
    ``M = A^n - sign I``.  It is generated by the columns of ``adj(M)/D``,
    ``D = |det M|``, and enumerated by closing under addition.
    """
    if not 1 <= n <= MAX_PERIOD:
        raise ValueError(f"period must be in [1, {MAX_PERIOD}]")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    a, b, c, d = _mat_pow(n)
    m00, m01, m10, m11 = a - sign, b, c, d - sign
    D = abs(m00 * m11 - m01 * m10)
    # adjugate columns generate the solution group inside (Z/D)^2
    g1 = (m11 % D, -m10 % D)
    g2 = (-m01 % D, m00 % D)
    sub = {(0, 0)}
    p = g1
    while p not in sub:
        sub.add(p)
        p = ((p[0] + g1[0]) % D, (p[1] + g1[1]) % D)
    group = set(sub)
    shift = g2
    while shift not in group:
        group.update(((u + shift[0]) % D, (v + shift[1]) % D) for u, v in sub)
        shift = ((shift[0] + g2[0]) % D, (shift[1] + g2[1]) % D)
    assert len(group) == D
    return [TorusPoint(Fraction(u, D), Fraction(v, D)) for u, v in sorted(group)]


def _key(t: TorusPoint) -> tuple[Fraction, Fraction]:
    return (Fraction(t.theta), Fraction(t.phi))


def _class_key(t: TorusPoint) -> tuple[Fraction, Fraction]:
    return min(_key(t), _key(t.negated()))


def lift_and_dedup(points) -> list[tuple[TorusPoint, bool]]:
    """One representative per class ``p ~ -p``, each with a flag for singular image.

    A class is singular when ``F`` maps it to one of the four conic points,
    which happens exactly for the 2-torsion points.
    """
    seen: dict = {}
    for t in points:
        k = _class_key(t)
        if k not in seen:
            seen[k] = (TorusPoint(*k), k in _SINGULAR_SEEDS)
    return [seen[k] for k in sorted(seen)]


@lru_cache(maxsize=None)
def seed_orbits(n: int) -> tuple[tuple[TorusPoint, int], ...]:
    """Non-singular cycles of ``A`` modulo ``±`` whose period divides ``n``.

    Returns ``(seed, minimal_period)`` pairs, one per cycle.  Together the
    cycles account for every non-singular point of ``Fix(T^n)`` on ``S_0``.
    """
    pts = periodic_points_A(n, 1) + periodic_points_A(n, -1)
    classes = lift_and_dedup(pts)
    visited = set()
    out = []
    for rep, singular in classes:
        k = _key(rep)
        if singular or k in visited:
            continue
        m, q = 0, rep
        while True:
            visited.add(_class_key(q))
            q = cat_map_step(q)
            m += 1
            if _class_key(q) == k:
                break
        out.append((rep, m))
    return tuple(out)


# --- orbits on S_V ---------------------------------------------------------


def _orbit_and_jacobian(p: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orbit points, ``T^n(p)`` and the chain-rule product ``DT^n(p)``."""
    J = np.eye(3)
    x, y, z = p
    pts = np.empty((n, 3))
    for i in range(n):
        pts[i] = (x, y, z)
        J = np.array([[2.0 * y, 2.0 * x, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]) @ J
        x, y, z = 2.0 * x * y - z, x, y
    return pts, np.array([x, y, z]), J


def _grad_g(p: np.ndarray) -> np.ndarray:
    x, y, z = p
    return np.array([2.0 * (x - y * z), 2.0 * (y - x * z), 2.0 * (z - x * y)])


def _residual(p: np.ndarray, n: int, V: float) -> np.ndarray:
    _, q, _ = _orbit_and_jacobian(p, n)
    return np.append(q - p, fricke_vogt(p) - V * V / 4.0)


def _correct(p: np.ndarray, n: int, V: float, max_iter: int = 40) -> tuple[np.ndarray, float]:
    """Damped Gauss-Newton on ``[T^n(p) - p, G(p) - V^2/4]``.

    The 4x3 system is solved in the least-squares sense; it is consistent at
    a solution but its 3x3 part is singular along the orbit direction at
    ``V = 0``, which the extra row and the least-squares solve handle.
    """
    r = _residual(p, n, V)
    res = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if res <= CLOSURE_TOL * 1e-2:
            break
        _, _, J = _orbit_and_jacobian(p, n)
        jac = np.vstack([J - np.eye(3), _grad_g(p)])
        dp = np.linalg.lstsq(jac, -r, rcond=None)[0]
        step = 1.0
        while step > 1e-4:
            cand = p + step * dp
            r_c = _residual(cand, n, V)
            res_c = float(np.max(np.abs(r_c)))
            if res_c < res or res_c <= CLOSURE_TOL * 1e-2:
                break
            step *= 0.5
        else:
            break
        p, r, res = cand, r_c, res_c
    return p, res


def periodic_orbit_from_point(
    p, period: int, V: float | None = None, torus_seed: TorusPoint | None = None
) -> PeriodicOrbitRecord:
    """Record for a point already known to be periodic; the multiplier is filled in."""
    p = np.asarray(tuple(p), dtype=float)
    if V is None:
        V = 2.0 * math.sqrt(max(fricke_vogt(p), 0.0))
    pts, q, _ = _orbit_and_jacobian(p, period)
    res = float(np.max(np.abs(q - p)))
    rec = PeriodicOrbitRecord(period, torus_seed, pts, float(V), converged=res <= CLOSURE_TOL, residual=res)
    orbit_multiplier(rec)
    return rec


def continue_orbit(
    seed: TorusPoint, period: int, V_target: float, steps: int | None = None
) -> PeriodicOrbitRecord:
    """Follow the orbit of ``F(seed)`` from ``S_0`` to ``S_{V_target}``.

    ``steps`` equal increments are taken (default: increments of 0.01); an
    increment whose corrector fails is halved until it succeeds.  Raises
    :class:`ContinuationLost` when even tiny increments fail.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    if V_target < 0:
        raise ValueError("coupling must be >= 0")
    key = (Fraction(seed.theta), Fraction(seed.phi)) if isinstance(seed.theta, Fraction) else None
    if key is not None and _class_key(seed) in _SINGULAR_SEEDS:
        raise ValueError("seed maps to a conic singularity; its orbit is not continued")
    if steps is None:
        steps = max(1, int(math.ceil(V_target / V_STEP - 1e-9)))
    p = semiconjugacy(seed).as_array()
    p, res = _correct(p, period, 0.0)
    V, dV = 0.0, V_target / steps if steps else 0.0
    min_dV = dV * 2.0 ** -8
    while V < V_target - 1e-15:
        h = min(dV, V_target - V)
        q, res = _correct(p, period, V + h)
        if res <= CLOSURE_TOL:
            p, V = q, V + h
            continue
        dV = h / 2.0
        if dV < min_dV:
            raise ContinuationLost(
                f"period-{period} orbit from {seed} lost near V={V:.4g} (residual {res:.2e})"
            )
    res = float(np.max(np.abs(_residual(p, period, V_target))))
    if res > LOST_TOL:
        raise ContinuationLost(f"period-{period} orbit from {seed}: residual {res:.2e} at V={V_target}")
    pts, _, _ = _orbit_and_jacobian(p, period)
    rec = PeriodicOrbitRecord(
        period, seed, pts, float(V_target), converged=res <= CLOSURE_TOL, residual=res
    )
    if rec.converged:
        orbit_multiplier(rec)
    return rec


def orbit_multiplier(rec: PeriodicOrbitRecord) -> float:
    """Largest eigenvalue modulus of ``DT^n`` along the orbit; stores the unstable vector."""
    _, _, J = _orbit_and_jacobian(rec.points[0], rec.period)
    w, vecs = np.linalg.eig(J)
    order = np.argsort(-np.abs(w))
    top, second = abs(w[order[0]]), abs(w[order[1]])
    if top - second < 1e-8 * top:
        raise DegenerateSpectrum(f"leading multipliers {top:.12g} and {second:.12g} coincide")
    v = np.real(vecs[:, order[0]])
    rec.multiplier = float(top)
    rec.unstable_direction = v / np.linalg.norm(v)
    return rec.multiplier


# --- ensembles and estimates ----------------------------------------------


@dataclass
class _Ensemble:
    period: int
    V: float
    records: list
    lost: int


def _same_orbit(a: PeriodicOrbitRecord, b: PeriodicOrbitRecord, tol: float = 1e-7) -> bool:
    if a.period != b.period:
        return False
    d = np.max(np.abs(a.points[:, None, :] - b.points[None, :, :]), axis=2)
    return bool(np.all(d.min(axis=1) < tol))


def distinct_orbits(records) -> list[PeriodicOrbitRecord]:
    """Drop records that trace the same point set as an earlier one."""
    out: list[PeriodicOrbitRecord] = []
    for r in records:
        if not any(_same_orbit(r, s) for s in out):
            out.append(r)
    return out


@lru_cache(maxsize=64)
def _ensemble(n: int, V: float) -> _Ensemble:
    recs, lost = [], 0
    for seed, m in seed_orbits(n):
        try:
            rec = continue_orbit(seed, m, V)
        except (ContinuationLost, DegenerateSpectrum):
            lost += 1
            continue
        if rec.converged:
            recs.append(rec)
        else:
            lost += 1
    return _Ensemble(n, V, distinct_orbits(recs), lost)


def orbit_ensemble(V: float, period: int) -> list[PeriodicOrbitRecord]:
    """Converged, distinct orbits whose period divides ``period``."""
    return list(_ensemble(int(period), float(V)).records)


def _exact(records, n):
    return [r for r in records if r.period == n]


def lyapunov_estimate(V: float, period: int, records=None) -> float:
    """Mean of ``log(multiplier)/period`` over distinct orbits of exact period ``period``."""
    recs = orbit_ensemble(V, period) if records is None else distinct_orbits(records)
    recs = _exact(recs, period)
    if not recs:
        raise EmptyEnsemble(f"no converged period-{period} orbits at V={V}")
    return float(np.mean([math.log(r.multiplier) / period for r in recs]))


def entropy_estimate(V: float, period: int, records=None) -> float:
    """``log(#points of Fix(T^period))/period`` over the converged non-singular orbits."""
    recs = orbit_ensemble(V, period) if records is None else distinct_orbits(records)
    recs = [r for r in recs if period % r.period == 0]
    if not recs:
        raise EmptyEnsemble(f"no converged orbits of period dividing {period} at V={V}")
    return math.log(sum(r.period for r in recs)) / period


def _dv_at(V: float, n: int) -> tuple[float, float, float, _Ensemble]:
    ens = _ensemble(n, float(V))
    lyap = lyapunov_estimate(V, n, ens.records)
    ent = entropy_estimate(V, n, ens.records)
    return lyap, ent, ent / lyap, ens


def dv_estimate(V: float, period: int | None = None) -> DimensionComputation:
    """Dimension estimate ``entropy / lyap`` from period-``period`` orbits.

    The error combines the spread of per-orbit exponents with the change of
    the estimate between ``period - 2`` and ``period``, a proxy for the
    finite-period bias.
    """
    n = select_period(V) if period is None else int(period)
    lyap, ent, d, ens = _dv_at(V, n)
    exps = np.array([math.log(r.multiplier) / n for r in _exact(ens.records, n)])
    stat = d * (np.std(exps) / math.sqrt(len(exps))) / lyap if len(exps) > 1 else 0.0
    bias = 0.0
    if n >= 6:
        try:
            bias = abs(d - _dv_at(V, n - 2)[2])
        except EmptyEnsemble:
            pass
    return DimensionComputation(
        V=float(V),
        period=n,
        orbit_count=len(_exact(ens.records, n)),
        point_count=sum(r.period for r in ens.records),
        lyap=lyap,
        entropy=ent,
        d_V=d,
        d_V_paper_constant=ENTROPY_CONSTANT / lyap,
        error=float(math.hypot(stat, bias)),
        lost=ens.lost,
        normalization_to_one=_which_normalization(d, ENTROPY_CONSTANT / lyap),
    )


def _which_normalization(d_self: float, d_const: float) -> str:
    if abs(d_self - 1.0) <= abs(d_const - 1.0):
        return "self_consistent"
    return "entropy_constant"


def select_period(V: float, max_period: int = 14, min_success: float = 0.9) -> int:
    """Largest period ``<= max_period`` whose seeds continue to ``V`` at the required rate."""
    for n in range(max_period, 0, -1):
        ens = _ensemble(n, float(V))
        total = len(seed_orbits(n))
        if total and len(_exact(ens.records, n)) and 1 - ens.lost / total >= min_success:
            return n
    raise EmptyEnsemble(f"no period up to {max_period} continues to V={V}")


def ensemble_csv(records) -> str:
    """Flat table of an ensemble, one row per orbit."""
    rows = []
    for r in records:
        th, ph = ("", "") if r.torus_seed is None else (str(r.torus_seed.theta), str(r.torus_seed.phi))
        rows.append((r.period, th, ph, float(r.V), float(r.multiplier), int(r.converged)))
    return csv_text(["period", "seed_theta", "seed_phi", "V", "multiplier", "converged"], rows)
