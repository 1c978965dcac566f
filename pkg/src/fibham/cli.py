"""Command-line experiment runner.

Every subcommand reads an optional JSON config, lets flags override its
keys, validates the result and only then computes.  Outputs are collected
in memory and written together with ``manifest.json`` once the whole run
has succeeded; on failure a JSON error document goes to stderr and the
exit status is nonzero.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, FibhamError
from .serialize import SCHEMA_VERSION, csv_text, dumps

COMMANDS = ("spectrum", "ids", "dos-scaling", "orbits", "dv", "report")

MAX_V = 1.0
MAX_LEVEL = 22
MAX_L = 200_000
MAX_PERIOD = 14


@dataclass
class ExperimentConfig:
    """Parameters shared by all subcommands; each command reads the ones it needs."""

    V: list = field(default_factory=lambda: [0.5])
    k: int = 12
    resolution: float = 1e-10
    L: int = 10_000
    omega: list = field(default_factory=lambda: [0.0])
    random_omegas: int = 0
    seed: int = 0
    energies: list = field(default_factory=lambda: [-3.0, 3.0, 400])
    E: list = field(default_factory=list)
    eps: list = field(default_factory=list)
    n_energies: int = 9
    period: int | None = None
    coarsest_level: int = 4
    out: str = "fibham-out"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError([f"unknown config key '{k}'" for k in unknown])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def omegas(self) -> list[float]:
        extra = np.random.default_rng(self.seed).uniform(0.0, 1.0, self.random_omegas).tolist()
        return [float(w) for w in self.omega] + extra

    def energy_grid(self) -> np.ndarray:
        lo, hi, n = self.energies
        return np.linspace(float(lo), float(hi), int(n))


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate(cfg: ExperimentConfig, command: str | None = None) -> list[str]:
    """All range violations and inconsistencies in ``cfg``; empty when it is usable."""
    diag = []
    if not isinstance(cfg.V, list) or not cfg.V:
        diag.append("V list must not be empty")
    else:
        for v in cfg.V:
            if not _is_num(v):
                diag.append(f"coupling {v!r} is not a number")
            elif v < 0:
                diag.append(f"coupling must be >= 0 (got {v})")
            elif v > MAX_V:
                diag.append(f"coupling must be <= {MAX_V} (got {v})")
    if not (isinstance(cfg.k, int) and 1 <= cfg.k <= MAX_LEVEL):
        diag.append(f"level k must be an integer in [1, {MAX_LEVEL}] (got {cfg.k})")
    if not (_is_num(cfg.resolution) and cfg.resolution > 0):
        diag.append("resolution must be > 0")
    if not (isinstance(cfg.L, int) and 1 <= cfg.L <= MAX_L):
        diag.append(f"system size L must be an integer in [1, {MAX_L}] (got {cfg.L})")
    for w in cfg.omega:
        if not (_is_num(w) and 0.0 <= w < 1.0):
            diag.append(f"phase omega must lie in [0, 1) (got {w})")
    if not (isinstance(cfg.random_omegas, int) and cfg.random_omegas >= 0):
        diag.append("random_omegas must be a non-negative integer")
    if not isinstance(cfg.seed, int):
        diag.append("seed must be an integer")
    if len(cfg.energies) != 3 or not all(_is_num(v) for v in cfg.energies):
        diag.append("energies must be [E_min, E_max, count]")
    elif not (cfg.energies[0] < cfg.energies[1] and int(cfg.energies[2]) >= 2):
        diag.append("energy grid needs E_min < E_max and at least 2 points")
    if cfg.period is not None and not (isinstance(cfg.period, int) and 1 <= cfg.period <= MAX_PERIOD):
        diag.append(f"period must be an integer in [1, {MAX_PERIOD}] (got {cfg.period})")
    if command == "report" and not (
        isinstance(cfg.coarsest_level, int) and isinstance(cfg.k, int) and 1 <= cfg.coarsest_level <= cfg.k - 2
    ):
        diag.append("coarsest_level must leave at least three levels up to k")
    if cfg.eps:
        eps = np.asarray(cfg.eps, dtype=float)
        if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
            diag.append("eps ladder must be positive and strictly decreasing")
        if isinstance(cfg.L, int) and cfg.L >= 1 and _valid_vs(cfg):
            spacing = (4.0 + max(cfg.V)) / cfg.L
            if eps.min() < spacing:
                diag.append(f"window below level spacing: eps {eps.min():.3g} < {spacing:.3g} at L={cfg.L}")
    if not (isinstance(cfg.n_energies, int) and cfg.n_energies >= 1):
        diag.append("n_energies must be a positive integer")
    elif command == "report" and cfg.n_energies < 5:
        diag.append("report needs at least 5 sample energies")
    if command == "report" and isinstance(cfg.V, list) and 0.0 in cfg.V:
        diag.append("report needs V > 0: the V = 0 spectrum is an interval")
    return diag


def _valid_vs(cfg) -> bool:
    return isinstance(cfg.V, list) and bool(cfg.V) and all(_is_num(v) and v >= 0 for v in cfg.V)


def _tag(V: float) -> str:
    return f"V{V:g}"


# --- commands ---------------------------------------------------------------


def _cmd_spectrum(cfg, out, log):
    from .spectrum import band_cover

    for V in cfg.V:
        c = band_cover(float(V), cfg.k, cfg.resolution)
        out[f"bands_{_tag(V)}_k{cfg.k}.csv"] = c.to_csv()
        out[f"bands_{_tag(V)}_k{cfg.k}.json"] = c.to_json()
        log(f"V={V:g} k={cfg.k}: {len(c)} bands, total length {c.total_length:.6g}")


def _cmd_ids(cfg, out, log):
    from .hamiltonian import PotentialSpec, ids_estimate, ids_free

    grid = cfg.energy_grid()
    summary = []
    for V in cfg.V:
        ests = []
        for i, w in enumerate(cfg.omegas()):
            est = ids_estimate(PotentialSpec(float(V), w), cfg.L, grid)
            ests.append(est)
            out[f"ids_{_tag(V)}_w{i}.csv"] = est.to_csv()
            row = {"V": float(V), "omega": est.omega, "L": cfg.L}
            if V == 0:
                row["sup_dev_free"] = est.sup_distance(ids_free)
                log(f"V=0 omega={est.omega:.6g}: sup |N - N_free| = {row['sup_dev_free']:.3e}")
            summary.append(row)
        if len(ests) > 1:
            spread = max(a.sup_distance(b) for a in ests for b in ests)
            summary.append({"V": float(V), "L": cfg.L, "omega_spread": spread})
            log(f"V={V:g}: sup-norm spread over {len(ests)} phases = {spread:.3e}")
    out["ids_summary.json"] = dumps({"schema_version": SCHEMA_VERSION, "rows": summary})


def _cmd_dos_scaling(cfg, out, log):
    from .hamiltonian import PotentialSpec, dos_weighted_energies, local_scaling_exponent

    rows, docs = [], []
    eps = cfg.eps or None
    for V in cfg.V:
        spec = PotentialSpec(float(V), cfg.omega[0] if cfg.omega else 0.0)
        energies = cfg.E or dos_weighted_energies(spec, cfg.L, cfg.n_energies)
        for est in local_scaling_exponent(spec, cfg.L, np.asarray(energies, dtype=float), eps):
            rows.append((float(V), est.E, est.exponent, est.fit_residual))
            docs.append(est.to_dict())
        med = float(np.median([r[2] for r in rows if r[0] == float(V)]))
        log(f"V={V:g}: median DOS exponent {med:.4f}")
    out["dos_scaling.csv"] = csv_text(["V", "E", "exponent", "fit_residual"], rows)
    out["dos_scaling.json"] = dumps({"schema_version": SCHEMA_VERSION, "estimates": docs})


def _cmd_orbits(cfg, out, log):
    from .dynamics import ensemble_csv, orbit_ensemble, select_period

    for V in cfg.V:
        n = cfg.period or select_period(float(V))
        recs = orbit_ensemble(float(V), n)
        out[f"orbits_{_tag(V)}_n{n}.csv"] = ensemble_csv(recs)
        out[f"orbits_{_tag(V)}_n{n}.json"] = dumps(
            {"schema_version": SCHEMA_VERSION, "orbits": [r.to_dict() for r in recs]}
        )
        log(f"V={V:g} n={n}: {len(recs)} distinct orbits")


def _cmd_dv(cfg, out, log):
    from .dynamics import dv_estimate

    comps = [dv_estimate(float(V), cfg.period) for V in cfg.V]
    for c in comps:
        log(
            f"V={c.V:g} n={c.period}: d_V={c.d_V:.4f} +- {c.error:.4f} "
            f"(constant-entropy variant {c.d_V_paper_constant:.4f}; "
            f"closer to 1: {c.normalization_to_one})"
        )
    header = ["V", "period", "orbit_count", "lyap", "entropy", "d_V", "d_V_err", "d_V_paper_constant"]
    rows = [(c.V, c.period, c.orbit_count, c.lyap, c.entropy, c.d_V, c.error, c.d_V_paper_constant) for c in comps]
    out["dv.csv"] = csv_text(header, rows)
    out["dv.json"] = dumps({"schema_version": SCHEMA_VERSION, "estimates": [c.to_dict() for c in comps]})


def _cmd_report(cfg, out, log):
    from .dimension import compare_report, report_csv

    reps = [
        compare_report(
            float(V),
            level=cfg.k,
            coarsest_level=cfg.coarsest_level,
            L=cfg.L,
            n_energies=cfg.n_energies,
            period=cfg.period,
            omega=cfg.omega[0] if cfg.omega else 0.0,
        )
        for V in cfg.V
    ]
    for r in reps:
        v = r.verdicts
        log(
            f"V={r.V:g}: box {r.box_dim:.4f}+-{r.box_dim_err:.4f}  d_V {r.d_V_dynamics:.4f}+-{r.d_V_err:.4f}  "
            f"DOS {r.dos_exponent_median:.4f}  i={v['i']} ii={v['ii']} iii={v['iii']}  [{r.inequality_status}]"
        )
    out["report.csv"] = report_csv(reps)
    out["report.json"] = dumps({"schema_version": SCHEMA_VERSION, "reports": [r.to_dict() for r in reps]})


_RUNNERS = {
    "spectrum": _cmd_spectrum,
    "ids": _cmd_ids,
    "dos-scaling": _cmd_dos_scaling,
    "orbits": _cmd_orbits,
    "dv": _cmd_dv,
    "report": _cmd_report,
}


def manifest(command: str, cfg: ExperimentConfig, files: dict) -> str:
    """Run manifest: config, its hash, library versions and a digest per output file."""
    return dumps(
        {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": cfg.to_dict(),
            "config_sha256": cfg.digest(),
            "versions": {"fibham": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
            "files": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(files.items())},
        }
    )


def run(command: str, cfg: ExperimentConfig, log=print) -> dict:
    """Validate and execute ``command``; returns the staged outputs without writing them."""
    if command not in _RUNNERS:
        raise ConfigError([f"unknown command '{command}'"])
    diag = validate(cfg, command)
    if diag:
        raise ConfigError(diag)
    out: dict = {}
    _RUNNERS[command](cfg, out, log)
    out["config.json"] = cfg.to_json()
    out["manifest.json"] = manifest(command, cfg, out)
    return out


def write_outputs(outdir: str | Path, files: dict) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (outdir / name).write_text(text)


# --- argument parsing -------------------------------------------------------


def _floats(s: str) -> list[float]:
    return [float(t) for t in s.split(",") if t.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--V", type=_floats, default=S, help="comma-separated couplings")
    p.add_argument("--k", type=int, default=S, help="approximant level")
    p.add_argument("--resolution", type=float, default=S, help="band-edge resolution")
    p.add_argument("--L", type=int, default=S, help="system size")
    p.add_argument("--omega", type=_floats, default=S, help="comma-separated phases")
    p.add_argument("--random-omegas", dest="random_omegas", type=int, default=S, help="extra random phases")
    p.add_argument("--seed", type=int, default=S, help="random seed for drawn phases")
    p.add_argument("--energies", type=_floats, default=S, help="E_min,E_max,count")
    p.add_argument("--E", type=_floats, default=S, help="explicit energies for dos-scaling")
    p.add_argument("--eps", type=_floats, default=S, help="decreasing window half-widths")
    p.add_argument("--n-energies", dest="n_energies", type=int, default=S, help="sample energies per V")
    p.add_argument("--period", type=int, default=S, help="orbit period (default: automatic)")
    p.add_argument("--coarsest-level", dest="coarsest_level", type=int, default=S)
    p.add_argument("--dry-run", action="store_true", help="validate the config and stop")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fibham", description="Fibonacci Hamiltonian experiments")
    parser.add_argument("--version", action="version", version=f"fibham {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectrum": "band covers of the spectrum",
        "ids": "integrated density of states curves",
        "dos-scaling": "local scaling exponents of the density of states",
        "orbits": "periodic-orbit ensembles continued to V",
        "dv": "dimension of the density of states from orbits",
        "report": "box dimension, d_V and DOS exponents side by side",
    }
    for name in COMMANDS:
        _add_common(sub.add_parser(name, help=helps[name]))
    return parser


def _config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    base = {}
    if ns.config:
        base = json.loads(Path(ns.config).read_text())
    flags = {k: v for k, v in vars(ns).items() if k not in ("config", "command", "dry_run")}
    base.update(flags)
    if "energies" in flags:
        e = flags["energies"]
        base["energies"] = [e[0], e[1], int(e[2])] if len(e) == 3 else e
    return ExperimentConfig.from_dict(base)


def _error_doc(exc: Exception) -> str:
    code = getattr(exc, "code", "error") if isinstance(exc, FibhamError) else type(exc).__name__
    doc = {"schema_version": SCHEMA_VERSION, "error": code, "message": str(exc)}
    if isinstance(exc, ConfigError):
        doc["diagnostics"] = exc.diagnostics
    return json.dumps(doc, sort_keys=True)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(ns)
        if ns.dry_run:
            diag = validate(cfg, ns.command)
            if diag:
                raise ConfigError(diag)
            print(json.dumps({"valid": True, "config_sha256": cfg.digest()}))
            return 0
        files = run(ns.command, cfg, log=lambda s: print(s, file=sys.stderr))
    except (FibhamError, ValueError, LookupError, OSError) as exc:
        print(_error_doc(exc), file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    write_outputs(cfg.out, files)
    print(json.dumps({"out": cfg.out, "files": sorted(files)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
