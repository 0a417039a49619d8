"""``relequil`` command line: simulate, equilibrium, certify, sweep.

Exit codes: 0 success (or Stable), 1 NotCertified, 2 usage/config error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import OPTIONAL_SCALARS, PARAM_KEYS, RunConfig, config_from_mapping, load_config, reference_config
from .errors import ConfigError, NoCircularOrbit, RelequilError
from .integrator import IntegratorConfig, integrate, orbit_distance_mod_rotation, state_distance
from .magnet_potential import POTENTIALS
from .relative_equilibria import make_relative_equilibrium, verify_relative_equilibrium
from .stability import STABLE, certify_orbit, closed_form_multipliers, solve_multipliers

EXIT_OK, EXIT_NOT_CERTIFIED, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

SWEEP_PARAMETERS = ("r0", "m3", "n3", "kappa", "l", "reduced_mass", "alpha")
SWEEP_HEADER = ["axis1", "axis2", "verdict", "margin", "p0", "omega"]


def _err(message: str) -> None:
    print(f"relequil: {message}", file=sys.stderr)


def _dump_json(data, out: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run_config(args) -> RunConfig:
    if args.paper:
        cfg = reference_config()
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ConfigError("either --config PATH or --paper is required")
    if args.potential:
        cfg = replace(cfg, potential_name=args.potential)
    return cfg


def _radius(args, cfg: RunConfig) -> float:
    r0 = args.r0 if args.r0 is not None else cfg.radius()
    if r0 is None:
        raise ConfigError("orbit radius missing: pass --r0 or set r0/x0 in the config")
    if not r0 > 0:
        raise ConfigError(f"--r0 must be positive, got {r0!r}")
    return r0


def cmd_simulate(args) -> int:
    if args.t_end is None or not args.t_end > 0:
        _err(f"--t-end must be a positive number of seconds, got {args.t_end!r}")
        return EXIT_USAGE
    cfg = _run_config(args)
    if cfg.state is None:
        raise ConfigError("simulate needs an initial state (x0, p0, mu, m, nu, n) in the config")
    icfg = IntegratorConfig(
        rel_tol=args.rtol, abs_tol=args.atol, project_casimirs=not args.no_project, record_every=args.record_every
    )
    try:
        traj = integrate(cfg.state, args.t_end, cfg.params, cfg.potential(), icfg)
    except RelequilError as err:
        _err(f"integration failed: {type(err).__name__}: {err}")
        return EXIT_RUNTIME
    if args.out:
        traj.to_csv(args.out)
    summary = {
        "t_end": float(traj.times[-1]),
        "records": len(traj),
        "max_energy_drift": float(traj.energy_drift.max()),
        "max_momentum_drift": float(traj.momentum_drift.max()),
        "max_casimir_drift": float(traj.casimir_drift.max()),
        "final_distance": state_distance(traj.final_state, cfg.state),
        "final_distance_mod_rotation": orbit_distance_mod_rotation(traj.final_state, cfg.state),
        **traj.stats,
    }
    _dump_json(summary, None)
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    cfg = _run_config(args)
    r0 = _radius(args, cfg)
    potential = cfg.potential()
    m3, n3 = cfg.spins()
    re = make_relative_equilibrium(r0, m3, n3, cfg.params, potential)
    check = verify_relative_equilibrium(re, cfg.params, potential)
    mult = solve_multipliers(re.state, cfg.params, potential)
    _dump_json(
        {
            "r0": re.r0,
            "p0": re.p0,
            "omega": re.omega,
            "period": re.period,
            "multipliers": mult.to_dict(),
            "multipliers_closed_form": closed_form_multipliers(re.state, cfg.params, potential).to_dict(),
            "stationarity_residual": mult.residual,
            "equilibrium_residual": check.residual,
            "block_residuals": check.block_residuals,
        },
        args.out,
    )
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = _run_config(args)
    r0 = _radius(args, cfg)
    report = certify_orbit(r0, cfg.spins(), cfg.params, cfg.potential())
    _dump_json(report.to_json(), args.out)
    for note in report.notes:
        _err(f"warning: {note}")
    return EXIT_OK if report.verdict == STABLE else EXIT_NOT_CERTIFIED


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis | None
    baseline: RunConfig
    out: Path


def _parse_axis(key: str, text: str) -> Axis:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"{key}: expected 'name, min, max, count', got {text!r}")
    name = parts[0]
    if name not in SWEEP_PARAMETERS:
        raise ConfigError(f"{key}: unknown sweep parameter {name!r}; choose from {list(SWEEP_PARAMETERS)}")
    try:
        lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r}") from None
    if count < 2:
        raise ConfigError(f"{key}: count must be at least 2")
    return Axis(name, lo, hi, count)


def load_sweep_spec(path) -> SweepSpec:
    """Sweep file: ``axis1``/``axis2`` lines, a ``baseline`` and an ``out`` path.

    ``baseline`` is ``reference`` or a config path relative to the sweep file;
    parameter keys given directly in the sweep file override it.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read sweep spec {str(path)!r}: {err.strerror}") from None
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value.strip("\"'")
    if "axis1" not in values:
        raise ConfigError(f"{path}: axis1 is required")
    axis1 = _parse_axis("axis1", values.pop("axis1"))
    axis2 = _parse_axis("axis2", values.pop("axis2")) if "axis2" in values else None
    out = Path(values.pop("out", "sweep.csv"))
    if not out.is_absolute():
        out = path.parent / out
    base_ref = values.pop("baseline", "reference")
    base = reference_config() if base_ref == "reference" else load_config(path.parent / base_ref)
    if values:
        merged = {k: v for k, v in base.to_dict().items() if k in PARAM_KEYS + OPTIONAL_SCALARS + ("potential",)}
        merged.update(values)
        overrides = config_from_mapping(merged, str(path))
        base = replace(overrides, state=base.state)
    return SweepSpec(axis1, axis2, base, out)


def _apply(cfg: RunConfig, name: str, value: float) -> RunConfig:
    p = cfg.params
    if name == "r0":
        return replace(cfg, r0=value)
    if name in ("m3", "n3"):
        return replace(cfg, **{name: value})
    if name == "kappa":
        return replace(cfg, params=replace(p, kappa1=value, kappa2=value))
    if name == "l":
        return replace(cfg, params=replace(p, l1=value, l2=value))
    if name == "alpha":
        return replace(cfg, params=replace(p, alpha=value, beta=value))
    return replace(cfg, params=replace(p, **{name: value}))


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def evaluate_point(cfg: RunConfig, r0: float) -> tuple[str, float | None, float | None, float | None]:
    """One grid point: (verdict, margin, p0, omega). Failures are reported in-band."""
    try:
        report = certify_orbit(r0, cfg.spins(), cfg.params, cfg.potential())
    except NoCircularOrbit:
        return ("none", None, None, None)
    except (RelequilError, ValueError, np.linalg.LinAlgError) as err:
        return (f"error:{type(err).__name__}", None, None, None)
    return (report.verdict, report.margin, report.p0, report.omega)


def _point_job(job):
    cfg, r0 = job
    return evaluate_point(cfg, r0)


def sweep_workers() -> int:
    raw = os.environ.get("RELEQUIL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"RELEQUIL_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("RELEQUIL_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, workers: int = 1) -> str:
    """Evaluate the grid and return the CSV text in grid order."""
    grid = []
    for v1 in spec.axis1.values():
        for v2 in spec.axis2.values() if spec.axis2 else [None]:
            cfg = _apply(spec.baseline, spec.axis1.name, float(v1))
            if v2 is not None:
                cfg = _apply(cfg, spec.axis2.name, float(v2))
            grid.append((float(v1), v2, cfg))
    jobs = []
    for _, _, cfg in grid:
        r0 = cfg.radius()
        if r0 is None:
            raise ConfigError("sweep baseline has no orbit radius (set r0)")
        jobs.append((cfg, r0))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_job, jobs))
    else:
        results = [_point_job(job) for job in jobs]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for (v1, v2, _), (verdict, margin, p0, omega) in zip(grid, results):
        writer.writerow([_fmt(v1), _fmt(v2), verdict, _fmt(margin), _fmt(p0), _fmt(omega)])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.spec)
    if args.out:
        spec = replace(spec, out=Path(args.out))
    text = run_sweep(spec, sweep_workers())
    spec.out.write_text(text)
    print(f"wrote {spec.axis1.count * (spec.axis2.count if spec.axis2 else 1)} rows to {spec.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relequil", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="key = value parameter file (or .json)")
        p.add_argument("--paper", action="store_true", help="use the built-in reference parameter set")
        p.add_argument("--potential", choices=sorted(POTENTIALS), help="override the configured potential")
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("simulate", help="integrate a trajectory and write CSV")
    common(p)
    p.add_argument("--t-end", type=float, metavar="SECONDS")
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--record-every", type=float, metavar="SECONDS")
    p.add_argument("--no-project", action="store_true", help="disable Casimir projection")
    p.set_defaults(func=cmd_simulate)

    for name, func, text in (
        ("equilibrium", cmd_equilibrium, "solve the circular orbit and its multipliers"),
        ("certify", cmd_certify, "run the stability certificate"),
    ):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("--r0", type=float, metavar="METERS")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="certify a parameter grid and write CSV")
    p.add_argument("spec", metavar="SPEC", help="sweep specification file")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as err:
        _err(str(err))
        return EXIT_USAGE
    except RelequilError as err:
        stage = f" [{err.stage}]" if err.stage else ""
        _err(f"{type(err).__name__}{stage}: {err}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
