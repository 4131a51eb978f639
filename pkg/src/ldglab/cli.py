"""Command-line driver ``nll``: configurable campaigns with CSV/JSON artifacts.

Configuration is TOML with sections [material], [geometry], [solver],
[campaign], [output]; every value has a default reproducing the reference
setup (B=0.64e4, C=0.35e4, A=-B^2/3C, lambda_bar_sq=200, n=129).  The
subcommand selects the campaign kind and overrides [campaign].kind.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:                       # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .core import MaterialParams, ParameterError
from .grid import GeometryError, build_grid
from .solvers import SolverConfig, newton_solve, ic_wors, ic_bd, ic_esc, ic_escaped
from .energy import rho0_sweep, rho1_sweep
from .geodesics import transition_costs, cost_sweep, export_path
from .gamma import classify_regime, ratios, j_inf_wors, j_inf_bd
from .campaigns import (deflate_campaign, escaped_continuation,
                        flow_experiment, CampaignError)

SUBCOMMANDS = ("solve", "flow", "deflate", "stability", "geodesics", "gamma",
               "sweep-rho0", "sweep-rho1", "escaped-continuation")

DEFAULT_CONFIG = """\
[material]
# either t_reduced or A; t_reduced = -9 reproduces A = -B^2/(3C)
t_reduced = -9.0
B = 6400.0
C = 3500.0
lambda_bar_sq = 200.0

[geometry]
n = 129
rho = 0.2
eps_corner = 4.0        # corner ramp half-width, in grid cells

[solver]
newton_tol_factor = 1e-9
newton_max_iter = 50
dt = 1e-4
t_end = 4.0

[campaign]
kind = "solve"
ic = "wors"             # solve/flow: wors | bd | esc | escaped
nstarts = 64            # deflate
nfields = 2             # deflate: 2 or 5
rho_start = 0.02        # escaped-continuation
rho_max = 0.12
step = 0.002
rho_lo = 0.05           # sweep-rho0 range / sweep-rho1 bracket
rho_hi = 0.45
npoints_sweep = 9       # sweep-rho0 sample count

[output]
directory = "out"
"""


class ConfigError(ValueError):
    pass


def load_config(path=None) -> dict:
    cfg = tomllib.loads(DEFAULT_CONFIG)
    if path is not None:
        with open(path, "rb") as fh:
            user = tomllib.load(fh)
        for section, values in user.items():
            if section not in cfg:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(values, dict):
                raise ConfigError(f"[{section}] must be a table")
            for key, val in values.items():
                if key not in cfg[section] and not (section, key) == ("material", "A"):
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                cfg[section][key] = val
    if path is not None:
        user_mat = user.get("material", {})
        if "A" in user_mat and "t_reduced" in user_mat:
            raise ConfigError("material.A and material.t_reduced are mutually exclusive")
        if "A" in user_mat:
            # explicit A supersedes the default reduced temperature
            cfg["material"].pop("t_reduced", None)
    return cfg


def material_from(cfg) -> MaterialParams:
    mat = cfg["material"]
    if "A" in mat:
        return MaterialParams(A=mat["A"], B=mat["B"], C=mat["C"],
                              lambda_bar_sq=mat["lambda_bar_sq"])
    return MaterialParams.from_reduced_temperature(
        mat["t_reduced"], B=mat["B"], C=mat["C"],
        lambda_bar_sq=mat["lambda_bar_sq"])


def solver_from(cfg) -> SolverConfig:
    sc = SolverConfig()
    for key, val in cfg["solver"].items():
        setattr(sc, key, val)
    return sc


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def _write_json(path: Path, payload: dict):
    payload = {"schema": 1, **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
    return path


def _write_record(out: Path, rec, grid, tag: str):
    for k, name in enumerate(rec.state.names):
        grid.export_field(rec.state.fields[k], out / f"{tag}_{name}.csv", name)
    return _write_json(out / f"{tag}_record.json", {
        "tag": tag, "label": rec.label, "converged": rec.converged,
        "energy": rec.energy, "residual": rec.residual,
        "iterations": rec.iterations, "init": rec.init_name,
        "symmetry_class": rec.symmetry_class,
    })


def _summary(out, cfg, args, extra):
    return _write_json(out / "summary.json", {
        "version": __version__, "seed": args.seed,
        "config": cfg, **extra})


# ---------------------------------------------------------------------------
# campaign runners


def run_solve(cfg, args, out, params, grid, sconf):
    camp = cfg["campaign"]
    makers = {"wors": ic_wors, "bd": ic_bd, "esc": ic_esc, "escaped": ic_escaped}
    ic = camp["ic"]
    if ic not in makers:
        raise ConfigError(f"campaign.ic must be one of {sorted(makers)}")
    rec = newton_solve(makers[ic](grid, params), params, sconf,
                       symmetrize=(ic == "wors"), init_name=ic)
    _write_record(out, rec, grid, "solution")
    return {"label": rec.label, "converged": rec.converged, "energy": rec.energy}


def run_flow(cfg, args, out, params, grid, sconf):
    camp = cfg["campaign"]
    rec, samples = flow_experiment(params, cfg["geometry"]["n"],
                                   cfg["geometry"]["rho"], camp["ic"], sconf)
    _write_record(out, rec, grid, "final")
    with open(out / "flow_energy.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "energy"])
        for t, e, _ in samples:
            w.writerow([f"{t:.10g}", f"{e:.12g}"])
    q3max = float(np.max(rec.state.q3[grid.interior]))
    return {"label": rec.label, "energy": rec.energy, "max_q3": q3max,
            "samples": len(samples)}


def run_deflate(cfg, args, out, params, grid, sconf):
    camp = cfg["campaign"]
    res = deflate_campaign(grid, params, sconf, nfields=camp["nfields"],
                           nstarts=camp["nstarts"], seed=args.seed)
    for rec in res.classes:
        _write_record(out, rec, grid, f"class{rec.symmetry_class}")
    classes = [{"class_id": r.symmetry_class, "label": r.label,
                "energy": r.energy,
                "members": sum(1 for q in res.records
                               if q.symmetry_class == r.symmetry_class)}
               for r in res.classes]
    return {"n_classes": len(res.classes), "labels": res.labels,
            "attempts": res.attempts, "classes": classes}


def run_stability(cfg, args, out, params, grid, sconf):
    from .stability import stability_report

    camp = cfg["campaign"]
    ic = camp["ic"]
    if ic not in ("wors", "bd"):
        raise ConfigError("stability campaign needs campaign.ic = wors or bd")
    maker = ic_wors if ic == "wors" else ic_bd
    rec = newton_solve(maker(grid, params), params, sconf,
                       symmetrize=(ic == "wors"), init_name=ic)
    if not rec.converged:
        raise CampaignError(f"no converged {ic} state at rho="
                            f"{grid.spec.rho_snapped}")
    rep = stability_report(rec.state, params)
    for ch, wit in rep.witnesses.items():
        fields = wit if ch == "v13" else (wit,)
        names = ("v1", "v3") if ch == "v13" else (ch,)
        for w, nm in zip(fields, names):
            grid.export_field(w, out / f"witness_{ch}_{nm}.csv", nm)
    return {"state": ic, "mu": rep.mu, "stable": rep.stable,
            "overall_stable": rep.overall_stable}


def run_geodesics(cfg, args, out, params, grid, sconf):
    costs, paths = transition_costs(params, return_paths=True)
    for name, path in paths.items():
        export_path(path, out, f"path_{name}", params)
    r1, r2 = ratios(costs)
    with open(out / "costs.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["c1", "c2", "c3", "c4", "R1", "R2"])
        w.writerow([costs.c1, costs.c2, costs.c3, costs.c4, r1, r2])
    return {"costs": costs.as_dict(), "R1": r1, "R2": r2}


def run_gamma(cfg, args, out, params, grid, sconf):
    costs = transition_costs(params)
    rep = classify_regime(costs)
    with open(out / "regimes.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "winner", "J_wors", "J_bd", "J_esc"])
        for row in rep.table:
            w.writerow(row)
    return {"rho_star": rep.rho_star, "R1": rep.r1, "R2": rep.r2,
            "escaped_candidate": rep.escaped_candidate}


def run_sweep_rho0(cfg, args, out, params, grid, sconf):
    camp = cfg["campaign"]
    rhos = np.linspace(camp["rho_lo"], camp["rho_hi"], camp["npoints_sweep"])
    points, rho0 = rho0_sweep(params, cfg["geometry"]["n"], rhos, sconf)
    with open(out / "energy_sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "rho_snapped", "J_wors", "J_bd"])
        for pt in points:
            w.writerow([pt.rho, pt.rho_snapped, pt.energy_wors, pt.energy_bd])
    return {"rho0": rho0, "points": len(points)}


def run_sweep_rho1(cfg, args, out, params, grid, sconf):
    camp = cfg["campaign"]
    lo, hi, mid = rho1_sweep(params, cfg["geometry"]["n"],
                             camp["rho_lo"], camp["rho_hi"], sconf)
    return {"rho1_lo": lo, "rho1_hi": hi, "rho1": mid}


def run_escaped_continuation(cfg, args, out, params, grid, sconf):
    camp = cfg["campaign"]
    res = escaped_continuation(params, cfg["geometry"]["n"],
                               rho_start=camp["rho_start"],
                               rho_max=camp["rho_max"],
                               step=camp["step"], config=sconf)
    with open(out / "continuation.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rho_snapped", "escaped", "q3_inner_max"])
        for r, f, q in zip(res.rhos, res.escaped, res.q3_inner_max):
            w.writerow([r, int(f), q])
    return {"last_good": res.last_good, "first_bad": res.first_bad,
            "threshold": res.threshold}


RUNNERS = {
    "solve": run_solve, "flow": run_flow, "deflate": run_deflate,
    "stability": run_stability, "geodesics": run_geodesics, "gamma": run_gamma,
    "sweep-rho0": run_sweep_rho0, "sweep-rho1": run_sweep_rho1,
    "escaped-continuation": run_escaped_continuation,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nll",
        description="Finite-difference laboratory for nematic order tensors "
                    "on a square with a square isotropic inclusion.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} campaign")
        sp.add_argument("--config", type=Path, default=None,
                        help="TOML campaign configuration")
        sp.add_argument("--seed", type=int, default=0,
                        help="seed for random starts (recorded in artifacts)")
        sp.add_argument("--out", type=Path, default=None,
                        help="artifact directory (default from config)")
        sp.add_argument("--print-defaults", action="store_true",
                        help="print the default configuration and exit")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.print_defaults:
        print(DEFAULT_CONFIG, end="")
        return 0
    try:
        cfg = load_config(args.config)
        cfg["campaign"]["kind"] = args.command
        params = material_from(cfg)
        sconf = solver_from(cfg)
        geo = cfg["geometry"]
        grid = build_grid(geo["n"], geo["rho"], geo["eps_corner"])
        out = Path(args.out) if args.out else Path(cfg["output"]["directory"])
        out.mkdir(parents=True, exist_ok=True)
        extra = RUNNERS[args.command](cfg, args, out, params, grid, sconf)
    except (ConfigError, ParameterError, GeometryError, tomllib.TOMLDecodeError,
            OSError, ValueError) as exc:
        sys.stderr.write(json.dumps(
            {"schema": 1, "error": "config", "message": str(exc)}) + "\n")
        return 2
    except CampaignError as exc:
        sys.stderr.write(json.dumps(
            {"schema": 1, "error": "campaign", "message": str(exc)}) + "\n")
        return 1
    _summary(out, cfg, args, {"campaign": args.command, "result": extra})
    report = {"campaign": args.command, "out": str(out), **extra}
    print(json.dumps(report, indent=2, default=_json_default))
    return 0


if __name__ == "__main__":
    sys.exit(main())
