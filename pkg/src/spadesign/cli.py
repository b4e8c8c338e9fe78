"""Command-line entry point: ``spadesign <command> ...``.

Global flags come before the command.  ``--units paper`` (default) reads and
writes millimetres, kilopascals and newtons; ``--units si`` uses metres and
pascals.  Surrogate, dataset and design commands always use mm and kPa.

Exit codes: 0 success, 2 invalid input, 3 numeric failure, 4 infeasible.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import FitError, InfeasibleError, NumericError, SpaError, ValidationError

log = logging.getLogger("spadesign")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4

DEFAULT_ELASTIC = {"mu_kpa": 31.7, "jm": 39.6}
DEFAULT_LIMITER = {"mu_kpa": 1000.0, "jm": 25.0}


class UnitSystem:
    def __init__(self, name: str):
        self.name = name
        self.length = 1e-3 if name == "paper" else 1.0  # input unit -> m
        self.pressure = 1e3 if name == "paper" else 1.0  # input unit -> Pa
        self.length_unit = "mm" if name == "paper" else "m"
        self.pressure_unit = "kPa" if name == "paper" else "Pa"


# ---------------------------------------------------------------------------
# output helpers


def _emit(args, obj=None, table=None):
    """Write a JSON object or a (columns, rows) table to --out or stdout."""
    from .data import export_json, format_table

    if table is not None:
        text = format_table(*table)
    else:
        text = export_json(obj) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _grid(spec: str) -> list[float]:
    """``a:b:n`` inclusive linspace or a comma list."""
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            return np.linspace(float(a), float(b), int(n)).tolist()
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"bad grid {spec!r}; use a:b:n or v1,v2,...") from None


# ---------------------------------------------------------------------------
# membrane and material


def _membrane_design(args):
    from .membrane import MembraneDesign

    if args.design:
        d = _read_json(args.design)
    else:
        d = {"thickness_mm": args.thickness, "contact_radius_mm": args.contact, "ring1": None, "ring2": None}
    d = dict(d)
    d.setdefault("elastic", DEFAULT_ELASTIC)
    if (d.get("ring1") or d.get("ring2")) and not d.get("limiter"):
        d["limiter"] = DEFAULT_LIMITER
    return MembraneDesign.from_dict(d)


def _solver_config(args):
    from .membrane import SolverConfig

    return SolverConfig(interface=args.interface, n_nodes=args.nodes)


def cmd_fit_material(args, u: UnitSystem):
    from .material import fit_gent_uniaxial
    from .data import load_table

    cols, rows = load_table(args.data)
    try:
        samples = [(float(r[0]), float(r[1]) * u.pressure) for r in rows]
    except (TypeError, ValueError, IndexError):
        raise ValidationError("material table needs numeric stretch and stress columns") from None
    fit = fit_gent_uniaxial(samples)
    _emit(args, {
        "mu": fit.material.mu / u.pressure, "jm": fit.material.jm,
        "rms_residual": fit.rms_residual / u.pressure, "n_samples": fit.n_samples,
        "units": u.pressure_unit,
    })


def cmd_solve_bvp(args, u: UnitSystem):
    from .membrane import shoot

    design = _membrane_design(args)
    sol = shoot(design, args.pressure * u.pressure, args.force, _solver_config(args))
    if args.profile:
        cols = ["r", "lambda1", "lambda2", "beta", "R", "Z"]
        rows = np.column_stack([sol.r / u.length, sol.lambda1, sol.lambda2, sol.beta, sol.R / u.length, sol.Z / u.length])
        _emit(args, table=(cols, rows.tolist()))
        return
    _emit(args, {
        "pressure": sol.pressure / u.pressure, "force_n": sol.force, "height": sol.height / u.length,
        "residual": sol.residual, "shooting_value": sol.x, "multiple_roots": sol.multiple_roots,
        "n_roots": sol.n_roots, "units": {"length": u.length_unit, "pressure": u.pressure_unit},
    })


def cmd_sweep(args, u: UnitSystem):
    from .membrane import force_height_map

    rows = force_height_map(
        _membrane_design(args), [p * u.pressure for p in _grid(args.pressures)], _grid(args.forces), _solver_config(args)
    )
    cols = ["pressure", "force_n", "height", "residual", "converged", "multiple_roots", "message"]
    out = [[r.pressure / u.pressure, r.force, r.height / u.length, r.residual, r.converged, r.multiple_roots, r.message]
           for r in rows]
    _emit(args, table=(cols, out))


# ---------------------------------------------------------------------------
# surrogate and active learning


def _surrogate_config(args):
    from .surrogate import SurrogateConfig

    d = _read_json(args.config) if getattr(args, "config", None) else {}
    d.setdefault("seed", args.seed)
    if getattr(args, "iterations", None) is not None:
        d["iterations"] = args.iterations
    return SurrogateConfig.from_dict(d)


def _samples(path):
    from .data import load_dataset, to_samples

    return to_samples(load_dataset(path))


def cmd_train(args, u: UnitSystem):
    from .surrogate import save_model, train
    from .active import train_ensemble

    if not args.out:
        raise ValidationError("train needs --out (model file, or directory with --members)")
    samples = _samples(args.data)
    cfg = _surrogate_config(args)
    if args.members:
        ens = train_ensemble(samples, cfg, n=args.members, prior_scale=args.prior_scale, seed=args.seed)
        ens.save(args.out)
        info = {"ensemble": args.out, "members": len(ens), "final_loss": [m.final_loss for m in ens.members]}
    else:
        model = train(samples, cfg)
        save_model(model, args.out)
        info = {"model": args.out, "final_loss": model.final_loss}
    sys.stderr.write(json.dumps(info) + "\n")


def cmd_kfold(args, u: UnitSystem):
    from .surrogate import kfold_rmse

    res = kfold_rmse(_samples(args.data), args.k, _surrogate_config(args))
    _emit(args, {"fold_rmse_n": list(res.fold_rmse), "mean_rmse_n": res.mean, "folds": [list(f) for f in res.folds]})


def _bounds(args):
    from .designvec import DesignBounds

    if getattr(args, "bounds", None):
        d = _read_json(args.bounds)
        return DesignBounds(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})
    return DesignBounds()


def cmd_acquire(args, u: UnitSystem):
    from .active import SurrogateEnsemble, select_next

    ens = SurrogateEnsemble.load(args.ensemble)
    res = select_next(ens, q=args.q, bounds=_bounds(args), starts=args.starts, seed=args.seed)
    _emit(args, [{"design": d.to_dict(), "alpha": res.score} for d in res.designs])


def cmd_uncertainty(args, u: UnitSystem):
    from .active import SurrogateEnsemble, uncertainty_profile

    ens = SurrogateEnsemble.load(args.ensemble)
    _emit(args, {"mean_std_n": uncertainty_profile(ens, args.samples, _bounds(args), args.seed), "samples": args.samples})


# ---------------------------------------------------------------------------
# design


def cmd_optimize(args, u: UnitSystem):
    from .design import LiftTarget, PosteriorWeights, optimize_design
    from .surrogate import load_model
    from .data import DESIGN_COLUMNS

    spec = _read_json(args.targets)
    targets = [LiftTarget(float(t["pressure_kpa"]), float(t["force_n"])) for t in spec["targets"]]
    w = PosteriorWeights(**spec.get("weights", {}))
    res = optimize_design(load_model(args.model), targets, w, _bounds(args), args.starts, args.seed)
    if args.csv:
        _emit(args, table=(DESIGN_COLUMNS + ["posterior"], [o.design.table_row() + [o.value] for o in res.top]))
        return
    _emit(args, {
        "best": res.best.to_dict(), "posterior": res.value,
        "top": [{"design": o.design.to_dict(), "posterior": o.value} for o in res.top],
    })


def cmd_codesign(args, u: UnitSystem):
    from .design import CoDesignConfig, LeverBody, co_design
    from .surrogate import load_model
    from .designvec import DesignBounds

    spec = _read_json(args.body)
    body = LeverBody(**spec["body"])
    ba = DesignBounds(**{k: tuple(v) if isinstance(v, list) else v for k, v in spec.get("bounds_a", {}).items()})
    bb = DesignBounds(**{k: tuple(v) if isinstance(v, list) else v for k, v in spec.get("bounds_b", {}).items()})
    cfg = CoDesignConfig(starts=args.starts)
    res = co_design(load_model(args.model), body, ba, bb, args.seed, cfg)
    _emit(args, {
        "design_a": res.design_a.to_dict(),
        "design_b": None if res.design_b is None else res.design_b.to_dict(),
        "peak_force_n": res.peak_force,
        "rows": [res.design_a.table_row()] + ([res.design_b.table_row()] if res.design_b else []),
    })


# ---------------------------------------------------------------------------
# clutch and mechanisms


def cmd_stage_drop(args, u: UnitSystem):
    from .clutch import DutyCalibration, oscillation_threshold, reference_drop_setup, stage_drop, zeta_from_duty, zeta_sweep

    base = reference_drop_setup(mu_kpa=args.mu_kpa, jm=args.jm)
    if args.sweep:
        res = zeta_sweep(base, np.linspace(0.0, 1.0, args.sweep))
        cols = ["zeta", "displacement", "oscillates"]
        _emit(args, table=(cols, [[z, r.displacement / u.length, r.oscillates] for z, r in res]))
        return
    from dataclasses import replace

    zeta = args.zeta
    if args.duty is not None:
        zeta = zeta_from_duty(args.duty, DutyCalibration.default())
    r = stage_drop(replace(base, zeta=zeta))
    _emit(args, {
        "zeta": zeta, "displacement": r.displacement / u.length, "oscillates": r.oscillates,
        "threshold_zeta": oscillation_threshold(base) if args.threshold else None,
        "units": u.length_unit,
    })


def cmd_clutch_force(args, u: UnitSystem):
    from .clutch import ClutchSpec, clutch_friction_force

    spec = ClutchSpec(args.mu_f, args.eps_r, args.area * u.length**2, args.gap * u.length, args.voltage)
    _emit(args, {"friction_force_n": clutch_friction_force(spec, args.model), "model": args.model})


def cmd_gear(args, u: UnitSystem):
    from .mechanisms import backdrive_efficiency, center_distances, gear_ratio, gear_ratio_exact, solve_coaxial, standard_gear_set

    if args.standard:
        g = standard_gear_set(mu_g=args.mu_g)
    else:
        g = solve_coaxial(args.zs, args.zr2, args.xs, args.xr2, zr1=args.zr1, xr1=args.xr1, m1=args.m1, m2=args.m2,
                          clearance=args.clearance, p1_offset=args.p1_offset, p2_offset=args.p2_offset, mu_g=args.mu_g)
    fr = gear_ratio_exact(g)
    _emit(args, {
        "gear_set": g.to_dict(), "ratio": gear_ratio(g), "ratio_exact": f"{fr.numerator}/{fr.denominator}",
        "reduction": float(1 / fr) if fr != 0 else None, "backdrive_efficiency": backdrive_efficiency(g),
        "center_distances_mm": list(center_distances(g)),
    })


def cmd_valve(args, u: UnitSystem):
    from .mechanisms import ValveSpec, crack_pressure, reference_valve

    ref = reference_valve()
    spec = ValveSpec(
        args.h_dome if args.h_dome is not None else ref.h_dome,
        args.b0 if args.b0 is not None else ref.b0,
        args.k_s if args.k_s is not None else ref.k_s,
        args.k_r if args.k_r is not None else ref.k_r,
        args.area if args.area is not None else ref.area,
    )
    _emit(args, {"crack_pressure": crack_pressure(spec) / u.pressure, "units": u.pressure_unit, "spec": asdict(spec)})


# ---------------------------------------------------------------------------
# data


def cmd_data(args, u: UnitSystem):
    from .data import TrimPolicy, load_dataset, save_dataset, trim_dataset

    if args.data_cmd == "convert-info":
        sys.stdout.write(CONVERT_INFO)
        return
    ds = load_dataset(args.path)
    if args.data_cmd == "validate":
        _emit(args, {"valid": True, "membranes": len(ds), "points": ds.n_points()})
    elif args.data_cmd == "trim":
        out = trim_dataset(ds, TrimPolicy(args.keep_trial, not args.keep_deflation, not args.keep_fracture))
        if not args.out:
            raise ValidationError("data trim needs --out")
        save_dataset(out, args.out)


CONVERT_INFO = """\
The published measurement archive is a Python pickle of per-membrane records.
It is not read by this package.  To convert it, load it in the environment
that produced it and write the neutral JSON schema:

  {"format": "spadesign-lift-dataset", "version": 1,
   "membranes": {"<id>": {"design": {"contact_radius_mm": .., "thickness_mm": ..,
                                     "ring1": null | {"radius_mm": .., "width_mm": ..},
                                     "ring2": null | {...}},
                          "trials": [{"height_mm": .., "trial": 1|2|3, "fracture": false,
                                      "metadata": {...},
                                      "samples": {"time_s": [..], "pressure_kpa": [..],
                                                  "force_n": [..], "height_left_mm": [..] | null,
                                                  "height_right_mm": [..] | null,
                                                  "flow": [..] | null, "contact": [..] | null}}]}}}

Then run `spadesign data validate <file>`.  See README.md for the full recipe.
"""


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spadesign", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--units", choices=("si", "paper"), default="paper")
    ap.add_argument("--out", default=None, help="output file (default stdout)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("fit-material", help="fit Gent parameters to uniaxial CSV (stretch, stress)")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_fit_material)

    def membrane_args(p):
        p.add_argument("--design", help="design JSON (mm/kPa keys)")
        p.add_argument("--thickness", type=float, default=2.0, help="mm, when no --design")
        p.add_argument("--contact", type=float, default=25.4, help="mm, when no --design")
        p.add_argument("--interface", choices=("stretch", "traction"), default="stretch")
        p.add_argument("--nodes", type=int, default=201)

    p = sub.add_parser("solve-bvp", help="solve one membrane equilibrium")
    membrane_args(p)
    p.add_argument("--pressure", type=float, required=True)
    p.add_argument("--force", type=float, required=True, help="N")
    p.add_argument("--profile", action="store_true", help="write the full profile as CSV")
    p.set_defaults(func=cmd_solve_bvp)

    p = sub.add_parser("sweep", help="force-height map over pressure and force grids")
    membrane_args(p)
    p.add_argument("--pressures", required=True, help="a:b:n or list")
    p.add_argument("--forces", required=True, help="a:b:n or list [N]")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("train", help="train a surrogate (or an ensemble with --members)")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--iterations", type=int)
    p.add_argument("--members", type=int, default=0)
    p.add_argument("--prior-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("kfold", help="membrane-wise k-fold RMSE")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=11)
    p.add_argument("--config")
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_kfold)

    p = sub.add_parser("acquire", help="next batch of designs by ensemble acquisition")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--bounds")
    p.set_defaults(func=cmd_acquire)

    p = sub.add_parser("uncertainty", help="design-space mean predictive std")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--bounds")
    p.set_defaults(func=cmd_uncertainty)

    p = sub.add_parser("optimize", help="maximise lift height at (pressure, force) targets")
    p.add_argument("--model", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--starts", type=int, default=2500)
    p.add_argument("--bounds")
    p.add_argument("--csv", action="store_true", help="design-table CSV instead of JSON")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("codesign", help="two membranes on one pressure supply")
    p.add_argument("--model", required=True)
    p.add_argument("--body", required=True)
    p.add_argument("--starts", type=int, default=16)
    p.set_defaults(func=cmd_codesign)

    p = sub.add_parser("stage-drop", help="drop-stage displacement")
    p.add_argument("--zeta", type=float, default=0.0)
    p.add_argument("--duty", type=float)
    p.add_argument("--sweep", type=int, default=0, help="number of zeta values in [0, 1]")
    p.add_argument("--threshold", action="store_true")
    p.add_argument("--mu-kpa", type=float, default=17.0)
    p.add_argument("--jm", type=float, default=39.6)
    p.set_defaults(func=cmd_stage_drop)

    p = sub.add_parser("clutch-force", help="electroadhesive friction force")
    p.add_argument("--mu-f", type=float, required=True)
    p.add_argument("--eps-r", type=float, required=True)
    p.add_argument("--area", type=float, required=True, help="length unit squared")
    p.add_argument("--gap", type=float, required=True, help="dielectric thickness")
    p.add_argument("--voltage", type=float, required=True)
    p.add_argument("--model", choices=("airgap", "ideal"), default="airgap")
    p.set_defaults(func=cmd_clutch_force)

    p = sub.add_parser("gear", help="Wolfrom gearbox ratio and back-drive efficiency")
    p.add_argument("--standard", action="store_true")
    p.add_argument("--zs", type=int, default=12)
    p.add_argument("--zr2", type=int, default=81)
    p.add_argument("--xs", type=float, default=0.48)
    p.add_argument("--xr2", type=float, default=1.21)
    p.add_argument("--zr1", type=int, default=90)
    p.add_argument("--xr1", type=float, default=2.0)
    p.add_argument("--m1", type=float, default=1.0)
    p.add_argument("--m2", type=float, default=1.0)
    p.add_argument("--clearance", type=float, default=0.0)
    p.add_argument("--p1-offset", type=int, default=0)
    p.add_argument("--p2-offset", type=int, default=0)
    p.add_argument("--mu-g", type=float, default=0.0)
    p.set_defaults(func=cmd_gear)

    p = sub.add_parser("valve", help="dome check-valve crack pressure")
    for name in ("h-dome", "b0", "k-s", "k-r", "area"):
        p.add_argument(f"--{name}", type=float)
    p.set_defaults(func=cmd_valve)

    p = sub.add_parser("data", help="dataset tools")
    dsub = p.add_subparsers(dest="data_cmd", required=True)
    q = dsub.add_parser("validate")
    q.add_argument("path")
    q = dsub.add_parser("trim")
    q.add_argument("path")
    q.add_argument("--keep-trial", type=int, default=3)
    q.add_argument("--keep-deflation", action="store_true")
    q.add_argument("--keep-fracture", action="store_true")
    dsub.add_parser("convert-info")
    p.set_defaults(func=cmd_data)

    # --out is accepted after the subcommand too; SUPPRESS keeps an earlier value
    for parser in [*sub.choices.values(), *dsub.choices.values()]:
        parser.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    return ap


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, InfeasibleError):
        return EXIT_INFEASIBLE
    if isinstance(exc, (NumericError, FitError)):
        return EXIT_NUMERIC
    return EXIT_VALIDATION


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args, UnitSystem(args.units))
    except (SpaError, ValueError) as exc:
        sys.stderr.write(f"spadesign: error: {exc}\n")
        return exit_code(exc)
    except (KeyError, TypeError) as exc:
        # malformed JSON specs (missing or unexpected keys)
        sys.stderr.write(f"spadesign: error: bad input specification: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"spadesign: error: {exc}\n")
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
