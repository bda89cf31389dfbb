"""``pfpenalty`` command line: penalty tables, 1D profiles and the two 2D benchmarks.

Exit status: 0 on success, 2 for bad input (configuration, mesh, domain),
3 for numerical failure (non-convergence, singular systems).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import (SEN_DESK, SEN_NOTCH_ASSUMPTION, SEN_FULL, SNEDDON_FULL,
                         resolve_irreversibility, run_sen, run_sneddon)
from .config import RunConfig, load_config
from .errors import ConvergenceError, DomainError, MeshError, PfPenaltyError, SolverError
from .evolution import LoadingSchedule, SolverTolerances, StepRecord
from .fem.mesh import read_mesh
from .model import HistoryField, ModelKind, PenaltyGamma
from .profiles import Profile1D, ProfileKind
from .tuning import (F_gamma, F_gamma_exact, F_rho, F_rho_exact, PenaltyBound, r_opt)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

STEP_UNITS = {"step": "-", "load": "load", "reaction": "force/thickness",
              "elastic": "energy/thickness", "surface": "energy/thickness",
              "penalty": "energy/thickness", "max_violation": "-", "stag_iters": "-",
              "nr_alpha": "-", "nr_u": "-", "res_stag": "-"}


def write_csv(path, header, rows):
    """Write a table whose header cells read ``name [unit]``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue())
    return buf.getvalue()


def format_table(text):
    """Aligned plain-text view of CSV ``text`` with floats shown to 6 digits."""
    rows = list(csv.reader(io.StringIO(text)))

    def cell(v):
        try:
            f = float(v)
        except ValueError:
            return v
        return v if v.lstrip("-").isdigit() else f"{f:.6g}"

    rows = [rows[0]] + [[cell(v) for v in r] for r in rows[1:]]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _meta(outdir, lines):
    (outdir / "meta.txt").write_text("".join(f"{k} = {v}\n" for k, v in lines))


def _base_meta(cfg: RunConfig):
    d = asdict(cfg)
    d["model"] = cfg.model.value
    d["split"] = cfg.split.value
    return [("version", __version__)] + sorted(d.items())


def _tolerances(cfg):
    return SolverTolerances(cfg.tol_stag, cfg.tol_nr, cfg.max_stag_iters,
                            res_stag_norm=cfg.res_stag_norm, anderson_depth=cfg.anderson_depth)


def _irreversibility(cfg, material):
    mode = resolve_irreversibility(cfg.irreversibility, cfg.model, material, cfg.tol_ir)
    if isinstance(mode, PenaltyGamma) and cfg.gamma_scale != 1.0:
        mode = PenaltyGamma(mode.gamma * cfg.gamma_scale)
    return mode


def _describe(mode):
    return "history" if isinstance(mode, HistoryField) else repr(mode.gamma)


# -- pipelines ---------------------------------------------------------------

def pipeline_tune(cfg: RunConfig, outdir: Path):
    """Optimal penalties for the configured data, or both benchmark data sets."""
    if cfg.toughness is not None and cfg.length_scale is not None:
        cases = [("custom", cfg.toughness, cfg.length_scale, cfg.half_length)]
    else:
        cases = [("sen_SI", 2700.0, 1e-5, None),          # N/m, m
                 ("sneddon", 1.0, 0.02, 4.0)]
    rows = []
    for name, gc, ell, half in cases:
        for model in ModelKind:
            b = PenaltyBound.for_gamma(model, gc, ell, cfg.tol_ir)
            rows.append([name, "gamma", model.value, b.tol, b.dimensionless, b.physical, b.slope])
        if half is not None:
            for tol in sorted({cfg.tol_rec, 1e-3}, reverse=True):
                b = PenaltyBound.for_rho(gc, ell, half, tol)
                rows.append([name, "rho", "AT1", b.tol, b.dimensionless, b.physical, b.slope])
    header = ["case [-]", "kind [-]", "model [-]", "tol [-]", "dimensionless [-]",
              "physical [energy/volume]", "slope [-]"]
    text = write_csv(outdir / "penalties.csv", header, rows)
    _meta(outdir, _base_meta(cfg))
    return text


def pipeline_profiles(cfg: RunConfig, outdir: Path):
    """Closed-form profiles on [-L, L] and F-sweeps over the penalty."""
    ell = cfg.length_scale or 1.0
    L = cfg.ratio * ell
    x = np.linspace(-L, L, cfg.points)
    cols, names = [x], ["x [length]"]
    for kind in ProfileKind:
        if kind is ProfileKind.LINEAR_UNCONSTRAINED:
            continue
        p = Profile1D(kind, L, ell, cfg.penalty)
        cols.append(p(np.abs(x)))
        names.append(f"{kind.value} [-]")
    write_csv(outdir / "profiles.csv", names, np.column_stack(cols))

    s_vals = np.geomspace(cfg.s_min, cfg.s_max, cfg.n_sweep)
    rows = []
    for s in s_vals:
        rows.append([s, F_gamma(ModelKind.AT1, s, cfg.ratio), F_gamma_exact(ModelKind.AT1, s, cfg.ratio),
                     F_gamma(ModelKind.AT2, s, cfg.ratio), F_gamma_exact(ModelKind.AT2, s, cfg.ratio)])
    text = write_csv(outdir / "F_gamma.csv",
                     ["s [-]", "F_AT1 [-]", "F_AT1_exact [-]", "F_AT2 [-]", "F_AT2_exact [-]"], rows)
    if cfg.ratio > 2:
        rows = [[r, F_rho(r, cfg.ratio), F_rho_exact(r, cfg.ratio)] for r in s_vals]
        write_csv(outdir / "F_rho.csv", ["r [-]", "F [-]", "F_exact [-]"], rows)
    meta = _base_meta(cfg) + [("r_opt", repr(r_opt(cfg.tol_rec, cfg.ratio)) if cfg.ratio > 2 else "n/a")]
    _meta(outdir, meta)
    return text


def _sen_preset(cfg):
    preset = SEN_DESK if cfg.preset == "desk" else SEN_FULL
    upd = {k: getattr(cfg, k) for k in ("length_scale", "h_fine", "h_coarse")
           if getattr(cfg, k) is not None}
    return replace(preset, **upd)


def _steps_csv(outdir, records):
    header = [f"{c} [{STEP_UNITS[c]}]" for c in StepRecord.COLUMNS]
    return write_csv(outdir / "steps.csv", header, [r.row() for r in records])


def pipeline_sen(cfg: RunConfig, outdir: Path):
    preset = _sen_preset(cfg)
    material = preset.material
    mesh = read_mesh(cfg.mesh_file) if cfg.mesh_file else preset.mesh()
    mode = _irreversibility(cfg, material)
    k = preset.load_scale
    first = cfg.first if cfg.first is not None else 6e-3 * k
    inc = cfg.increment if cfg.increment is not None else 0.3e-3 * k
    schedule = LoadingSchedule.loading_unloading(first, inc, cfg.n_loading, cfg.n_unloading,
                                                 cfg.unload_factor)
    meta = _base_meta(cfg) + [("resolved_irreversibility", _describe(mode)),
                              ("units", "mm, kN"), ("assumption", SEN_NOTCH_ASSUMPTION),
                              ("nodes", mesh.n_nodes), ("triangles", mesh.n_triangles)]
    _meta(outdir, meta)
    t0 = time.perf_counter()
    records, fields, _ = run_sen(preset, cfg.model, cfg.split, mode, schedule,
                                 _tolerances(cfg), mesh)
    text = _steps_csv(outdir, records)
    np.savetxt(outdir / "alpha_final.csv", np.column_stack([mesh.nodes, fields.alpha]),
               delimiter=",", header="x [mm],y [mm],alpha [-]", comments="", fmt="%.16e")
    _meta(outdir, meta + [("wall_seconds", f"{time.perf_counter() - t0:.1f}")])
    return text


def pipeline_sneddon(cfg: RunConfig, outdir: Path):
    upd = {k: getattr(cfg, k) for k in ("length_scale", "h_fine", "h_coarse", "h_crack")
           if getattr(cfg, k) is not None}
    preset = replace(SNEDDON_FULL, pressure=cfg.pressure, **upd)
    material = preset.material
    mesh = read_mesh(cfg.mesh_file) if cfg.mesh_file else preset.mesh()
    mode = _irreversibility(cfg, material)
    meta = _base_meta(cfg) + [("resolved_irreversibility", _describe(mode)),
                              ("nodes", mesh.n_nodes), ("triangles", mesh.n_triangles)]
    t0 = time.perf_counter()
    res = run_sneddon(preset, cfg.model, cfg.split, mode, cfg.recovery, _tolerances(cfg), mesh,
                      preset.stations(cfg.stations), cfg.tol_ir, cfg.tol_rec)
    rho = res.problem.config.rho
    l2 = 2 * preset.crack_half_length * material.toughness
    meta += [("resolved_recovery", repr(rho)), ("recovery_energy", repr(res.recovery_energy)),
             ("recovery_overshoot_percent", repr(100 * (res.recovery_energy - l2) / l2)),
             ("wall_seconds", f"{time.perf_counter() - t0:.1f}")]
    _meta(outdir, meta)
    _steps_csv(outdir, res.records)
    return write_csv(outdir / "cod.csv", ["x [length]", "COD_PF [length]", "COD_exact [length]"],
                     res.cod)


PIPELINES = {"Tune": pipeline_tune, "Profiles1D": pipeline_profiles,
             "SenShear": pipeline_sen, "Sneddon": pipeline_sneddon}
COMMANDS = {"tune": "Tune", "profiles": "Profiles1D", "sen": "SenShear", "sneddon": "Sneddon"}


def _run_one(cfg: RunConfig, outdir: Path):
    outdir.mkdir(parents=True, exist_ok=True)
    return PIPELINES[cfg.benchmark](cfg, outdir)


def _classify(exc):
    if isinstance(exc, (ConvergenceError, SolverError, FloatingPointError, np.linalg.LinAlgError)):
        return EXIT_NUMERIC
    if isinstance(exc, (MeshError, DomainError, ValueError, OSError, PfPenaltyError)):
        return EXIT_INPUT
    return EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(prog="pfpenalty", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, bench in COMMANDS.items():
        sp = sub.add_parser(name, help=f"run the {bench} pipeline")
        sp.add_argument("--config", type=Path, help="INI file with [run] and [sweep.*] sections")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
        sp.add_argument("--csv", action="store_true", help="print the main table as raw CSV instead of aligned columns")
        sp.add_argument("--sweep", type=int, default=1, metavar="N",
                        help="worker threads for the [sweep.*] runs")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    bench = COMMANDS[args.command]
    try:
        if args.sweep < 1:
            raise ValueError("--sweep needs N >= 1")
        runs = load_config(args.config) if args.config else [RunConfig()]
        runs = [replace(r, benchmark=bench) for r in runs]
        if args.out is not None:
            runs = [replace(r, out=str(args.out)) for r in runs]
    except (PfPenaltyError, ValueError) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sweep = len(runs) > 1

    def outdir_of(cfg):
        return Path(cfg.out) / cfg.name if sweep else Path(cfg.out)

    def job(cfg):
        try:
            return cfg, _run_one(cfg, outdir_of(cfg)), None
        except Exception as exc:          # reported per run, classified below
            return cfg, None, exc

    if sweep and args.sweep > 1:
        with ThreadPoolExecutor(max_workers=args.sweep) as pool:
            results = list(pool.map(job, runs))
    else:
        results = [job(c) for c in runs]

    status = EXIT_OK
    for cfg, text, exc in results:
        name = cfg.name
        if exc is not None:
            code = _classify(exc)
            kind = "numerical" if code == EXIT_NUMERIC else "input"
            print(f"error: {kind}: run {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
            status = max(status, code)
        elif args.csv:
            if sweep:
                print(f"# {name}")
            sys.stdout.write(text)
        else:
            print(f"{name}: wrote {outdir_of(cfg)}")
            sys.stdout.write(format_table(text))
    return status


if __name__ == "__main__":
    sys.exit(main())
