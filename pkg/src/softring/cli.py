"""Command-line front end: sweeps, single-point analyses, fits and validation.

Masses are in kg and stiffnesses in N/mm at this boundary. Analysis modules
are imported after the configuration is applied, so file values reach the
module-level defaults.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from pathlib import Path

import click

from . import __version__
from .config import CONFIG_ENV, DEFAULTS, deep_merge, load_config

MANIFEST_SCHEMA = 1


def apply_config(cfg: dict) -> None:
    """Replace the process-wide defaults in place with ``cfg``."""
    merged = deep_merge(DEFAULTS, cfg)
    DEFAULTS.clear()
    DEFAULTS.update(merged)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    import numpy as np

    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


class Run:
    """Collects outputs and writes the manifest next to the primary output."""

    def __init__(self, ctx: click.Context, out: Path):
        self.ctx = ctx
        self.out = Path(out)
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.t0 = time.perf_counter()

    def output(self, path) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(p)
        return p

    def finish(self, extra: dict | None = None) -> None:
        manifest = {
            "schema_version": MANIFEST_SCHEMA,
            "tool_version": __version__,
            "command_line": [Path(sys.argv[0]).name, *sys.argv[1:]],
            "config": self.ctx.obj["config"],
            "inputs": {str(p): _sha256(p) for p in self.inputs},
            "outputs": {str(p): _sha256(p) for p in self.outputs},
            "wall_clock_s": time.perf_counter() - self.t0,
        }
        if extra:
            manifest.update(extra)
        _dump_json(manifest, self.out.with_name(self.out.name + ".manifest.json"))


def _material():
    from .design import MaterialSpec

    return MaterialSpec.from_config(DEFAULTS)


def _spec(m: float, k: float, twr: float | None = None):
    from .design import DesignPoint, size_drone

    twr = DEFAULTS["sizing"]["twr"] if twr is None else twr
    return size_drone(DesignPoint.from_grid_units(m, k, twr), _material())


def _grid(grid: str, m: float | None, k: float | None, m_range, k_range, n: tuple[int, int] | None, twr=None):
    from .design import DesignPoint, loglog_grid, standard_grid

    twr = DEFAULTS["sizing"]["twr"] if twr is None else twr
    if grid == "table1":
        return standard_grid(twr)
    if grid == "1x1":
        if m is None or k is None:
            raise click.UsageError("--grid 1x1 needs --m and --k")
        return [DesignPoint.from_grid_units(m, k, twr)]
    if grid == "loglog":
        if not (m_range and k_range and n):
            raise click.UsageError("--grid loglog needs --m-range, --k-range and --n")
        if min(*m_range, *k_range) <= 0 or m_range[0] >= m_range[1] or k_range[0] >= k_range[1]:
            raise click.UsageError("ranges must be positive and increasing")
        return loglog_grid(m_range, k_range, n[0], n[1], twr)
    raise click.UsageError(f"unknown grid {grid!r}")


def _infeasible(exc) -> None:
    click.echo(f"infeasible design point: {exc}", err=True)
    sys.exit(2)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help=f"JSON configuration file (default: ${CONFIG_ENV}).")
@click.option("--threads", default=1, show_default=True, type=click.IntRange(1), help="Worker processes.")
@click.version_option(__version__)
@click.pass_context
def main(ctx, config_path, threads):
    """Design-space analyses for soft ring-frame quadrotors."""
    cfg = load_config(config_path)
    apply_config(cfg)
    ctx.obj = {"config": cfg, "threads": threads}


grid_options = [
    click.option("--grid", type=click.Choice(["table1", "1x1", "loglog"]), default="table1", show_default=True),
    click.option("--m", type=float, help="Mass (kg) for a 1x1 grid."),
    click.option("--k", type=float, help="Stiffness (N/mm) for a 1x1 grid."),
    click.option("--m-range", nargs=2, type=float, help="Mass range (kg) for a log grid."),
    click.option("--k-range", nargs=2, type=float, help="Stiffness range (N/mm) for a log grid."),
    click.option("--n", nargs=2, type=int, help="Points along mass and stiffness for a log grid."),
]


def with_grid(f):
    for opt in reversed(grid_options):
        f = opt(f)
    return f


def _write_heatmap(ctx, hm, out) -> None:
    run = Run(ctx, out)
    hm.to_csv(run.output(out))
    failed = [f"{m:g} kg, {k:g} N/mm" for m, k, v in zip(hm.mass, hm.k_n_per_mm, hm.value) if math.isnan(v)]
    run.finish({"absent_points": failed})
    click.echo(f"{len(hm)} points written to {out} ({len(failed)} absent)")
    if failed:
        for f in failed:
            click.echo(f"absent: {f}", err=True)
        sys.exit(3)


@main.command()
@click.option("--metric", type=click.Choice(["sqt", "res", "agt"]), required=True)
@with_grid
@click.option("--v0", type=float, default=3.0, show_default=True, help="Impact speed (m/s) for res.")
@click.option("--which", type=click.Choice(["agt_z", "agt_roll", "agt_pitch"]), default="agt_z")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def sweep(ctx, metric, grid, m, k, m_range, k_range, n, v0, which, out):
    """Heatmap of one metric over a design grid."""
    pts = _grid(grid, m, k, m_range, k_range, n)
    threads = ctx.obj["threads"]
    if metric == "sqt":
        from .squeeze import sqt_heatmap

        hm = sqt_heatmap(pts, _material(), DEFAULTS["squeeze"]["initial_curvature"], threads=threads)
    elif metric == "res":
        from .collision import res_heatmap

        hm = res_heatmap(pts, v0, _material(), threads=threads)
    else:
        from .agility import agt_heatmap

        hm = agt_heatmap(pts, which, _material(), threads=threads)
    _write_heatmap(ctx, hm, out)


@main.command()
@click.option("--m", type=float, required=True, help="Mass (kg).")
@click.option("--k", type=float, required=True, help="Stiffness (N/mm).")
@click.option("--out", type=click.Path(dir_okay=False), default="squeeze.json", show_default=True)
@click.pass_context
def squeeze(ctx, m, k, out):
    """Squeezability of one design point."""
    from .design import InfeasibleDesign
    from .squeeze import initial_curvature, squeezability

    try:
        spec = _spec(m, k)
    except InfeasibleDesign as e:
        _infeasible(e)
    r = squeezability(spec, initial_curvature(spec, DEFAULTS["squeeze"]["initial_curvature"]))
    run = Run(ctx, out)
    _dump_json({"sqt": r.sqt, "delta_R_max_m": r.delta_R_max, "F_C_max_N": r.F_C_max,
                "limiting": r.limiting.value, "sigma_max_at_limit_Pa": r.sigma_max_at_limit,
                "spec": spec.to_dict()}, run.output(out))
    run.finish()
    click.echo(f"sqt = {r.sqt:.4f} ({r.limiting.value})")


@main.command()
@click.option("--m", type=float, required=True, help="Mass (kg).")
@click.option("--k", type=float, required=True, help="Stiffness (N/mm).")
@click.option("--v0", type=float, required=True, help="Impact speed (m/s).")
@click.option("--gravity/--no-gravity", default=False, help="Gravity along the impact direction.")
@click.option("--out", type=click.Path(dir_okay=False), default="trace.csv", show_default=True)
@click.pass_context
def collide(ctx, m, k, v0, gravity, out):
    """Frontal collision: trace CSV plus a JSON summary."""
    from .collision import count_acceleration_peaks, frontal_collision
    from .design import InfeasibleDesign

    try:
        spec = _spec(m, k)
    except InfeasibleDesign as e:
        _infeasible(e)
    r = frontal_collision(spec, v0, gravity, n_nodes=DEFAULTS["rodsim"]["n_nodes"])
    run = Run(ctx, out)
    r.trace.to_csv(run.output(out))
    summary = {"a_CU_max_g": r.a_CU_max, "F_peak_N": r.F_peak, "res": r.res,
               "impact_duration_s": r.impact_duration, "delta_R_peak_rel": r.delta_R_peak_rel,
               "a_CU_peaks": count_acceleration_peaks(r)}
    _dump_json(summary, run.output(Path(out).with_suffix(".json")))
    run.finish()
    click.echo(f"a_CU,max = {r.a_CU_max:.1f} g, res = {r.res:.3f}, F_peak = {r.F_peak:.1f} N")


@main.command("collide-sweep")
@with_grid
@click.option("--v0", type=float, required=True, help="Impact speed (m/s).")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def collide_sweep(ctx, grid, m, k, m_range, k_range, n, v0, out):
    """Resilience heatmap at one impact speed."""
    from .collision import res_heatmap

    hm = res_heatmap(_grid(grid, m, k, m_range, k_range, n), v0, _material(), threads=ctx.obj["threads"])
    _write_heatmap(ctx, hm, out)


@main.command()
@click.option("--m", type=float, required=True, help="Mass (kg).")
@click.option("--k", type=float, required=True, help="Stiffness (N/mm).")
@click.option("--v0", type=float, required=True, help="Approach speed (m/s).")
@click.option("--gap-ratio", type=float, default=0.7, show_default=True, help="Gap over nominal width.")
@click.option("--out", type=click.Path(dir_okay=False), default="gap.csv", show_default=True)
@click.pass_context
def gap(ctx, m, k, v0, gap_ratio, out):
    """Passive traversal of a slot narrower than the drone."""
    from .collision import gap_traversal
    from .design import InfeasibleDesign

    try:
        spec = _spec(m, k)
    except InfeasibleDesign as e:
        _infeasible(e)
    r = gap_traversal(spec, v0, gap_ratio * spec.nominal_width, n_nodes=DEFAULTS["rodsim"]["n_nodes"])
    run = Run(ctx, out)
    r.trace.to_csv(run.output(out))
    _dump_json({"passed": r.passed, "gap_width_m": r.gap_width, "min_lateral_span_m": r.min_lateral_span},
               run.output(Path(out).with_suffix(".json")))
    run.finish()
    click.echo(f"{'passed' if r.passed else 'blocked'}: gap {r.gap_width * 1e3:.1f} mm")


@main.command()
@click.option("--m", type=float, required=True, help="Mass (kg).")
@click.option("--k", type=float, required=True, help="Stiffness (N/mm).")
@click.option("--twr", type=float, default=None, help="Run a single vertical step at this TWR.")
@click.option("--twr-max", type=int, default=8, show_default=True, help="Sweep TWR 2..twr-max.")
@click.option("--out", type=click.Path(dir_okay=False), default="indices.json", show_default=True)
@click.pass_context
def agility(ctx, m, k, twr, twr_max, out):
    """Agility indices, or a single vertical step report with --twr."""
    from . import G
    from .agility import agt_indices, vertical_step
    from .design import InfeasibleDesign

    try:
        spec = _spec(m, k)
    except InfeasibleDesign as e:
        _infeasible(e)
    run = Run(ctx, out)
    n_nodes = DEFAULTS["rodsim"]["n_nodes"]
    if twr is not None:
        r = vertical_step(spec, twr, n_nodes=n_nodes)
        report = {"twr": twr, "peak_a_z_m_s2": r.peak_accel, "peak_a_z_g": r.peak_accel / G,
                  "rigid_a_z_m_s2": r.rigid_peak, "constraint": r.constraint_hit.value,
                  "min_pu_distance_over_Dp": float(r.trace["pu_dist"].min() / spec.prop_diameter)}
        r.trace.to_csv(run.output(Path(out).with_suffix(".csv")))
        msg = f"peak a_z = {r.peak_accel / G:.2f} g ({r.constraint_hit.value})"
    else:
        if twr_max < 2:
            raise click.UsageError("--twr-max must be at least 2")
        ind = agt_indices(spec, tuple(range(2, twr_max + 1)), n_nodes=n_nodes)
        report = ind.to_dict()
        msg = f"agt_z = {ind.agt_z:.3f}, agt_roll = {ind.agt_roll:.3f}, agt_pitch = {ind.agt_pitch:.3f}"
    _dump_json(report, run.output(out))
    run.finish()
    click.echo(msg)


@main.command("agility-sweep")
@with_grid
@click.option("--which", type=click.Choice(["agt_z", "agt_roll", "agt_pitch"]), default="agt_z")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def agility_sweep(ctx, grid, m, k, m_range, k_range, n, which, out):
    """Agility index heatmap."""
    from .agility import agt_heatmap

    hm = agt_heatmap(_grid(grid, m, k, m_range, k_range, n), which, _material(), threads=ctx.obj["threads"])
    _write_heatmap(ctx, hm, out)


@main.command("layout-compare")
@click.option("--m", "--mass", "m", type=float, required=True, help="Mass (kg).")
@click.option("--k", "--stiffness", "k", type=float, required=True, help="Stiffness (N/mm).")
@click.option("--twr", type=float, default=4.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="asd.csv", show_default=True)
@click.pass_context
def layout_compare(ctx, m, k, twr, out):
    """Distributed versus centralized battery layout under a vertical step."""
    import csv

    from .agility import layout_comparison
    from .design import InfeasibleDesign

    try:
        spec = _spec(m, k)
    except InfeasibleDesign as e:
        _infeasible(e)
    r = layout_comparison(spec, twr, n_nodes=DEFAULTS["rodsim"]["n_nodes"])
    run = Run(ctx, out)
    sc, sd = r.spectra["centralized"], r.spectra["distributed"]
    with open(run.output(out), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frequency_hz", "asd_centralized", "asd_distributed"])
        for f, a in zip(sc.freq, sc.asd):
            w.writerow([f"{f:.16e}", f"{a:.16e}", f"{sd.at(f):.16e}"])
    _dump_json(r.to_dict(), run.output(Path(out).with_suffix(".json")))
    run.finish()
    click.echo(f"peak {r.peak_frequency:.1f} Hz, ASD ratio {r.asd_ratio:.2f}, "
               f"alpha_AU ratio {r.alpha_au_ratio:.2f}, alpha_CU ratio {r.alpha_cu_ratio:.2f}")


@main.command("validate-drops")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="CSV: k_N_per_mm,v0_m_per_s,quantity,trial,peak_value.")
@click.option("--out", type=click.Path(dir_okay=False), default="zscores.json", show_default=True)
@click.pass_context
def validate_drops(ctx, input_path, out):
    """z-scores of simulated drop-test peaks against experimental trials."""
    from .collision import read_drop_csv, validate_drop_tests

    try:
        exps = read_drop_csv(input_path)
    except (KeyError, ValueError) as e:
        raise click.BadParameter(str(e), param_hint="--input")
    rows = validate_drop_tests(exps, _material(), n_nodes=DEFAULTS["rodsim"]["n_nodes"])
    run = Run(ctx, out)
    run.inputs.append(Path(input_path))
    _dump_json([r.to_dict() for r in rows], run.output(out))
    run.finish()
    for r in rows:
        click.echo(f"k={r.k_n_per_mm:g} v0={r.v0:g} {r.quantity}: z = {r.z:+.2f}")


@main.command()
@click.option("--target", type=click.Choice(["sqt-boundary", "squeeze-force", "radius-law"]), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              help="sqt heatmap CSV (sqt-boundary only).")
@click.option("--out", type=click.Path(dir_okay=False), default="fit.json", show_default=True)
@click.pass_context
def fit(ctx, target, input_path, out):
    """Power-law fits: squeezability boundary, full-squeeze force, radius law."""
    from .design import InfeasibleDesign, size_drone, standard_grid
    from .heatmap import Heatmap
    from .squeeze import fit_full_squeeze_force, fit_sqt_boundary, sqt_heatmap
    from .statfit import FitError, loglog_fit

    run = Run(ctx, out)
    try:
        if target == "sqt-boundary":
            if input_path:
                hm = Heatmap.from_csv(input_path, "sqt")
                run.inputs.append(Path(input_path))
            else:
                hm = sqt_heatmap(standard_grid(), _material(), DEFAULTS["squeeze"]["initial_curvature"],
                                 threads=ctx.obj["threads"])
            res = fit_sqt_boundary(hm)
        elif target == "squeeze-force":
            res = fit_full_squeeze_force(standard_grid(), _material(), threads=ctx.obj["threads"])
        else:
            ms, rs = [], []
            for dp in standard_grid():
                try:
                    spec = size_drone(dp, _material())
                except InfeasibleDesign:
                    continue
                ms.append(dp.mass)
                rs.append(spec.radius)
            res = loglog_fit(ms, rs, units={"x": "kg", "y": "m"})
    except (FitError, ValueError) as e:
        raise click.ClickException(str(e))
    _dump_json({"target": target, **res.to_dict()}, run.output(out))
    run.finish()
    click.echo(f"coefficient {res.coefficient:.4g}, exponents {', '.join(f'{p:.4g}' for p in res.exponents)}, "
               f"R^2 {res.r_squared:.4f}")


@main.command()
@click.option("--step", type=float, default=None, help="Resampling step in squeeze.")
@click.option("--out", type=click.Path(dir_okay=False), default="curves.csv", show_default=True)
@click.pass_context
def curves(ctx, step, out):
    """Export the force and curvature characteristic curves."""
    from .elastica import DEFAULT_STEP, characteristic_curves

    force, _ = characteristic_curves(step or DEFAULT_STEP)
    run = Run(ctx, out)
    force.to_csv(run.output(out))
    run.finish()
    click.echo(f"{force.delta_tilde.size} samples written to {out}")


if __name__ == "__main__":  # pragma: no cover
    main()
