"""Command-line entry points: optimize, bench, report."""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .bench import results_csv, run_benchmark, summary_csv
from .blackbox import BlackboxDescriptor, ProtocolError, make_blackbox
from .driver import ALGORITHMS, DriverConfig, InitialPointFailed, run_algorithm
from .metrics import HistoryParseError, convergence_table
from .problems import builtin_suite, get_problem
from .report import render_png, render_svg
from .space import Point, SpaceError, StructuralError, space_from_json

EXIT_PROTOCOL = 2
EXIT_CONFIG = 3


@click.group()
def main():
    """Mixed-variable derivative-free optimization toolkit."""


@main.command()
@click.option("--space", "space_file", type=click.Path(exists=True, dir_okay=False),
              help="Search-space JSON file (optional for builtin blackboxes).")
@click.option("--blackbox", "blackbox_spec", required=True,
              help="Shell command speaking the line protocol, or builtin:NAME.")
@click.option("--x0", "x0_file", type=click.Path(exists=True, dir_okay=False),
              help="Starting point as a JSON object {name: value}.")
@click.option("--budget", default=100, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--epsilon", default=0.05, show_default=True, type=float)
@click.option("--target", default=None, type=float,
              help="Initial target value; defaults to f(x0) - 10*epsilon.")
@click.option("--algo", default="delta-mads", show_default=True,
              type=click.Choice(ALGORITHMS))
@click.option("--parallel", default=1, show_default=True, type=int)
@click.option("--xi", default=0.05, show_default=True, type=float,
              help="Extended-poll relative trigger.")
@click.option("--initial-delta-p", default=0.5, show_default=True, type=float)
@click.option("--mode", default="persistent", show_default=True,
              type=click.Choice(["persistent", "oneshot"]),
              help="Subprocess blackbox mode.")
@click.option("--timeout", default=600.0, show_default=True, type=float)
@click.option("--dump-triangulation", is_flag=True,
              help="Dump the final surrogate triangulation to DIR/triangulation.json.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def optimize(space_file, blackbox_spec, x0_file, budget, seed, epsilon, target,
             algo, parallel, xi, initial_delta_p, mode, timeout,
             dump_triangulation, out_dir):
    """Run one optimization and write history.jsonl + summary.json to --out."""
    t0 = time.monotonic()
    try:
        descriptor = BlackboxDescriptor.parse(blackbox_spec, mode, timeout)
        if space_file:
            space = space_from_json(Path(space_file).read_text())
        elif descriptor.builtin:
            space = get_problem(descriptor.builtin).space
        else:
            raise SpaceError("--space is required for subprocess blackboxes")
        if x0_file:
            x0 = Point.from_dict(json.loads(Path(x0_file).read_text()), space)
        elif descriptor.builtin:
            x0 = get_problem(descriptor.builtin).x0_good
        else:
            raise SpaceError("--x0 is required for subprocess blackboxes")
        config = DriverConfig(
            budget=budget, y0=target, epsilon=epsilon, seed=seed,
            parallelism=parallel, xi=xi, initial_delta_p=initial_delta_p,
        )
    except (SpaceError, StructuralError, ValueError, KeyError,
            json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    blackbox, close = make_blackbox(descriptor, space)
    try:
        result = run_algorithm(algo, space, blackbox, x0, config)
    except ProtocolError as exc:
        click.echo(f"protocol error: {exc}", err=True)
        sys.exit(EXIT_PROTOCOL)
    except InitialPointFailed as exc:
        click.echo(f"config error: initial point evaluation failed: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    finally:
        close()

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "history.jsonl").write_text(result.history_jsonl())
    best = result.incumbent
    summary = {
        "algo": algo,
        "seed": seed,
        "best_point": best.point.as_dict(space),
        "best_value": best.objective,
        "evaluations_used": result.evaluations_used,
        "iterations": [
            {"k": it.k, "delta_p": it.delta_p, "y": it.y,
             "success": it.success, "evaluations": it.evaluations}
            for it in result.iterations
        ],
        "elapsed_seconds": time.monotonic() - t0,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if dump_triangulation:
        _dump_triangulation(result, space, out / "triangulation.json")
    click.echo(f"best value {best.objective!r} after {result.evaluations_used} evaluations")


def _dump_triangulation(result, space, path: Path) -> None:
    # rebuilds the final surrogate state for visual inspection
    import numpy as np

    from .space import normalize_reals, split
    from .triangulation import TriangulationError, triangulate

    x_n, _ = split(result.incumbent.point, space)
    pts = [
        normalize_reals(Point.from_dict(rec.point, space), space)
        for rec in result.history
        if rec.objective is not None
        and split(Point.from_dict(rec.point, space), space)[0] == x_n
    ]
    try:
        tri = triangulate(np.array(pts))
    except TriangulationError as exc:
        path.write_text(json.dumps({"error": str(exc)}) + "\n")
        return
    path.write_text(json.dumps({
        "vertices": tri.vertices.tolist(),
        "simplices": tri.simplices.tolist(),
        "circumcenters": tri.centers.tolist(),
        "squared_radii": tri.radii2.tolist(),
    }, indent=2) + "\n")


@main.command()
@click.option("--suite", default="standard", show_default=True,
              type=click.Choice(["standard"]))
@click.option("--algos", default="delta-mads,mads,random", show_default=True,
              help="Comma-separated list of algorithms.")
@click.option("--problems", "problem_names", default=None,
              help="Comma-separated subset of suite problems.")
@click.option("--budget", default=100, show_default=True, type=int)
@click.option("--seeds", default=5, show_default=True, type=int)
@click.option("--x0", default="good", show_default=True,
              type=click.Choice(["good", "bad"]))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def bench(suite, algos, problem_names, budget, seeds, x0, out_dir):
    """Run every (problem, algo, seed) cell and write results/summary CSVs."""
    try:
        algo_list = [a.strip() for a in algos.split(",") if a.strip()]
        for a in algo_list:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        problems = builtin_suite()
        if problem_names:
            wanted = [p.strip() for p in problem_names.split(",") if p.strip()]
            problems = [get_problem(name) for name in wanted]
        if budget < 1 or seeds < 1:
            raise ValueError("budget and seeds must be >= 1")
    except (ValueError, KeyError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    cells = run_benchmark(problems, algo_list, budget, seeds, x0=x0)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(cells, budget))
    (out / "summary.csv").write_text(summary_csv(cells))
    click.echo(f"wrote {len(cells)} cells to {out / 'results.csv'}")


@main.command()
@click.option("--runs", "runs_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory of run outputs (*.jsonl or <run>/history.jsonl).")
@click.option("--svg", "svg_file", required=True, type=click.Path(dir_okay=False))
@click.option("--csv", "csv_file", required=True, type=click.Path(dir_okay=False))
@click.option("--png", "png_file", default=None, type=click.Path(dir_okay=False),
              help="Matplotlib figure; defaults to the CSV path with .png.")
def report(runs_dir, svg_file, csv_file, png_file):
    """Aggregate run histories into convergence curves (CSV + SVG + PNG)."""
    runs = Path(runs_dir)
    sources: list[tuple[str, Path]] = []
    for path in sorted(runs.glob("*.jsonl")):
        sources.append((path.stem, path))
    for path in sorted(runs.glob("*/history.jsonl")):
        sources.append((path.parent.name, path))
    if not sources:
        click.echo(f"config error: no history files under {runs}", err=True)
        sys.exit(EXIT_CONFIG)
    labels, series_set = [], []
    try:
        for label, path in sources:
            labels.append(label)
            series_set.append(convergence_table(path.read_text()))
    except HistoryParseError as exc:
        click.echo(f"config error: {path}: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    n = max(len(s) for s in series_set)
    lines = [",".join(["evaluation_index"] + labels)]
    for i in range(n):
        row = [str(i + 1)]
        for s in series_set:
            if i < len(s) and s[i] != float("inf"):
                row.append(repr(s[i]))
            else:
                row.append("")
        lines.append(",".join(row))
    Path(csv_file).write_text("\n".join(lines) + "\n")
    Path(svg_file).write_text(render_svg(series_set, labels))
    png = png_file or str(Path(csv_file).with_suffix(".png"))
    render_png(series_set, labels, png)
    click.echo(f"wrote {csv_file}, {svg_file}, {png}")


if __name__ == "__main__":
    main()
