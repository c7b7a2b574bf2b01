"""Benchmark command line: solve one level, run a convergence sweep, or
compare both schemes side by side.

A JSON config file mirrors every flag (keys named like the flags with
underscores); explicitly given flags override file values.  Exit codes:
0 success, 2 solver failure, 3 geometry failure.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .cases import BUILTIN_CASES
from .driver import RunConfig, run_convergence, run_level
from .interface import GeometryError
from .report import emit_fields, emit_manifest, emit_table
from .solver import SolverError

EXIT_SOLVER = 2
EXIT_GEOMETRY = 3


def _merge_config(ctx, params):
    """File values for parameters the command line left at defaults."""
    path = params.pop("config", None)
    if not path:
        return params
    with open(path) as fh:
        file_values = json.load(fh)
    from click.core import ParameterSource
    for key, value in file_values.items():
        if key not in params:
            raise click.UsageError(f"unknown config key {key!r} in {path}")
        if ctx.get_parameter_source(key) != ParameterSource.COMMANDLINE:
            params[key] = value
    return params


def _case_options(fn):
    fn = click.option("--case", type=click.Choice(BUILTIN_CASES),
                      default="cubic", show_default=True)(fn)
    fn = click.option("--beta-minus", type=float, default=None,
                      help="Coefficient on the minus side (cubic/corner).")(fn)
    fn = click.option("--beta-plus", type=float, default=None,
                      help="Coefficient on the plus side (cubic/corner).")(fn)
    return fn


def _scheme_options(fn):
    fn = click.option("--scheme", type=click.Choice(["ifem", "modified"]),
                      default="modified", show_default=True)(fn)
    fn = click.option("--eps", type=click.IntRange(-1, 1), default=-1,
                      show_default=True)(fn)
    fn = click.option("--sigma0", type=float, default=0.1, show_default=True)(fn)
    fn = click.option("--solver-tol", type=float, default=1e-10,
                      show_default=True)(fn)
    fn = click.option("--method", "solver_method",
                      type=click.Choice(["auto", "cg", "nonsym", "direct"]),
                      default="auto", show_default=True)(fn)
    fn = click.option("--config", type=click.Path(exists=True), default=None,
                      help="JSON file mirroring the flags; flags override.")(fn)
    return fn


@click.group()
def main():
    """Benchmarks for the immersed finite element interface solver."""


def _level_line(r):
    return (f"n={r.n} 1/h={r.inv_h:.0f} dofs={r.dofs} "
            f"l2={r.l2:.4e} h1={r.h1_broken:.4e} linf={r.linf:.4e} "
            f"triple={r.triple_norm:.4e} iters={r.iterations} "
            f"ms={r.wall_ms:.0f}")


@main.command()
@_case_options
@_scheme_options
@click.option("--n", type=click.IntRange(3, 10), default=4, show_default=True)
@click.option("--fields", type=click.Path(), default=None,
              help="Write a vertex field dump (CSV) to this path.")
@click.pass_context
def solve(ctx, **params):
    """Solve one refinement level and print its error report."""
    params = _merge_config(ctx, params)
    n = params.pop("n")
    fields = params.pop("fields")
    cfg = RunConfig(n_min=n, n_max=n, **params)
    case = cfg.make_case()
    try:
        result = run_level(case, n, scheme=cfg.scheme, eps=cfg.eps,
                           sigma0=cfg.sigma0, solver_tol=cfg.solver_tol,
                           solver_method=cfg.solver_method)
    except SolverError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(EXIT_SOLVER)
    except GeometryError as exc:
        click.echo(f"geometry failure: {exc}", err=True)
        sys.exit(EXIT_GEOMETRY)
    click.echo(_level_line(result.report))
    if fields:
        emit_fields(fields, result.mesh, result.geom, case, result.solution)
        click.echo(f"fields -> {fields}")


def _run_sweep(cfg):
    try:
        report, info, finest = run_convergence(cfg, keep_finest=True)
    except GeometryError as exc:
        click.echo(f"geometry failure: {exc}", err=True)
        sys.exit(EXIT_GEOMETRY)
    return report, info, finest


def _emit_outputs(cfg, case, report, info, finest, label):
    text = emit_table(report, fmt=cfg.format, path=cfg.out, title=label)
    if cfg.out:
        click.echo(f"table -> {cfg.out}")
    else:
        click.echo(text, nl=False)
    if cfg.fields and finest is not None:
        emit_fields(cfg.fields, finest.mesh, finest.geom, case, finest.solution)
        click.echo(f"fields -> {cfg.fields}")
    if cfg.manifest:
        emit_manifest(cfg.manifest, info)
        click.echo(f"manifest -> {cfg.manifest}")
    if cfg.plots:
        from .plots import convergence_figure, field_figure
        os.makedirs(cfg.plots, exist_ok=True)
        fig = os.path.join(cfg.plots, f"convergence_{cfg.case}_{label}.png")
        convergence_figure({label: report}, fig, title=f"{cfg.case} ({label})")
        click.echo(f"figure -> {fig}")
        if finest is not None:
            v = finest.mesh.vertices
            exact = case.u.eval_sides(v[:, 0], v[:, 1],
                                      finest.geom.vertex_sides)
            fig = os.path.join(cfg.plots, f"fields_{cfg.case}_{label}.png")
            field_figure(fig, finest.mesh, finest.solution, exact,
                         title=f"{cfg.case} ({label}), n={finest.report.n}")
            click.echo(f"figure -> {fig}")


@main.command()
@_case_options
@_scheme_options
@click.option("--n-min", type=click.IntRange(3, 10), default=4, show_default=True)
@click.option("--n-max", type=click.IntRange(3, 10), default=9, show_default=True)
@click.option("--format", type=click.Choice(["csv", "md"]), default="csv",
              show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Table output path (stdout when omitted).")
@click.option("--fields", type=click.Path(), default=None,
              help="Vertex field dump of the finest solved level.")
@click.option("--manifest", type=click.Path(), default=None,
              help="JSON run manifest path.")
@click.option("--plots", type=click.Path(), default=None,
              help="Directory for rendered convergence/field figures.")
@click.pass_context
def converge(ctx, **params):
    """Run a refinement sweep and emit its convergence table."""
    params = _merge_config(ctx, params)
    cfg = RunConfig(**params)
    case = cfg.make_case()
    report, info, finest = _run_sweep(cfg)
    _emit_outputs(cfg, case, report, info, finest, cfg.scheme)
    if report.failures:
        click.echo(f"{len(report.failures)} level(s) failed to solve", err=True)
        sys.exit(EXIT_SOLVER)


@main.command()
@_case_options
@_scheme_options
@click.option("--n-min", type=click.IntRange(3, 10), default=4, show_default=True)
@click.option("--n-max", type=click.IntRange(3, 10), default=9, show_default=True)
@click.option("--format", type=click.Choice(["csv", "md"]), default="md",
              show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Output stem; per-scheme suffixes are appended.")
@click.option("--manifest", type=click.Path(), default=None)
@click.option("--plots", type=click.Path(), default=None)
@click.pass_context
def compare(ctx, **params):
    """Run both schemes and emit side-by-side tables."""
    params = _merge_config(ctx, params)
    params.pop("scheme", None)
    out = params.pop("out", None)
    manifest = params.pop("manifest", None)
    plots = params.pop("plots", None)
    reports = {}
    failures = 0
    infos = {}
    for scheme in ("ifem", "modified"):
        cfg = RunConfig(scheme=scheme, **params)
        report, info, finest = _run_sweep(cfg)
        reports[scheme] = report
        infos[scheme] = info
        failures += len(report.failures)
        path = None
        if out:
            stem, ext = os.path.splitext(out)
            path = f"{stem}_{scheme}{ext or '.' + cfg.format}"
        text = emit_table(report, fmt=cfg.format, path=path,
                          title=f"{cfg.case} / {scheme}")
        if path:
            click.echo(f"table -> {path}")
        else:
            click.echo(text, nl=False)
    l2_pairs = zip(reports["ifem"].reports, reports["modified"].reports)
    for base, mod in l2_pairs:
        click.echo(f"n={base.n}: l2 ifem={base.l2:.4e} modified={mod.l2:.4e}")
    if manifest:
        emit_manifest(manifest, {"config": params,
                                 "levels": [infos[s]["levels"] for s in infos],
                                 "failures": [infos[s]["failures"] for s in infos]})
        click.echo(f"manifest -> {manifest}")
    if plots:
        from .plots import convergence_figure
        os.makedirs(plots, exist_ok=True)
        fig = os.path.join(plots, f"convergence_{params['case']}_compare.png")
        convergence_figure(reports, fig, title=f"{params['case']}: both schemes")
        click.echo(f"figure -> {fig}")
    if failures:
        sys.exit(EXIT_SOLVER)


if __name__ == "__main__":
    main()
