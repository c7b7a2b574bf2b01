"""Convergence-sweep driver: mesh -> cut geometry -> bases -> system ->
solve -> norms, per refinement level, with per-level failure tolerance."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .assembly import (DEFAULT_EDGE_POINTS, DEFAULT_SIGMA0,
                       DEFAULT_VOLUME_DEGREE, apply_dirichlet, assemble_system)
from .basis import BasisSet
from .cases import builtin_case
from .interface import build_interface_geometry
from .mesh import build_uniform_mesh
from .norms import DEFAULT_ERROR_DEGREE, ConvergenceReport, error_report
from .solver import DEFAULT_TOL, SolverError, solve

__all__ = ["RunConfig", "LevelResult", "run_level", "run_convergence"]

N_RANGE = (3, 10)


@dataclass
class RunConfig:
    """Full description of one sweep; every field has a CLI mirror."""

    case: str = "cubic"
    scheme: str = "modified"
    eps: int = -1
    sigma0: float = DEFAULT_SIGMA0
    n_min: int = 4
    n_max: int = 9
    beta_minus: float | None = None
    beta_plus: float | None = None
    solver_tol: float = DEFAULT_TOL
    solver_method: str = "auto"
    volume_degree: int = DEFAULT_VOLUME_DEGREE
    error_degree: int = DEFAULT_ERROR_DEGREE
    edge_points: int = DEFAULT_EDGE_POINTS
    out: str | None = None
    format: str = "csv"
    fields: str | None = None
    manifest: str | None = None
    plots: str | None = None

    def __post_init__(self):
        if self.eps not in (-1, 0, 1):
            raise ValueError(f"eps must be -1, 0 or 1, got {self.eps}")
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be nonnegative")
        if not (N_RANGE[0] <= self.n_min <= self.n_max <= N_RANGE[1]):
            raise ValueError(f"n range must lie within {N_RANGE}, "
                             f"got [{self.n_min}, {self.n_max}]")
        if self.scheme not in ("ifem", "modified"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def levels(self):
        return range(self.n_min, self.n_max + 1)

    def make_case(self):
        return builtin_case(self.case, beta_minus=self.beta_minus,
                            beta_plus=self.beta_plus)

    def to_dict(self):
        return asdict(self)


@dataclass
class LevelResult:
    """One solved level plus the geometry diagnostics the manifest records."""

    report: object
    mesh: object
    geom: object
    solution: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def run_level(case, n, scheme="modified", eps=-1, sigma0=DEFAULT_SIGMA0,
              solver_tol=DEFAULT_TOL, solver_method="auto",
              volume_degree=DEFAULT_VOLUME_DEGREE,
              error_degree=DEFAULT_ERROR_DEGREE,
              edge_points=DEFAULT_EDGE_POINTS):
    """Solve one refinement level of ``case`` and measure every norm."""
    t0 = time.perf_counter()
    mesh = build_uniform_mesh(case.domain, n)
    geom = build_interface_geometry(mesh, case.interface)
    basis_set = BasisSet(mesh, geom, case.beta)
    system = assemble_system(mesh, geom, basis_set, case.f, scheme=scheme,
                             eps=eps, sigma0=sigma0, dirichlet_u=case.u,
                             volume_degree=volume_degree,
                             edge_points=edge_points)
    constrained = apply_dirichlet(system, case.u, mesh, geom)
    sol = solve(constrained, tol=solver_tol, method=solver_method)
    wall_ms = (time.perf_counter() - t0) * 1e3

    report = error_report(mesh, geom, basis_set, sol.solution, case.u,
                          case.grad_u, case.beta, n,
                          iterations=sol.iterations, wall_ms=wall_ms,
                          degree=error_degree, edge_points=edge_points)
    diagnostics = {
        "n": n,
        "interface_elements": len(geom.cuts),
        "snapped_vertices": geom.snapped_vertices,
        "small_cut_reclassified": geom.small_cut_reclassified,
        "solver_method": sol.method,
        "solver_residual": sol.relative_residual,
        "special_point_uncut_elements": {
            f"({p[0]}, {p[1]})": sum(
                1 for e in geom.elements_containing(p) if e not in geom.cuts)
            for p in case.special_points},
    }
    return LevelResult(report=report, mesh=mesh, geom=geom,
                       solution=sol.solution, diagnostics=diagnostics)


def run_convergence(config, keep_finest=False):
    """Run the sweep described by ``config``.

    Solver nonconvergence aborts the affected level, is recorded, and the
    sweep continues.  Returns (ConvergenceReport, manifest_info, finest
    LevelResult or None).
    """
    case = config.make_case()
    report = ConvergenceReport()
    level_diags = []
    finest = None
    for n in config.levels():
        try:
            result = run_level(
                case, n, scheme=config.scheme, eps=config.eps,
                sigma0=config.sigma0, solver_tol=config.solver_tol,
                solver_method=config.solver_method,
                volume_degree=config.volume_degree,
                error_degree=config.error_degree,
                edge_points=config.edge_points)
        except SolverError as exc:
            report.failures.append({"n": n, "error": str(exc)})
            level_diags.append({"n": n, "solver_failure": str(exc)})
            continue
        report.append(result.report)
        level_diags.append(result.diagnostics)
        if keep_finest:
            finest = result
    info = {"config": config.to_dict(), "levels": level_diags,
            "failures": report.failures}
    return report, info, finest
