"""Immersed P1 finite elements for planar elliptic interface problems.

Structured unfitted meshes, flux-constrained piecewise-linear bases on cut
elements, an edge-stabilized scheme variant, and a convergence benchmark
harness with CSV/markdown emitters.
"""

__version__ = "0.1.0"

from .assembly import (GlobalSystem, apply_dirichlet, assemble_edge_consistency,
                       assemble_load, assemble_penalty, assemble_system,
                       assemble_volume)
from .basis import BasisSet, FemFunction, LocalBasis, immersed_p1, interpolate, standard_p1
from .cases import BenchmarkCase, builtin_case, straight_interface_case
from .driver import RunConfig, run_convergence, run_level
from .fields import SideField, VectorSideField
from .interface import (CutElementGeometry, GeometryError, InterfaceGeometry,
                        LevelSetInterface, build_interface_geometry,
                        classify_elements, cut_geometry, edge_intersection,
                        side_of)
from .mesh import Edge, StructuredMesh, build_uniform_mesh, edge_partition
from .norms import (ConvergenceReport, ErrorReport, compute_eoc, compute_norms,
                    edge_norms, error_report, h1_broken_error, l2_error,
                    linf_error, triple_norm)
from .quadrature import (QuadratureRule, cut_rule, segment_rule,
                         split_segment_rule, triangle_rule)
from .report import emit_fields, emit_manifest, emit_table, parse_table
from .solver import SolveReport, SolverError, solve

__all__ = [
    "__version__",
    "GlobalSystem", "apply_dirichlet", "assemble_edge_consistency",
    "assemble_load", "assemble_penalty", "assemble_system", "assemble_volume",
    "BasisSet", "FemFunction", "LocalBasis", "immersed_p1", "interpolate",
    "standard_p1",
    "BenchmarkCase", "builtin_case", "straight_interface_case",
    "RunConfig", "run_convergence", "run_level",
    "SideField", "VectorSideField",
    "CutElementGeometry", "GeometryError", "InterfaceGeometry",
    "LevelSetInterface", "build_interface_geometry", "classify_elements",
    "cut_geometry", "edge_intersection", "side_of",
    "Edge", "StructuredMesh", "build_uniform_mesh", "edge_partition",
    "ConvergenceReport", "ErrorReport", "compute_eoc", "compute_norms",
    "edge_norms", "error_report", "h1_broken_error", "l2_error", "linf_error",
    "triple_norm",
    "QuadratureRule", "cut_rule", "segment_rule", "split_segment_rule",
    "triangle_rule",
    "emit_fields", "emit_manifest", "emit_table", "parse_table",
    "SolveReport", "SolverError", "solve",
]
