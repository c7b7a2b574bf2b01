"""Emitters: CSV and markdown convergence tables, vertex field dumps, JSON
run manifests.  CSV floats are written with shortest round-trip precision, so
re-parsing an emitted table reproduces the in-memory report exactly.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .norms import CSV_COLUMNS, ConvergenceReport, ErrorReport

__all__ = ["emit_table", "emit_fields", "emit_manifest", "parse_table",
           "render_csv", "render_markdown"]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def render_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.rows():
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _fmt_err(v):
    return f"{v:.3e}"


def _fmt_eoc(v):
    return "" if v is None else f"{v:.3f}"


def render_markdown(report, title=None):
    """Error/order column pairs in the layout of the published tables."""
    lines = []
    if title:
        lines.append(f"### {title}")
        lines.append("")
    header = ["1/h", "L2 error", "order", "H1 error", "order",
              "Linf error", "order"]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---:"] * len(header)) + "|")
    eoc_l2 = report.eoc("l2")
    eoc_h1 = report.eoc("h1_broken")
    eoc_li = report.eoc("linf")
    for k, r in enumerate(report.reports):
        lines.append("| " + " | ".join([
            f"{r.inv_h:.0f}", _fmt_err(r.l2), _fmt_eoc(eoc_l2[k]),
            _fmt_err(r.h1_broken), _fmt_eoc(eoc_h1[k]),
            _fmt_err(r.linf), _fmt_eoc(eoc_li[k])]) + " |")
    lines.append("")
    return "\n".join(lines)


def emit_table(report, fmt="csv", path=None, title=None):
    """Render a convergence report; write it when ``path`` is given."""
    if fmt == "csv":
        text = render_csv(report)
    elif fmt == "md":
        text = render_markdown(report, title=title)
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_table(text):
    """Inverse of :func:`render_csv` (timing column included)."""
    rows = list(csv.reader(io.StringIO(text)))
    if rows and rows[0] == CSV_COLUMNS:
        rows = rows[1:]
    report = ConvergenceReport()
    for row in rows:
        if not row:
            continue
        report.append(ErrorReport(
            n=int(row[0]), inv_h=float(row[1]), dofs=int(row[2]),
            l2=float(row[3]), h1_broken=float(row[5]), linf=float(row[7]),
            edge_jump=float(row[9]), edge_flux=float(row[10]),
            triple_norm=float(row[11]), iterations=int(row[12]),
            wall_ms=float(row[13])))
    return report


def emit_fields(path, mesh, geom, case, solution):
    """Vertex dump: x, y, u_h, u_exact, side per line (CSV)."""
    v = mesh.vertices
    sides = geom.vertex_sides
    exact = case.u.eval_sides(v[:, 0], v[:, 1], sides)
    with open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "u_h", "u_exact", "side"])
        for k in range(mesh.num_vertices):
            writer.writerow([repr(float(v[k, 0])), repr(float(v[k, 1])),
                             repr(float(solution[k])), repr(float(exact[k])),
                             "+" if sides[k] > 0 else "-"])


def emit_manifest(path, info, extra=None):
    """JSON manifest: config, tolerances, geometry diagnostics, versions."""
    from .interface import BISECTION_WIDTH, SMALL_CUT_FRACTION, SNAP_REL

    payload = {
        "config": info.get("config", {}),
        "tolerances": {
            "snap_rel": SNAP_REL,
            "small_cut_fraction": SMALL_CUT_FRACTION,
            "bisection_width": BISECTION_WIDTH,
        },
        "levels": info.get("levels", []),
        "failures": info.get("failures", []),
        "versions": {
            "p1ifem": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload
