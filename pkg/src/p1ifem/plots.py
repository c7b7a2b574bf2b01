"""Figure rendering for the report path: log-log convergence curves next to
the delimited tables, and solution/error surfaces from the vertex dumps."""

from __future__ import annotations

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["convergence_figure", "field_figure"]

_NORMS = (("l2", "L2 error"), ("h1_broken", "H1 error"), ("linf", "max error"))


def convergence_figure(reports, path, title=None):
    """Log-log error-vs-resolution plot with first/second order guides.

    ``reports`` maps a curve label to a ConvergenceReport.
    """
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharex=True)
    for ax, (attr, label) in zip(axes, _NORMS):
        for name, rep in reports.items():
            inv_h = [r.inv_h for r in rep.reports]
            err = [getattr(r, attr) for r in rep.reports]
            ax.loglog(inv_h, err, "o-", label=name, markersize=4)
        if reports:
            rep = next(iter(reports.values()))
            inv_h = np.asarray([r.inv_h for r in rep.reports], dtype=float)
            e0 = getattr(rep.reports[0], attr)
            for order, style in ((1, ":"), (2, "--")):
                ax.loglog(inv_h, e0 * (inv_h[0] / inv_h) ** order, "k" + style,
                          linewidth=0.8, label=f"order {order}")
        ax.set_xlabel("1/h")
        ax.set_ylabel(label)
        ax.grid(True, which="both", alpha=0.3)
    axes[0].legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def field_figure(path, mesh, solution, exact=None, title=None):
    """Surface of the discrete solution and, when given, of its error."""
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    tris = mesh.triangles
    ncols = 2 if exact is not None else 1
    fig = plt.figure(figsize=(5.2 * ncols, 4.2))
    ax = fig.add_subplot(1, ncols, 1, projection="3d")
    ax.plot_trisurf(x, y, solution, triangles=tris, cmap="viridis",
                    linewidth=0.0, antialiased=False)
    ax.set_title("discrete solution")
    if exact is not None:
        ax2 = fig.add_subplot(1, ncols, 2, projection="3d")
        ax2.plot_trisurf(x, y, np.asarray(exact) - solution, triangles=tris,
                         cmap="coolwarm", linewidth=0.0, antialiased=False)
        ax2.set_title("pointwise error")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
