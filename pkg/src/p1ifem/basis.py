"""Local P1 bases: standard barycentric on uncut elements, flux-constrained
two-piece linear functions on cut elements.

Each cut-element nodal function has one linear piece per chord side, pinned
down by six conditions: the three nodal values (each imposed on the side
owning that vertex), value continuity at both chord endpoints, and matching
of the coefficient-weighted normal derivative across the chord.  The six by
six system is solved densely with partial pivoting and its residual checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interface import _polygon_centroid

__all__ = ["LocalBasis", "BasisSet", "FemFunction",
           "standard_p1", "immersed_p1", "interpolate"]

RESIDUAL_TOL = 1e-10


class BasisConstructionError(RuntimeError):
    """Singular or badly conditioned cut-element basis system."""


@dataclass
class LocalBasis:
    """Coefficients of the three nodal functions on one element.

    ``coeffs[i] = (a, b, c)`` with ``phi_i = a + b x + c y``.  Immersed bases
    carry one coefficient block per chord side plus their cut geometry.
    """

    element: int
    kind: str                    # "standard" | "immersed"
    coeffs: np.ndarray           # (3, 3); plus-side block when immersed
    minus_coeffs: np.ndarray | None = None
    cut: object | None = None

    def block(self, side=1):
        if self.kind == "standard" or side > 0:
            return self.coeffs
        return self.minus_coeffs

    def values(self, x, y, side=1):
        """All three nodal functions at (x, y); arrays broadcast to (3, ...)."""
        c = self.block(side)
        return c[:, 0, None] + c[:, 1, None] * np.ravel(x) \
            + c[:, 2, None] * np.ravel(y)

    def value(self, i, x, y, side=1):
        c = self.block(side)[i]
        return c[0] + c[1] * x + c[2] * y

    def gradients(self, side=1):
        """(3, 2) array of the constant per-side gradients."""
        return self.block(side)[:, 1:]

    def grad(self, i, side=1):
        return self.block(side)[i, 1:]


def _standard_coeffs(coords):
    x, y = coords[:, 0], coords[:, 1]
    j, k = [1, 2, 0], [2, 0, 1]
    twice_area = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0])
    if twice_area == 0.0:
        raise ValueError("zero-area triangle")
    a = (x[j] * y[k] - x[k] * y[j]) / twice_area
    b = (y[j] - y[k]) / twice_area
    c = (x[k] - x[j]) / twice_area
    return np.column_stack([a, b, c])


def standard_p1(coords, element=-1):
    """Barycentric coordinate functions of one triangle."""
    coords = np.asarray(coords, dtype=float)
    return LocalBasis(element=element, kind="standard",
                      coeffs=_standard_coeffs(coords))


def immersed_p1(coords, cut, beta_plus, beta_minus, element=None):
    """Two-piece linear nodal basis satisfying the chord flux condition.

    ``beta_plus``/``beta_minus`` are the (positive) coefficient values used
    in the normal-flux matching row.
    """
    if beta_plus <= 0.0 or beta_minus <= 0.0:
        raise ValueError("coefficient values must be positive")
    coords = np.asarray(coords, dtype=float)
    if element is None:
        element = cut.element

    # Unknowns per nodal function: (a+, b+, c+, a-, b-, c-).
    A = np.zeros((6, 6))
    rhs = np.zeros((6, 3))
    for j in range(3):
        col = 0 if cut.vertex_sides[j] > 0 else 3
        A[j, col:col + 3] = (1.0, coords[j, 0], coords[j, 1])
        rhs[j, j] = 1.0
    for r, pt in ((3, cut.d_xy), (4, cut.e_xy)):
        A[r, 0:3] = (1.0, pt[0], pt[1])
        A[r, 3:6] = (-1.0, -pt[0], -pt[1])
    nx, ny = cut.chord_normal
    scale = max(beta_plus, beta_minus)
    A[5, 1] = beta_plus * nx / scale
    A[5, 2] = beta_plus * ny / scale
    A[5, 4] = -beta_minus * nx / scale
    A[5, 5] = -beta_minus * ny / scale

    try:
        sol = np.linalg.solve(A, rhs)
        sol += np.linalg.solve(A, rhs - A @ sol)  # one refinement step
    except np.linalg.LinAlgError as exc:
        raise BasisConstructionError(
            f"singular basis system on element {element}: {exc}\n"
            f"vertices={coords.tolist()} sides={cut.vertex_sides.tolist()} "
            f"D={cut.d_xy.tolist()} E={cut.e_xy.tolist()}") from exc
    residual = np.abs(A @ sol - rhs).max()
    if residual > RESIDUAL_TOL:
        raise BasisConstructionError(
            f"ill-conditioned basis system on element {element}: "
            f"residual {residual:.3e}\n"
            f"vertices={coords.tolist()} sides={cut.vertex_sides.tolist()} "
            f"areas=({cut.area_plus:.3e}, {cut.area_minus:.3e})")

    return LocalBasis(element=element, kind="immersed",
                      coeffs=sol[:3].T.copy(), minus_coeffs=sol[3:].T.copy(),
                      cut=cut)


class BasisSet:
    """All local bases of a mesh: vectorized standard coefficients plus a
    dictionary of immersed bases on the cut elements.

    For variable coefficients the flux row uses the coefficient sampled at
    the centroid of each chord sub-polygon.
    """

    def __init__(self, mesh, geom, beta):
        self.mesh = mesh
        self.geom = geom
        self.beta = beta
        coords = mesh.all_triangle_coords()
        x, y = coords[:, :, 0], coords[:, :, 1]
        j, k = [1, 2, 0], [2, 0, 1]
        twice_area = ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
                      - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
        self.std_coeffs = np.stack([
            (x[:, j] * y[:, k] - x[:, k] * y[:, j]) / twice_area[:, None],
            (y[:, j] - y[:, k]) / twice_area[:, None],
            (x[:, k] - x[:, j]) / twice_area[:, None],
        ], axis=2)  # (T, 3, 3): [element, local node, (a, b, c)]

        self.cut_bases = {}
        for element, cut in geom.cuts.items():
            bp = beta(*_polygon_centroid(cut.sub_plus), 1)
            bm = beta(*_polygon_centroid(cut.sub_minus), -1)
            self.cut_bases[element] = immersed_p1(coords[element], cut, bp, bm)

    def local_basis(self, element):
        basis = self.cut_bases.get(element)
        if basis is not None:
            return basis
        return LocalBasis(element=element, kind="standard",
                          coeffs=self.std_coeffs[element])

    def is_cut(self, element):
        return element in self.cut_bases


class FemFunction:
    """Nodal-coefficient function over a mesh and its basis set."""

    def __init__(self, basis_set, values):
        self.basis_set = basis_set
        self.mesh = basis_set.mesh
        self.values = np.asarray(values, dtype=float)

    def element_dofs(self, element):
        return self.values[self.mesh.triangles[element]]

    def eval_element(self, element, x, y):
        """Values at points known to lie in ``element`` (chord-aware)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        dofs = self.element_dofs(element)
        basis = self.basis_set.local_basis(element)
        if basis.kind == "standard":
            return dofs @ basis.values(x, y)
        sides = basis.cut.chord_side(x, y)
        out = np.empty(x.shape)
        for s in (1, -1):
            m = sides == s
            if m.any():
                out[m] = dofs @ basis.values(x[m], y[m], side=s)
        return out

    def grad_element(self, element, side=1):
        dofs = self.element_dofs(element)
        basis = self.basis_set.local_basis(element)
        return dofs @ basis.gradients(side)

    def __call__(self, x, y):
        element = self.mesh.locate(x, y)
        return float(self.eval_element(element, [x], [y])[0])


def interpolate(u, mesh, geom, basis_set=None):
    """Nodal interpolant of a side-resolved scalar field.

    ``u`` is a :class:`~p1ifem.fields.SideField` (or any object with an
    ``eval_sides`` method); vertex sides come from the snapped level-set
    classification.  Returns a :class:`FemFunction` when a basis set is
    given, otherwise the raw vertex-value vector.
    """
    v = mesh.vertices
    values = u.eval_sides(v[:, 0], v[:, 1], geom.vertex_sides)
    if basis_set is None:
        return values
    return FemFunction(basis_set, values)
