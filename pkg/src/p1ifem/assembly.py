"""Global system assembly for both schemes.

The base scheme is the volume form plus load vector; the modified scheme
adds the edge consistency form (flux average against value jump, with an
adjoint term weighted by epsilon) and the jump penalty, assembled only over
interior edges touching at least one cut element since jumps vanish
elsewhere.  Boundary conditions are applied by symmetric elimination, which
keeps an epsilon = -1 matrix exactly symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .interface import _polygon_centroid
from .quadrature import (cut_rule, reference_triangle_rule, segment_rule,
                         split_segment_rule)

__all__ = [
    "GlobalSystem",
    "assemble_volume",
    "assemble_load",
    "assemble_edge_consistency",
    "assemble_penalty",
    "assemble_system",
    "apply_dirichlet",
    "active_edges",
]

DEFAULT_SIGMA0 = 0.1
DEFAULT_VOLUME_DEGREE = 4
DEFAULT_EDGE_POINTS = 2


@dataclass
class GlobalSystem:
    """Sparse system with scheme metadata; one unknown per mesh vertex."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    scheme: str                  # "ifem" | "modified"
    eps: int = -1
    sigma0: float = DEFAULT_SIGMA0
    constrained: bool = False
    dirichlet: list = field(default_factory=list)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def symmetric(self):
        return self.scheme == "ifem" or self.eps == -1

    def dump_matrix(self, path):
        """Write (row, col, value) triplets, one per line."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")


def _coo_to_csr(rows, cols, vals, dim):
    mat = sp.coo_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def _integrated_beta(mesh, geom, beta, degree, elements):
    """Integral of the coefficient over each listed (uncut) element."""
    coords = mesh.all_triangle_coords()[elements]
    areas = np.abs(
        0.5 * ((coords[:, 1, 0] - coords[:, 0, 0]) * (coords[:, 2, 1] - coords[:, 0, 1])
               - (coords[:, 2, 0] - coords[:, 0, 0]) * (coords[:, 1, 1] - coords[:, 0, 1])))
    labels = geom.labels[elements]
    if beta.is_constant:
        vals = np.where(labels > 0, beta(0.0, 0.0, 1), beta(0.0, 0.0, -1))
        return vals * areas
    bary, wref = reference_triangle_rule(degree)
    pts = np.einsum("qk,tkd->tqd", bary, coords)
    out = np.zeros(len(elements))
    for side in (1, -1):
        m = labels == side
        if not m.any():
            continue
        bv = beta.eval(pts[m, :, 0].ravel(), pts[m, :, 1].ravel(), side)
        out[m] = (bv.reshape(-1, len(wref)) * wref).sum(axis=1) * areas[m]
    return out


def assemble_volume(mesh, geom, basis_set, beta=None, degree=DEFAULT_VOLUME_DEGREE):
    """Stiffness contributions of the volume form as COO triplet arrays."""
    beta = basis_set.beta if beta is None else beta
    uncut = np.flatnonzero(geom.labels != 0)
    rows, cols, vals = [], [], []

    if uncut.size:
        grads = basis_set.std_coeffs[uncut][:, :, 1:]          # (U, 3, 2)
        gram = np.einsum("tid,tjd->tij", grads, grads)
        k_local = gram * _integrated_beta(mesh, geom, beta, degree, uncut)[:, None, None]
        tri = mesh.triangles[uncut]
        rows.append(np.repeat(tri, 3, axis=1).ravel())
        cols.append(np.tile(tri, (1, 3)).ravel())
        vals.append(k_local.ravel())

    for element, local in basis_set.cut_bases.items():
        cut = local.cut
        k_local = np.zeros((3, 3))
        rule_plus, rule_minus = cut_rule(cut, degree)
        for side, rule in ((1, rule_plus), (-1, rule_minus)):
            g = local.gradients(side)
            ib = float(np.dot(rule.weights,
                              beta.eval(rule.points[:, 0], rule.points[:, 1], side)))
            k_local += (g @ g.T) * ib
        tri = mesh.triangles[element]
        rows.append(np.repeat(tri, 3))
        cols.append(np.tile(tri, 3))
        vals.append(k_local.ravel())

    return rows, cols, vals


def assemble_load(mesh, geom, basis_set, f, degree=DEFAULT_VOLUME_DEGREE):
    """Load vector of the side-resolved source ``f``."""
    rhs = np.zeros(mesh.num_vertices)
    uncut = np.flatnonzero(geom.labels != 0)
    if uncut.size:
        coords = mesh.all_triangle_coords()[uncut]
        areas = np.abs(
            0.5 * ((coords[:, 1, 0] - coords[:, 0, 0]) * (coords[:, 2, 1] - coords[:, 0, 1])
                   - (coords[:, 2, 0] - coords[:, 0, 0]) * (coords[:, 1, 1] - coords[:, 0, 1])))
        bary, wref = reference_triangle_rule(degree)
        pts = np.einsum("qk,tkd->tqd", bary, coords)
        labels = geom.labels[uncut]
        fv = np.zeros(pts.shape[:2])
        for side in (1, -1):
            m = labels == side
            if m.any():
                fv[m] = f.eval(pts[m, :, 0].ravel(), pts[m, :, 1].ravel(),
                               side).reshape(-1, len(wref))
        # phi_i at barycentric point q is bary[q, i]
        contrib = np.einsum("tq,qi->ti", fv * wref[None, :], bary) * areas[:, None]
        np.add.at(rhs, mesh.triangles[uncut].ravel(), contrib.ravel())

    for element, local in basis_set.cut_bases.items():
        rule_plus, rule_minus = cut_rule(local.cut, degree)
        contrib = np.zeros(3)
        for side, rule in ((1, rule_plus), (-1, rule_minus)):
            fv = f.eval(rule.points[:, 0], rule.points[:, 1], side)
            phi = local.values(rule.points[:, 0], rule.points[:, 1], side)
            contrib += (phi * (fv * rule.weights)).sum(axis=1)
        np.add.at(rhs, mesh.triangles[element], contrib)
    return rhs


def active_edges(mesh, geom):
    """Interior edges adjacent to at least one cut element."""
    cut_mask = np.zeros(mesh.num_triangles + 1, dtype=bool)
    cut_mask[list(geom.cuts)] = True
    t0 = mesh.edge_tris[:, 0]
    t1 = mesh.edge_tris[:, 1]
    interior = t1 >= 0
    return np.flatnonzero(interior & (cut_mask[t0] | cut_mask[t1]))


def _edge_rule(mesh, geom, k, npoints):
    a, b = mesh.edges[k]
    p0, p1 = mesh.vertices[a], mesh.vertices[b]
    t_star = geom.edge_ts.get(int(k))
    if t_star is None:
        return segment_rule(p0, p1, npoints)
    return split_segment_rule(p0, p1, t_star, npoints)


def _edge_traces(mesh, geom, basis_set, beta, element, rule, normal):
    """Per-point value and coefficient-weighted normal-flux traces of the
    three nodal functions of ``element`` along an edge rule."""
    x, y = rule.points[:, 0], rule.points[:, 1]
    local = basis_set.local_basis(element)
    nq = x.size
    if local.kind == "standard":
        side = int(geom.labels[element])
        phi = local.values(x, y)
        bn = beta.eval(x, y, side) * (local.gradients() @ normal)[:, None]
        return phi, bn
    sides = local.cut.chord_side(x, y)
    phi = np.empty((3, nq))
    bn = np.empty((3, nq))
    for s in (1, -1):
        m = sides == s
        if not m.any():
            continue
        phi[:, m] = local.values(x[m], y[m], side=s)
        bn[:, m] = beta.eval(x[m], y[m], s) * (local.gradients(s) @ normal)[:, None]
    return phi, bn


def assemble_edge_consistency(mesh, geom, basis_set, eps, beta=None,
                              npoints=DEFAULT_EDGE_POINTS):
    """Edge consistency form as COO triplets.

    Per interior edge near the interface: minus the integral of the average
    normal flux of the trial function against the jump of the test function,
    plus ``eps`` times the transposed pairing.
    """
    if eps not in (-1, 0, 1):
        raise ValueError(f"eps must be one of -1, 0, 1, got {eps}")
    beta = basis_set.beta if beta is None else beta
    rows, cols, vals = [], [], []
    for k in active_edges(mesh, geom):
        t1, t2 = mesh.edge_tris[k]
        rule = _edge_rule(mesh, geom, k, npoints)
        normal = mesh.edge_normals[k]
        phi1, bn1 = _edge_traces(mesh, geom, basis_set, beta, int(t1), rule, normal)
        phi2, bn2 = _edge_traces(mesh, geom, basis_set, beta, int(t2), rule, normal)

        jump = np.vstack([phi1, -phi2])                     # (6, nq)
        avg = 0.5 * np.vstack([bn1, bn2])
        # m[a, b] = integral of {beta grad phi_b . n} [phi_a]
        m = (jump * rule.weights) @ avg.T
        block = -m + eps * m.T

        verts = np.concatenate([mesh.triangles[t1], mesh.triangles[t2]])
        rows.append(np.repeat(verts, 6))
        cols.append(np.tile(verts, 6))
        vals.append(block.ravel())
    if not rows:
        empty = np.empty(0)
        return [empty.astype(int)], [empty.astype(int)], [empty]
    return rows, cols, vals


def crossed_boundary_edges(mesh, geom):
    """Boundary edges carrying an interface crossing."""
    return sorted(k for k in geom.edge_ts if mesh.edge_tris[k, 1] < 0)


def assemble_boundary_consistency(mesh, geom, basis_set, eps, sigma0, g=None,
                                  beta=None, npoints=DEFAULT_EDGE_POINTS):
    """One-sided consistency and penalty terms on crossed boundary edges.

    A discrete function vanishing at the boundary vertices is not zero along
    a boundary edge the interface crosses (its trace kinks there), so the
    integration-by-parts identity leaves a boundary flux term on exactly
    these edges.  The one-sided analogue of the interior forms restores
    consistency: jump means the trace itself, average the one-sided flux,
    and the adjoint and penalty parts pair against the Dirichlet trace ``g``
    (taken as zero when absent) on the right-hand side.

    Returns (rows, cols, vals, rhs) with rhs of full vertex dimension.
    """
    beta = basis_set.beta if beta is None else beta
    rows, cols, vals = [], [], []
    rhs = np.zeros(mesh.num_vertices)
    crossed = crossed_boundary_edges(mesh, geom)
    if not crossed:
        empty = np.empty(0)
        return [empty.astype(int)], [empty.astype(int)], [empty], rhs
    beta_max = _element_beta_max(mesh, geom, basis_set, beta)
    interface = geom.interface
    for k in crossed:
        element = int(mesh.edge_tris[k, 0])
        rule = _edge_rule(mesh, geom, k, npoints)
        normal = mesh.edge_normals[k]  # outward, single adjacent element
        phi, bn = _edge_traces(mesh, geom, basis_set, beta, element, rule, normal)
        sigma_e = sigma0 * beta_max[element] / mesh.edge_lengths[k]
        m = (phi * rule.weights) @ bn.T   # m[a, b] = int (beta grad phi_b . n) phi_a
        block = -m + eps * m.T + sigma_e * ((phi * rule.weights) @ phi.T)
        verts = mesh.triangles[element]
        rows.append(np.repeat(verts, 3))
        cols.append(np.tile(verts, 3))
        vals.append(block.ravel())
        if g is not None:
            x, y = rule.points[:, 0], rule.points[:, 1]
            sides = interface.sides_from_values(interface.func(x, y))
            gv = g.eval_sides(x, y, sides)
            np.add.at(rhs, verts, eps * (bn * rule.weights) @ gv
                      + sigma_e * (phi * rule.weights) @ gv)
    return rows, cols, vals, rhs


def _element_beta_max(mesh, geom, basis_set, beta):
    """Largest coefficient value among each element's pieces (centroids)."""
    coords = mesh.all_triangle_coords()
    cent = coords.mean(axis=1)
    out = np.empty(mesh.num_triangles)
    for side in (1, -1):
        m = geom.labels == side
        if m.any():
            out[m] = beta.eval(cent[m, 0], cent[m, 1], side)
    for element, cut in geom.cuts.items():
        bp = beta(*_polygon_centroid(cut.sub_plus), 1)
        bm = beta(*_polygon_centroid(cut.sub_minus), -1)
        out[element] = max(bp, bm)
    return out


def assemble_penalty(mesh, geom, basis_set, sigma0, beta=None,
                     npoints=DEFAULT_EDGE_POINTS):
    """Jump penalty form as COO triplets; weight sigma_e / h_e per edge."""
    if sigma0 < 0:
        raise ValueError("sigma0 must be nonnegative")
    beta = basis_set.beta if beta is None else beta
    rows, cols, vals = [], [], []
    if sigma0 == 0.0:
        empty = np.empty(0)
        return [empty.astype(int)], [empty.astype(int)], [empty]
    beta_max = _element_beta_max(mesh, geom, basis_set, beta)
    for k in active_edges(mesh, geom):
        t1, t2 = mesh.edge_tris[k]
        rule = _edge_rule(mesh, geom, k, npoints)
        normal = mesh.edge_normals[k]
        phi1, _ = _edge_traces(mesh, geom, basis_set, beta, int(t1), rule, normal)
        phi2, _ = _edge_traces(mesh, geom, basis_set, beta, int(t2), rule, normal)
        jump = np.vstack([phi1, -phi2])
        sigma_e = sigma0 * max(beta_max[t1], beta_max[t2])
        block = (sigma_e / mesh.edge_lengths[k]) * ((jump * rule.weights) @ jump.T)
        verts = np.concatenate([mesh.triangles[t1], mesh.triangles[t2]])
        rows.append(np.repeat(verts, 6))
        cols.append(np.tile(verts, 6))
        vals.append(block.ravel())
    if not rows:
        empty = np.empty(0)
        return [empty.astype(int)], [empty.astype(int)], [empty]
    return rows, cols, vals


def assemble_system(mesh, geom, basis_set, f, scheme="modified", eps=-1,
                    sigma0=DEFAULT_SIGMA0, dirichlet_u=None,
                    volume_degree=DEFAULT_VOLUME_DEGREE,
                    edge_points=DEFAULT_EDGE_POINTS):
    """Assemble the unconstrained system for one scheme.

    ``dirichlet_u`` supplies the exact boundary trace for the crossed
    boundary-edge terms of the modified scheme; omitted means homogeneous
    data there.
    """
    if scheme not in ("ifem", "modified"):
        raise ValueError(f"unknown scheme {scheme!r}")
    rows, cols, vals = assemble_volume(mesh, geom, basis_set,
                                       degree=volume_degree)
    rhs = assemble_load(mesh, geom, basis_set, f, degree=volume_degree)
    if scheme == "modified":
        for part in (assemble_edge_consistency(mesh, geom, basis_set, eps,
                                               npoints=edge_points),
                     assemble_penalty(mesh, geom, basis_set, sigma0,
                                      npoints=edge_points)):
            rows += part[0]
            cols += part[1]
            vals += part[2]
        b_rows, b_cols, b_vals, b_rhs = assemble_boundary_consistency(
            mesh, geom, basis_set, eps, sigma0, g=dirichlet_u,
            npoints=edge_points)
        rows += b_rows
        cols += b_cols
        vals += b_vals
        rhs += b_rhs
    matrix = _coo_to_csr(rows, cols, vals, mesh.num_vertices)
    return GlobalSystem(matrix=matrix, rhs=rhs, scheme=scheme, eps=eps,
                        sigma0=sigma0)


def apply_dirichlet(system, g, mesh, geom=None):
    """Constrain boundary vertices to ``g`` by symmetric elimination.

    ``g`` is a callable (x, y) -> value, a side-resolved field (when ``geom``
    is given), or an array over boundary vertices in index order.  Known
    values are moved to the right-hand side and constrained rows and columns
    become identity, so a symmetric matrix stays symmetric.
    """
    bnd = np.flatnonzero(mesh.vertex_is_boundary)
    xy = mesh.vertices[bnd]
    if isinstance(g, np.ndarray):
        gv = np.asarray(g, dtype=float)
    elif geom is not None and hasattr(g, "eval_sides"):
        gv = g.eval_sides(xy[:, 0], xy[:, 1], geom.vertex_sides[bnd])
    else:
        gv = np.asarray([float(g(p[0], p[1])) for p in xy])

    dim = system.dimension
    lifted = np.zeros(dim)
    lifted[bnd] = gv
    rhs = system.rhs - system.matrix @ lifted
    rhs[bnd] = gv

    keep = np.ones(dim)
    keep[bnd] = 0.0
    d_free = sp.diags(keep, format="csr")
    matrix = d_free @ system.matrix @ d_free
    ones = np.zeros(dim)
    ones[bnd] = 1.0
    matrix = (matrix + sp.diags(ones)).tocsr()
    matrix.sort_indices()

    return replace(system, matrix=matrix, rhs=rhs, constrained=True,
                   dirichlet=list(zip(bnd.tolist(), gv.tolist())))
