"""Analytic level-set interfaces, element classification and cut geometry.

The interface is the zero set of a smooth level function.  Sides are region
labels (+1 for the "plus" subdomain, -1 for "minus"); which raw sign of the
level function maps to the minus subdomain is a per-problem orientation flag.
Values within the snap tolerance count as the plus side, which keeps every
detected cut strictly inside two distinct edges.

Inside a cut triangle the interface is replaced by the chord joining its two
edge intersections; the chord splits the triangle into a lone-vertex
sub-triangle and a quadrilateral, and all downstream side attribution on cut
elements uses the chord, not the exact curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GeometryError",
    "LevelSetInterface",
    "CutElementGeometry",
    "InterfaceGeometry",
    "classify_elements",
    "edge_intersection",
    "cut_geometry",
    "side_of",
    "build_interface_geometry",
    "synthetic_cut",
]

SNAP_REL = 1e-12
SMALL_CUT_FRACTION = 1e-10
BISECTION_WIDTH = 1e-14


class GeometryError(RuntimeError):
    """Interface geometry the solver does not support."""


class LevelSetInterface:
    """Level function with orientation flag and optional analytic gradient.

    Parameters
    ----------
    func : callable (x, y) -> float, numpy-vectorizable
    minus_sign : +1 or -1
        Raw sign of the level function on the minus subdomain.
    grad : optional callable (x, y) -> (gx, gy)
    name : optional label for reports
    """

    def __init__(self, func, minus_sign=-1, grad=None, name=None):
        if minus_sign not in (-1, 1):
            raise ValueError("minus_sign must be +1 or -1")
        self.func = func
        self.minus_sign = minus_sign
        self.grad = grad
        self.name = name
        # Characteristic magnitude of the level function; classification
        # updates it from mesh vertex values so the snap tolerance scales.
        self.characteristic = 1.0

    @property
    def snap_tol(self):
        return SNAP_REL * (1.0 + self.characteristic)

    def value(self, x, y):
        return self.func(x, y)

    def oriented(self, x, y):
        """Level values with sign flipped so that positive means plus side."""
        v = np.asarray(self.func(x, y), dtype=float)
        return v if self.minus_sign == -1 else -v

    def sides_from_values(self, values):
        """Map raw level values to region labels; |value| <= tol snaps to +1."""
        v = np.asarray(values, dtype=float)
        if self.minus_sign == 1:
            v = -v
        return np.where(np.abs(v) <= self.snap_tol, 1, np.sign(v)).astype(np.int8)

    def side(self, x, y):
        """Region label of a single point: +1 or -1."""
        return int(self.sides_from_values(self.func(x, y)))

    def side_array(self, x, y):
        return self.sides_from_values(self.func(x, y))


def side_of(interface, point):
    """Region label {+1, -1} of ``point``; snapped values report +1."""
    return interface.side(point[0], point[1])


def classify_elements(mesh, interface, update_scale=True):
    """Label every element: +1 / -1 (uncut, on that side) or 0 (cut).

    An element is cut iff its snapped vertex labels are not all equal.
    """
    v = mesh.vertices
    values = np.asarray(interface.func(v[:, 0], v[:, 1]), dtype=float)
    if update_scale:
        interface.characteristic = float(np.max(np.abs(values)))
    sides = interface.sides_from_values(values)
    tri_sides = sides[mesh.triangles]  # (T, 3)
    labels = np.where((tri_sides == tri_sides[:, :1]).all(axis=1),
                      tri_sides[:, 0], 0).astype(np.int8)
    return labels, sides


def edge_intersection(interface, p0, p1):
    """Parametric root t* in (0, 1) of the level set along segment p0->p1.

    Bisection on the oriented level values, bracket narrowed below 1e-14;
    assumes a single crossing per edge.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0

    def g(t):
        q = p0 + t * d
        return float(interface.oriented(q[0], q[1]))

    tol = interface.snap_tol
    a, b = 0.0, 1.0
    ga, gb = g(a), g(b)
    sa = 1 if (ga > tol or abs(ga) <= tol) else -1
    sb = 1 if (gb > tol or abs(gb) <= tol) else -1
    if sa == sb:
        raise GeometryError("not a cut edge: level set has equal signs "
                            f"at endpoints ({ga:.3e}, {gb:.3e})")
    # Snapped signs seed the bracket; the iteration itself tracks the raw
    # sign so the final interval straddles the actual zero.
    while b - a > BISECTION_WIDTH:
        m = 0.5 * (a + b)
        gm = g(m)
        sm = sa if gm == 0.0 else (1 if gm > 0.0 else -1)
        if sm == sa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


@dataclass
class CutElementGeometry:
    """Chord split of one cut triangle.

    ``d_*``/``e_*`` are the two edge intersections in the triangle's local
    edge order; parametric coordinates refer to the owning mesh edge's sorted
    endpoints.  ``chord_normal`` is the unit normal of segment DE pointing
    into the plus sub-polygon.
    """

    element: int
    vertex_sides: np.ndarray          # (3,) int8, local vertex region labels
    d_edge: int
    d_t: float
    d_xy: np.ndarray
    e_edge: int
    e_t: float
    e_xy: np.ndarray
    chord_normal: np.ndarray
    sub_plus: np.ndarray              # (k, 2) counterclockwise polygon
    sub_minus: np.ndarray
    area_plus: float
    area_minus: float
    lone_side: int = field(default=0)

    def chord_side(self, x, y):
        """Chord-based side labels: points on the chord count as plus."""
        s = ((np.asarray(x) - self.d_xy[0]) * self.chord_normal[0]
             + (np.asarray(y) - self.d_xy[1]) * self.chord_normal[1])
        return np.where(s >= 0.0, 1, -1).astype(np.int8)


def _polygon_area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _polygon_centroid(poly):
    x, y = poly[:, 0], poly[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = 0.5 * cross.sum()
    cx = float(((x + np.roll(x, -1)) * cross).sum() / (6.0 * a))
    cy = float(((y + np.roll(y, -1)) * cross).sum() / (6.0 * a))
    return cx, cy


def _assemble_cut(element, coords, vertex_sides, lone, cut_pts, cut_edges, cut_ts):
    """Build a CutElementGeometry from the lone vertex and two cut points.

    ``cut_pts`` holds the intersection on edge (lone, next) first and on edge
    (prev, lone) second, where next/prev follow counterclockwise order.
    """
    nxt, prv = (lone + 1) % 3, (lone + 2) % 3
    p_ln, p_pl = cut_pts
    lone_tri = np.array([coords[lone], p_ln, p_pl])
    quad = np.array([p_ln, coords[nxt], coords[prv], p_pl])

    lone_side = int(vertex_sides[lone])
    if lone_side > 0:
        sub_plus, sub_minus = lone_tri, quad
    else:
        sub_plus, sub_minus = quad, lone_tri
    area_plus = _polygon_area(sub_plus)
    if area_plus < 0.0:  # clockwise parent triangle; store ccw polygons
        sub_plus = sub_plus[::-1].copy()
        sub_minus = sub_minus[::-1].copy()
        area_plus = -area_plus
    area_minus = _polygon_area(sub_minus)

    # D/E follow the triangle's local edge order: edge 0 = (v0,v1), etc.
    # Edge (lone, nxt) is local edge `lone`; edge (prv, lone) is local `prv`.
    if lone < prv:
        d_pt, d_edge, d_t = p_ln, cut_edges[0], cut_ts[0]
        e_pt, e_edge, e_t = p_pl, cut_edges[1], cut_ts[1]
    else:
        d_pt, d_edge, d_t = p_pl, cut_edges[1], cut_ts[1]
        e_pt, e_edge, e_t = p_ln, cut_edges[0], cut_ts[0]

    chord = e_pt - d_pt
    norm = float(np.hypot(chord[0], chord[1]))
    if norm == 0.0:
        # D and E coincide (crossing snapped into a vertex); the small-cut
        # guard discards this element, so any unit vector serves.
        normal = np.array([1.0, 0.0])
    else:
        normal = np.array([chord[1], -chord[0]]) / norm
        to_lone = coords[lone] - 0.5 * (d_pt + e_pt)
        points_to_lone = float(normal @ to_lone) > 0.0
        if points_to_lone != (lone_side > 0):
            normal = -normal

    return CutElementGeometry(
        element=element, vertex_sides=np.asarray(vertex_sides, dtype=np.int8),
        d_edge=d_edge, d_t=d_t, d_xy=d_pt, e_edge=e_edge, e_t=e_t, e_xy=e_pt,
        chord_normal=normal, sub_plus=sub_plus, sub_minus=sub_minus,
        area_plus=area_plus, area_minus=area_minus, lone_side=lone_side)


def cut_geometry(mesh, interface, element, vertex_sides=None, edge_ts=None):
    """Chord geometry of one cut element.

    ``edge_ts`` optionally maps mesh edge index -> parametric crossing, so
    shared edges are intersected exactly once per mesh.
    """
    tri = mesh.triangles[element]
    coords = mesh.vertices[mesh.triangles[element]]
    if vertex_sides is None:
        vertex_sides = interface.side_array(coords[:, 0], coords[:, 1])
    vertex_sides = np.asarray(vertex_sides)
    if (vertex_sides == vertex_sides[0]).all():
        raise GeometryError(f"element {element} is not an interface element")

    lone = int(np.flatnonzero(vertex_sides != np.sign(vertex_sides.sum()))[0])
    nxt, prv = (lone + 1) % 3, (lone + 2) % 3

    cut_pts, cut_edges, cut_ts = [], [], []
    for local in (lone, prv):  # edge (lone,nxt) then edge (prv,lone)
        k = int(mesh.tri_edges[element, local])
        a, b = mesh.edges[k]
        if edge_ts is not None and k in edge_ts:
            t = edge_ts[k]
        else:
            t = edge_intersection(interface, mesh.vertices[a], mesh.vertices[b])
            if edge_ts is not None:
                edge_ts[k] = t
        if not 0.0 < t < 1.0:
            raise GeometryError(f"degenerate cut on edge {k} (t={t})")
        pt = mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a])
        cut_pts.append(pt)
        cut_edges.append(k)
        cut_ts.append(t)

    # Cross-check that exactly the two expected edges change sign.
    changes = sum(1 for loc in range(3)
                  if vertex_sides[loc] != vertex_sides[(loc + 1) % 3])
    if changes != 2:
        raise GeometryError(
            f"unsupported cut topology on element {element}: "
            f"{changes} sign-change edges (vertices {tri.tolist()})")

    return _assemble_cut(element, coords, vertex_sides, lone,
                         cut_pts, cut_edges, cut_ts)


def synthetic_cut(coords, lone, t_next, t_prev, lone_side=-1, element=0):
    """Cut geometry for a bare triangle, for tests and property suites.

    ``t_next`` parametrizes the cut on edge (lone, lone+1) from the lone
    vertex; ``t_prev`` the cut on edge (lone+2, lone) from the other vertex.
    """
    coords = np.asarray(coords, dtype=float)
    nxt, prv = (lone + 1) % 3, (lone + 2) % 3
    p_ln = coords[lone] + t_next * (coords[nxt] - coords[lone])
    p_pl = coords[prv] + t_prev * (coords[lone] - coords[prv])
    sides = np.full(3, -lone_side, dtype=np.int8)
    sides[lone] = lone_side
    return _assemble_cut(element, coords, sides, lone, [p_ln, p_pl],
                         [lone, prv], [t_next, t_prev])


@dataclass
class InterfaceGeometry:
    """Classification plus per-element cut data for one mesh.

    ``labels`` already includes small-cut reclassification; ``cuts`` maps an
    element index to its chord geometry and ``edge_ts`` a cut mesh edge to
    its single parametric crossing.
    """

    mesh: object
    interface: LevelSetInterface
    labels: np.ndarray
    vertex_sides: np.ndarray
    cuts: dict
    edge_ts: dict
    snapped_vertices: int
    small_cut_reclassified: int

    @property
    def cut_elements(self):
        return sorted(self.cuts)

    def element_side(self, element, x, y):
        """Side labels for points inside ``element`` (chord-based when cut)."""
        cut = self.cuts.get(element)
        if cut is not None:
            return cut.chord_side(x, y)
        lab = int(self.labels[element])
        return np.full(np.shape(np.asarray(x)), lab, dtype=np.int8)

    def elements_containing(self, point):
        """Elements whose closed triangle contains ``point`` (diagnostics)."""
        hits = []
        px, py = point
        coords = self.mesh.all_triangle_coords()
        a = coords[:, 0]
        d1 = ((coords[:, 1] - a)[:, 0] * (py - a[:, 1])
              - (coords[:, 1] - a)[:, 1] * (px - a[:, 0]))
        b = coords[:, 1]
        d2 = ((coords[:, 2] - b)[:, 0] * (py - b[:, 1])
              - (coords[:, 2] - b)[:, 1] * (px - b[:, 0]))
        c = coords[:, 2]
        d3 = ((coords[:, 0] - c)[:, 0] * (py - c[:, 1])
              - (coords[:, 0] - c)[:, 1] * (px - c[:, 0]))
        eps = 1e-14
        inside = (d1 >= -eps) & (d2 >= -eps) & (d3 >= -eps)
        hits = np.flatnonzero(inside)
        return hits.tolist()


def build_interface_geometry(mesh, interface):
    """Classify the mesh and extract chord geometry for every cut element.

    Applies the small-cut guard: elements whose smaller sub-region is below
    ``SMALL_CUT_FRACTION`` of the triangle area are relabeled to the majority
    side and dropped from the cut set.
    """
    labels, sides = classify_elements(mesh, interface)
    v = mesh.vertices
    values = np.asarray(interface.func(v[:, 0], v[:, 1]), dtype=float)
    snapped = int(np.count_nonzero(np.abs(values) <= interface.snap_tol))

    cuts = {}
    edge_ts = {}
    reclassified = 0
    for element in np.flatnonzero(labels == 0):
        element = int(element)
        cut = cut_geometry(mesh, interface, element,
                           vertex_sides=sides[mesh.triangles[element]],
                           edge_ts=edge_ts)
        area = cut.area_plus + cut.area_minus
        if min(cut.area_plus, cut.area_minus) / area < SMALL_CUT_FRACTION:
            labels[element] = 1 if cut.area_plus >= cut.area_minus else -1
            reclassified += 1
            continue
        cuts[element] = cut

    # Drop crossings owned only by reclassified elements.
    live = {k for c in cuts.values() for k in (c.d_edge, c.e_edge)}
    edge_ts = {k: t for k, t in edge_ts.items() if k in live}

    return InterfaceGeometry(mesh=mesh, interface=interface, labels=labels,
                             vertex_sides=sides, cuts=cuts, edge_ts=edge_ts,
                             snapped_vertices=snapped,
                             small_cut_reclassified=reclassified)
