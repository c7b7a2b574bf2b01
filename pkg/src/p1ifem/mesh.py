"""Uniform right-triangle meshes on axis-aligned rectangles.

Every grid square is split along its bottom-left to top-right diagonal, so a
level-``n`` mesh of a square domain has ``2^n x 2^n`` squares, ``2*4^n``
triangles and ``(2^n+1)^2`` vertices.  Vertex numbering is row-major, edges
are numbered by lexicographically sorted endpoint pairs, and every interior
edge carries a normal fixed once and for all (pointing out of its first
adjacent triangle), which downstream edge forms rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Edge", "StructuredMesh", "build_uniform_mesh", "edge_partition"]


@dataclass(frozen=True)
class Edge:
    """Single-edge view: endpoints, adjacency, fixed unit normal."""

    index: int
    endpoints: tuple[int, int]
    adjacent: tuple[int, ...]
    normal: np.ndarray
    length: float
    kind: str  # "interior" | "boundary"


class StructuredMesh:
    """Immutable triangulation of a rectangle with full edge topology.

    Attributes
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array, counterclockwise
    edges : (E, 2) int array, each row sorted, rows in lexicographic order
    edge_tris : (E, 2) int array, second entry -1 for boundary edges
    edge_normals : (E, 2) float array, unit, outward from ``edge_tris[:, 0]``
    tri_edges : (T, 3) int array, edge index opposite local order
        (edge k joins local vertices k and k+1 mod 3)
    """

    def __init__(self, domain, n, vertices, triangles, edges, edge_tris,
                 edge_normals, edge_lengths, tri_edges, vertex_is_boundary):
        self.domain = domain
        self.n = n
        self.vertices = vertices
        self.triangles = triangles
        self.edges = edges
        self.edge_tris = edge_tris
        self.edge_normals = edge_normals
        self.edge_lengths = edge_lengths
        self.tri_edges = tri_edges
        self.vertex_is_boundary = vertex_is_boundary
        self.hx = (domain[1] - domain[0]) / 2**n
        self.hy = (domain[3] - domain[2]) / 2**n
        for arr in (vertices, triangles, edges, edge_tris, edge_normals,
                    edge_lengths, tri_edges, vertex_is_boundary):
            arr.setflags(write=False)

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_triangles(self):
        return self.triangles.shape[0]

    @property
    def num_edges(self):
        return self.edges.shape[0]

    @property
    def is_boundary_edge(self):
        return self.edge_tris[:, 1] < 0

    def triangle_coords(self, t):
        """Vertex coordinates of triangle ``t`` as a (3, 2) array."""
        return self.vertices[self.triangles[t]]

    def all_triangle_coords(self):
        """(T, 3, 2) coordinate array for vectorized element loops."""
        return self.vertices[self.triangles]

    def triangle_area(self, t):
        p = self.triangle_coords(t)
        return 0.5 * ((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1])
                      - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))

    def triangle_areas(self):
        p = self.all_triangle_coords()
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def edge(self, k):
        """Edge ``k`` as an :class:`Edge` record."""
        t0, t1 = self.edge_tris[k]
        adjacent = (int(t0),) if t1 < 0 else (int(t0), int(t1))
        return Edge(
            index=int(k),
            endpoints=(int(self.edges[k, 0]), int(self.edges[k, 1])),
            adjacent=adjacent,
            normal=self.edge_normals[k],
            length=float(self.edge_lengths[k]),
            kind="boundary" if t1 < 0 else "interior",
        )

    def locate(self, x, y):
        """Index of the triangle containing point (x, y).

        Points on the shared diagonal go to the lower triangle; coordinates
        are clamped to the domain, so boundary points always resolve.
        """
        xmin, xmax, ymin, ymax = self.domain
        nc = 2**self.n
        i = min(max(int((x - xmin) / self.hx), 0), nc - 1)
        j = min(max(int((y - ymin) / self.hy), 0), nc - 1)
        xi = (x - xmin) / self.hx - i
        eta = (y - ymin) / self.hy - j
        cell = 2 * (j * nc + i)
        return cell if eta <= xi else cell + 1


def build_uniform_mesh(domain, n):
    """Build the level-``n`` uniform right-triangle mesh of ``domain``.

    Parameters
    ----------
    domain : (xmin, xmax, ymin, ymax)
    n : int
        Refinement level; each axis gets ``2^n`` intervals.
    """
    xmin, xmax, ymin, ymax = (float(v) for v in domain)
    if n < 0:
        raise ValueError(f"refinement level must be >= 0, got {n}")
    if xmax <= xmin or ymax <= ymin:
        raise ValueError(f"degenerate domain {domain!r}")

    nc = 2**n
    nv = nc + 1
    xs = np.linspace(xmin, xmax, nv)
    ys = np.linspace(ymin, ymax, nv)
    gx, gy = np.meshgrid(xs, ys)  # row-major: vertex j*nv + i at (xs[i], ys[j])
    vertices = np.column_stack([gx.ravel(), gy.ravel()])

    # Per square (i, j): lower triangle (ll, lr, ur), upper triangle (ll, ur, ul),
    # both counterclockwise, sharing the bottom-left -> top-right diagonal.
    ii, jj = np.meshgrid(np.arange(nc), np.arange(nc), indexing="xy")
    ll = (jj * nv + ii).ravel()
    lr = ll + 1
    ul = ll + nv
    ur = ul + 1
    triangles = np.empty((2 * nc * nc, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([ll, lr, ur])
    triangles[1::2] = np.column_stack([ll, ur, ul])

    # Undirected edges, rows sorted, deduplicated in lexicographic order.
    raw = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]],
                          triangles[:, [2, 0]]])
    raw.sort(axis=1)
    edges, inverse = np.unique(raw, axis=0, return_inverse=True)
    ne = edges.shape[0]

    # tri_edges: local edge k of triangle t is rows t, t+T, t+2T of `raw`.
    nt = triangles.shape[0]
    tri_edges = inverse.reshape(3, nt).T.copy()

    # Adjacency: for each edge the (at most two) incident triangles, the
    # lower triangle index first.
    edge_tris = np.full((ne, 2), -1, dtype=np.int64)
    order = np.argsort(inverse, kind="stable")
    owners = order % nt
    counts = np.bincount(inverse, minlength=ne)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    first = owners[starts]
    edge_tris[:, 0] = first
    has_two = counts == 2
    second = owners[starts[has_two] + 1]
    edge_tris[has_two, 1] = second
    both = edge_tris[has_two]
    edge_tris[has_two, 0] = both.min(axis=1)
    edge_tris[has_two, 1] = both.max(axis=1)

    p0 = vertices[edges[:, 0]]
    p1 = vertices[edges[:, 1]]
    tangents = p1 - p0
    edge_lengths = np.hypot(tangents[:, 0], tangents[:, 1])
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    normals /= edge_lengths[:, None]
    # Orient out of the first adjacent triangle: flip where the normal points
    # toward that triangle's opposite vertex.
    tri0 = triangles[edge_tris[:, 0]]
    s = tri0.sum(axis=1) - edges.sum(axis=1)  # the vertex not on the edge
    inward = ((vertices[s] - 0.5 * (p0 + p1)) * normals).sum(axis=1) > 0
    normals[inward] *= -1.0

    on_bnd = ((np.abs(vertices[:, 0] - xmin) == 0.0)
              | (np.abs(vertices[:, 0] - xmax) == 0.0)
              | (np.abs(vertices[:, 1] - ymin) == 0.0)
              | (np.abs(vertices[:, 1] - ymax) == 0.0))

    return StructuredMesh((xmin, xmax, ymin, ymax), n, vertices, triangles,
                          edges, edge_tris, normals, edge_lengths, tri_edges,
                          on_bnd)


def edge_partition(mesh):
    """Split edge indices into (interior, boundary) arrays."""
    boundary = mesh.is_boundary_edge
    idx = np.arange(mesh.num_edges)
    return idx[~boundary], idx[boundary]
