"""Gaussian quadrature on triangles, segments, and chord-split cut elements.

Triangle rules are symmetric positive-weight rules of algebraic degree 1, 2,
4 or 6; segment rules are Gauss-Legendre with 1-3 points.  Rules on cut
elements are composites over the chord sub-polygons, with the quadrilateral
piece fanned into two triangles from the first cut point D.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureRule",
    "triangle_rule",
    "polygon_rule",
    "cut_rule",
    "segment_rule",
    "split_segment_rule",
    "reference_triangle_rule",
    "reference_segment_rule",
]


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (N, 2)
    weights: np.ndarray  # (N,), sums to the measure of the region


def _bary_group(a, b, c):
    """All distinct permutations of one barycentric triple."""
    seen = []
    for perm in ((a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)):
        if perm not in seen:
            seen.append(perm)
    return seen


def _triangle_reference_data(degree):
    if degree == 1:
        groups = [(1.0, (1 / 3, 1 / 3, 1 / 3))]
    elif degree == 2:
        groups = [(1 / 3, (2 / 3, 1 / 6, 1 / 6))]
    elif degree == 4:
        groups = [
            (0.223381589678011, (0.108103018168070, 0.445948490915965, 0.445948490915965)),
            (0.109951743655322, (0.816847572980459, 0.091576213509771, 0.091576213509771)),
        ]
    elif degree == 6:
        groups = [
            (0.116786275726379, (0.501426509658179, 0.249286745170910, 0.249286745170910)),
            (0.050844906370207, (0.873821971016996, 0.063089014491502, 0.063089014491502)),
            (0.082851075618374, (0.053145049844816, 0.310352451033784, 0.636502499121399)),
        ]
    else:
        raise ValueError(f"unsupported triangle rule degree {degree}; "
                         "choose one of 1, 2, 4, 6")
    bary, weights = [], []
    for w, triple in groups:
        for perm in _bary_group(*triple):
            bary.append(perm)
            weights.append(w)
    return np.asarray(bary), np.asarray(weights)


_TRI_CACHE = {d: _triangle_reference_data(d) for d in (1, 2, 4, 6)}

_GAUSS_1D = {
    1: (np.array([0.5]), np.array([1.0])),
    2: (np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)]),
        np.array([0.5, 0.5])),
    3: (np.array([0.5 - 0.5 * np.sqrt(0.6), 0.5, 0.5 + 0.5 * np.sqrt(0.6)]),
        np.array([5 / 18, 8 / 18, 5 / 18])),
}


def reference_triangle_rule(degree):
    """Barycentric points (N, 3) and normalized weights (N,) summing to 1."""
    return _TRI_CACHE[degree] if degree in _TRI_CACHE else _triangle_reference_data(degree)


def reference_segment_rule(npoints):
    """Gauss-Legendre nodes on [0, 1] and weights summing to 1."""
    if npoints not in _GAUSS_1D:
        raise ValueError(f"unsupported segment rule with {npoints} points; "
                         "choose 1, 2 or 3")
    return _GAUSS_1D[npoints]


def triangle_rule(coords, degree):
    """Rule exact for bivariate polynomials up to ``degree`` on a triangle."""
    coords = np.asarray(coords, dtype=float)
    bary, wref = reference_triangle_rule(degree)
    pts = bary @ coords
    a = coords[1] - coords[0]
    b = coords[2] - coords[0]
    area = 0.5 * abs(a[0] * b[1] - a[1] * b[0])
    return QuadratureRule(points=pts, weights=wref * area)


def polygon_rule(poly, degree):
    """Composite triangle rule on a convex polygon, fanned from vertex 0."""
    poly = np.asarray(poly, dtype=float)
    if poly.shape[0] == 3:
        return triangle_rule(poly, degree)
    pts, wts = [], []
    for k in range(1, poly.shape[0] - 1):
        rule = triangle_rule(poly[[0, k, k + 1]], degree)
        pts.append(rule.points)
        wts.append(rule.weights)
    return QuadratureRule(points=np.vstack(pts), weights=np.concatenate(wts))


def _fan_from_d(poly, d_xy):
    """Reorder a quad so the fan apex is the cut point D."""
    dist = np.hypot(poly[:, 0] - d_xy[0], poly[:, 1] - d_xy[1])
    k = int(np.argmin(dist))
    return np.roll(poly, -k, axis=0)


def cut_rule(cut, degree):
    """Composite rules on (sub_plus, sub_minus) of a cut element.

    The quadrilateral piece is split by the diagonal from D to its opposite
    vertex, which the fan from D produces.
    """
    rules = []
    for poly in (cut.sub_plus, cut.sub_minus):
        if poly.shape[0] == 4:
            poly = _fan_from_d(poly, cut.d_xy)
        rules.append(polygon_rule(poly, degree))
    return rules[0], rules[1]


def segment_rule(p0, p1, npoints):
    """Gauss-Legendre rule on the segment p0->p1; weights sum to its length."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t, w = reference_segment_rule(npoints)
    pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    length = float(np.hypot(*(p1 - p0)))
    return QuadratureRule(points=pts, weights=w * length)


def split_segment_rule(p0, p1, t_star, npoints):
    """Concatenated rules on [p0, p(t*)] and [p(t*), p1].

    Exact for integrands that are piecewise polynomial with the breakpoint at
    the interface crossing t*.
    """
    if not 0.0 < t_star < 1.0:
        raise ValueError(f"breakpoint t*={t_star} outside (0, 1)")
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    mid = p0 + t_star * (p1 - p0)
    left = segment_rule(p0, mid, npoints)
    right = segment_rule(mid, p1, npoints)
    return QuadratureRule(points=np.vstack([left.points, right.points]),
                          weights=np.concatenate([left.weights, right.weights]))
