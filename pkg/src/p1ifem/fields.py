"""Side-resolved scalar and vector fields.

Problem data (diffusion coefficient, exact solution, its gradient, source)
live per subdomain; a :class:`SideField` bundles the two branches and
dispatches on a side label.  Branches are floats or numpy-vectorizable
callables of (x, y).  Mixed-side evaluation only ever calls a branch on the
points attributed to it, so branches may be singular on the opposite side.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SideField", "VectorSideField"]


def _as_callable(spec):
    if callable(spec):
        return spec
    value = float(spec)
    return lambda x, y: np.full_like(np.asarray(x, dtype=float), value)


class SideField:
    """Scalar field with independent plus/minus branches."""

    def __init__(self, plus, minus):
        self.plus_spec = plus
        self.minus_spec = minus
        self._plus = _as_callable(plus)
        self._minus = _as_callable(minus)

    @property
    def is_constant(self):
        return not callable(self.plus_spec) and not callable(self.minus_spec)

    def branch(self, side):
        return self._plus if side > 0 else self._minus

    def __call__(self, x, y, side):
        return float(self.branch(side)(x, y))

    def eval(self, x, y, side):
        """Evaluate one branch on arrays."""
        x = np.asarray(x, dtype=float)
        return np.asarray(self.branch(side)(x, np.asarray(y, dtype=float)),
                          dtype=float)

    def eval_sides(self, x, y, sides):
        """Evaluate with a per-point side array, masking each branch."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sides = np.asarray(sides)
        out = np.empty(x.shape, dtype=float)
        plus = sides > 0
        if plus.any():
            out[plus] = self.branch(1)(x[plus], y[plus])
        if (~plus).any():
            out[~plus] = self.branch(-1)(x[~plus], y[~plus])
        return out


class VectorSideField:
    """2-vector field with independent plus/minus branches.

    Branches are callables returning an (gx, gy) pair of arrays.
    """

    def __init__(self, plus, minus):
        self._plus = plus
        self._minus = minus

    def branch(self, side):
        return self._plus if side > 0 else self._minus

    def eval(self, x, y, side):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        gx, gy = self.branch(side)(x, y)
        return np.broadcast_to(np.asarray(gx, dtype=float), x.shape).copy(), \
            np.broadcast_to(np.asarray(gy, dtype=float), x.shape).copy()

    def eval_sides(self, x, y, sides):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sides = np.asarray(sides)
        gx = np.empty(x.shape, dtype=float)
        gy = np.empty(x.shape, dtype=float)
        plus = sides > 0
        if plus.any():
            px, py = self.branch(1)(x[plus], y[plus])
            gx[plus] = px
            gy[plus] = py
        if (~plus).any():
            mx, my = self.branch(-1)(x[~plus], y[~plus])
            gx[~plus] = mx
            gy[~plus] = my
        return gx, gy
