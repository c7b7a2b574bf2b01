"""Built-in benchmark problems on [-1, 1]^2.

Each case bundles the level set with its subdomain orientation, the
coefficient, the manufactured exact solution u = L / beta with its gradient,
the matching source, and the Dirichlet trace.  Source terms were derived
symbolically from the level sets; the test suite cross-checks them against
finite differences of the strong form.

The sharp-corner level set equals the published polynomial for x <= 0.6; to
the right of the corner the tail term enters with flipped sign, which removes
the spurious zero branches while keeping the zero set, the corner at
(0.6, 0), and C^1 continuity.  The exact solution uses the plain polynomial
everywhere, so the source stays smooth across that seam.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import SideField, VectorSideField
from .interface import LevelSetInterface

__all__ = ["BenchmarkCase", "builtin_case", "straight_interface_case",
           "BUILTIN_CASES"]

DOMAIN = (-1.0, 1.0, -1.0, 1.0)


@dataclass
class BenchmarkCase:
    name: str
    interface: LevelSetInterface
    beta: SideField
    u: SideField
    grad_u: VectorSideField
    f: SideField
    domain: tuple = DOMAIN
    special_points: list = field(default_factory=list)

    def boundary_values(self, mesh, geom):
        """Exact trace at boundary vertices (index order)."""
        bnd = np.flatnonzero(mesh.vertex_is_boundary)
        xy = mesh.vertices[bnd]
        return self.u.eval_sides(xy[:, 0], xy[:, 1], geom.vertex_sides[bnd])


def _cubic_case(beta_minus=1.0, beta_plus=10.0):
    def level(x, y):
        return y - 3.0 * x * (x - 0.3) * (x - 0.8) - 0.34

    def grad_level(x, y):
        return (-9.0 * x**2 + 6.6 * x - 0.72,
                np.ones_like(np.asarray(x, dtype=float)))

    interface = LevelSetInterface(level, minus_sign=-1, grad=grad_level,
                                  name="cubic")
    u = SideField(lambda x, y: level(x, y) / beta_plus,
                  lambda x, y: level(x, y) / beta_minus)
    grad_u = VectorSideField(
        lambda x, y: tuple(g / beta_plus for g in grad_level(x, y)),
        lambda x, y: tuple(g / beta_minus for g in grad_level(x, y)))
    f = SideField(lambda x, y: 18.0 * x - 6.6, lambda x, y: 18.0 * x - 6.6)
    return BenchmarkCase(name="cubic", interface=interface,
                         beta=SideField(beta_plus, beta_minus),
                         u=u, grad_u=grad_u, f=f)


def _corner_case(beta_minus=1.0, beta_plus=10.0):
    def poly(x, y):
        return -y**2 + (x - 0.6) ** 2 * (x + 0.4)

    def grad_poly(x, y):
        return 3.0 * x**2 - 1.6 * x - 0.12, -2.0 * np.asarray(y, dtype=float)

    def level(x, y):
        x = np.asarray(x, dtype=float)
        tail = (x - 0.6) ** 2 * (x + 0.4)
        return -np.asarray(y, dtype=float) ** 2 + np.where(x <= 0.6, tail, -tail)

    interface = LevelSetInterface(level, minus_sign=1, name="corner")
    u = SideField(lambda x, y: poly(x, y) / beta_plus,
                  lambda x, y: poly(x, y) / beta_minus)
    grad_u = VectorSideField(
        lambda x, y: tuple(g / beta_plus for g in grad_poly(x, y)),
        lambda x, y: tuple(g / beta_minus for g in grad_poly(x, y)))
    f = SideField(lambda x, y: 3.6 - 6.0 * x, lambda x, y: 3.6 - 6.0 * x)
    return BenchmarkCase(name="corner", interface=interface,
                         beta=SideField(beta_plus, beta_minus),
                         u=u, grad_u=grad_u, f=f,
                         special_points=[(0.6, 0.0)])


def _ellipse_case():
    def level(x, y):
        return x**2 / 0.81 + y**2 / 0.25 - 1.0

    def beta_minus(x, y):
        return (x**2 + y**2 - 1.0) ** 2

    def u_minus(x, y):
        return level(x, y) / beta_minus(x, y)

    def grad_u_minus(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r3 = (x**2 + y**2 - 1.0) ** 3
        gx = 4.0 * x * (-50.0 * x**2 - 274.0 * y**2 + 31.0) / (81.0 * r3)
        gy = 4.0 * y * (62.0 * x**2 - 162.0 * y**2 - 81.0) / (81.0 * r3)
        return gx, gy

    def f_minus(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = (x**2 + y**2 - 1.0) ** 2
        num = 6.0 * x**4 - 212.0 * x**2 * y**2 - 12.0 * x**2 \
            - 218.0 * y**4 + 436.0 * y**2 + 25.0
        return -8.0 * num / (81.0 * r2)

    interface = LevelSetInterface(level, minus_sign=-1, name="ellipse")
    u = SideField(level, u_minus)
    grad_u = VectorSideField(
        lambda x, y: (2.0 * np.asarray(x, dtype=float) / 0.81,
                      2.0 * np.asarray(y, dtype=float) / 0.25),
        grad_u_minus)
    f = SideField(-848.0 / 81.0, f_minus)
    return BenchmarkCase(name="ellipse", interface=interface,
                         beta=SideField(1.0, beta_minus),
                         u=u, grad_u=grad_u, f=f)


BUILTIN_CASES = ("cubic", "corner", "ellipse")


def builtin_case(name, beta_minus=None, beta_plus=None):
    """One of the named benchmark problems.

    Defaults match the published runs: cubic with beta = (1, 10), corner with
    beta = (1, 10), ellipse with its fixed variable coefficient.
    """
    if name == "cubic":
        return _cubic_case(beta_minus if beta_minus is not None else 1.0,
                           beta_plus if beta_plus is not None else 10.0)
    if name == "corner":
        return _corner_case(beta_minus if beta_minus is not None else 1.0,
                            beta_plus if beta_plus is not None else 10.0)
    if name == "ellipse":
        if beta_minus is not None or beta_plus is not None:
            raise ValueError("the ellipse case has a fixed variable coefficient")
        return _ellipse_case()
    raise ValueError(f"unknown case {name!r}; choose from {BUILTIN_CASES}")


def straight_interface_case(offset=0.31, beta_minus=1.0, beta_plus=10.0):
    """Patch-test problem: straight interface x = offset, u = (x - offset)/beta.

    The exact solution lies in the discrete space, so a consistent scheme
    reproduces it at the vertices up to solver tolerance.
    """
    def level(x, y):
        return np.asarray(x, dtype=float) - offset

    interface = LevelSetInterface(level, minus_sign=-1, name="line")
    u = SideField(lambda x, y: level(x, y) / beta_plus,
                  lambda x, y: level(x, y) / beta_minus)
    zeros = lambda x, y: np.zeros_like(np.asarray(x, dtype=float))
    grad_u = VectorSideField(
        lambda x, y: (np.full_like(np.asarray(x, dtype=float), 1.0 / beta_plus),
                      zeros(x, y)),
        lambda x, y: (np.full_like(np.asarray(x, dtype=float), 1.0 / beta_minus),
                      zeros(x, y)))
    return BenchmarkCase(name="line", interface=interface,
                         beta=SideField(beta_plus, beta_minus),
                         u=u, grad_u=grad_u, f=SideField(0.0, 0.0))
