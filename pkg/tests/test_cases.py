import numpy as np
import pytest

from p1ifem.cases import BUILTIN_CASES, builtin_case, straight_interface_case
from p1ifem.interface import build_interface_geometry
from p1ifem.mesh import build_uniform_mesh


def all_cases():
    return [builtin_case("cubic"),
            builtin_case("cubic", beta_minus=1.0, beta_plus=1000.0),
            builtin_case("corner"),
            builtin_case("corner", beta_minus=10.0, beta_plus=1.0),
            builtin_case("ellipse")]


def interface_points(case, count):
    """Explicit parametrizations of the three interfaces."""
    t = np.linspace(0.05, 0.95, count)
    if case.name == "cubic":
        x = -0.4 + t * 1.3
        y = 3 * x * (x - 0.3) * (x - 0.8) + 0.34
        return np.column_stack([x, y])
    if case.name == "corner":
        x = -0.38 + t * (0.58 + 0.38)
        y = np.abs(x - 0.6) * np.sqrt(x + 0.4)
        sgn = np.where(t > 0.5, 1.0, -1.0)
        return np.column_stack([x, sgn * y])
    if case.name == "ellipse":
        ang = 2 * np.pi * t
        return np.column_stack([0.9 * np.cos(ang), 0.5 * np.sin(ang)])
    raise ValueError(case.name)


def level_gradient(case, x, y):
    if case.name == "cubic":
        return np.column_stack([-9 * x**2 + 6.6 * x - 0.72, np.ones_like(x)])
    if case.name == "corner":
        return np.column_stack([3 * x**2 - 1.6 * x - 0.12, -2 * y])
    if case.name == "ellipse":
        return np.column_stack([2 * x / 0.81, 2 * y / 0.25])
    raise ValueError(case.name)


@pytest.mark.parametrize("case", all_cases(), ids=lambda c: c.name)
def test_manufactured_source_by_finite_differences(case):
    # central differences of the flux divergence vs the declared source,
    # at interior points safely away from the interface
    rng = np.random.default_rng(hash(case.name) % 2**32)
    h = 1e-5
    for side in (1, -1):
        count = 0
        while count < 1000:
            pts = rng.uniform(-0.95, 0.95, size=(4000, 2))
            lv = np.abs(case.interface.func(pts[:, 0], pts[:, 1]))
            sides = case.interface.side_array(pts[:, 0], pts[:, 1])
            keep = (sides == side) & (lv > 0.05)
            pts = pts[keep][:1000 - count]
            if not len(pts):
                continue
            count += len(pts)
            x, y = pts[:, 0], pts[:, 1]

            def flux(xx, yy, comp):
                gx, gy = case.grad_u.eval(xx, yy, side)
                b = case.beta.eval(xx, yy, side)
                return b * (gx if comp == 0 else gy)

            div = ((flux(x + h, y, 0) - flux(x - h, y, 0)) / (2 * h)
                   + (flux(x, y + h, 1) - flux(x, y - h, 1)) / (2 * h))
            f = case.f.eval(x, y, side)
            scale = np.maximum(np.abs(f), 1.0)
            assert (np.abs(-div - f) / scale).max() < 1e-5


@pytest.mark.parametrize("case", all_cases(), ids=lambda c: c.name)
def test_interface_jump_conditions(case):
    pts = interface_points(case, 100)
    x, y = pts[:, 0], pts[:, 1]
    # points must actually sit on the zero set (explicit parametrizations)
    assert np.abs(case.interface.func(x, y)).max() < 1e-12

    up = case.u.eval(x, y, 1)
    um = case.u.eval(x, y, -1)
    assert np.abs(up - um).max() <= 1e-12

    g = level_gradient(case, x, y)
    n = g / np.hypot(g[:, 0], g[:, 1])[:, None]
    delta = 1e-6
    jumps = []
    for s, sgn_l in ((1, 1.0), (-1, -1.0)):
        # second-order one-sided difference into side s along the level-set
        # gradient direction
        sgn = sgn_l if case.interface.minus_sign == -1 else -sgn_l
        u0 = case.u.eval(x, y, s)
        u1 = case.u.eval(x + sgn * delta * n[:, 0],
                         y + sgn * delta * n[:, 1], s)
        u2 = case.u.eval(x + 2 * sgn * delta * n[:, 0],
                         y + 2 * sgn * delta * n[:, 1], s)
        du = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * delta)
        b = case.beta.eval(x, y, s)
        jumps.append(sgn * b * du)
    assert np.abs(jumps[0] - jumps[1]).max() <= 1e-6 * max(
        1.0, np.abs(jumps[0]).max())


def test_builtin_defaults_match_published_setup():
    cubic = builtin_case("cubic")
    assert cubic.beta(0, 0, -1) == 1.0
    assert cubic.beta(0, 0, 1) == 10.0
    corner = builtin_case("corner", beta_minus=10.0, beta_plus=1.0)
    assert corner.beta(0, 0, -1) == 10.0
    assert corner.beta(0, 0, 1) == 1.0
    assert corner.special_points == [(0.6, 0.0)]
    ellipse = builtin_case("ellipse")
    assert ellipse.beta(0.0, 0.0, -1) == pytest.approx(1.0)
    assert ellipse.beta(0.9, 0.0, -1) == pytest.approx(0.0361)
    assert ellipse.beta(0.3, 0.2, 1) == 1.0


def test_ellipse_source_plus_side_constant():
    ellipse = builtin_case("ellipse")
    assert ellipse.f(0.5, 0.5, 1) == pytest.approx(-(2 / 0.81 + 2 / 0.25))


def test_unknown_case_rejected():
    with pytest.raises(ValueError, match="unknown case"):
        builtin_case("circle")
    with pytest.raises(ValueError):
        builtin_case("ellipse", beta_plus=7.0)
    assert BUILTIN_CASES == ("cubic", "corner", "ellipse")


def test_corner_level_set_has_no_spurious_branch():
    # to the right of the corner the region between the raw polynomial's
    # tails belongs to the plus subdomain
    corner = builtin_case("corner")
    assert corner.interface.side(0.8, 0.0) == 1
    assert corner.interface.side(0.8, 0.5) == 1
    assert corner.interface.side(0.0, 0.0) == -1   # inside the loop
    # C^1 seam at x = 0.6: value and x-derivative vanish from both sides
    eps = 1e-7
    for y in (0.0, 0.3):
        left = corner.interface.func(0.6 - eps, y)
        right = corner.interface.func(0.6 + eps, y)
        assert abs(left - right) < 1e-12


def test_corner_exact_solution_smooth_across_seam():
    # u and f use the plain polynomial on both sides of x = 0.6 in the plus
    # region, so nothing jumps across the seam
    corner = builtin_case("corner")
    for y in (0.05, 0.4):
        a = corner.u(0.6 - 1e-9, y, 1)
        b = corner.u(0.6 + 1e-9, y, 1)
        assert a == pytest.approx(b, abs=1e-8)
    assert corner.f(0.7, 0.1, 1) == pytest.approx(3.6 - 6 * 0.7)


def test_boundary_values_match_exact_trace():
    case = builtin_case("cubic")
    mesh = build_uniform_mesh(case.domain, 3)
    geom = build_interface_geometry(mesh, case.interface)
    g = case.boundary_values(mesh, geom)
    bnd = np.flatnonzero(mesh.vertex_is_boundary)
    xy = mesh.vertices[bnd]
    sides = geom.vertex_sides[bnd]
    expect = case.u.eval_sides(xy[:, 0], xy[:, 1], sides)
    np.testing.assert_array_equal(g, expect)


def test_straight_interface_case_is_exactly_representable():
    case = straight_interface_case()
    assert case.f(0.3, 0.4, 1) == 0.0
    assert case.u(0.31, 0.9, 1) == pytest.approx(0.0, abs=1e-15)
    assert case.u(1.31, 0.0, 1) == pytest.approx(0.1)
    assert case.u(-0.69, 0.0, -1) == pytest.approx(-1.0)
