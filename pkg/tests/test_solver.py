import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from p1ifem.assembly import apply_dirichlet, assemble_system
from p1ifem.basis import BasisSet
from p1ifem.cases import builtin_case
from p1ifem.interface import build_interface_geometry
from p1ifem.mesh import build_uniform_mesh
from p1ifem.solver import SolverError, solve


def cubic_system(n=4, scheme="modified", eps=-1):
    case = builtin_case("cubic")
    mesh = build_uniform_mesh(case.domain, n)
    geom = build_interface_geometry(mesh, case.interface)
    bs = BasisSet(mesh, geom, case.beta)
    system = assemble_system(mesh, geom, bs, case.f, scheme=scheme, eps=eps,
                             dirichlet_u=case.u)
    return apply_dirichlet(system, case.u, mesh, geom)


def test_identity_single_iteration():
    a = sp.eye(50, format="csr")
    b = np.linspace(-1, 1, 50)
    report = solve((a, b), tol=1e-12)
    assert report.iterations <= 1
    np.testing.assert_allclose(report.solution, b, atol=1e-14)


def test_two_by_two_hand_solve():
    a = sp.csr_matrix(np.array([[2.0, 1.0], [1.0, 2.0]]))
    report = solve((a, np.array([1.0, 1.0])), tol=1e-14)
    np.testing.assert_allclose(report.solution, [1 / 3, 1 / 3], atol=1e-12)
    assert report.method == "cg"


def test_cg_matches_direct_on_assembled_system():
    system = cubic_system(n=4)
    cg = solve(system, tol=1e-12)
    direct = spla.spsolve(system.matrix.tocsc(), system.rhs)
    assert cg.method == "cg"
    assert np.abs(cg.solution - direct).max() <= 1e-8


def test_auto_refuses_cg_for_nonsymmetric():
    system = cubic_system(n=3, eps=1)
    assert not system.symmetric
    report = solve(system, tol=1e-10)
    assert report.method == "nonsym"
    with pytest.raises(ValueError, match="nonsymmetric"):
        solve(system, method="cg")


def test_nonsym_solves_eps_zero_scheme():
    system = cubic_system(n=4, eps=0)
    report = solve(system, tol=1e-10)
    assert report.relative_residual <= 1e-10
    direct = spla.spsolve(system.matrix.tocsc(), system.rhs)
    assert np.abs(report.solution - direct).max() <= 1e-7


def test_reported_residual_matches_recomputation():
    system = cubic_system(n=4)
    report = solve(system, tol=1e-10)
    res = np.linalg.norm(system.matrix @ report.solution - system.rhs)
    res /= np.linalg.norm(system.rhs)
    assert abs(res - report.relative_residual) <= 1e-12
    assert report.relative_residual <= 1e-10


def test_nonconvergence_raises_with_history():
    system = cubic_system(n=4)
    with pytest.raises(SolverError) as info:
        solve(system, tol=1e-14, max_iter=3)
    assert len(info.value.history) == 3
    assert all(r > 0 for r in info.value.history)


def test_direct_method():
    system = cubic_system(n=3)
    report = solve(system, method="direct")
    assert report.method == "direct"
    assert report.relative_residual <= 1e-10
    assert report.iterations == 0


def test_deterministic():
    system = cubic_system(n=4)
    a = solve(system, tol=1e-10)
    b = solve(system, tol=1e-10)
    assert np.array_equal(a.solution, b.solution)
    assert a.iterations == b.iterations


def test_zero_rhs():
    a = sp.eye(10, format="csr")
    report = solve((a, np.zeros(10)))
    assert report.iterations == 0
    assert np.all(report.solution == 0.0)


def test_rejects_unknown_method():
    a = sp.eye(4, format="csr")
    with pytest.raises(ValueError):
        solve((a, np.ones(4)), method="magic")
