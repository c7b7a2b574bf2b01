"""Sparse solvers: Jacobi-preconditioned CG for symmetric systems, BiCGStab
for the nonsymmetric scheme variants, sparse-direct fallback.

The iterative methods are written out rather than delegated so that the
iteration count, the residual history on failure, and determinism are under
direct control; the direct path goes through SuperLU.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

__all__ = ["SolveReport", "SolverError", "solve"]

DEFAULT_TOL = 1e-10


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    relative_residual: float
    method: str


class SolverError(RuntimeError):
    """Nonconvergence; carries the relative-residual history."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


def _check_symmetry(matrix):
    diff = abs(matrix - matrix.T)
    if diff.nnz == 0:
        return True
    return diff.max() <= 1e-12 * max(abs(matrix).max(), 1e-300)


def _jacobi(matrix):
    d = matrix.diagonal().copy()
    d[d == 0.0] = 1.0
    return 1.0 / d


def _cg(matrix, b, tol, max_iter):
    inv_d = _jacobi(matrix)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b), 0, 0.0, []
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_d * r
    p = z.copy()
    rz = float(r @ z)
    history = []
    for k in range(1, max_iter + 1):
        ap = matrix @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r) / b_norm)
        history.append(res)
        if res <= tol:
            return x, k, res, history
        z = inv_d * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"cg: no convergence in {max_iter} iterations "
                      f"(residual {history[-1]:.3e})", history)


def _bicgstab(matrix, b, tol, max_iter):
    inv_d = _jacobi(matrix)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b), 0, 0.0, []
    x = np.zeros_like(b)
    r = b.copy()
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    history = []
    for k in range(1, max_iter + 1):
        rho_new = float(r_hat @ r)
        if rho_new == 0.0:
            raise SolverError(f"bicgstab: breakdown at iteration {k}", history)
        beta = (rho_new / rho) * (alpha / omega) if k > 1 else 0.0
        p = r + beta * (p - omega * v)
        p_hat = inv_d * p
        v = matrix @ p_hat
        alpha = rho_new / float(r_hat @ v)
        s = r - alpha * v
        x += alpha * p_hat
        res = float(np.linalg.norm(s) / b_norm)
        if res <= tol:
            history.append(res)
            return x, k, res, history
        s_hat = inv_d * s
        t = matrix @ s_hat
        tt = float(t @ t)
        if tt == 0.0:
            raise SolverError(f"bicgstab: breakdown at iteration {k}", history)
        omega = float(t @ s) / tt
        x += omega * s_hat
        r = s - omega * t
        res = float(np.linalg.norm(r) / b_norm)
        history.append(res)
        if res <= tol:
            return x, k, res, history
        rho = rho_new
    raise SolverError(f"bicgstab: no convergence in {max_iter} iterations "
                      f"(residual {history[-1]:.3e})", history)


def solve(system, tol=DEFAULT_TOL, max_iter=None, method="auto"):
    """Solve a :class:`~p1ifem.assembly.GlobalSystem` (or bare matrix pair).

    ``method`` is one of auto, cg, nonsym, direct; auto picks cg exactly when
    the scheme metadata says the matrix is symmetric.  The reported relative
    residual is recomputed from the returned solution.
    """
    if hasattr(system, "matrix"):
        matrix, b = system.matrix, system.rhs
        symmetric = system.symmetric
    else:
        matrix, b = system
        symmetric = _check_symmetry(matrix)
    n = matrix.shape[0]
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("system matrix must be square")
    if max_iter is None:
        max_iter = n

    if method == "auto":
        method = "cg" if symmetric else "nonsym"
    if method == "cg":
        if not symmetric:
            raise ValueError("cg requested for a nonsymmetric system")
        x, iters, _, _ = _cg(matrix, b, tol, max_iter)
    elif method == "nonsym":
        x, iters, _, _ = _bicgstab(matrix, b, tol, max_iter)
    elif method == "direct":
        x = spla.spsolve(matrix.tocsc(), b)
        iters = 0
    else:
        raise ValueError(f"unknown solver method {method!r}")

    b_norm = np.linalg.norm(b)
    res = float(np.linalg.norm(matrix @ x - b) / b_norm) if b_norm else 0.0
    return SolveReport(solution=x, iterations=iters,
                       relative_residual=res, method=method)
