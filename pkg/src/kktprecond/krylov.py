"""GMRES without restart, left preconditioning, and the two convergence criteria.

The solver runs Arnoldi with modified Gram-Schmidt on the preconditioned
operator M^-1 A, triangularizes the Hessenberg matrix with Givens rotations,
and starts from the zero initial guess so iteration counts are reproducible.
Convergence is measured either by the preconditioned relative residual

    ||M^-1 A s - M^-1 b|| / ||M^-1 b||

or, when a reference solution is supplied, by the relative error

    ||s_ex - s|| / ||s_ex||

with the current iterate formed at every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonFinite, ZeroReference

__all__ = [
    "LinearOperator",
    "Preconditioner",
    "GmresConfig",
    "SolveReport",
    "gmres_solve",
    "evaluate_criterion",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITERS",
]

DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITERS = 1000

PRECONDITIONED_RESIDUAL = "preconditioned_residual"
EXACT_SOLUTION = "exact_solution"


@dataclass(frozen=True)
class LinearOperator:
    """Matrix action v -> A v on vectors of a fixed dimension."""

    dimension: int
    apply: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def from_matrix(cls, A) -> "LinearOperator":
        if hasattr(A, "matvec") and not isinstance(A, np.ndarray):
            return cls(A.shape[0], lambda v: np.asarray(A.matvec(v)).ravel())
        A = np.asarray(A, dtype=float)
        return cls(A.shape[0], lambda v: A @ v)


@dataclass(frozen=True)
class Preconditioner:
    """Action v -> M^-1 v of an approximate inverse."""

    dimension: int
    apply_inverse: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def identity(cls, n: int) -> "Preconditioner":
        return cls(n, lambda v: np.array(v, dtype=float))

    @classmethod
    def from_matrix(cls, M) -> "Preconditioner":
        """Exact inverse of a dense matrix via LU, mostly for tests."""
        M = np.asarray(M, dtype=float)
        lu = scipy.linalg.lu_factor(M)
        return cls(M.shape[0], lambda v: scipy.linalg.lu_solve(lu, v))


@dataclass(frozen=True)
class GmresConfig:
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    criterion: str = PRECONDITIONED_RESIDUAL
    reference: np.ndarray | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.criterion not in (PRECONDITIONED_RESIDUAL, EXACT_SOLUTION):
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if (self.criterion == EXACT_SOLUTION) != (self.reference is not None):
            raise ValueError("reference vector required exactly for the exact-solution criterion")


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    converged: bool
    history: np.ndarray


def evaluate_criterion(kind, A: LinearOperator, M: Preconditioner, b, s, s_ex=None) -> float:
    """Normative convergence measure for a candidate solution s."""
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    if kind == PRECONDITIONED_RESIDUAL:
        ref = np.linalg.norm(M.apply_inverse(b))
        if ref < 1e-300:
            raise ZeroReference("preconditioned right-hand side has zero norm")
        return float(np.linalg.norm(M.apply_inverse(A.apply(s) - b)) / ref)
    if kind == EXACT_SOLUTION:
        if s_ex is None:
            raise ValueError("exact-solution criterion needs the reference vector")
        ref = np.linalg.norm(s_ex)
        if ref < 1e-300:
            raise ZeroReference("reference solution has zero norm")
        return float(np.linalg.norm(np.asarray(s_ex) - s) / ref)
    raise ValueError(f"unknown criterion {kind!r}")


def gmres_solve(A: LinearOperator, b: np.ndarray, M: Preconditioner, cfg: GmresConfig | None = None) -> SolveReport:
    """Solve A s = b with left-preconditioned GMRES (no restart)."""
    if cfg is None:
        cfg = GmresConfig()
    b = np.asarray(b, dtype=float)
    n = A.dimension
    if b.shape != (n,) or M.dimension != n:
        raise DimensionMismatch("operator, preconditioner, and rhs dimensions disagree")
    if not np.all(np.isfinite(b)):
        raise NonFinite("right-hand side contains NaN or Inf")

    b_prec = M.apply_inverse(b)
    beta = np.linalg.norm(b_prec)
    if beta < 1e-300:
        return SolveReport(np.zeros(n), 0, True, np.zeros(0))

    max_it = cfg.max_iters
    V = np.zeros((max_it + 1, n))
    H = np.zeros((max_it + 1, max_it))
    cs = np.zeros(max_it)
    sn = np.zeros(max_it)
    g = np.zeros(max_it + 1)
    V[0] = b_prec / beta
    g[0] = beta

    ref = cfg.reference
    history = []
    best = np.zeros(n)
    breakdown = False

    for j in range(max_it):
        w = M.apply_inverse(A.apply(V[j]))
        if not np.all(np.isfinite(w)):
            raise NonFinite(f"Arnoldi vector at iteration {j + 1} contains NaN or Inf")
        norm_w0 = np.linalg.norm(w)
        for i in range(j + 1):
            H[i, j] = V[i] @ w
            w -= H[i, j] * V[i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j] > 1e-14 * max(norm_w0, 1e-300):
            V[j + 1] = w / H[j + 1, j]
        else:
            breakdown = True

        # Apply accumulated rotations to the new column, then zero the subdiagonal.
        for i in range(j):
            hi, hj = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * hi + sn[i] * hj
            H[i + 1, j] = -sn[i] * hi + cs[i] * hj
        denom = np.hypot(H[j, j], H[j + 1, j])
        if denom < 1e-300:
            cs[j], sn[j] = 1.0, 0.0
        else:
            cs[j], sn[j] = H[j, j] / denom, H[j + 1, j] / denom
        H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]

        y = scipy.linalg.solve_triangular(H[: j + 1, : j + 1], g[: j + 1], lower=False)
        best = V[: j + 1].T @ y

        if cfg.criterion == PRECONDITIONED_RESIDUAL:
            value = abs(g[j + 1]) / beta
        else:
            ref_norm = np.linalg.norm(ref)
            if ref_norm < 1e-300:
                raise ZeroReference("reference solution has zero norm")
            value = np.linalg.norm(ref - best) / ref_norm
        history.append(value)

        if value < cfg.tol:
            return SolveReport(best, j + 1, True, np.array(history))
        if breakdown:
            return SolveReport(best, j + 1, False, np.array(history))

    return SolveReport(best, max_it, False, np.array(history))
