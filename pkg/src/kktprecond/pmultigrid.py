"""Two-level p-multigrid wrapper for the saddle-point preconditioners.

The coarse space uses piecewise-constant solution coefficients (p=0) and a
straight-sided mesh (q=1). Prolongation embeds element constants into the
degree-p nodal basis and places high-order mesh nodes by linear interpolation
of the element endpoints; restriction uses the plain transpose for u and
lambda and a selection of the endpoint nodes for y. One application of the
wrapper is: restrict the right-hand side, solve the Galerkin coarse matrix
directly, prolongate, then apply the smoother once as a correction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import SingularCoarseMatrix, SizeCapExceeded
from .krylov import Preconditioner

__all__ = [
    "TransferOps",
    "CoarseSystem",
    "transfer_ops",
    "build_transfer",
    "full_prolongation",
    "full_restriction",
    "assemble_coarse",
    "pmg_apply",
    "COARSE_CAP",
]

COARSE_CAP = 2000


@dataclass(frozen=True)
class TransferOps:
    """Per-field transfer matrices between the fine and coarse spaces."""

    Pu: scipy.sparse.csr_matrix
    Py: scipy.sparse.csr_matrix
    Qy: scipy.sparse.csr_matrix


def transfer_ops(n_elem: int, p: int, q: int) -> TransferOps:
    """Transfers for an n_elem mesh with solution degree p and mesh degree q."""
    n_u = n_elem * (p + 1)
    Pu = scipy.sparse.csr_matrix(
        (np.ones(n_u), (np.arange(n_u), np.repeat(np.arange(n_elem), p + 1))),
        shape=(n_u, n_elem),
    )

    n_y = q * n_elem - 1
    n_yc = n_elem - 1
    rows, cols, vals = [], [], []
    for g in range(1, q * n_elem):
        e, l = divmod(g, q)
        if l == 0:
            rows.append(g - 1)
            cols.append(e - 1)
            vals.append(1.0)
        else:
            # Interior node of element e at local fraction l/q: linear blend of
            # the element endpoints; pinned domain endpoints contribute nothing.
            for vertex, wgt in ((e, 1.0 - l / q), (e + 1, l / q)):
                if 0 < vertex < n_elem:
                    rows.append(g - 1)
                    cols.append(vertex - 1)
                    vals.append(wgt)
    Py = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n_y, n_yc))
    Qy = scipy.sparse.csr_matrix(
        (np.ones(n_yc), (np.arange(n_yc), q * np.arange(1, n_elem) - 1)),
        shape=(n_yc, n_y),
    )
    return TransferOps(Pu, Py, Qy)


def build_transfer(problem) -> TransferOps:
    """Transfers for anything carrying n_elem, p, q (problem or dims record)."""
    return transfer_ops(problem.n_elem, problem.p, problem.q)


def full_prolongation(T: TransferOps) -> scipy.sparse.csr_matrix:
    return scipy.sparse.block_diag([T.Pu, T.Py, T.Pu], format="csr")


def full_restriction(T: TransferOps) -> scipy.sparse.csr_matrix:
    return scipy.sparse.block_diag([T.Pu.T, T.Qy, T.Pu.T], format="csr")


@dataclass
class CoarseSystem:
    A0: np.ndarray
    lu: tuple
    P: scipy.sparse.csr_matrix
    Q: scipy.sparse.csr_matrix


def assemble_coarse(opA, T: TransferOps, cap: int = COARSE_CAP) -> CoarseSystem:
    """Galerkin coarse matrix A0 = Q A P, formed column by column and factored."""
    P = full_prolongation(T)
    Q = full_restriction(T)
    nc = P.shape[1]
    if nc > cap:
        raise SizeCapExceeded(f"coarse dimension {nc} exceeds cap {cap}")
    A0 = np.empty((nc, nc))
    for c in range(nc):
        unit = np.zeros(nc)
        unit[c] = 1.0
        A0[:, c] = Q @ opA.matvec(P @ unit)
    with warnings.catch_warnings():
        # The singularity check below raises a typed error, so scipy's
        # advisory warning would only duplicate it.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A0, check_finite=False)
    scale = np.abs(A0).max() if A0.size else 0.0
    if A0.size and (scale == 0.0 or np.any(np.abs(np.diag(lu)) < 1e-14 * scale)):
        raise SingularCoarseMatrix("coarse matrix is singular to working precision")
    return CoarseSystem(A0, (lu, piv), P, Q)


def pmg_apply(opA, coarse: CoarseSystem, T: TransferOps, smoother: Preconditioner, b: np.ndarray) -> np.ndarray:
    """One two-level cycle: coarse correction followed by one smoothing step."""
    b = np.asarray(b, dtype=float)
    s = coarse.P @ scipy.linalg.lu_solve(coarse.lu, coarse.Q @ b)
    s = s + smoother.apply_inverse(b - opA.matvec(s))
    return s
