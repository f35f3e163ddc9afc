"""Saddle-point system data model and matrix-free operator algebra.

The SQP step solves

    [ B    J^T ] [ dz  ]   [ g ]
    [ J    0   ] [ eta ] = -[ r ]

with unknown ordering (u, y, lambda). B is the Gauss-Newton Hessian of the
least-squares objective built from the enriched DG residual and the mesh
distortion residual, plus an elasticity regularization of the mesh block:

    B_uu = dRdu^T dRdu                       (never materialized)
    B_uy = dRdu^T dRdx dPhidy
    B_yy = dPhidy^T ( dRdx^T dRdx + kappa^2 dRmshdx^T dRmshdx + gamma D ) dPhidy

and the constraint Jacobian is J = [J_u, J_y] with J_y = drdx dPhidy.
B_uu and B_uy act matrix-free through their factors; B_yy is assembled because
it loses block structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .blocklinalg import (
    BlockCsrMatrix,
    BlockPattern,
    PointCsrMatrix,
    block_matvec,
    block_to_scipy,
    block_transpose_matvec,
    densify,
)
from .errors import DimensionMismatch, SizeCapExceeded
from .krylov import LinearOperator

__all__ = [
    "SystemDims",
    "KktFactors",
    "KktSystem",
    "KktOperator",
    "assemble_Byy",
    "kkt_matvec",
    "materialize_dense",
    "ata_pattern",
    "count_block_sparsity",
    "SparsityCounts",
    "DENSE_CAP",
]

DENSE_CAP = 5000


@dataclass(frozen=True)
class SystemDims:
    """Discretization metadata carried alongside a generated system."""

    n_elem: int
    p: int
    q: int

    @property
    def n_u(self) -> int:
        return self.n_elem * (self.p + 1)

    @property
    def n_u_enriched(self) -> int:
        return self.n_elem * (self.p + 2)

    @property
    def n_x(self) -> int:
        return self.q * self.n_elem + 1

    @property
    def n_y(self) -> int:
        return self.n_x - 2


@dataclass
class KktFactors:
    """Factor matrices of the KKT blocks at one state."""

    Ju: BlockCsrMatrix
    dRdu: BlockCsrMatrix
    dRdx: BlockCsrMatrix
    drdx: BlockCsrMatrix
    dRmshdx: PointCsrMatrix
    dPhidy: PointCsrMatrix
    D: PointCsrMatrix
    kappa: float
    gamma: float

    def __post_init__(self):
        n_u = self.Ju.shape[1]
        n_x = self.dPhidy.shape[0]
        if self.Ju.shape != (n_u, n_u):
            raise DimensionMismatch("Ju must be square")
        if self.dRdu.shape[1] != n_u:
            raise DimensionMismatch("dRdu column count must match Ju")
        if self.dRdx.shape[0] != self.dRdu.shape[0] or self.dRdx.shape[1] != n_x:
            raise DimensionMismatch("dRdx must be (enriched rows) x (mesh coefficients)")
        if self.drdx.shape != (n_u, n_x):
            raise DimensionMismatch("drdx must be N_u x N_x")
        if self.dRmshdx.shape[1] != n_x:
            raise DimensionMismatch("dRmshdx column count must match mesh coefficients")
        if self.D.shape != (n_x, n_x):
            raise DimensionMismatch("D must be N_x x N_x")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("kappa and gamma must be nonnegative")

    @property
    def n_u(self) -> int:
        return self.Ju.shape[1]

    @property
    def n_y(self) -> int:
        return self.dPhidy.shape[1]

    @property
    def n_x(self) -> int:
        return self.dPhidy.shape[0]


def assemble_Byy(factors: KktFactors) -> PointCsrMatrix:
    """Explicit sparse assembly of the mesh-mesh Hessian block."""
    Ax = block_to_scipy(factors.dRdx)
    Rm = factors.dRmshdx.to_scipy()
    D = factors.D.to_scipy()
    Phi = factors.dPhidy.to_scipy()
    Bxx = (Ax.T @ Ax) + factors.kappa**2 * (Rm.T @ Rm) + factors.gamma * D
    Byy = (Phi.T @ Bxx @ Phi).tocsr()
    Byy = 0.5 * (Byy + Byy.T)
    return PointCsrMatrix.from_scipy(Byy)


@dataclass
class KktSystem:
    """Factors plus the right-hand-side data and the assembled Byy."""

    factors: KktFactors
    g: np.ndarray
    r: np.ndarray
    Byy: PointCsrMatrix
    dims: SystemDims | None = None
    state_index: int = 0
    case: str = "case"

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        f = self.factors
        if self.g.shape != (f.n_u + f.n_y,):
            raise DimensionMismatch("gradient length must be N_u + N_y")
        if self.r.shape != (f.n_u,):
            raise DimensionMismatch("residual length must be N_u")
        if self.Byy.shape != (f.n_y, f.n_y):
            raise DimensionMismatch("Byy must be N_y x N_y")
        # J_y is needed in transposed form by the preconditioners, so it is
        # stored as the explicit sparse product.
        self._Phi = f.dPhidy.to_scipy()
        self.Jy = (block_to_scipy(f.drdx) @ self._Phi).tocsr()
        self._Byy_csr = self.Byy.to_scipy()

    @property
    def dimension(self) -> int:
        return 2 * self.factors.n_u + self.factors.n_y

    def rhs(self) -> np.ndarray:
        """Right-hand side -(g, r) of the SQP step system."""
        return -np.concatenate([self.g, self.r])


@dataclass
class KktOperator:
    system: KktSystem

    @property
    def dimension(self) -> int:
        return self.system.dimension

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return kkt_matvec(self, v)

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.dimension, self.matvec)


def kkt_matvec(op: KktOperator, v: np.ndarray) -> np.ndarray:
    """Action of the saddle-point matrix on (v_u, v_y, v_lambda)."""
    sys = op.system
    f = sys.factors
    n_u, n_y = f.n_u, f.n_y
    v = np.asarray(v, dtype=float)
    if v.shape != (2 * n_u + n_y,):
        raise DimensionMismatch(f"vector length {v.shape} incompatible with dimension {op.dimension}")
    vu = v[:n_u]
    vy = v[n_u : n_u + n_y]
    vl = v[n_u + n_y :]

    phi_vy = sys._Phi @ vy
    dRdu_vu = block_matvec(f.dRdu, vu)
    buu_vu = block_transpose_matvec(f.dRdu, dRdu_vu)
    buy_vy = block_transpose_matvec(f.dRdu, block_matvec(f.dRdx, phi_vy))
    buyT_vu = sys._Phi.T @ block_transpose_matvec(f.dRdx, dRdu_vu)

    out_u = buu_vu + buy_vy + block_transpose_matvec(f.Ju, vl)
    out_y = buyT_vu + sys._Byy_csr @ vy + sys.Jy.T @ vl
    out_l = block_matvec(f.Ju, vu) + sys.Jy @ vy
    return np.concatenate([out_u, out_y, out_l])


def materialize_dense(op: KktOperator, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense symmetric KKT matrix, mirrored block by block so that A == A.T exactly."""
    sys = op.system
    f = sys.factors
    n_u, n_y = f.n_u, f.n_y
    dim = 2 * n_u + n_y
    if dim > cap:
        raise SizeCapExceeded(f"dense materialization of dimension {dim} exceeds cap {cap}")

    dRdu = densify(f.dRdu)
    buu = dRdu.T @ dRdu
    buu = np.triu(buu) + np.triu(buu, 1).T
    buy = dRdu.T @ (densify(f.dRdx) @ f.dPhidy.toarray())
    byy = sys.Byy.toarray()
    byy = np.triu(byy) + np.triu(byy, 1).T
    ju = densify(f.Ju)
    jy = sys.Jy.toarray()

    A = np.zeros((dim, dim))
    su = slice(0, n_u)
    sy = slice(n_u, n_u + n_y)
    sl = slice(n_u + n_y, dim)
    A[su, su] = buu
    A[su, sy] = buy
    A[sy, su] = buy.T
    A[sy, sy] = byy
    A[sl, su] = ju
    A[su, sl] = ju.T
    A[sl, sy] = jy
    A[sy, sl] = jy.T
    return A


def ata_pattern(pattern: BlockPattern) -> BlockPattern:
    """Symbolic block pattern of A^T A for a block matrix with pattern A."""
    n = pattern.n_block_cols
    cols_of_row = [
        set(pattern.col_idx[pattern.row_ptr[i] : pattern.row_ptr[i + 1]].tolist())
        for i in range(pattern.n_block_rows)
    ]
    neighbors: list[set[int]] = [set() for _ in range(n)]
    for cols in cols_of_row:
        for i in cols:
            neighbors[i].update(cols)
    row_ptr = [0]
    col_idx: list[int] = []
    for i in range(n):
        js = sorted(neighbors[i])
        col_idx.extend(js)
        row_ptr.append(len(col_idx))
    sizes = pattern.col_block_sizes
    return BlockPattern(sizes, sizes, np.array(row_ptr), np.array(col_idx))


@dataclass(frozen=True)
class SparsityCounts:
    m1: float
    m2: float

    @property
    def ratio(self) -> float:
        return self.m2 / self.m1


def count_block_sparsity(Ju: BlockCsrMatrix, Buu_pattern: BlockPattern) -> SparsityCounts:
    """Nonzero blocks per interior row of Ju and of the symbolic B_uu pattern.

    Interior rows are those attaining the maximal block count of their
    pattern, which excludes boundary rows on any connected mesh.
    """
    counts1 = np.diff(Ju.pattern.row_ptr)
    counts2 = np.diff(Buu_pattern.row_ptr)
    m1 = counts1[counts1 == counts1.max()].mean()
    m2 = counts2[counts2 == counts2.max()].mean()
    return SparsityCounts(float(m1), float(m2))
