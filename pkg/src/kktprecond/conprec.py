"""Constrained preconditioners for the saddle-point system.

All eight catalog variants share the block anti-triangular layout

    At = [ 0      0      Ju~^T ]
         [ 0      Byy~   Jy^T  ]
         [ Ju~    Jy     0     ]

whose inverse applies in five steps (three solves, two products). The Hessian
approximation keeps only the mesh-mesh block; Ju~ is the exact Jacobian, its
block diagonal, or its block ILU0 factorization, and Byy~ is exact, diagonal,
or a point ILU0. The *-p0 variants wrap the application in a two-level
p-multigrid cycle with this preconditioner as the smoother.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .blocklinalg import PointCsrMatrix, block_to_scipy, densify
from .dgprecond import (
    BiluPrec,
    BlockJacobiPrec,
    apply_bilu_inverse,
    apply_block_jacobi_inverse,
    bilu0_factor,
    build_block_jacobi,
    mdf_order,
)
from .errors import (
    DimensionMismatch,
    SingularSchurComplement,
    UnknownPreconditioner,
    ZeroPivot,
)
from .kkt import KktOperator, KktSystem
from .krylov import Preconditioner
from .pmultigrid import CoarseSystem, TransferOps, assemble_coarse, build_transfer, pmg_apply

__all__ = [
    "CATALOG",
    "JuApprox",
    "ByyApprox",
    "PointJacobiFactor",
    "PointIlu0Factor",
    "point_jacobi",
    "point_ilu0_factor",
    "AtPreconditioner",
    "build_at_preconditioner",
    "apply_at_inverse",
    "densify_at_matrix",
    "generic_constrained_inverse",
]

CATALOG = ("A0", "BJ", "BILU", "BJ-ilu", "BILU-ilu", "A0-p0", "BJ-p0", "BILU-p0")


@dataclass
class JuApprox:
    """One of the three constraint-Jacobian approximations."""

    variant: str
    exact_lu: object = None
    block_jacobi: BlockJacobiPrec | None = None
    bilu: BiluPrec | None = None
    _dense_source: object = None

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        if self.variant == "exact":
            return self.exact_lu.solve(np.asarray(v, dtype=float))
        if self.variant == "block_jacobi":
            return apply_block_jacobi_inverse(self.block_jacobi, v)
        return apply_bilu_inverse(self.bilu, v)

    def apply_transpose_inverse(self, v: np.ndarray) -> np.ndarray:
        if self.variant == "exact":
            return self.exact_lu.solve(np.asarray(v, dtype=float), trans="T")
        if self.variant == "block_jacobi":
            return apply_block_jacobi_inverse(self.block_jacobi, v, transpose=True)
        return apply_bilu_inverse(self.bilu, v, transpose=True)

    def densify(self) -> np.ndarray:
        """The approximating matrix Ju~ as a dense array (test oracle)."""
        if self.variant == "exact":
            return densify(self._dense_source)
        if self.variant == "block_jacobi":
            src = self._dense_source
            out = np.zeros(src.shape)
            off = 0
            pat = src.pattern
            for i in range(pat.n_block_rows):
                k = pat.block_index(i, i)
                size = pat.row_block_sizes[i]
                out[off : off + size, off : off + size] = src.blocks[k]
                off += size
            return out
        # Recompose L U from the in-place blocks in permuted order, then map
        # back to the original ordering. The split must happen at the block
        # level: U owns the full diagonal blocks, L's diagonal is the identity.
        pat = self.bilu.lu_blocks.pattern
        n = pat.n_block_rows
        roff = pat.row_offsets
        L = np.eye(pat.n_rows)
        U = np.zeros((pat.n_rows, pat.n_cols))
        for m in range(n):
            for k in range(pat.row_ptr[m], pat.row_ptr[m + 1]):
                j = int(pat.col_idx[k])
                blk = self.bilu.lu_blocks.blocks[k]
                if j < m:
                    L[roff[m] : roff[m + 1], roff[j] : roff[j + 1]] = blk
                else:
                    U[roff[m] : roff[m + 1], roff[j] : roff[j + 1]] = blk
        approx_perm = L @ U
        order = self.bilu.permutation
        orig_sizes = np.empty(n, dtype=int)
        orig_sizes[order] = pat.row_block_sizes
        orig_off = np.concatenate([[0], np.cumsum(orig_sizes)])
        point_perm = np.concatenate(
            [np.arange(orig_off[order[m]], orig_off[order[m] + 1]) for m in range(n)]
        )
        out = np.zeros_like(approx_perm)
        out[np.ix_(point_perm, point_perm)] = approx_perm
        return out


@dataclass
class PointJacobiFactor:
    """Reciprocal diagonal with a safeguard against (near-)zero entries."""

    inv_diag: np.ndarray
    diag: np.ndarray
    safeguarded: bool

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        return self.inv_diag * np.asarray(v, dtype=float)

    def densify(self) -> np.ndarray:
        return np.diag(self.diag)


def point_jacobi(B: PointCsrMatrix) -> PointJacobiFactor:
    """diag(B) with entries below 1e-300 in magnitude replaced by 1."""
    n = B.n_rows
    if B.n_cols != n:
        raise DimensionMismatch("point Jacobi needs a square matrix")
    diag = np.zeros(n)
    for i in range(n):
        sl = slice(B.row_ptr[i], B.row_ptr[i + 1])
        hit = np.flatnonzero(B.col_idx[sl] == i)
        if hit.size:
            diag[i] = B.values[sl][hit[0]]
    tiny = np.abs(diag) < 1e-300
    safeguarded = bool(tiny.any())
    if safeguarded:
        warnings.warn("point Jacobi: zero diagonal entries safeguarded to 1", RuntimeWarning)
        diag = diag.copy()
        diag[tiny] = 1.0
    return PointJacobiFactor(1.0 / diag, diag, safeguarded)


@dataclass
class PointIlu0Factor:
    """Zero-fill scalar ILU in natural ordering, stored in one CSR array."""

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    diag_pos: np.ndarray

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise DimensionMismatch(f"vector length {v.shape} incompatible with {self.n}")
        y = v.copy()
        for i in range(self.n):
            sl = slice(self.row_ptr[i], self.diag_pos[i])
            y[i] -= self.values[sl] @ y[self.col_idx[sl]]
        x = y
        for i in range(self.n - 1, -1, -1):
            sl = slice(self.diag_pos[i] + 1, self.row_ptr[i + 1])
            x[i] = (x[i] - self.values[sl] @ x[self.col_idx[sl]]) / self.values[self.diag_pos[i]]
        return x

    def densify(self) -> np.ndarray:
        L = np.eye(self.n)
        U = np.zeros((self.n, self.n))
        for i in range(self.n):
            for k in range(self.row_ptr[i], self.row_ptr[i + 1]):
                j = self.col_idx[k]
                if j < i:
                    L[i, j] = self.values[k]
                else:
                    U[i, j] = self.values[k]
        return L @ U


def point_ilu0_factor(B: PointCsrMatrix) -> PointIlu0Factor:
    """Scalar IKJ elimination restricted to the pattern of B (natural order)."""
    n = B.n_rows
    if B.n_cols != n:
        raise DimensionMismatch("point ILU0 needs a square matrix")
    row_ptr = B.row_ptr.copy()
    col_idx = B.col_idx.copy()
    values = B.values.copy()
    diag_pos = np.full(n, -1, dtype=int)
    for i in range(n):
        sl = slice(row_ptr[i], row_ptr[i + 1])
        hit = np.flatnonzero(col_idx[sl] == i)
        if not hit.size:
            raise ZeroPivot(f"row {i}: diagonal entry missing from pattern")
        diag_pos[i] = row_ptr[i] + hit[0]

    pos = {}
    for i in range(n):
        for k in range(row_ptr[i], row_ptr[i + 1]):
            pos[(i, int(col_idx[k]))] = k

    for i in range(n):
        for k in range(row_ptr[i], diag_pos[i]):
            c = int(col_idx[k])
            pivot = values[diag_pos[c]]
            if abs(pivot) < 1e-300:
                raise ZeroPivot(f"row {c}: zero pivot during elimination")
            values[k] /= pivot
            lik = values[k]
            for kk in range(diag_pos[c] + 1, row_ptr[c + 1]):
                j = int(col_idx[kk])
                target = pos.get((i, j))
                if target is not None:
                    values[target] -= lik * values[kk]
        if abs(values[diag_pos[i]]) < 1e-300:
            raise ZeroPivot(f"row {i}: zero pivot after elimination")
    return PointIlu0Factor(n, row_ptr, col_idx, values, diag_pos)


@dataclass
class ByyApprox:
    """One of the three mesh-block approximations."""

    variant: str
    exact_lu: object = None
    jacobi: PointJacobiFactor | None = None
    ilu: PointIlu0Factor | None = None
    _dense_source: PointCsrMatrix | None = None

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        if self.variant == "exact":
            return self.exact_lu.solve(np.asarray(v, dtype=float))
        if self.variant == "point_jacobi":
            return self.jacobi.apply_inverse(v)
        return self.ilu.apply_inverse(v)

    def densify(self) -> np.ndarray:
        if self.variant == "exact":
            return self._dense_source.toarray()
        if self.variant == "point_jacobi":
            return self.jacobi.densify()
        return self.ilu.densify()


@dataclass
class PmgWrapper:
    op: KktOperator
    transfers: TransferOps
    coarse: CoarseSystem


@dataclass
class AtPreconditioner:
    """Block anti-triangular constrained preconditioner (optionally p-multigrid wrapped)."""

    variant: str
    ju: JuApprox
    byy: ByyApprox
    Jy: scipy.sparse.csr_matrix
    n_u: int
    n_y: int
    multigrid: PmgWrapper | None = None

    @property
    def dimension(self) -> int:
        return 2 * self.n_u + self.n_y

    def _apply_bare(self, v: np.ndarray) -> np.ndarray:
        return apply_at_inverse(self, v, bare=True)

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        return apply_at_inverse(self, v)

    def as_preconditioner(self) -> Preconditioner:
        return Preconditioner(self.dimension, self.apply_inverse)


def apply_at_inverse(P: AtPreconditioner, v: np.ndarray, bare: bool = False) -> np.ndarray:
    """Apply the preconditioner inverse to v = (v1, v2, v3).

    The bare anti-triangular inverse is the five-step sequence
      1. solve Ju~^T w1 = v1
      2. t2 = Jy^T w1
      3. solve Byy~ w2 = v2 - t2
      4. t3 = Jy w2
      5. solve Ju~ w3 = v3 - t3
    returning (w3, w2, w1). With a multigrid wrapper the whole cycle
    (coarse correction plus one smoothing with the bare inverse) is applied.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (P.dimension,):
        raise DimensionMismatch(f"vector length {v.shape} incompatible with dimension {P.dimension}")
    if P.multigrid is not None and not bare:
        mg = P.multigrid
        return pmg_apply(mg.op, mg.coarse, mg.transfers, Preconditioner(P.dimension, P._apply_bare), v)
    n_u, n_y = P.n_u, P.n_y
    v1 = v[:n_u]
    v2 = v[n_u : n_u + n_y]
    v3 = v[n_u + n_y :]
    w1 = P.ju.apply_transpose_inverse(v1)
    t2 = P.Jy.T @ w1
    w2 = P.byy.apply_inverse(v2 - t2)
    t3 = P.Jy @ w2
    w3 = P.ju.apply_inverse(v3 - t3)
    return np.concatenate([w3, w2, w1])


def _build_ju_approx(sys: KktSystem, kind: str) -> JuApprox:
    Ju = sys.factors.Ju
    if kind == "exact":
        lu = scipy.sparse.linalg.splu(block_to_scipy(Ju).tocsc())
        return JuApprox("exact", exact_lu=_SpluAdapter(lu), _dense_source=Ju)
    if kind == "block_jacobi":
        return JuApprox("block_jacobi", block_jacobi=build_block_jacobi(Ju), _dense_source=Ju)
    ordering = mdf_order(Ju)
    return JuApprox("bilu", bilu=bilu0_factor(Ju, ordering), _dense_source=Ju)


class _SpluAdapter:
    """Uniform solve(v, trans=...) facade over scipy's SuperLU object."""

    def __init__(self, lu):
        self._lu = lu

    def solve(self, v, trans="N"):
        return self._lu.solve(v, trans=trans)


def _build_byy_approx(sys: KktSystem, kind: str) -> ByyApprox:
    Byy = sys.Byy
    if kind == "exact":
        lu = scipy.sparse.linalg.splu(Byy.to_scipy().tocsc())
        return ByyApprox("exact", exact_lu=_SpluAdapter(lu), _dense_source=Byy)
    if kind == "point_jacobi":
        return ByyApprox("point_jacobi", jacobi=point_jacobi(Byy), _dense_source=Byy)
    return ByyApprox("point_ilu0", ilu=point_ilu0_factor(Byy), _dense_source=Byy)


_VARIANT_TABLE = {
    "A0": ("exact", "exact", False),
    "BJ": ("block_jacobi", "point_jacobi", False),
    "BILU": ("bilu", "point_jacobi", False),
    "BJ-ilu": ("block_jacobi", "point_ilu0", False),
    "BILU-ilu": ("bilu", "point_ilu0", False),
    "A0-p0": ("exact", "exact", True),
    "BJ-p0": ("block_jacobi", "point_jacobi", True),
    "BILU-p0": ("bilu", "point_jacobi", True),
}


def build_at_preconditioner(sys: KktSystem, variant: str) -> AtPreconditioner:
    """Construct one of the eight catalog preconditioners for a system."""
    if variant not in _VARIANT_TABLE:
        raise UnknownPreconditioner(f"unknown preconditioner {variant!r}; catalog: {', '.join(CATALOG)}")
    ju_kind, byy_kind, with_pmg = _VARIANT_TABLE[variant]
    prec = AtPreconditioner(
        variant=variant,
        ju=_build_ju_approx(sys, ju_kind),
        byy=_build_byy_approx(sys, byy_kind),
        Jy=sys.Jy,
        n_u=sys.factors.n_u,
        n_y=sys.factors.n_y,
    )
    if with_pmg:
        if sys.dims is None:
            raise UnknownPreconditioner(f"{variant}: p-multigrid needs discretization metadata on the system")
        op = KktOperator(sys)
        transfers = build_transfer(sys.dims)
        coarse = assemble_coarse(op, transfers)
        prec.multigrid = PmgWrapper(op, transfers, coarse)
    return prec


def densify_at_matrix(P: AtPreconditioner) -> np.ndarray:
    """Assembled dense anti-triangular matrix At (without any multigrid wrap)."""
    n_u, n_y = P.n_u, P.n_y
    dim = 2 * n_u + n_y
    ju = P.ju.densify()
    byy = P.byy.densify()
    jy = P.Jy.toarray()
    A = np.zeros((dim, dim))
    su = slice(0, n_u)
    sy = slice(n_u, n_u + n_y)
    sl = slice(n_u + n_y, dim)
    A[su, sl] = ju.T
    A[sy, sy] = byy
    A[sy, sl] = jy.T
    A[sl, su] = ju
    A[sl, sy] = jy
    return A


def generic_constrained_inverse(G: np.ndarray, Jt: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply the inverse of the generic constrained preconditioner [[G, Jt^T],[Jt, 0]].

    Three-factor product form: with S = Jt G^-1 Jt^T,

        [[I, -G^-1 Jt^T], [0, I]] [[G^-1, 0], [0, -S^-1]] [[I, 0], [-Jt G^-1, I]] v.

    Validation path only; requires a nonsingular G.
    """
    G = np.asarray(G, dtype=float)
    Jt = np.asarray(Jt, dtype=float)
    v = np.asarray(v, dtype=float)
    n = G.shape[0]
    m = Jt.shape[0]
    if Jt.shape[1] != n or v.shape != (n + m,):
        raise DimensionMismatch("generic constrained inverse: shapes disagree")
    v1, v2 = v[:n], v[n:]
    g_lu = scipy.linalg.lu_factor(G)
    ginv_v1 = scipy.linalg.lu_solve(g_lu, v1)
    t = v2 - Jt @ ginv_v1
    S = Jt @ scipy.linalg.lu_solve(g_lu, Jt.T)
    try:
        with warnings.catch_warnings():
            # The explicit singularity check below raises a typed error, so
            # scipy's advisory warning would only duplicate it.
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            s_lu = scipy.linalg.lu_factor(S)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSchurComplement(str(exc)) from exc
    smax = np.abs(S).max() if S.size else 0.0
    if S.size and (smax == 0.0 or np.any(np.abs(np.diag(s_lu[0])) < 1e-14 * smax)):
        raise SingularSchurComplement("Schur complement singular to working precision")
    out2 = -scipy.linalg.lu_solve(s_lu, t)
    out1 = ginv_v1 - scipy.linalg.lu_solve(g_lu, Jt.T @ out2)
    return np.concatenate([out1, out2])
