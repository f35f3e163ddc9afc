"""Matrix Market IO for point and block CSR matrices.

Files use the standard coordinate format. Block matrices additionally carry a
comment line

    %%block-sizes rows=<s0,s1,...> cols=<s0,s1,...>

immediately after the banner, so any Matrix Market reader still parses the file
as a point matrix while this package recovers the block layout. Every entry of
a stored block is written, zeros included, so the block pattern survives the
round trip. Values are printed with 17 significant digits, which round-trips
IEEE doubles exactly.
"""

from __future__ import annotations

import numpy as np

from .blocklinalg import BlockCsrMatrix, BlockPattern, PointCsrMatrix, _iter_blocks
from .errors import ManifestError, PatternViolation

__all__ = ["write_matrix", "read_matrix", "write_vector", "read_vector"]

_BANNER = "%%MatrixMarket matrix coordinate real general"
_BANNER_ARRAY = "%%MatrixMarket matrix array real general"
_BLOCK_TAG = "%%block-sizes"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_matrix(path, A) -> None:
    """Write a PointCsrMatrix or BlockCsrMatrix in coordinate format."""
    lines = [_BANNER]
    entries = []
    if isinstance(A, BlockCsrMatrix):
        pat = A.pattern
        rows = ",".join(str(s) for s in pat.row_block_sizes)
        cols = ",".join(str(s) for s in pat.col_block_sizes)
        lines.append(f"{_BLOCK_TAG} rows={rows} cols={cols}")
        roff, coff = pat.row_offsets, pat.col_offsets
        for i, j, blk in _iter_blocks(A):
            r0, c0 = roff[i], coff[j]
            for bi in range(blk.shape[0]):
                for bj in range(blk.shape[1]):
                    entries.append((r0 + bi, c0 + bj, blk[bi, bj]))
        n_rows, n_cols = pat.n_rows, pat.n_cols
    elif isinstance(A, PointCsrMatrix):
        for i in range(A.n_rows):
            for k in range(A.row_ptr[i], A.row_ptr[i + 1]):
                entries.append((i, int(A.col_idx[k]), float(A.values[k])))
        n_rows, n_cols = A.n_rows, A.n_cols
    else:
        raise TypeError(f"unsupported matrix type {type(A).__name__}")
    entries.sort(key=lambda t: (t[0], t[1]))
    lines.append(f"{n_rows} {n_cols} {len(entries)}")
    for r, c, v in entries:
        lines.append(f"{r + 1} {c + 1} {_fmt(v)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_block_tag(line: str):
    fields = line[len(_BLOCK_TAG) :].split()
    sizes = {}
    for field in fields:
        key, _, val = field.partition("=")
        if key not in ("rows", "cols") or not val:
            raise PatternViolation(f"malformed block-sizes line: {line!r}")
        sizes[key] = np.array([int(s) for s in val.split(",")])
    if "rows" not in sizes or "cols" not in sizes:
        raise PatternViolation(f"block-sizes line missing rows= or cols=: {line!r}")
    return sizes["rows"], sizes["cols"]


def read_matrix(path):
    """Read a coordinate file; returns BlockCsrMatrix if a block sidecar is present."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise ManifestError(f"{path}: missing MatrixMarket banner")
    if "coordinate" not in lines[0]:
        raise ManifestError(f"{path}: expected coordinate format")
    block_sizes = None
    k = 1
    while k < len(lines) and lines[k].startswith("%"):
        if lines[k].startswith(_BLOCK_TAG):
            block_sizes = _parse_block_tag(lines[k])
        k += 1
    n_rows, n_cols, nnz = (int(t) for t in lines[k].split())
    rows = np.empty(nnz, dtype=int)
    cols = np.empty(nnz, dtype=int)
    vals = np.empty(nnz)
    for e, line in enumerate(lines[k + 1 : k + 1 + nnz]):
        t = line.split()
        rows[e], cols[e], vals[e] = int(t[0]) - 1, int(t[1]) - 1, float(t[2])
    if block_sizes is None:
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        row_ptr = np.searchsorted(rows, np.arange(n_rows + 1))
        return PointCsrMatrix(n_rows, n_cols, row_ptr, cols, vals)
    return _entries_to_block(n_rows, n_cols, rows, cols, vals, *block_sizes)


def _entries_to_block(n_rows, n_cols, rows, cols, vals, rbs, cbs):
    if rbs.sum() != n_rows or cbs.sum() != n_cols:
        raise ManifestError("block sizes inconsistent with matrix dimensions")
    roff = np.concatenate([[0], np.cumsum(rbs)])
    coff = np.concatenate([[0], np.cumsum(cbs)])
    brow = np.searchsorted(roff, rows, side="right") - 1
    bcol = np.searchsorted(coff, cols, side="right") - 1
    stored: dict[tuple[int, int], np.ndarray] = {}
    for e in range(len(rows)):
        key = (int(brow[e]), int(bcol[e]))
        blk = stored.get(key)
        if blk is None:
            blk = np.zeros((rbs[key[0]], cbs[key[1]]))
            stored[key] = blk
        blk[rows[e] - roff[key[0]], cols[e] - coff[key[1]]] = vals[e]
    row_ptr = [0]
    col_idx: list[int] = []
    blocks: list[np.ndarray] = []
    for i in range(len(rbs)):
        js = sorted(j for (bi, j) in stored if bi == i)
        for j in js:
            col_idx.append(j)
            blocks.append(stored[(i, j)])
        row_ptr.append(len(col_idx))
    pat = BlockPattern(rbs, cbs, np.array(row_ptr), np.array(col_idx))
    return BlockCsrMatrix(pat, blocks)


def write_vector(path, v: np.ndarray) -> None:
    """Write a dense vector in array format (n x 1)."""
    v = np.asarray(v, dtype=float).ravel()
    lines = [_BANNER_ARRAY, f"{len(v)} 1"]
    lines.extend(_fmt(x) for x in v)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vector(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("%")]
    n, m = (int(t) for t in lines[0].split())
    if m != 1:
        raise ManifestError(f"{path}: expected a single-column vector, got {m} columns")
    vals = np.array([float(t) for t in lines[1 : 1 + n * m]])
    if len(vals) != n:
        raise ManifestError(f"{path}: expected {n} entries, found {len(vals)}")
    return vals
