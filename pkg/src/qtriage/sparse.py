"""CSR/CSC packing of SparseVector collections for the numeric kernels."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import SparseVector


@dataclass(frozen=True)
class CSRMatrix:
    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    n_rows: int
    n_cols: int

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.values[lo:hi]


@dataclass(frozen=True)
class CSCMatrix:
    indptr: np.ndarray
    rows: np.ndarray
    values: np.ndarray
    n_rows: int
    n_cols: int


def pack_csr(vectors: Sequence[SparseVector]) -> CSRMatrix:
    if not vectors:
        return CSRMatrix(
            indptr=np.zeros(1, dtype=np.int64),
            indices=np.empty(0, dtype=np.int64),
            values=np.empty(0, dtype=np.float64),
            n_rows=0,
            n_cols=0,
        )
    dim = vectors[0].dim
    for v in vectors:
        if v.dim != dim:
            raise ValueError("all vectors must share one dimension")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        indptr[i + 1] = indptr[i] + v.nnz
    indices = np.empty(indptr[-1], dtype=np.int64)
    values = np.empty(indptr[-1], dtype=np.float64)
    for i, v in enumerate(vectors):
        indices[indptr[i] : indptr[i + 1]] = v.indices
        values[indptr[i] : indptr[i + 1]] = v.values
    return CSRMatrix(indptr=indptr, indices=indices, values=values,
                     n_rows=len(vectors), n_cols=dim)


def csr_to_csc(m: CSRMatrix) -> CSCMatrix:
    """Column-major view; rows within each column come out ascending."""
    counts = np.bincount(m.indices, minlength=m.n_cols)
    indptr = np.zeros(m.n_cols + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    rows = np.empty(m.nnz, dtype=np.int64)
    values = np.empty(m.nnz, dtype=np.float64)
    cursor = indptr[:-1].copy()
    for r in range(m.n_rows):
        for p in range(m.indptr[r], m.indptr[r + 1]):
            c = m.indices[p]
            rows[cursor[c]] = r
            values[cursor[c]] = m.values[p]
            cursor[c] += 1
    return CSCMatrix(indptr=indptr, rows=rows, values=values,
                     n_rows=m.n_rows, n_cols=m.n_cols)


def densify_rows(m: CSRMatrix, rows: np.ndarray) -> np.ndarray:
    """Dense (len(rows), n_cols) block of the selected rows."""
    out = np.zeros((len(rows), m.n_cols))
    for k, r in enumerate(rows):
        lo, hi = m.indptr[r], m.indptr[r + 1]
        out[k, m.indices[lo:hi]] = m.values[lo:hi]
    return out
