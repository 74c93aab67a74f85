"""Data matrix storage, file ingestion and batched products.

A :class:`DataMatrix` holds an ``n x p`` matrix either densely (column-major)
or in compressed-sparse-column form.  Batches of iterates are plain 2-D
arrays of shape ``(dim, width)`` with one run per column.
"""

import csv
import os
import warnings
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import _kernels

__all__ = [
    "DataMatrix",
    "MatrixFormatError",
    "load_matrix",
    "center_columns",
    "mult",
    "mult_t",
    "as_batch",
    "set_threads",
]


class MatrixFormatError(ValueError):
    """Raised for unreadable matrix files; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


class DataMatrix:
    """Immutable ``n x p`` data matrix, dense or CSC.

    Parameters
    ----------
    values : array_like or scipy sparse matrix
        Dense input is copied to a Fortran-ordered float64 array; sparse
        input is converted to canonical CSC (sorted, no duplicates).
    """

    def __init__(self, values):
        if sp.issparse(values):
            m = sp.csc_matrix(values, dtype=np.float64, copy=True)
            m.sum_duplicates()
            m.sort_indices()
            if m.shape[0] < 1 or m.shape[1] < 1:
                raise ValueError("matrix must have at least one row and column")
            if not np.all(np.isfinite(m.data)):
                raise ValueError("matrix contains non-finite values")
            self._dense = None
            self._data = m.data
            self._indices = m.indices.astype(np.int64)
            self._indptr = m.indptr.astype(np.int64)
            for arr in (self._data, self._indices, self._indptr):
                arr.flags.writeable = False
            self.n, self.p = m.shape
        else:
            a = np.array(values, dtype=np.float64, order="F", copy=True)
            if a.ndim != 2:
                raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
            if a.shape[0] < 1 or a.shape[1] < 1:
                raise ValueError("matrix must have at least one row and column")
            if not np.all(np.isfinite(a)):
                raise ValueError("matrix contains non-finite values")
            a.flags.writeable = False
            self._dense = a
            self.n, self.p = a.shape

    @property
    def shape(self):
        return (self.n, self.p)

    @property
    def is_sparse(self):
        return self._dense is None

    @property
    def nnz(self):
        if self.is_sparse:
            return int(self._data.shape[0])
        return int(np.count_nonzero(self._dense))

    @cached_property
    def column_norms(self):
        if self.is_sparse:
            sq = np.zeros(self.p)
            for k in range(self.p):
                seg = self._data[self._indptr[k]:self._indptr[k + 1]]
                sq[k] = seg @ seg
            return np.sqrt(sq)
        return np.sqrt(np.einsum("ij,ij->j", self._dense, self._dense))

    @cached_property
    def frobenius_norm_sq(self):
        if self.is_sparse:
            return float(self._data @ self._data)
        return float(np.einsum("ij,ij->", self._dense, self._dense))

    def toarray(self):
        """Dense float64 copy (C-ordered)."""
        if self.is_sparse:
            return self.tocsc().toarray()
        return np.array(self._dense, order="C")

    def tocsc(self):
        if self.is_sparse:
            return sp.csc_matrix(
                (self._data.copy(), self._indices.copy(), self._indptr.copy()),
                shape=self.shape,
            )
        return sp.csc_matrix(self._dense)

    def mult(self, x):
        return mult(self, x)

    def mult_t(self, y):
        return mult_t(self, y)

    def __repr__(self):
        kind = f"sparse, nnz={self.nnz}" if self.is_sparse else "dense"
        return f"DataMatrix(n={self.n}, p={self.p}, {kind})"


def as_batch(x, dim):
    """View ``x`` as a ``(dim, width)`` float64 batch; 1-D input gives width 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected leading dim {dim}, got shape {x.shape}")
    if x.shape[1] < 1:
        raise ValueError("batch width must be at least 1")
    return x


def mult(A, X):
    """Return ``A @ X``; each output column is accumulated in ascending column order of A."""
    single = np.ndim(X) == 1
    xb = np.ascontiguousarray(as_batch(X, A.p))
    out = np.zeros((A.n, xb.shape[1]), order="F")
    if A.is_sparse:
        _kernels.csc_mult(A._data, A._indices, A._indptr, xb, out)
    else:
        _kernels.dense_mult(A._dense, xb, out)
    return out[:, 0].copy() if single else out


def mult_t(A, Y):
    """Return ``A.T @ Y``; each output entry is accumulated in ascending row order."""
    single = np.ndim(Y) == 1
    yt = np.ascontiguousarray(as_batch(Y, A.n))
    out = np.empty((A.p, yt.shape[1]), order="F")
    if A.is_sparse:
        _kernels.csc_mult_t(A._data, A._indices, A._indptr, yt, out)
    else:
        _kernels.dense_mult_t(A._dense, yt, out)
    return out[:, 0].copy() if single else out


def center_columns(A):
    """Subtract each column's mean.  Sparse input is densified (with a warning)."""
    if A.is_sparse:
        warnings.warn("centering densifies a sparse matrix", RuntimeWarning, stacklevel=2)
    a = A.toarray()
    return DataMatrix(a - a.mean(axis=0))


def set_threads(count=None):
    """Set the worker-pool width; ``None`` reads ``SPCA_THREADS`` (default: all cores)."""
    import numba

    if count is None:
        env = os.environ.get("SPCA_THREADS")
        if not env:
            return numba.get_num_threads()
        count = int(env)
    count = max(1, min(int(count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(count)
    return count


# ---------------------------------------------------------------------------
# file ingestion


def load_matrix(path, format=None, header=False):
    """Read a MatrixMarket (``.mtx``) or CSV file into a :class:`DataMatrix`.

    ``format`` is ``"matrix-market"`` or ``"csv"``; when omitted it is guessed
    from the extension.  ``header=True`` skips the first CSV row.
    """
    if format is None:
        format = "matrix-market" if str(path).lower().endswith(".mtx") else "csv"
    fmt = format.lower().replace("_", "-")
    if fmt in ("matrix-market", "mtx", "mm"):
        return _read_matrix_market(path)
    if fmt == "csv":
        return _read_csv(path, header=header)
    raise ValueError(f"unknown matrix format {format!r}")


def _parse_float(token, lineno):
    try:
        val = float(token)
    except ValueError:
        raise MatrixFormatError(f"non-numeric token {token!r}", lineno) from None
    if not np.isfinite(val):
        raise MatrixFormatError(f"non-finite value {token!r}", lineno)
    return val


def _parse_int(token, lineno):
    try:
        return int(token)
    except ValueError:
        raise MatrixFormatError(f"non-integer token {token!r}", lineno) from None


def _read_csv(path, header=False):
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not record or all(not tok.strip() for tok in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise MatrixFormatError("inconsistent row length", lineno)
            rows.append([_parse_float(tok.strip(), lineno) for tok in record])
    if not rows:
        raise MatrixFormatError("no data rows")
    return DataMatrix(np.array(rows))


def _read_matrix_market(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty file", 1)
    banner = lines[0].split()
    if len(banner) != 5 or banner[0].lower() != "%%matrixmarket" or banner[1].lower() != "matrix":
        raise MatrixFormatError("malformed header", 1)
    layout, field, symmetry = (t.lower() for t in banner[2:])
    if layout not in ("coordinate", "array"):
        raise MatrixFormatError(f"unsupported layout {layout!r}", 1)
    if field not in ("real", "integer", "double", "pattern"):
        raise MatrixFormatError(f"unsupported field {field!r}", 1)
    if field == "pattern" and layout == "array":
        raise MatrixFormatError("pattern field requires coordinate layout", 1)
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise MatrixFormatError(f"unsupported symmetry {symmetry!r}", 1)

    body = ((i, ln.strip()) for i, ln in enumerate(lines[1:], start=2))
    body = ((i, ln) for i, ln in body if ln and not ln.startswith("%"))
    try:
        size_line, size_text = next(body)
    except StopIteration:
        raise MatrixFormatError("missing size line", len(lines)) from None
    dims = size_text.split()

    if layout == "coordinate":
        if len(dims) != 3:
            raise MatrixFormatError("malformed size line", size_line)
        n, p, nnz = (_parse_int(t, size_line) for t in dims)
        if n < 1 or p < 1 or nnz < 0:
            raise MatrixFormatError("invalid dimensions", size_line)
        rows, cols, vals = [], [], []
        want = 2 if field == "pattern" else 3
        for lineno, text in body:
            tok = text.split()
            if len(tok) != want:
                raise MatrixFormatError(f"expected {want} fields, got {len(tok)}", lineno)
            i, j = _parse_int(tok[0], lineno), _parse_int(tok[1], lineno)
            if not (1 <= i <= n and 1 <= j <= p):
                raise MatrixFormatError(f"coordinate ({i}, {j}) out of range", lineno)
            v = 1.0 if field == "pattern" else _parse_float(tok[2], lineno)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
            if symmetry != "general" and i != j:
                rows.append(j - 1)
                cols.append(i - 1)
                vals.append(-v if symmetry == "skew-symmetric" else v)
        entries = len(rows) if symmetry == "general" else None
        if entries is not None and entries != nnz:
            raise MatrixFormatError(f"expected {nnz} entries, found {entries}", len(lines))
        m = sp.coo_matrix((vals, (rows, cols)), shape=(n, p))
        return DataMatrix(m)

    if len(dims) != 2:
        raise MatrixFormatError("malformed size line", size_line)
    n, p = (_parse_int(t, size_line) for t in dims)
    if n < 1 or p < 1:
        raise MatrixFormatError("invalid dimensions", size_line)
    vals = []
    last = size_line
    for lineno, text in body:
        tok = text.split()
        if len(tok) != 1:
            raise MatrixFormatError("expected one value per line", lineno)
        vals.append(_parse_float(tok[0], lineno))
        last = lineno
    if symmetry == "general":
        if len(vals) != n * p:
            raise MatrixFormatError(f"expected {n * p} values, found {len(vals)}", last)
        # array layout is column-major
        return DataMatrix(np.array(vals).reshape((p, n)).T)
    if n != p:
        raise MatrixFormatError("symmetric array must be square", size_line)
    skew = symmetry == "skew-symmetric"
    expected = n * (n - 1) // 2 if skew else n * (n + 1) // 2
    if len(vals) != expected:
        raise MatrixFormatError(f"expected {expected} values, found {len(vals)}", last)
    a = np.zeros((n, n))
    it = iter(vals)
    for j in range(n):
        for i in range(j + 1 if skew else j, n):
            v = next(it)
            a[i, j] = v
            a[j, i] = -v if skew else v
    return DataMatrix(a)
