"""Matrix Market reading and writing for symmetric real matrices.

Both ``coordinate`` and ``array`` layouts are read, with ``real`` or
``integer`` fields and ``symmetric`` or ``general`` symmetry. General
inputs must be symmetric to ``1e-12`` relative. Writing always produces
``coordinate real symmetric`` with the lower triangle at 17 significant
digits, which round-trips every double exactly.
"""

import numpy as np
import scipy.sparse as sp

from .errors import NotSquare, NotSymmetric, ParseError
from .linalg import SymmetricMatrix, as_symmetric

SYM_RTOL = 1e-12


def _tokens(lines, lineno):
    for lineno, raw in enumerate(lines, start=lineno):
        text = raw.strip()
        if text and not text.startswith("%"):
            yield lineno, raw, text.split()


def _number(tok, lineno, raw, field):
    try:
        v = int(tok) if field == "integer" else float(tok)
    except ValueError:
        raise ParseError(f"bad number {tok!r}", lineno, raw.find(tok) + 1) from None
    return float(v)


def _index(tok, lineno, raw, n):
    try:
        i = int(tok)
    except ValueError:
        raise ParseError(f"bad index {tok!r}", lineno, raw.find(tok) + 1) from None
    if not 1 <= i <= n:
        raise ParseError(f"index {i} out of range 1..{n}", lineno, raw.find(tok) + 1)
    return i - 1


def parse_matrix_market(text):
    """Parse Matrix Market text into a scipy CSR matrix (symmetry completed)."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", 1, 1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise ParseError("missing '%%MatrixMarket' header", 1, 1)
    obj, layout, field, symmetry = (h.lower() for h in header[1:])
    if obj != "matrix":
        raise ParseError(f"unsupported object {obj!r}", 1, len(header[0]) + 2)
    if layout not in ("coordinate", "array"):
        raise ParseError(f"unsupported format {layout!r}", 1, lines[0].lower().find(layout) + 1)
    if field not in ("real", "integer", "double"):
        raise ParseError(f"unsupported field {field!r}", 1, lines[0].lower().find(field) + 1)
    if symmetry not in ("symmetric", "general"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", 1, lines[0].lower().find(symmetry) + 1)

    body = _tokens(lines[1:], 2)
    try:
        lineno, raw, size = next(body)
    except StopIteration:
        raise ParseError("missing size line", len(lines) + 1) from None
    want = 3 if layout == "coordinate" else 2
    if len(size) != want:
        raise ParseError(f"size line needs {want} integers", lineno, 1)
    try:
        dims = [int(t) for t in size]
    except ValueError:
        raise ParseError("size line must hold integers", lineno, 1) from None
    nr, nc = dims[0], dims[1]
    if nr != nc:
        raise NotSquare(f"matrix is {nr}x{nc}")
    n = nr

    if layout == "coordinate":
        nnz = dims[2]
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz)
        k = 0
        for lineno, raw, tok in body:
            if k == nnz:
                raise ParseError("more entries than declared", lineno, 1)
            if len(tok) != 3:
                raise ParseError("entry needs 'row col value'", lineno, 1)
            i = _index(tok[0], lineno, raw, n)
            j = _index(tok[1], lineno, raw, n)
            if symmetry == "symmetric" and j > i:
                raise ParseError("symmetric storage must list the lower triangle", lineno, 1)
            rows[k], cols[k], vals[k] = i, j, _number(tok[2], lineno, raw, field)
            k += 1
        if k != nnz:
            raise ParseError(f"expected {nnz} entries, found {k}", len(lines))
        A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    else:
        # column-major; symmetric stores the lower triangle column by column
        if symmetry == "symmetric":
            ii, jj = np.tril_indices(n)
            order = np.lexsort((ii, jj))
            ii, jj = ii[order], jj[order]
        else:
            jj, ii = np.divmod(np.arange(n * n), n)
        vals = []
        for lineno, raw, tok in body:
            for t in tok:
                vals.append(_number(t, lineno, raw, field))
        if len(vals) != ii.size:
            raise ParseError(f"expected {ii.size} values, found {len(vals)}", len(lines))
        D = np.zeros((n, n))
        D[ii, jj] = vals
        A = sp.csr_matrix(D)

    if symmetry == "symmetric":
        A = (A + sp.tril(A, k=-1).T).tocsr()
    else:
        scale = abs(A).max() if A.nnz else 0.0
        if A.nnz and abs(A - A.T).max() > SYM_RTOL * scale:
            raise NotSymmetric("general-format matrix is not symmetric to 1e-12")
    return A


def read_matrix_market(path):
    """Read a Matrix Market file into a :class:`SymmetricMatrix`.

    A missing or unreadable file is reported as :class:`ParseError`.
    """
    try:
        with open(path, encoding="ascii") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return SymmetricMatrix(parse_matrix_market(text), sym_tol=SYM_RTOL)


def write_matrix_market(path, M, comment=None):
    M = as_symmetric(M)
    L = sp.tril(sp.csr_matrix(M.data) if not M.is_sparse else M.data).tocoo()
    order = np.lexsort((L.row, L.col))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{M.n} {M.n} {L.nnz}\n")
        for k in order:
            fh.write(f"{L.row[k] + 1} {L.col[k] + 1} {L.data[k]:.17g}\n")
