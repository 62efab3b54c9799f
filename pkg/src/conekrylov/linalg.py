"""Symmetric linear algebra kernels.

Dense work is delegated to LAPACK through :mod:`scipy.linalg` (``potrf``,
Bunch-Kaufman ``sytrf``, ``syevd``); sparse factorizations use SuperLU in
symmetric mode with a fill-reducing ordering on ``A + A^T``.
"""

import warnings

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import (
    DimensionMismatch,
    InvalidParams,
    NoConvergence,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    SingularShift,
)

EPS = np.finfo(float).eps

#: Matrices at or below this order are always stored densely.
DENSE_MAX_N = 512
#: Matrices denser than this are always stored densely.
DENSE_MIN_DENSITY = 0.25
#: Mid-size matrices above this density fill in almost completely under any
#: ordering, so dense LAPACK beats SuperLU on them.
FILL_HEAVY_MAX_N = 4000
FILL_HEAVY_DENSITY = 0.01

DROP_TOL = 1e-10


def _choose_storage(n, density):
    if n <= DENSE_MAX_N or density > DENSE_MIN_DENSITY:
        return "dense"
    if n <= FILL_HEAVY_MAX_N and density > FILL_HEAVY_DENSITY:
        return "dense"
    return "sparse"


class SymmetricMatrix:
    """Symmetric ``n x n`` operand, stored dense or as CSR.

    Parameters
    ----------
    data
        Array-like or scipy sparse matrix. Must be square and symmetric up to
        ``sym_tol`` relative to its largest entry; it is symmetrized exactly.
    storage
        ``"auto"`` (default), ``"dense"`` or ``"sparse"``.
    """

    def __init__(self, data, storage="auto", sym_tol=1e-12):
        if sp.issparse(data):
            A = sp.csr_matrix(data, dtype=float)
        else:
            A = np.array(data, dtype=float)
            if A.ndim != 2:
                raise NotSquare(f"expected a 2-d array, got shape {A.shape}")
        if A.shape[0] != A.shape[1]:
            raise NotSquare(f"matrix is {A.shape[0]}x{A.shape[1]}")
        n = A.shape[0]
        if n < 2:
            raise InvalidParams("the second-order cone needs n >= 2")

        if sp.issparse(A):
            scale = abs(A).max() if A.nnz else 0.0
            asym = abs(A - A.T).max() if A.nnz else 0.0
            nnz = A.nnz
        else:
            scale = np.abs(A).max()
            asym = np.abs(A - A.T).max()
            nnz = np.count_nonzero(A)
        if asym > sym_tol * scale:
            raise NotSymmetric(f"max |A - A^T| = {asym:.3e} exceeds {sym_tol:g} * {scale:.3e}")
        A = (A + A.T) * 0.5

        self.n = n
        self.density = nnz / float(n * n)
        if storage == "auto":
            storage = _choose_storage(n, self.density)
        if storage == "dense":
            self.data = A.toarray() if sp.issparse(A) else np.ascontiguousarray(A)
        elif storage == "sparse":
            self.data = sp.csr_matrix(A)
            self.data.sum_duplicates()
            self.data.eliminate_zeros()
        else:
            raise InvalidParams(f"unknown storage {storage!r}")
        self.storage = storage
        self.one_norm = self._compute_one_norm()

    @property
    def is_sparse(self):
        return self.storage == "sparse"

    @property
    def shape(self):
        return (self.n, self.n)

    def _compute_one_norm(self):
        if self.is_sparse:
            return float(abs(self.data).sum(axis=0).max())
        return float(np.abs(self.data).sum(axis=0).max())

    def __matmul__(self, other):
        return self.data @ other

    def toarray(self):
        if self.is_sparse:
            return self.data.toarray()
        return self.data.copy()

    def shifted(self, s):
        """Return ``M - s J`` in the same storage as ``M``."""
        if self.is_sparse:
            d = np.full(self.n, s)
            d[0] = -s
            return (self.data + sp.diags(d)).tocsc()
        A = self.data.copy()
        idx = np.arange(self.n)
        A[idx, idx] += s
        A[0, 0] -= 2.0 * s
        return A

    def __repr__(self):
        return f"SymmetricMatrix(n={self.n}, storage={self.storage!r}, one_norm={self.one_norm:.6g})"


def as_symmetric(M):
    return M if isinstance(M, SymmetricMatrix) else SymmetricMatrix(M)


def _superlu(A):
    # Symmetric mode + tiny threshold keeps pivots on the diagonal whenever
    # possible, so the LU is an LDL^T in disguise.
    return splu(
        sp.csc_matrix(A),
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=1e-3,
        options=dict(SymmetricMode=True),
    )


class Cholesky:
    """Factorization ``M = R^T R`` of an SPD matrix, reusable for many solves.

    Dense matrices expose the upper factor as :attr:`upper`. Sparse
    matrices are factored by SuperLU with symmetric diagonal pivoting; the
    SPD test is then applied to the pivots of ``P M P^T = L D L^T``.
    """

    def __init__(self, M, tol=None):
        M = as_symmetric(M)
        self.n = M.n
        tol = M.n * EPS if tol is None else tol
        threshold = tol * M.one_norm
        if M.is_sparse:
            try:
                self._lu = _superlu(M.data)
            except RuntimeError as exc:
                raise NotPositiveDefinite(str(exc)) from exc
            pivots = self._lu.U.diagonal()
            if not np.array_equal(self._lu.perm_r, self._lu.perm_c) or pivots.min() <= threshold:
                raise NotPositiveDefinite("sparse LDL^T produced a non-positive pivot")
            self.upper = None
        else:
            try:
                R = sla.cholesky(M.data, lower=False)
            except np.linalg.LinAlgError as exc:
                raise NotPositiveDefinite(str(exc)) from exc
            if np.min(np.diag(R)) ** 2 <= threshold:
                raise NotPositiveDefinite("Cholesky pivot below tolerance")
            self.upper = R
            self._lu = None

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"rhs has {b.shape[0]} rows, expected {self.n}")
        if self._lu is not None:
            return self._lu.solve(b)
        return sla.cho_solve((self.upper, False), b)


def cholesky(M, tol=None):
    """Factor an SPD matrix; raises :class:`NotPositiveDefinite` otherwise."""
    return Cholesky(M, tol=tol)


class ShiftedFactorization:
    """Symmetric indefinite factorization ``P (M - sJ) P^T = L D L^T``.

    Attributes
    ----------
    shift : float
    perm : ndarray
        Row permutation; ``L`` is lower triangular in permuted order.
    lower : ndarray or sparse matrix
        Unit lower triangular factor ``L``.
    block_diag : ndarray or None
        ``D`` with 1x1 and 2x2 pivots (dense), or the pivot vector (sparse).
    inertia : tuple of int or None
        ``(n_pos, n_neg, n_zero)``. ``None`` only when SuperLU had to leave
        the diagonal, in which case the pivots do not carry the inertia.
    """

    def __init__(self, M, s, tol=None):
        M = as_symmetric(M)
        s = float(s)
        if not np.isfinite(s):
            raise InvalidParams(f"shift must be finite, got {s!r}")
        self.shift = s
        self.n = M.n
        tol = M.n * EPS if tol is None else tol
        threshold = tol * (M.one_norm + abs(s))
        A = M.shifted(s)
        if M.is_sparse:
            self._init_sparse(A, threshold)
        else:
            self._init_dense(A, threshold)

    def _init_dense(self, A, threshold):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lu, d, perm = sla.ldl(A, lower=True, overwrite_a=True, check_finite=False)
        L = lu[perm]
        n = self.n
        sub = np.diag(d, -1).copy()
        # pivot blocks: ones[i] marks a 1x1 pivot, pairs start where sub != 0
        starts = np.flatnonzero(sub != 0.0)
        in_pair = np.zeros(n, dtype=bool)
        in_pair[starts] = True
        in_pair[starts + 1] = True
        singles = np.flatnonzero(~in_pair)

        diag = np.diag(d).copy()
        a, b, c = diag[starts], sub[starts], diag[starts + 1]
        det = a * c - b * b
        # eigenvalues of each 2x2 pivot: inertia contribution and singularity test
        mean, rad = 0.5 * (a + c), np.hypot(0.5 * (a - c), b)
        eig_pairs = np.concatenate([mean + rad, mean - rad])
        eigs = np.concatenate([diag[singles], eig_pairs])
        if eigs.size and np.min(np.abs(eigs)) <= threshold:
            raise SingularShift(self.shift)

        self.perm = perm
        self.lower = L
        self.block_diag = d
        self.inertia = (int(np.sum(eigs > 0)), int(np.sum(eigs < 0)), 0)
        self._singles = singles
        self._starts = starts
        self._pair_inv = np.stack([c / det, -b / det, a / det], axis=1)
        self._diag = diag
        self._sparse = False

    def _init_sparse(self, A, threshold):
        try:
            lu = _superlu(A)
        except RuntimeError as exc:
            raise SingularShift(self.shift, str(exc)) from exc
        pivots = lu.U.diagonal()
        if np.min(np.abs(pivots)) <= threshold:
            raise SingularShift(self.shift)
        self._lu = lu
        self.perm = lu.perm_c
        self.lower = lu.L
        if np.array_equal(lu.perm_r, lu.perm_c):
            self.block_diag = pivots
            self.inertia = (int(np.sum(pivots > 0)), int(np.sum(pivots < 0)), 0)
        else:
            self.block_diag = None
            self.inertia = None
        self._sparse = True

    def _apply_dinv(self, y):
        z = np.empty_like(y)
        z[self._singles] = y[self._singles] / self._diag[self._singles, None]
        i, j = self._starts, self._starts + 1
        p, r, t = (self._pair_inv[:, k, None] for k in range(3))
        yi, yj = y[i], y[j]
        z[i] = p * yi + r * yj
        z[j] = r * yi + t * yj
        return z

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"rhs has {b.shape[0]} rows, expected {self.n}")
        if self._sparse:
            return self._lu.solve(b)
        vec = b.ndim == 1
        B = b[self.perm].reshape(self.n, -1)
        y = sla.solve_triangular(self.lower, B, lower=True, unit_diagonal=True, check_finite=False)
        z = self._apply_dinv(y)
        w = sla.solve_triangular(self.lower, z, lower=True, trans="T", unit_diagonal=True, check_finite=False)
        x = np.empty_like(w)
        x[self.perm] = w
        return x[:, 0] if vec else x


def ldlt_shifted(M, s, tol=None):
    """Factor ``M - sJ``; raises :class:`SingularShift` when numerically singular."""
    return ShiftedFactorization(M, s, tol=tol)


def solve_with(F, b):
    """Solve with a :class:`Cholesky` or :class:`ShiftedFactorization`."""
    return F.solve(b)


def sym_eig(A):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a dense symmetric matrix."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    try:
        return sla.eigh(0.5 * (A + A.T))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def orth_extend(U, V, drop_tol=DROP_TOL):
    """Append the part of ``range(V)`` not already in ``range(U)``.

    Columns of ``V`` are processed left to right with repeated classical
    Gram-Schmidt against the growing basis. At least two passes are made; a
    third runs if the second still removed more than half of the norm. A
    column whose residual falls below ``drop_tol`` times its original norm
    is discarded.

    ``U`` may be ``None`` or have zero columns. Returns a new array.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    n = V.shape[0]
    if U is None:
        U = np.empty((n, 0))
    if U.shape[0] != n:
        raise DimensionMismatch(f"basis has {U.shape[0]} rows, block has {n}")
    cols = [U[:, k] for k in range(U.shape[1])]
    Q = U
    for k in range(V.shape[1]):
        w = V[:, k].copy()
        orig = np.linalg.norm(w)
        if orig == 0.0 or not np.isfinite(orig):
            continue
        norm = orig
        for npass in range(4):
            if Q.shape[1]:
                w -= Q @ (Q.T @ w)
            new = np.linalg.norm(w)
            done = npass >= 1 and new > 0.5 * norm
            norm = new
            if done or norm < drop_tol * orig:
                break
        if norm < drop_tol * orig:
            continue
        cols.append(w / norm)
        Q = np.column_stack(cols)
    return Q
