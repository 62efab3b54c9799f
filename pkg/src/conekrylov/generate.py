"""Random SPD test matrices ``M = R^T R`` with a prescribed condition number.

``R`` is a random sparse symmetric positive definite matrix with reciprocal
condition ``rc``, so ``cond(M) = rc^{-2}``. Two constructions are offered:

``kind=1``
    ``R = B + sigma I`` for a random sparse symmetric ``B`` of the requested
    density, with ``sigma`` chosen from the extreme eigenvalues of ``B`` so
    that ``cond(R) = 1/rc``. The spectrum follows from ``B``.
``kind=2``
    A geometric spectrum on ``[rc, 1]`` is placed on the diagonal and mixed
    by rounds of random disjoint plane rotations until the requested
    density is reached. The spectrum is exact by construction.

Only the condition number and the density of ``R`` are part of the
contract; the value distribution is not meant to match any other generator.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import InvalidParams
from .linalg import SymmetricMatrix

#: Above this order, extreme eigenvalues of ``B`` come from ``eigsh``.
DENSE_EIG_MAX_N = 800


def _check(n, density, rc, kind):
    if int(n) != n or n < 2:
        raise InvalidParams(f"n must be an integer >= 2, got {n!r}")
    if not 0.0 < density <= 1.0:
        raise InvalidParams(f"density must be in (0, 1], got {density!r}")
    if not 0.0 < rc <= 1.0:
        raise InvalidParams(f"rc must be in (0, 1], got {rc!r}")
    if kind not in (1, 2):
        raise InvalidParams(f"kind must be 1 or 2, got {kind!r}")


def _extreme_eigs(B):
    n = B.shape[0]
    if n <= DENSE_EIG_MAX_N:
        w = np.linalg.eigvalsh(B.toarray())
        return float(w[0]), float(w[-1])
    v0 = np.ones(n)
    lo = eigsh(B, k=1, which="SA", return_eigenvectors=False, v0=v0, tol=1e-12)[0]
    hi = eigsh(B, k=1, which="LA", return_eigenvectors=False, v0=v0, tol=1e-12)[0]
    return float(lo), float(hi)


def _shifted_sparse(n, density, rc, rng):
    # upper-triangle pattern so that B = T + T^T has about density * n^2 entries
    k = int(round(density * n * n / 2.0))
    k = min(k, n * (n + 1) // 2)
    B = sp.csr_matrix((n, n))
    if k > 0:
        rows = rng.integers(0, n, size=k)
        cols = rng.integers(0, n, size=k)
        vals = rng.standard_normal(k)
        T = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        T = sp.triu(T) + sp.triu(T.T, k=1)
        B = (T + T.T).tocsr() * 0.5
        B.eliminate_zeros()
    if B.nnz == 0 or rc == 1.0:
        return sp.identity(n, format="csr")
    lo, hi = _extreme_eigs(B)
    if hi - lo <= 0.0:
        return sp.identity(n, format="csr")
    sigma = (rc * hi - lo) / (1.0 - rc)
    R = (B + sigma * sp.identity(n)).tocsr()
    return R / (hi + sigma)


def _rotated_spectrum(n, density, rc, rng):
    d = np.geomspace(rc, 1.0, n)
    rng.shuffle(d)
    R = sp.diags(d).tocsr()
    target = density * n * n
    pairs = max(1, n // 64)
    for _ in range(100 * n):
        if R.nnz >= target:
            break
        idx = rng.permutation(n)[: 2 * pairs]
        i, j = idx[:pairs], idx[pairs:]
        theta = rng.uniform(0.0, 2.0 * np.pi, size=pairs)
        c, s = np.cos(theta), np.sin(theta)
        diag = np.ones(n)
        diag[i], diag[j] = c, c
        rows = np.concatenate([np.arange(n), i, j])
        cols = np.concatenate([np.arange(n), j, i])
        vals = np.concatenate([diag, s, -s])
        G = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        R = (G.T @ R @ G).tocsr()
        R.data[np.abs(R.data) < 1e-300] = 0.0
        R.eliminate_zeros()
    return R


def gen_random_spd(n, density, rc, kind=1, seed=None):
    """Random ``M = R^T R`` with ``cond(M)`` close to ``rc^{-2}``.

    Deterministic in ``seed``. ``density`` refers to ``R``.
    """
    _check(n, density, rc, kind)
    rng = np.random.default_rng(seed)
    n = int(n)
    R = _shifted_sparse(n, density, rc, rng) if kind == 1 else _rotated_spectrum(n, density, rc, rng)
    M = (R.T @ R).tocsr()
    return SymmetricMatrix(M, sym_tol=1e-10)


def random_dense_spd(n, cond, rng):
    """Dense ``Q diag(lambda) Q^T`` with eigenvalues geometric on ``[1/cond, 1]``."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.geomspace(1.0 / cond, 1.0, n)
    M = (Q * lam) @ Q.T
    return 0.5 * (M + M.T)
