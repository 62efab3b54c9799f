"""Krylov basis builders.

Everything here returns plain ``(n, m)`` arrays with orthonormal columns.
Breakdown (an invariant subspace was found) is not an error: the basis is
simply shorter than requested.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateCenter
from .linalg import DROP_TOL, as_symmetric, cholesky, ldlt_shifted, orth_extend
from .reduced import ReducedTriple, h_hat_direct, project
from .socone import apply_J, j_form


class ArnoldiResult(NamedTuple):
    basis: np.ndarray
    hessenberg: np.ndarray
    #: unnormalized next vector, A Y - Y H = residual e_m^T
    residual: np.ndarray
    breakdown: bool


def arnoldi(apply_A, v0, ell, drop_tol=DROP_TOL):
    """Arnoldi process with full two-pass Gram-Schmidt.

    Returns ``Y`` with at most ``ell`` columns spanning ``K_ell(A, v0)`` and
    ``H = Y^T A Y``. Stops early (``breakdown=True``) when the new direction
    is below ``drop_tol`` relative to ``||A y_k||``.
    """
    v0 = np.asarray(v0, dtype=float)
    beta = np.linalg.norm(v0)
    if beta == 0.0:
        raise ValueError("Arnoldi start vector is zero")
    n = v0.shape[0]
    Y = np.zeros((n, ell))
    H = np.zeros((ell + 1, ell))
    Y[:, 0] = v0 / beta
    w = np.zeros(n)
    m = ell
    breakdown = False
    for k in range(ell):
        w = apply_A(Y[:, k])
        wnorm = np.linalg.norm(w)
        for _ in range(2):
            c = Y[:, : k + 1].T @ w
            w = w - Y[:, : k + 1] @ c
            H[: k + 1, k] += c
        H[k + 1, k] = np.linalg.norm(w)
        if H[k + 1, k] <= drop_tol * wnorm:
            m = k + 1
            breakdown = True
            H[k + 1, k] = 0.0
            w = np.zeros(n)
            break
        if k + 1 < ell:
            Y[:, k + 1] = w / H[k + 1, k]
    return ArnoldiResult(Y[:, :m].copy(), H[:m, :m].copy(), w, breakdown)


def extended_krylov(M, q, ell0, k0, chol=None, drop_tol=DROP_TOL):
    """Orthonormal basis of ``K_ell0(JM, Jq) + K_k0((JM)^{-1}, (JM)^{-1} J q)``.

    The inverse sequence starts at ``M^{-1} q`` and uses the Cholesky factor
    of ``M`` (computed here unless ``chol`` is supplied).
    """
    M = as_symmetric(M)
    q = np.asarray(q, dtype=float)
    U = np.empty((M.n, 0))
    if ell0 > 0:
        U = arnoldi(lambda v: apply_J(M @ v), apply_J(q), ell0, drop_tol).basis
    if k0 > 0:
        chol = cholesky(M) if chol is None else chol
        U2 = arnoldi(lambda v: chol.solve(apply_J(v)), chol.solve(q), k0, drop_tol).basis
        U = orth_extend(U, U2, drop_tol)
    return U


def shift_block(M, q, s, ell, factorization=None, drop_tol=DROP_TOL):
    """Orthonormal basis of ``K_ell((M - sJ)^{-1} J, (M - sJ)^{-1} q)``.

    The factorization of ``M - sJ`` is computed once (or taken from
    ``factorization``) and reused for all ``ell`` solves.
    """
    F = ldlt_shifted(M, s) if factorization is None else factorization
    return arnoldi(lambda v: F.solve(apply_J(v)), F.solve(q), ell, drop_tol).basis


@dataclass
class KrylovReduction:
    """Single-shift reduction of ``h`` about ``center``.

    ``A = (M - s0 J)^{-1} J`` and ``b = -(M - s0 J)^{-1} q``; ``basis``
    spans ``K_ell(A, b)`` and ``hessenberg = basis^T A basis``.
    """

    basis: np.ndarray
    hessenberg: np.ndarray
    center: float
    scale: float
    jform: np.ndarray
    triple: ReducedTriple = field(repr=False)

    @property
    def dim(self):
        return self.basis.shape[1]

    def h_ell(self, s):
        """Galerkin reduction on the basis; matches ``2*dim - 1`` moments of ``h``."""
        return h_hat_direct(self.triple, s)

    def h_arnoldi(self, s):
        """Hessenberg-resolvent form ``||b||^2 e1^T G^{-T} Y^T J Y G^{-1} e1``.

        ``G = I - (s - s0) H``. This is a one-sided reduction and only
        matches ``dim`` moments; kept for comparison.
        """
        m = self.dim
        G = np.eye(m) - (s - self.center) * self.hessenberg
        e1 = np.zeros(m)
        e1[0] = 1.0
        z = np.linalg.solve(G, e1)
        return float(self.scale**2 * (z @ self.jform @ z))


def single_shift_reduction(M, q, s0, ell, factorization=None, tol=1e-13):
    M = as_symmetric(M)
    q = np.asarray(q, dtype=float)
    F = ldlt_shifted(M, s0) if factorization is None else factorization
    b = -F.solve(q)
    scale = np.linalg.norm(b)
    if abs(j_form(b)) <= tol * scale**2:
        raise DegenerateCenter(f"h({s0!r}) vanishes; pick a center that is not a zero of h")
    res = arnoldi(lambda v: F.solve(apply_J(v)), b, ell)
    Y = res.basis
    return KrylovReduction(
        basis=Y,
        hessenberg=res.hessenberg,
        center=float(s0),
        scale=float(scale),
        jform=apply_J(Y).T @ Y,
        triple=project(M, q, Y),
    )
