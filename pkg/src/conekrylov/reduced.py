"""Projected problem: reduced triple, pencil diagonalization and its zeros.

After projecting onto an orthonormal ``U`` and diagonalizing the pencil
``(U^T M U, U^T J U)`` to ``(Omega, J_m)``, the reduced transfer function
is the explicit rational

    h_hat(s) = xi_1^2 / (s - w_1)^2 - sum_{i>=2} xi_i^2 / (s + w_i)^2

with a single positive pole ``w_1``. Zeros are found on the variable
``t = |s - w_1|`` through

    phi(t) = t - |xi_1| / rho(s),    rho(s)^2 = sum_{i>=2} xi_i^2 / (s + w_i)^2

which has the same zeros as ``h_hat`` but no pole.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InertiaFailure, NotPositiveDefinite
from .linalg import sym_eig
from .socone import apply_J

EPS = np.finfo(float).eps
#: Relative step tolerance used by the zero-finders, in ``t``.
ROOT_RTOL = 4 * EPS
SCAN_POINTS = 64
SCAN_START = 1e-8


@dataclass(frozen=True)
class ReducedTriple:
    M_hat: np.ndarray
    J_hat: np.ndarray
    q_hat: np.ndarray

    @property
    def m(self):
        return self.q_hat.shape[0]


def project(M, q, U):
    """``(U^T M U, U^T J U, U^T q)`` with both matrices symmetrized."""
    U = np.asarray(U, dtype=float)
    MU = M @ U
    M_hat = U.T @ MU
    J_hat = apply_J(U).T @ U
    return ReducedTriple(
        0.5 * (M_hat + M_hat.T),
        0.5 * (J_hat + J_hat.T),
        U.T @ np.asarray(q, dtype=float),
    )


def h_hat_direct(t, s):
    """Quadratic-form definition ``q^T (M - sJ)^{-1} J (M - sJ)^{-1} q`` on the triple."""
    z = np.linalg.solve(t.M_hat - s * t.J_hat, t.q_hat)
    return float(z @ t.J_hat @ z)


@dataclass(frozen=True)
class ReducedPencil:
    """Simultaneous diagonalization ``V^T M_hat V = diag(omega)``, ``V^T J_hat V = J_m``.

    ``omega[0]`` belongs to the single J-positive direction; ``omega[1:]``
    is ascending. ``xi = V^T q_hat``. Components with ``xi_i^2 <= eps *
    ||xi||^2`` are deflated (treated as zero) in every evaluation.
    """

    omega: np.ndarray
    transform: np.ndarray
    xi: np.ndarray
    mu: np.ndarray

    @classmethod
    def from_parts(cls, omega, xi):
        """Pencil given directly by its poles and weights (``V = I``)."""
        omega = np.asarray(omega, dtype=float)
        mu = np.concatenate([[1.0], -np.ones(omega.size - 1)]) / omega
        return cls(omega, np.eye(omega.size), np.asarray(xi, dtype=float), mu)

    @property
    def m(self):
        return self.omega.shape[0]

    @property
    def pole(self):
        return float(self.omega[0])

    @property
    def active(self):
        xi2 = self.xi**2
        return xi2 > EPS * xi2.sum()

    def _weights(self):
        w = np.where(self.active, self.xi**2, 0.0)
        return float(np.sqrt(w[0])), w[1:]

    def rho(self, s):
        _, w = self._weights()
        return float(np.sqrt(np.sum(w / (s + self.omega[1:]) ** 2)))


def diagonalize_pencil(t, tol=None):
    """Diagonalize the reduced pencil.

    Raises :class:`InertiaFailure` unless ``J_hat`` has exactly one positive
    eigenvalue (checked on ``R^{-T} J_hat R^{-1}``, which has the same
    inertia), and :class:`NotPositiveDefinite` if ``M_hat`` is not SPD.
    """
    m = t.m
    try:
        R = sla.cholesky(t.M_hat, lower=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"reduced matrix is not SPD: {exc}") from exc
    Rinv = sla.solve_triangular(R, np.eye(m), lower=False)
    C = Rinv.T @ t.J_hat @ Rinv
    mu, W = sym_eig(C)
    tol = m * EPS * np.max(np.abs(mu)) if tol is None else tol
    if not mu[-1] > tol:
        raise InertiaFailure("projected J-form has no positive eigenvalue")
    if m > 1 and not mu[-2] < -tol:
        raise InertiaFailure("projected J-form does not have exactly one positive eigenvalue")
    order = np.concatenate([[m - 1], np.arange(m - 1)])
    mu, W = mu[order], W[:, order]
    omega = 1.0 / np.abs(mu)
    V = Rinv @ W * np.sqrt(omega)
    return ReducedPencil(omega=omega, transform=V, xi=V.T @ t.q_hat, mu=mu)


def eval_h_hat(p, s):
    """Explicit partial-fraction value of ``h_hat(s)``.

    At a pole the result is a signed infinity rather than an exception, so
    it can be used directly for bracketing.
    """
    a, w = p._weights()
    d1 = s - p.omega[0]
    di = s + p.omega[1:]
    if d1 == 0.0 and a > 0:
        return np.inf
    if np.any((di == 0.0) & (w > 0)):
        return -np.inf
    left = a * a / (d1 * d1) if a > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        right = np.sum(np.where(w > 0, w / di**2, 0.0))
    return float(left - right)


def h_hat_scale(p, s):
    """Sum of the absolute terms of ``h_hat(s)``; the natural residual scale."""
    a, w = p._weights()
    return float(a * a / (s - p.omega[0]) ** 2 + np.sum(w / (s + p.omega[1:]) ** 2))


def _phi(p, a, s, t):
    """``t - a / rho(s)`` and ``d/ds (a / rho(s))``."""
    _, w = p._weights()
    di = s + p.omega[1:]
    r2 = np.sum(w / di**2)
    rho = np.sqrt(r2)
    drho = -np.sum(w / di**3) / rho
    return t - a / rho, -a * drho / r2


def _newton_bisect(f, lo, hi, flo, fhi, maxiter=200):
    """Safeguarded Newton on a sign-change bracket ``[lo, hi]`` of ``f``.

    ``f(t)`` returns ``(value, derivative)``. Falls back to bisection when a
    Newton step leaves the bracket or fails to halve it.
    """
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    x = 0.5 * (lo + hi)
    width = hi - lo
    for _ in range(maxiter):
        fx, dfx = f(x)
        if fx == 0.0:
            return x
        if np.sign(fx) == np.sign(flo):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        if hi - lo <= ROOT_RTOL * max(abs(lo), abs(hi)):
            break
        step_ok = dfx != 0.0 and np.isfinite(dfx)
        xn = x - fx / dfx if step_ok else np.nan
        if not (lo < xn < hi) or (hi - lo) > 0.5 * width:
            xn = 0.5 * (lo + hi)
        if xn == x:
            break
        width = hi - lo
        x = xn
    return lo if abs(flo) < abs(fhi) else hi


def find_zero_left(p):
    """The root of ``h_hat`` in ``(0, w_1)``, or ``None`` when ``h_hat(0) >= 0``.

    ``h_hat`` is strictly increasing there, so the root is unique.
    """
    a, w = p._weights()
    if a == 0.0 or not np.any(w > 0):
        return None
    w1 = p.pole

    def f(t):
        # s = w1 - t; phi is increasing in t
        val, ds = _phi(p, a, w1 - t, t)
        return val, 1.0 + ds

    f0 = f(0.0)[0]
    f1 = f(w1)[0]
    if not f1 > 0.0:
        return None
    t = _newton_bisect(f, 0.0, w1, f0, f1)
    return float(w1 - t)


def find_zero_right(p, pick="largest", s_max=None, upper=None):
    """A root of ``h_hat`` in ``(w_1, inf)``, or ``None`` if there is none.

    Sign changes are located on a geometric grid in ``t = s - w_1`` out to
    ``s_max`` (default ``max(10 w_1, 10 max(omega))``), extended by doubling
    when the asymptotic sign says a root lies further out. ``upper`` adds a
    known point (e.g. a shift where ``h`` was negative) to the grid. Each
    bracket is polished; ``pick`` selects ``"smallest"`` or ``"largest"``.

    Since every ``(s - w_1) / (s + w_i)`` increases past the pole, the root
    is unique in exact arithmetic; ``pick`` only matters when rounding
    produces spurious sign changes.
    """
    if pick not in ("smallest", "largest"):
        raise ValueError(f"pick must be 'smallest' or 'largest', got {pick!r}")
    a, w = p._weights()
    if a == 0.0 or not np.any(w > 0):
        return None
    w1 = p.pole
    if s_max is None:
        s_max = 10.0 * max(w1, float(np.max(p.omega)))
    s_max = max(s_max, 10.0 * w1)

    def f(t):
        val, ds = _phi(p, a, w1 + t, t)
        return val, 1.0 - ds

    grid = np.geomspace(SCAN_START * w1, s_max - w1, SCAN_POINTS)
    if upper is not None and upper > w1:
        grid = np.append(grid, upper - w1)
    grid = np.unique(np.concatenate([[0.0], grid]))
    vals = np.array([f(t)[0] for t in grid])
    # root beyond the grid iff h_hat < 0 at infinity, i.e. |xi_1| < ||xi_2:||
    if vals[-1] < 0 and a < np.sqrt(w.sum()):
        t = grid[-1]
        for _ in range(200):
            t *= 2.0
            ft = f(t)[0]
            if ft > 0:
                grid = np.append(grid, t)
                vals = np.append(vals, ft)
                break
    brackets = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)
    if brackets.size == 0:
        return None
    k = brackets[0] if pick == "smallest" else brackets[-1]
    t = _newton_bisect(f, grid[k], grid[k + 1], vals[k], vals[k + 1])
    if t <= 0.0:
        return None
    return float(w1 + t)


def reduced_roots(p, s_max=None):
    """All roots of ``h_hat`` found by the scans, ascending (diagnostic)."""
    out = []
    left = find_zero_left(p)
    if left is not None:
        out.append(left)
    lo = find_zero_right(p, "smallest", s_max)
    hi = find_zero_right(p, "largest", s_max)
    out.extend(r for r in (lo, hi) if r is not None and r not in out)
    return out
