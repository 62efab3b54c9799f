"""Second-order cone predicates and the composite relative residual."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ZeroVector

EPS1 = 1e-7
EPS2 = 1e-8
EPS3 = 1e-6


def apply_J(x):
    """Return ``J x`` with ``J = diag(1, -1, ..., -1)``."""
    y = -np.asarray(x, dtype=float)
    y[0] = -y[0]
    return y


def j_form(x, y=None):
    """``x^T J y`` (``x^T J x`` when ``y`` is omitted)."""
    x = np.asarray(x, dtype=float)
    y = x if y is None else np.asarray(y, dtype=float)
    return float(x[0] * y[0] - x[1:] @ y[1:])


def in_cone(x, tol=0.0):
    """``||x_2|| <= x_1 + tol * ||x||``; the apex counts as a member."""
    x = np.asarray(x, dtype=float)
    return bool(np.linalg.norm(x[1:]) <= x[0] + tol * np.linalg.norm(x))


def on_boundary(x, eps3=EPS3):
    """Nonzero boundary point test used to accept a candidate solution."""
    x = np.asarray(x, dtype=float)
    if not x[0] > 0:
        return False
    return bool(abs(x[0] - np.linalg.norm(x[1:])) < eps3 * np.linalg.norm(x))


@dataclass(frozen=True)
class ResidualBreakdown:
    chi1: float
    chi2: float
    chi3: float

    @property
    def total(self):
        return self.chi1 + self.chi2 + self.chi3

    def to_dict(self):
        d = asdict(self)
        d["total"] = self.total
        return d


def chi_rel(x, M, q, one_norm=None):
    """Relative residual of a candidate solution ``x``.

    ``chi1`` measures cone violation of ``x``, ``chi2`` cone violation of
    ``g = M x + q`` and ``chi3`` the complementarity gap ``|x^T g|``; the
    last two are scaled by ``||M||_1 ||x|| + ||q||``.
    """
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise ZeroVector("chi_rel is undefined at x = 0")
    if one_norm is None:
        one_norm = getattr(M, "one_norm", None)
        if one_norm is None:
            one_norm = float(np.abs(np.asarray(M)).sum(axis=0).max())
    g = M @ x + q
    scale = one_norm * nx + np.linalg.norm(q)
    chi1 = max(np.linalg.norm(x[1:]) - x[0], 0.0) / nx
    chi2 = max(np.linalg.norm(g[1:]) - g[0], 0.0) / scale
    chi3 = abs(x @ g) / (nx * scale)
    return ResidualBreakdown(float(chi1), float(chi2), float(chi3))
