"""Rational Krylov subspace method for the SPD second-order cone LCP.

Find ``x`` in the cone ``K^n`` with ``g = M x + q`` in ``K^n`` and
``x^T g = 0``. Three cases are mutually exclusive:

* C1: ``q`` in ``K^n``; ``x = 0``.
* C2: ``-M^{-1} q`` in ``K^n``; ``x = -M^{-1} q``.
* C3: ``x = x(s*)`` lies on the cone boundary for a positive zero ``s*``
  of ``h(s) = x(s)^T J x(s)``.

For C3 the shift ``s`` is driven by the zeros of the projected function on
an accumulated rational Krylov basis. A loop on ``(0, tau)`` runs first when
``h(0) < 0``; a loop on ``(tau, inf)`` follows if that zero does not give
a boundary point. ``tau`` (the positive eigenvalue of ``MJ``) is never
computed; the projected pole stands in for it.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    InertiaFailure,
    InvalidParams,
    NotPositiveDefinite,
    SingularShift,
    TooLarge,
)
from .krylov import extended_krylov, shift_block
from .linalg import as_symmetric, cholesky, ldlt_shifted, orth_extend
from .reduced import (
    ReducedTriple,
    diagonalize_pencil,
    eval_h_hat,
    find_zero_left,
    find_zero_right,
    project,
)
from .socone import EPS1, EPS2, EPS3, apply_J, chi_rel, in_cone, j_form, on_boundary

log = logging.getLogger(__name__)

#: The left-loop compulsory schedule restarts after this many divisions by 10.
COMPULSORY_PERIOD = 16
NUDGE = 2.0**-20
MAX_NUDGES = 8
DEDUP_RTOL = 1e-14
DEDUP_FACTOR = 1.0 + 1e-8
ORACLE_MAX_N = 2000
EPS_MACH = np.finfo(float).eps


class Outcome(str, Enum):
    TRIVIAL_ZERO = "trivial_zero"
    LINEAR_SOLVE = "linear_solve"
    BOUNDARY_ROOT = "boundary_root"
    SPECIAL_CASE = "special_case_detected"
    MAX_ITERATIONS = "max_iterations"


@dataclass
class SolverOptions:
    """Tunables of :func:`solve`.

    ``eps1`` bounds ``|x^T J x| / ||x||^2`` (zero of ``h`` reached),
    ``eps2`` bounds the relative residual, ``eps3`` is the boundary test
    tolerance. ``cone_tol`` is used for the C1/C2 membership tests.
    """

    ell0: int = 10
    k0: int = 10
    ell: int = 1
    j_max: int = 40
    eps1: float = EPS1
    eps2: float = EPS2
    eps3: float = EPS3
    cone_tol: float = 0.0
    left_pick: str = "smallest"
    right_pick: str = "largest"
    seed: Optional[int] = None

    def __post_init__(self):
        for name in ("ell0", "k0"):
            if getattr(self, name) < 0:
                raise InvalidParams(f"{name} must be >= 0")
        if self.ell0 + self.k0 < 1:
            raise InvalidParams("the initial subspace needs ell0 + k0 >= 1")
        if self.ell < 1 or self.j_max < 1:
            raise InvalidParams("ell and j_max must be >= 1")
        for name in ("eps1", "eps2", "eps3"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"{name} must be positive")
        if self.cone_tol < 0:
            raise InvalidParams("cone_tol must be >= 0")
        for name in ("left_pick", "right_pick"):
            if getattr(self, name) not in ("smallest", "largest"):
                raise InvalidParams(f"{name} must be 'smallest' or 'largest'")


@dataclass
class TraceRow:
    side: str
    j: int
    shift: float
    h: float
    dim: int
    chi_rel: float
    compulsory: bool = False


@dataclass
class SolveReport:
    outcome: Outcome
    x: np.ndarray
    case: str
    method: str = "rksm"
    s_star: Optional[float] = None
    chi: Optional[object] = None
    side: Optional[str] = None
    h0: Optional[float] = None
    trace: list = field(default_factory=list)
    initial_dim: int = 0
    final_dim: int = 0
    expansions: int = 0
    added_columns: list = field(default_factory=list)
    ell: int = 0
    wall_time: float = 0.0

    @property
    def iterations(self):
        """Method-native iteration count (final subspace dimension for RKSM)."""
        if self.method == "rksm":
            return self.final_dim
        if self.method == "oracle":
            return self.final_dim
        return len(self.trace)

    @property
    def iteration_kind(self):
        return {"rksm": "subspace_dim", "oracle": "pencil_dim"}.get(self.method, "h_evaluations")

    def to_dict(self):
        return {
            "outcome": self.outcome.value,
            "case": self.case,
            "method": self.method,
            "s_star": self.s_star,
            "x": [float(v) for v in self.x],
            "chi_rel": None if self.chi is None else self.chi.to_dict(),
            "side": self.side,
            "h0": self.h0,
            "initial_dim": self.initial_dim,
            "final_dim": self.final_dim,
            "expansions": self.expansions,
            "added_columns": list(self.added_columns),
            "ell": self.ell,
            "iterations": self.iterations,
            "iteration_kind": self.iteration_kind,
            "trace": [asdict(r) for r in self.trace],
            "wall_time": self.wall_time,
        }


class Classification(NamedTuple):
    case: str
    x: np.ndarray
    chol: object


def classify(M, q, cone_tol=0.0):
    """Decide between C1, C2 and C3.

    ``x`` is the C1/C2 solution, or ``-M^{-1} q`` for C3 (whose ``J``-form
    is ``h(0)``). The Cholesky factor is kept for reuse; it is ``None`` for
    C1, which needs no factorization.
    """
    M = as_symmetric(M)
    q = np.asarray(q, dtype=float)
    if in_cone(q, cone_tol):
        return Classification("C1", np.zeros(M.n), None)
    chol = cholesky(M)
    x0 = -chol.solve(q)
    if in_cone(x0, cone_tol):
        return Classification("C2", x0, chol)
    return Classification("C3", x0, chol)


def _finish_easy(M, q, cls, method, t0):
    if cls.case == "C1":
        report = SolveReport(Outcome.TRIVIAL_ZERO, cls.x, "C1", method=method)
    else:
        chi = chi_rel(cls.x, M, q) if np.any(cls.x) else None
        report = SolveReport(Outcome.LINEAR_SOLVE, cls.x, "C2", method=method, chi=chi)
    report.wall_time = time.perf_counter() - t0
    return report


def _prepare(M, q):
    M = as_symmetric(M)
    q = np.asarray(q, dtype=float).ravel()
    if q.shape != (M.n,):
        raise InvalidParams(f"q has length {q.shape[0]}, expected {M.n}")
    return M, q


def left_compulsory_shift(j, one_norm):
    """Shift used in the first loop when the projected pencil has no positive pole."""
    return (one_norm + j // COMPULSORY_PERIOD) / 10.0 ** (j % COMPULSORY_PERIOD)


def right_compulsory_shift(j, one_norm):
    return 1.1 ** (j - 1) * one_norm


def _factor_nudged(M, s):
    for _ in range(MAX_NUDGES):
        try:
            return ldlt_shifted(M, s), s
        except SingularShift:
            log.info("shift %.17g is singular; nudging", s)
            s = s + NUDGE * (1.0 + abs(s))
    raise SingularShift(s, f"could not find a regular shift near {s!r}")


class _Run:
    """State of one RKSM solve: accumulated basis, shifts and trace."""

    def __init__(self, M, q, opts, U):
        self.M, self.q, self.opts = M, q, opts
        self.U = U
        self.used = []
        self.trace = []
        self.expansions = 0
        self.added = []
        self.x = None
        self.s = None
        self.chi = None

    def _dedup(self, s):
        for u in self.used:
            if abs(s - u) <= DEDUP_RTOL * abs(u):
                return s * DEDUP_FACTOR
        return s

    def _pencil(self):
        try:
            return diagonalize_pencil(project(self.M, self.q, self.U))
        except (InertiaFailure, NotPositiveDefinite) as exc:
            log.debug("reduced pencil unusable: %s", exc)
            return None

    def _pole_decoupled(self, pencil):
        """The projected J-positive eigenpair is accurate and ``q`` has no weight on it.

        Then ``h`` has no pole term and no zero on either side of ``tau``.
        """
        if pencil.active[0]:
            return False
        v = self.U @ pencil.transform[:, 0]
        nv = np.linalg.norm(v)
        r = self.M @ v - pencil.pole * apply_J(v)
        tol = math.sqrt(EPS_MACH)
        return bool(
            np.linalg.norm(r) <= tol * (self.M.one_norm + pencil.pole) * nv
            and abs(self.q @ v) <= tol * np.linalg.norm(self.q) * nv
        )

    def _invariant(self):
        """``range(U)`` holds ``q`` and is invariant under ``M`` and ``J``.

        Then ``x(s)`` lies in it for every ``s`` and the projected function
        is exact; with no J-positive direction ``h < 0`` everywhere.
        """
        U = self.U
        tol = math.sqrt(EPS_MACH)

        def gap(W):
            return np.linalg.norm(W - U @ (U.T @ W))

        return bool(
            gap(self.q) <= tol * np.linalg.norm(self.q)
            and gap(apply_J(U)) <= tol * math.sqrt(U.shape[1])
            and gap(self.M @ U) <= tol * self.M.one_norm * math.sqrt(U.shape[1])
        )

    def loop(self, side):
        """Run one loop; returns ``"stop_h"``, ``"stop_chi"``, ``"special"`` or ``"exhausted"``."""
        opts, M, q = self.opts, self.M, self.q
        nM = M.one_norm
        s_max = 10.0 * nM
        neg_hint = None
        best = None
        for j in range(1, opts.j_max + 1):
            pencil = self._pencil()
            s = None
            if pencil is not None:
                if side == "left":
                    s = find_zero_left(pencil)
                else:
                    s = find_zero_right(pencil, opts.right_pick, s_max, upper=neg_hint)
                if s is None and self._pole_decoupled(pencil):
                    return "special"
            elif self._invariant():
                return "special"
            compulsory = s is None or not (np.isfinite(s) and s > 0)
            if compulsory:
                s = left_compulsory_shift(j, nM) if side == "left" else right_compulsory_shift(j, nM)
            s = self._dedup(s)
            F, s = _factor_nudged(M, s)
            self.used.append(s)

            x = -F.solve(q)
            h = j_form(x)
            chi = chi_rel(x, M, q)
            self.x, self.s, self.chi = x, s, chi
            if best is None or chi.total < best[2].total:
                best = (x, s, chi)
            if side == "right" and compulsory and h < 0:
                neg_hint = s if neg_hint is None else min(neg_hint, s)
            dim = self.U.shape[1]
            self.trace.append(TraceRow(side, j, float(s), float(h), dim, chi.total, compulsory))
            log.debug("%s j=%d s=%.17g h=%.3e dim=%d chi=%.3e", side, j, s, h, dim, chi.total)

            if abs(h) < opts.eps1 * float(x @ x):
                return "stop_h"
            if chi.total < opts.eps2:
                return "stop_chi"

            V = shift_block(M, q, s, opts.ell, factorization=F)
            U = orth_extend(self.U, V)
            self.added.append(U.shape[1] - self.U.shape[1])
            self.expansions += 1
            self.U = U
        # stagnation at the rounding floor can make the last iterate worse than an earlier one
        self.x, self.s, self.chi = best
        return "exhausted"


def solve(M, q, opts=None):
    """Solve the SOCLCP with the rational Krylov subspace method.

    Returns a :class:`SolveReport`. Raises
    :class:`~conekrylov.errors.NotPositiveDefinite` if ``M`` is not SPD.
    """
    t0 = time.perf_counter()
    opts = SolverOptions() if opts is None else opts
    M, q = _prepare(M, q)
    cls = classify(M, q, opts.cone_tol)
    if cls.case != "C3":
        return _finish_easy(M, q, cls, "rksm", t0)

    h0 = j_form(cls.x)
    qJq = j_form(q)
    U = extended_krylov(M, q, opts.ell0, opts.k0, chol=cls.chol)
    run = _Run(M, q, opts, U)
    initial_dim = U.shape[1]

    def report(outcome, side):
        ok = outcome == Outcome.BOUNDARY_ROOT
        return SolveReport(
            outcome=outcome,
            x=run.x if run.x is not None else np.zeros(M.n),
            case="C3",
            s_star=float(run.s) if ok else None,
            chi=run.chi,
            side=side if ok else None,
            h0=h0,
            trace=run.trace,
            initial_dim=initial_dim,
            final_dim=run.U.shape[1],
            expansions=run.expansions,
            added_columns=run.added,
            ell=opts.ell,
            wall_time=time.perf_counter() - t0,
        )

    status = None
    if h0 < 0:
        status = run.loop("left")
        if status == "special":
            return report(Outcome.SPECIAL_CASE, None)
        if status == "stop_chi" or on_boundary(run.x, opts.eps3):
            return report(Outcome.BOUNDARY_ROOT, "left")
    if qJq < 0:
        status = run.loop("right")
        if status != "special" and (status == "stop_chi" or on_boundary(run.x, opts.eps3)):
            return report(Outcome.BOUNDARY_ROOT, "right")
    if status in (None, "stop_h", "special"):
        # no zero of h can exist, or the zero found is not a boundary point:
        # the solution sits at the pole tau
        return report(Outcome.SPECIAL_CASE, None)
    return report(Outcome.MAX_ITERATIONS, None)


def direct_oracle(M, q, opts=None, max_n=ORACLE_MAX_N):
    """Reference solver from the full eigendecomposition of the pencil ``M - sJ``.

    The pencil is diagonalized exactly as a reduced one would be, with
    ``U = I``; the zeros of the resulting explicit ``h`` are checked in the
    left-then-right order and ``x`` is recovered by a fresh indefinite solve.
    """
    t0 = time.perf_counter()
    opts = SolverOptions() if opts is None else opts
    M, q = _prepare(M, q)
    if M.n > max_n:
        raise TooLarge(f"oracle limited to n <= {max_n}, got {M.n}")
    cls = classify(M, q, opts.cone_tol)
    if cls.case != "C3":
        return _finish_easy(M, q, cls, "oracle", t0)

    Md = M.toarray()
    J = np.diag(np.r_[1.0, -np.ones(M.n - 1)])
    pencil = diagonalize_pencil(ReducedTriple(Md, J, q))
    h0 = eval_h_hat(pencil, 0.0)
    candidates = []
    if h0 < 0:
        candidates.append(("left", find_zero_left(pencil)))
    candidates += [
        ("right", find_zero_right(pencil, "smallest", 10.0 * M.one_norm)),
        ("right", find_zero_right(pencil, "largest", 10.0 * M.one_norm)),
    ]
    trace = []
    for side, s in candidates:
        if s is None:
            continue
        F, s = _factor_nudged(M, s)
        x = -F.solve(q)
        chi = chi_rel(x, M, q)
        trace.append(TraceRow(side, len(trace) + 1, float(s), j_form(x), M.n, chi.total))
        if on_boundary(x, opts.eps3):
            return SolveReport(
                Outcome.BOUNDARY_ROOT, x, "C3", method="oracle", s_star=float(s), chi=chi,
                side=side, h0=float(h0), trace=trace, initial_dim=M.n, final_dim=M.n,
                wall_time=time.perf_counter() - t0,
            )
    return SolveReport(
        Outcome.SPECIAL_CASE, np.zeros(M.n), "C3", method="oracle", h0=float(h0), trace=trace,
        initial_dim=M.n, final_dim=M.n, wall_time=time.perf_counter() - t0,
    )


def newton_baseline(M, q, s0=None, opts=None, max_iter=None):
    """Secant iteration on ``h(s) = 0`` (``h`` values only), for benchmarking.

    The left zero is sought when ``h(0) < 0``, then the right one if that
    zero is not a boundary point. Brackets are kept once a sign change has
    been seen; without one a start on the wrong side of ``tau`` can fail, in
    which case the outcome is ``MAX_ITERATIONS``.
    """
    t0 = time.perf_counter()
    opts = SolverOptions() if opts is None else opts
    max_iter = opts.j_max if max_iter is None else max_iter
    M, q = _prepare(M, q)
    cls = classify(M, q, opts.cone_tol)
    if cls.case != "C3":
        return _finish_easy(M, q, cls, "newton", t0)

    h0 = j_form(cls.x)
    nM = M.one_norm
    trace = []
    sides = []
    if h0 < 0:
        sides.append("left")
    if j_form(q) < 0:
        sides.append("right")

    def evaluate(s, side):
        F, s = _factor_nudged(M, s)
        x = -F.solve(q)
        h = j_form(x)
        chi = chi_rel(x, M, q)
        trace.append(TraceRow(side, len(trace) + 1, float(s), h, 0, chi.total))
        return s, x, h, chi

    x = chi = s = None
    for side in sides:
        if s0 is not None and (side == sides[0]):
            sa = float(s0)
        else:
            sa = 1e-2 * nM if side == "left" else nM
        sb = sa * 1.01
        sa, x, ha, chi = evaluate(sa, side)
        sb, x, hb, chi = evaluate(sb, side)
        # left zero: h < 0 below it; right zero: h > 0 below it
        below = -1.0 if side == "left" else 1.0
        lo, hi = (0.0, None) if side == "left" else (None, None)
        status = "exhausted"
        for _ in range(max_iter):
            for sv, hv in ((sa, ha), (sb, hb)):
                if np.sign(hv) == below and (hi is None or sv < hi):
                    lo = sv if lo is None else max(lo, sv)
                elif np.sign(hv) == -below and (lo is None or sv > lo):
                    hi = sv if hi is None else min(hi, sv)
            if abs(hb) < opts.eps1 * float(x @ x):
                status = "stop_h"
                break
            if chi.total < opts.eps2:
                status = "stop_chi"
                break
            sn = sb - hb * (sb - sa) / (hb - ha) if hb != ha else math.nan
            if lo is not None and hi is not None:
                if not (lo < sn < hi):
                    sn = 0.5 * (lo + hi)
            elif not (np.isfinite(sn) and sn > 0):
                sn = 0.5 * sb if side == "left" else 2.0 * sb
            sa, ha = sb, hb
            sb, x, hb, chi = evaluate(sn, side)
        s = sb
        if status != "exhausted" and on_boundary(x, opts.eps3):
            return SolveReport(
                Outcome.BOUNDARY_ROOT, x, "C3", method="newton", s_star=float(s), chi=chi,
                side=side, h0=h0, trace=trace, wall_time=time.perf_counter() - t0,
            )
    return SolveReport(
        Outcome.MAX_ITERATIONS, x if x is not None else np.zeros(M.n), "C3", method="newton",
        chi=chi, h0=h0, trace=trace, wall_time=time.perf_counter() - t0,
    )


def dimension_ledger_ok(report):
    """``final_dim == initial_dim + ell * expansions`` (no column was dropped)."""
    return report.final_dim == report.initial_dim + report.ell * report.expansions


__all__ = [
    "Outcome",
    "SolverOptions",
    "SolveReport",
    "TraceRow",
    "classify",
    "solve",
    "direct_oracle",
    "newton_baseline",
    "dimension_ledger_ok",
    "left_compulsory_shift",
    "right_compulsory_shift",
]
