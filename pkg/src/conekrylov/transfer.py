"""The scalar transfer functions of the full problem.

For a shift ``s`` that is not an eigenvalue of ``MJ``::

    x(s) = -(M - sJ)^{-1} q
    f(s) = q^T (M - sJ)^{-1} q
    h(s) = x(s)^T J x(s)        (= f'(s))

A positive zero ``s*`` of ``h`` with ``x_1(s*) > 0`` gives the boundary
solution of the complementarity problem.
"""

import threading

import numpy as np

from .linalg import as_symmetric, ldlt_shifted
from .socone import j_form

#: |h| above this is reported as a signed infinity (we are sitting on a pole).
OVERFLOW = 1e100


class TransferEvaluator:
    """Evaluate ``x(s)``, ``f(s)``, ``h(s)`` with a per-shift factorization cache.

    Lookups are lock-free; insertions are serialized. A shift that raised
    :class:`~conekrylov.errors.SingularShift` is never cached, so the error
    is raised again on every request. At most ``max_cached`` factorizations
    are kept (oldest evicted first); dense ones cost ``8 n^2`` bytes each.
    """

    def __init__(self, M, q, max_cached=4):
        self.M = as_symmetric(M)
        self.q = np.asarray(q, dtype=float)
        if self.q.shape != (self.M.n,):
            raise ValueError(f"q has shape {self.q.shape}, expected ({self.M.n},)")
        self.max_cached = max_cached
        self._cache = {}
        self._lock = threading.Lock()

    def factorization(self, s):
        s = float(s)
        F = self._cache.get(s)
        if F is None:
            F = self._insert(ldlt_shifted(self.M, s))
        return F

    def _insert(self, F):
        with self._lock:
            F = self._cache.setdefault(float(F.shift), F)
            while len(self._cache) > self.max_cached:
                del self._cache[next(iter(self._cache))]
        return F

    def add_factorization(self, F):
        self._insert(F)

    def eval_x(self, s):
        return -self.factorization(s).solve(self.q)

    def eval_h(self, s):
        h = j_form(self.eval_x(s))
        if not np.isfinite(h) or abs(h) > OVERFLOW:
            return float(np.copysign(np.inf, h)) if not np.isnan(h) else np.inf
        return h

    def eval_f(self, s):
        return float(self.q @ self.factorization(s).solve(self.q))

    def clear(self):
        with self._lock:
            self._cache.clear()
