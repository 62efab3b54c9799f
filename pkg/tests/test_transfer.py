import threading

import numpy as np
import pytest

from conekrylov.errors import SingularShift
from conekrylov.generate import random_dense_spd
from conekrylov.socone import j_form
from conekrylov.transfer import TransferEvaluator

# Diagonal instances: M = diag(tau, b), q; tau is the positive eigenvalue of M J.
CASE3 = (np.diag([4.0, 1.0]), np.array([-2.0, 1.0]), 4.0, [2.0 / 3.0])
CASE4 = (np.diag([1.0, 4.0]), np.array([1.0, -2.0]), 1.0, [6.0])
CASE5 = (np.eye(2), np.array([-1.0, -2.0]), 1.0, [1.0 / 3.0, 3.0])
# expected sign of h on each open subinterval cut by the roots and tau
SIGNS = {"case3": [-1, 1, 1], "case4": [1, 1, -1], "case5": [-1, 1, 1, -1]}


@pytest.mark.parametrize(
    "s, x",
    [(1.0 / 3.0, [1.5, 1.5]), (0.0, [1.0, 2.0])],
)
def test_eval_x_d1(d1, s, x):
    np.testing.assert_allclose(TransferEvaluator(*d1).eval_x(s), x, rtol=1e-14)


def test_eval_x_d2(d2):
    np.testing.assert_allclose(TransferEvaluator(*d2).eval_x(6.0), [0.2, 0.2], rtol=1e-14)


def test_eval_h_examples(d1, d2):
    assert TransferEvaluator(*d1).eval_h(0.0) == pytest.approx(-3.0, rel=1e-15)
    assert abs(TransferEvaluator(*d1).eval_h(1.0 / 3.0)) <= 1e-14
    assert TransferEvaluator(*d2).eval_h(0.0) == pytest.approx(0.75, rel=1e-15)


def test_eval_f_examples(d1):
    ev = TransferEvaluator(*d1)
    assert ev.eval_f(0.0) == pytest.approx(5.0, rel=1e-15)
    assert ev.eval_f(0.5) == pytest.approx(2.0 + 8.0 / 3.0, rel=1e-14)


def test_f_prime_is_h_at_example_point(d1):
    ev = TransferEvaluator(*d1)
    s, d = 0.1, 1e-5
    fd = (ev.eval_f(s + d) - ev.eval_f(s - d)) / (2 * d)
    assert fd == pytest.approx(ev.eval_h(s), rel=1e-6)


def test_f_prime_is_h_random(rng):
    n = 25
    M = random_dense_spd(n, 1e2, rng)
    q = rng.standard_normal(n)
    ev = TransferEvaluator(M, q, max_cached=64)
    shifts = rng.uniform(0.01, 3.0, size=20)
    for s in shifts:
        d = 1e-5 * (1 + s)
        fd = (ev.eval_f(s + d) - ev.eval_f(s - d)) / (2 * d)
        h = ev.eval_h(s)
        # skip shifts too close to the pole, where the difference quotient is meaningless
        if abs(h) > 1e6:
            continue
        assert fd == pytest.approx(h, rel=1e-5, abs=1e-7 * np.linalg.norm(ev.eval_x(s)) ** 2)


def test_singular_shift_not_cached(d1):
    ev = TransferEvaluator(*d1)
    for _ in range(2):
        with pytest.raises(SingularShift):
            ev.eval_h(1.0)
    assert 1.0 not in ev._cache


def test_near_pole_is_signed_infinite_or_huge(d1):
    ev = TransferEvaluator(*d1)
    h = ev.eval_h(1.0 - 1e-12)
    assert h > 1e20


def test_cache_is_bounded(d1):
    ev = TransferEvaluator(*d1, max_cached=3)
    for s in (0.1, 0.2, 0.3, 0.4, 0.5):
        ev.eval_h(s)
    assert len(ev._cache) == 3
    assert set(ev._cache) == {0.3, 0.4, 0.5}


def test_concurrent_reads(rng):
    n = 60
    M = random_dense_spd(n, 1e2, rng)
    q = rng.standard_normal(n)
    ev = TransferEvaluator(M, q, max_cached=8)
    shifts = [0.05 * k for k in range(1, 9)]
    expected = {s: TransferEvaluator(M, q).eval_h(s) for s in shifts}
    errors = []

    def worker():
        for s in shifts * 5:
            if ev.eval_h(s) != expected[s]:
                errors.append(s)

    threads = [threading.Thread(target=worker) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors


def _sample_points(tau, roots):
    cuts = sorted([0.0, tau, *roots])
    pts = [0.5 * (a + b) for a, b in zip(cuts, cuts[1:])]
    return pts + [2.0 * cuts[-1] + 1.0]


@pytest.mark.parametrize("name, inst", [("case3", CASE3), ("case4", CASE4), ("case5", CASE5)])
def test_sign_pattern(name, inst):
    M, q, tau, roots = inst
    ev = TransferEvaluator(M, q)
    signs = [int(np.sign(ev.eval_h(s))) for s in _sample_points(tau, roots)]
    assert signs == SIGNS[name]
    for r in roots:
        assert abs(ev.eval_h(r)) <= 1e-13


@pytest.mark.parametrize("inst", [CASE3, CASE4, CASE5])
def test_root_location_predicates(inst):
    M, q, tau, roots = inst
    ev = TransferEvaluator(M, q)
    assert (ev.eval_h(0.0) < 0) == any(0 < r < tau for r in roots)
    assert (j_form(q) < 0) == any(r > tau for r in roots)
