import numpy as np
import pytest

from conekrylov.errors import DegenerateCenter
from conekrylov.generate import random_dense_spd
from conekrylov.krylov import arnoldi, extended_krylov, shift_block, single_shift_reduction
from conekrylov.linalg import ldlt_shifted
from conekrylov.reduced import h_hat_direct, project
from conekrylov.socone import apply_J
from conekrylov.transfer import TransferEvaluator


def test_arnoldi_invariant_start():
    A = np.diag([1.0, 2.0])
    res = arnoldi(lambda v: A @ v, np.array([1.0, 0.0]), 2)
    assert res.breakdown
    np.testing.assert_array_equal(res.basis, [[1.0], [0.0]])


def test_arnoldi_swap():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    res = arnoldi(lambda v: A @ v, np.array([1.0, 0.0]), 2)
    np.testing.assert_allclose(np.abs(res.basis), np.eye(2))
    np.testing.assert_allclose(res.hessenberg, A, atol=1e-15)


def test_arnoldi_relation(rng):
    n, ell = 50, 12
    A = rng.standard_normal((n, n))
    res = arnoldi(lambda v: A @ v, rng.standard_normal(n), ell)
    Y, H = res.basis, res.hessenberg
    R = A @ Y - Y @ H
    R[:, -1] -= res.residual
    assert np.linalg.norm(R) <= 1e-10 * np.linalg.norm(A)
    np.testing.assert_allclose(Y.T @ Y, np.eye(ell), atol=1e-13)


def test_extended_dimension_generic(rng):
    M = random_dense_spd(100, 1e3, rng)
    U = extended_krylov(M, np.ones(100), 3, 3)
    assert U.shape == (100, 6)


def test_extended_collapses_for_identity(rng):
    q = rng.standard_normal(10)
    U = extended_krylov(np.eye(10), q, 3, 3)
    assert U.shape[1] <= 2


def test_extended_contains_forward_space(rng):
    n = 40
    M = random_dense_spd(n, 1e2, rng)
    q = rng.standard_normal(n)
    U = extended_krylov(M, q, 4, 4)
    v = apply_J(q)
    for _ in range(4):
        w = v / np.linalg.norm(v)
        assert np.linalg.norm(w - U @ (U.T @ w)) <= 1e-10
        v = apply_J(M @ v)


def test_shift_block_single_column(rng):
    n = 20
    M = random_dense_spd(n, 1e2, rng)
    q = rng.standard_normal(n)
    V = shift_block(M, q, 0.3, 1)
    x = TransferEvaluator(M, q).eval_x(0.3)
    assert V.shape == (n, 1)
    np.testing.assert_allclose(np.abs(V[:, 0]) * np.linalg.norm(x), np.abs(x), rtol=1e-12)


def test_shift_block_diagonal(d2):
    V = shift_block(*d2, 0.0, 2)
    assert V.shape == (2, 2)
    u = np.array([1.0, -0.5]) / np.linalg.norm([1.0, -0.5])
    assert abs(abs(V[:, 0] @ u) - 1.0) <= 1e-14


def test_interpolation_at_used_shifts(rng):
    n = 60
    M = random_dense_spd(n, 1e3, rng)
    q = np.ones(n)
    shifts = [0.05, 0.4, 2.5]
    U = extended_krylov(M, q, 2, 2)
    from conekrylov.linalg import orth_extend

    for s in shifts:
        U = orth_extend(U, shift_block(M, q, s, 1))
    t = project(M, q, U)
    ev = TransferEvaluator(M, q)
    for s in shifts:
        assert h_hat_direct(t, s) == pytest.approx(ev.eval_h(s), rel=1e-9)


def test_reduction_exact_at_center(spd30):
    q = np.ones(30)
    red = single_shift_reduction(spd30, q, 0.2, 2)
    h = TransferEvaluator(spd30, q).eval_h(0.2)
    assert red.h_ell(0.2) == pytest.approx(h, rel=1e-12)
    assert red.h_arnoldi(0.2) == pytest.approx(h, rel=1e-12)


def test_reduction_exact_once_space_is_full(d1):
    red = single_shift_reduction(*d1, 0.5, 2)
    ev = TransferEvaluator(*d1)
    for s in (0.1, 0.3, 2.0, 5.0):
        assert red.h_ell(s) == pytest.approx(ev.eval_h(s), rel=1e-12)


def test_degenerate_center(d1):
    with pytest.raises(DegenerateCenter):
        single_shift_reduction(*d1, 1.0 / 3.0, 1)


def _slope(M, q, s0, ell, form="h_ell"):
    red = single_shift_reduction(M, q, s0, ell, factorization=ldlt_shifted(M, s0))
    ev = TransferEvaluator(M, q, max_cached=1)
    d = np.geomspace(1e-3, 1e-1, 9)
    err = [abs(ev.eval_h(s0 + t) - getattr(red, form)(s0 + t)) for t in d]
    return np.polyfit(np.log(d), np.log(err), 1)[0]


def test_order_probe_two(rng):
    M = random_dense_spd(30, 1e2, rng)
    assert _slope(M, np.ones(30), 0.5, 2) >= 2 * 2 - 1.5


def test_one_sided_form_matches_fewer_moments(rng):
    M = random_dense_spd(30, 1e2, rng)
    assert _slope(M, np.ones(30), 0.5, 3, "h_arnoldi") < 2 * 3 - 1.5
