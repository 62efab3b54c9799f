import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conekrylov.errors import ZeroVector
from conekrylov.socone import EPS1, EPS2, EPS3, apply_J, chi_rel, in_cone, j_form, on_boundary

vectors = arrays(np.float64, st.integers(2, 8), elements=st.floats(-1e3, 1e3))


def test_defaults():
    assert (EPS1, EPS2, EPS3) == (1e-7, 1e-8, 1e-6)


@pytest.mark.parametrize("x, expected", [((1, 0.5), True), ((0, 0), True), ((1, -2), False)])
def test_in_cone(x, expected):
    assert in_cone(np.array(x, float)) is expected


def test_in_cone_tolerance():
    x = np.array([1.0, 1.0 + 1e-9])
    assert not in_cone(x)
    assert in_cone(x, tol=1e-8)


@pytest.mark.parametrize("x, expected", [((1.5, 1.5), True), ((1, 0), False), ((0, 0), False)])
def test_on_boundary(x, expected):
    assert on_boundary(np.array(x, float), 1e-6) is expected


def test_apply_J():
    np.testing.assert_array_equal(apply_J(np.array([1.0, 2.0, 3.0])), [1.0, -2.0, -3.0])
    assert j_form(np.array([1.0, -2.0])) == -3.0


def test_apply_J_leaves_input_alone():
    x = np.array([1.0, 2.0])
    apply_J(x)
    np.testing.assert_array_equal(x, [1.0, 2.0])


@given(vectors)
def test_J_is_an_involution(x):
    np.testing.assert_array_equal(apply_J(apply_J(x)), x)


@given(vectors)
def test_boundary_implies_membership(x):
    if on_boundary(x):
        assert in_cone(x, EPS3)


def test_chi_exact_solution():
    chi = chi_rel(np.array([1.5, 1.5]), np.eye(2), np.array([-1.0, -2.0]))
    assert chi.total <= 1e-15


def test_chi_interior_point():
    chi = chi_rel(np.array([1.0, 0.0]), np.eye(2), np.array([1.0, 0.5]))
    assert chi.chi1 == 0.0
    assert chi.chi3 == pytest.approx(2.0 / (1.0 + np.sqrt(1.25)), rel=1e-14)
    assert chi.to_dict()["total"] == chi.total


def test_chi_zero_vector():
    with pytest.raises(ZeroVector):
        chi_rel(np.zeros(2), np.eye(2), np.ones(2))


@settings(max_examples=50)
@given(vectors, st.floats(1e-3, 1e3))
def test_chi1_scale_invariant(x, alpha):
    if np.linalg.norm(x) == 0:
        return
    M = np.eye(x.size)
    q = np.ones(x.size)
    assert chi_rel(alpha * x, M, q).chi1 == pytest.approx(chi_rel(x, M, q).chi1, rel=1e-12, abs=1e-12)
