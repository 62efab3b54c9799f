import numpy as np
import pytest

from conekrylov.errors import InvalidParams
from conekrylov.generate import gen_random_spd
from conekrylov.linalg import sym_eig


def cond(M):
    w, _ = sym_eig(M.toarray())
    return w[-1] / w[0]


@pytest.mark.parametrize("kind", [1, 2])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_tiny_perfect_conditioning(kind, seed):
    assert 1.0 <= cond(gen_random_spd(2, 1.0, 1.0, kind, seed)) <= 10.0


@pytest.mark.parametrize("kind", [1, 2])
def test_deterministic(kind):
    a = gen_random_spd(150, 0.02, 0.01, kind, seed=9).toarray()
    b = gen_random_spd(150, 0.02, 0.01, kind, seed=9).toarray()
    assert a.tobytes() == b.tobytes()
    c = gen_random_spd(150, 0.02, 0.01, kind, seed=10).toarray()
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("kind", [1, 2])
@pytest.mark.parametrize("rc", [0.1, 0.01, 0.003])
def test_condition_target(kind, rc):
    c = cond(gen_random_spd(200, 0.01, rc, kind, seed=4))
    assert 0.1 * rc**-2 <= c <= 10 * rc**-2


@pytest.mark.parametrize("kind", [1, 2])
def test_density_of_factor_is_near_target(kind):
    M = gen_random_spd(400, 0.01, 0.1, kind, seed=2)
    assert M.density >= 0.01
    np.linalg.cholesky(M.toarray())


@pytest.mark.parametrize(
    "args",
    [(1, 0.1, 0.1, 1), (10, 0.0, 0.1, 1), (10, 1.5, 0.1, 1), (10, 0.1, 0.0, 1), (10, 0.1, 2.0, 1), (10, 0.1, 0.1, 3)],
)
def test_invalid(args):
    with pytest.raises(InvalidParams):
        gen_random_spd(*args)
