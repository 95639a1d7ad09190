import numpy as np
import pytest

from conftest import rel
from projinv.invariant_field import generating_array, iota_coordinates
from projinv.jet_config import phi
from projinv.verification import (
    fd_jacobian,
    independence_rank,
    invariance_trials,
    numerical_rank,
    rel_dev,
)


def test_fd_of_projection_is_exact(cfg4):
    jac = fd_jacobian(lambda c: c.data.ravel()[[0, 5, 9]], cfg4)
    expected = np.zeros((3, 16))
    expected[[0, 1, 2], [0, 5, 9]] = 1.0
    assert np.allclose(jac, expected, atol=1e-9)


def test_fd_zeta12_against_hand_derivative(cfg4):
    jac = fd_jacobian(lambda c: generating_array(c)[:1], cfg4)
    (x1, _, _, _), (x2, _, _, _) = cfg4.data[:2]
    # zeta12 = Phi1(1,2) * Phi2(1,2); Phi2(1,2) is linear in p2 with slope x1 - x2
    assert rel(jac[0, 6], phi(cfg4, 1, 1, 2) * (x1 - x2)) < 1e-6


def test_fd_second_order(cfg4):
    f = lambda c: np.array([np.exp(c.data[0, 0]) * np.sin(c.data[1, 1])])
    exact = np.exp(cfg4.data[0, 0]) * np.sin(cfg4.data[1, 1])
    e1 = abs(fd_jacobian(f, cfg4, 1e-2)[0, 0] - exact)
    e2 = abs(fd_jacobian(f, cfg4, 5e-3)[0, 0] - exact)
    assert 3.0 < e1 / e2 < 5.0


@pytest.mark.parametrize("n,rank", [(3, 4), (4, 8), (5, 12)])
def test_rank(n, rank):
    rep = independence_rank(n, 10, 0)
    assert rep.rank == rank and rep.passes and rep.ratio >= 1e-6


def test_extra_dependent_row_adds_no_rank():
    def f(c):
        io = iota_coordinates(c)
        return np.append(generating_array(c), io.iota_q2 * io.iota_q3)

    rep = independence_rank(4, 10, 0, f=f, expected=9)
    assert rep.rank == 8


def test_numerical_rank():
    assert numerical_rank(np.array([1.0, 1e-3, 1e-9])) == 2
    assert numerical_rank(np.array([])) == 0


def test_invariance_generating_set():
    rep = invariance_trials(generating_array, 300, 0, 0.2, n=4, tolerance=1e-8)
    assert rep.passes


def test_invariance_raw_coordinate_fails():
    rep = invariance_trials(lambda c: c.data[:1, 0], 50, 0, 0.2, n=4, tolerance=1e-8)
    assert not rep.passes and rep.max_rel_residual > 1e-3


def test_invariance_zero_spread():
    rep = invariance_trials(lambda c: c.data[:1, 0], 20, 0, 0.0, n=4)
    assert rep.max_rel_residual == 0.0


def test_rel_dev():
    assert rel_dev([1.0, 2.0], [1.0, 1.0]) == 1.0
