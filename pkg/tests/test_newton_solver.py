import numpy as np
import numpy.testing as npt
import pytest

from errors import InvalidSupportError, NoConvergenceError
from newton_solver import damped_newton, fd_jacobian, geometric_path


def test_scalar_root():
    res = damped_newton(lambda x: np.array([x[0] ** 2 - 2.0]), [1.0], tol=1e-13)
    assert res.x[0] == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert res.residual_norm < 1e-13


def test_wellbehaved_system():
    def fun(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 4.0, x[0] - x[1]])

    res = damped_newton(fun, [1.0, 0.5])
    npt.assert_allclose(res.x, [np.sqrt(2.0), np.sqrt(2.0)], rtol=1e-10)


def test_feasibility_keeps_branch():
    # raiz negativa excluída pelo domínio
    res = damped_newton(lambda x: np.array([x[0] ** 2 - 1.0]), [0.1], feasible=lambda x: bool(x[0] > 0))
    assert res.x[0] == pytest.approx(1.0)


def test_no_root_reports_best_point():
    with pytest.raises(NoConvergenceError) as info:
        damped_newton(lambda x: np.array([x[0] ** 2 + 1.0]), [0.3], max_iter=30)
    assert info.value.best_residual >= 1.0
    assert info.value.details["best_point"] is not None


def test_fd_jacobian():
    J = fd_jacobian(lambda x: np.array([x[0] * x[1], np.sin(x[0])]), np.array([0.5, 2.0]))
    npt.assert_allclose(J, [[2.0, 0.5], [np.cos(0.5), 0.0]], atol=1e-8)


def test_geometric_path():
    path = geometric_path(1e-4, 0.1, max_steps=40)
    assert path[-1] == pytest.approx(0.1)
    assert np.all(np.diff(path) > 0)
    assert np.all(path[1:] / path[:-1] <= 1.5 + 1e-12)
    assert len(geometric_path(1e-4, 1e4, max_steps=5)) == 5


def _ordered_residual(x):
    # só definido para x0 < x1
    if not x[0] < x[1]:
        raise InvalidSupportError("fora de ordem")
    return np.array([x[1] - x[0] - 1e-9 * (1.0 + x[0]), x[0] + x[1] - 1.0])


def test_fd_jacobian_stays_in_domain():
    # a diferença central atravessaria a fronteira x0 = x1
    x = np.array([0.5, 0.5 + 5e-8])
    J = fd_jacobian(_ordered_residual, x)
    assert J is not None
    npt.assert_allclose(J, [[-1.0 - 1e-9, 1.0], [1.0, 1.0]], atol=1e-6)


def test_fd_jacobian_respects_feasible():
    J = fd_jacobian(lambda x: np.array([x[0] ** 2]), np.array([0.0]), feasible=lambda x: bool(x[0] >= 0))
    assert J is not None
    assert abs(J[0, 0]) < 1e-6


def test_fd_jacobian_without_valid_stencil():
    assert fd_jacobian(lambda x: np.array([x[0]]), np.array([1.0]), feasible=lambda x: bool(x[0] == 1.0)) is None


def test_newton_near_boundary_does_not_leak_support_error():
    res = damped_newton(_ordered_residual, [0.5 - 1e-8, 0.5 + 1e-8], feasible=lambda x: bool(x[0] < x[1]))
    assert res.x[0] < res.x[1]
    assert res.residual_norm < 1e-10
