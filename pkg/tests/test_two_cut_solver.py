import cmath
import math

import numpy as np
import numpy.testing as npt
import pytest

from core_model import PotentialParams, TwoCutSupport, eval_F
from density_quadrature import constraint_report, stieltjes
from errors import InfeasibleParametersError, InvalidSupportError, OnCutError
from symmetric_limit import solve_symmetric
from two_cut_solver import (
    TwoCutSolution,
    _residuals_general,
    alpha_coeffs_general,
    alpha_coeffs_m2,
    endpoint_residuals,
    resolvent,
    seed_supports,
    solve_endpoints,
    solve_many,
)


def _random_supports(n, seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        x1 = rng.uniform(-3.0, -2.0)
        x2 = rng.uniform(-1.0, 0.0)
        a = rng.uniform(0.5, 1.0)
        x3 = rng.uniform(1.5, 2.0)
        x4 = rng.uniform(2.5, 3.0)
        yield TwoCutSupport(x1, x2, x3, x4), a, rng.uniform(0.01, 2.0)


def test_alpha_general_matches_closed_form():
    for support, a, A in _random_supports(100):
        closed = alpha_coeffs_m2(support, a, A)
        general = alpha_coeffs_general(support, PotentialParams(a, A, 2))
        npt.assert_allclose(general, closed, rtol=1e-10, atol=1e-12)


def test_alpha_odd_order_symmetric_support():
    support = TwoCutSupport(-3.0, -1.0, 1.0, 3.0)
    alpha = alpha_coeffs_general(support, PotentialParams(a=0.0, A=0.1, m=1))
    F0 = eval_F(support, 0.0)[0]
    assert alpha[1] == pytest.approx(0.0, abs=1e-15)
    assert alpha[0] == pytest.approx(2 * 0.1 / math.sqrt(F0), rel=1e-14)


def test_alpha_rejects_pole_outside_gap():
    with pytest.raises(InvalidSupportError):
        alpha_coeffs_m2(TwoCutSupport(-2.0, -1.0, 1.0, 2.0), 1.5, 0.1)


@pytest.mark.parametrize("fixture", ["merging_solution", "evaporating_solution"])
def test_converged_residuals_and_constraints(fixture, request):
    sol = request.getfixturevalue(fixture)
    assert sol.support.is_ordered(sol.params.a)
    assert np.max(np.abs(endpoint_residuals(sol.support, sol.params))) < 1e-10
    # o sistema geral para m = 2 tem as mesmas raízes
    assert np.max(np.abs(_residuals_general(sol.support, sol.params))) < 1e-8
    rep = constraint_report(sol)
    assert rep.norm == pytest.approx(1.0, abs=1e-8)
    assert rep.trace == pytest.approx(0.0, abs=1e-8)
    assert rep.min_density > 0.0
    assert rep.left_mass + rep.right_mass == pytest.approx(rep.norm, abs=1e-12)


@pytest.mark.parametrize("A", [0.01, 0.1, 1.0])
def test_matches_symmetric_oracle(A):
    sol = solve_endpoints(PotentialParams(a=0.0, A=A, m=2))
    oracle = solve_symmetric(A)
    npt.assert_allclose(sol.support.endpoints, oracle.support.endpoints, atol=1e-8)
    lam = np.concatenate([
        np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 50) for lo, hi in oracle.cuts
    ])
    npt.assert_allclose(sol.density(lam), oracle.density(lam), atol=1e-8)


@pytest.mark.parametrize("A", list(np.linspace(-1.0, 0.0, 10)))
@pytest.mark.parametrize("a", [1.5, 3.0])
def test_non_positive_A_is_infeasible(a, A):
    with pytest.raises(InfeasibleParametersError):
        solve_endpoints(PotentialParams(a=a, A=float(A)))


def test_far_pole_recovers_semicircle_left_cut():
    sol = solve_endpoints(PotentialParams(a=10.0, A=0.01))
    x1, x2, x3, x4 = sol.support.endpoints
    assert abs(x1 + 2.0) < 1e-2
    assert abs(x2 - 2.0) < 1e-2
    assert x4 - x3 < 0.2


def test_even_order_four_converges():
    sol = solve_endpoints(PotentialParams(a=2.5, A=0.1, m=4))
    assert sol.residual_norm < 1e-10
    assert sol.support.is_ordered(2.5)
    assert sol.alpha[-1] == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("m", [1, 3])
def test_odd_orders(m):
    sol = solve_endpoints(PotentialParams(a=2.5, A=0.1, m=m))
    assert sol.residual_norm < 1e-10
    assert sol.support.is_ordered(2.5)
    rep = constraint_report(sol)
    assert rep.trace == pytest.approx(0.0, abs=1e-8)


def test_seed_supports_are_ordered():
    for a in (0.0, 1.5, 2.5, 6.0):
        seeds = seed_supports(a, 1e-4, 2)
        assert seeds
        assert all(s.is_ordered(a) for s in seeds)


def test_resolvent_asymptotics(evaporating_solution):
    # W0 = 1/p + <lam>/p^2 + <lam^2>/p^3 com traço nulo
    for p in (50.0, 50j, -50.0):
        w = resolvent(evaporating_solution, p)
        assert abs(p * p * (w - 1.0 / p)) < 0.1


def test_resolvent_matches_stieltjes(merging_solution):
    for k in range(20):
        p = 5.0 * cmath.exp(2j * math.pi * (k + 0.5) / 20)
        assert abs(resolvent(merging_solution, p) - stieltjes(merging_solution, p)) < 1e-6


def test_resolvent_at_pole(merging_solution):
    sol = merging_solution
    a = sol.params.a
    w_a = resolvent(sol, a)
    assert math.isfinite(w_a.real) and w_a.imag == 0.0
    u = 1e-6
    mid = 0.5 * (resolvent(sol, a + u) + resolvent(sol, a - u))
    assert abs(mid - w_a) < 1e-9
    # série junto ao polo e fórmula direta coincidem fora do raio da série
    gap = min(a - sol.support.x2, sol.support.x3 - a)
    u = 0.2 * gap
    assert abs(sol.resolvent(a + u) - sol._resolvent_pole_series(u)) < 1e-8 * max(1.0, abs(sol.resolvent(a + u)))


def test_resolvent_on_cut_raises(merging_solution):
    lo, hi = merging_solution.cuts[0]
    with pytest.raises(OnCutError):
        resolvent(merging_solution, 0.5 * (lo + hi))


def test_solution_dict_roundtrip(merging_solution):
    back = TwoCutSolution.from_dict(merging_solution.to_dict())
    npt.assert_allclose(back.alpha, merging_solution.alpha, rtol=1e-14)


def test_solve_many_warm_start():
    sols = solve_many([PotentialParams(1.5, A) for A in (0.05, 0.1, 0.2)])
    assert [s.params.A for s in sols] == [0.05, 0.1, 0.2]
    assert all(s.residual_norm < 1e-10 for s in sols)


def test_density_is_resolvent_discontinuity(merging_solution):
    sol = merging_solution
    eps = 1e-9
    for lo, hi in sol.cuts:
        for lam in np.linspace(lo, hi, 12)[1:-1]:
            jump = (sol.resolvent(complex(lam, -eps)) - sol.resolvent(complex(lam, eps))) / (2j * math.pi)
            assert jump.real == pytest.approx(sol.density(lam), abs=1e-5)


def test_leading_alpha_is_one(merging_solution):
    assert merging_solution.alpha[-1] == pytest.approx(1.0, abs=1e-10)
