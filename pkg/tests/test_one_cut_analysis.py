import cmath
import math

import numpy as np
import numpy.testing as npt
import pytest

from core_model import OneCutSupport, eval_G
from density_quadrature import constraint_report, stieltjes
from errors import InfeasibleParametersError, InvalidSupportError, OnCutError
from one_cut_analysis import (
    collapse_alpha2,
    collapse_gaps,
    collapse_identity_gap,
    critical_line,
    edge_zero_line,
    edge_zero_point,
    family_point,
    shrink_residual,
    gamma_coeffs,
    one_cut_residuals,
    shrink_condition_scan,
    solve_one_cut,
    traceless_gamma0,
)


@pytest.fixture(scope="module")
def one_cut_3():
    return solve_one_cut(3.0, 0.1)


@pytest.fixture(scope="module")
def critical_3():
    return critical_line(3.0)


def test_gamma_regression():
    g0, g1, g2, g3 = gamma_coeffs(OneCutSupport(-2.0, 2.0), 3.0, 0.5)
    assert g3 == 1.0
    npt.assert_allclose(
        [g2, g1, g0],
        [-9.393547964039963, 29.897944098839728, -33.04632781115943],
        rtol=1e-13,
    )


def test_gamma_cancels_pole_of_potential():
    # u³·(V' - L2 sqrt(G)) = O(u³) junto a p = a
    support, a, A = OneCutSupport(-1.7, 1.9), 3.0, 0.5
    g0, g1, g2, g3 = gamma_coeffs(support, a, A)
    for u in (1e-3, -1e-3, 2e-3):
        p = a + u
        Q = ((g3 * p + g2) * p + g1) * p + g0
        G = eval_G(support, p)[0]
        assert abs(u ** 3 * p - 4.0 * A - Q * math.sqrt(G)) < 1e-6


def test_gamma_requires_pole_right_of_cut():
    with pytest.raises(InvalidSupportError):
        gamma_coeffs(OneCutSupport(-2.0, 2.0), 1.5, 0.1)


def test_zero_A_is_semicircle():
    sol = solve_one_cut(3.0, 0.0)
    lam = np.linspace(-1.999, 1.999, 201)
    exact = np.sqrt(4.0 - lam ** 2) / (2.0 * math.pi)
    assert np.max(np.abs(sol.density(lam) - exact)) < 1e-12
    assert sol.traceless_residual == 0.0


def test_one_cut_solution(one_cut_3):
    sol = one_cut_3
    assert sol.residual_norm < 1e-11
    assert sol.support.y1 < sol.support.y2 < 3.0
    assert np.max(np.abs(one_cut_residuals(sol.support, 3.0, 0.1))) < 1e-11
    rep = constraint_report(sol)
    assert rep.norm == pytest.approx(1.0, abs=1e-8)


def test_one_cut_resolvent(one_cut_3):
    sol = one_cut_3
    for k in range(12):
        p = 5.0 * cmath.exp(2j * math.pi * (k + 0.5) / 12)
        assert abs(sol.resolvent(p) - stieltjes(sol, p)) < 1e-6
    gap = 3.0 - sol.support.y2
    u = 0.15 * gap
    assert abs(sol.resolvent(3.0 + u) - sol._resolvent_pole_series(u)) < 1e-9
    with pytest.raises(OnCutError):
        sol.resolvent(0.0)


def test_one_cut_rejects_non_positive_a():
    with pytest.raises(InfeasibleParametersError):
        solve_one_cut(0.0, 0.1)


def test_critical_line_below_two():
    with pytest.raises(InfeasibleParametersError) as info:
        critical_line(1.5)
    assert info.value.details["no_solution"]


def test_critical_line_at_two():
    A_c, sol = critical_line(2.0)
    assert A_c == pytest.approx(0.0, abs=1e-8)
    assert (sol.support.y1, sol.support.y2) == (-2.0, 2.0)
    lam = np.linspace(-1.9, 1.9, 21)
    npt.assert_allclose(sol.density(lam), np.sqrt(4.0 - lam ** 2) / (2.0 * math.pi), atol=1e-12)


def test_critical_line_solution_is_traceless_and_not_positive(critical_3):
    A_c, sol = critical_3
    assert A_c != 0.0
    assert abs(sol.traceless_residual) < 1e-10
    assert sol.gamma[0] == pytest.approx(traceless_gamma0(sol.support.f1, sol.support.f2, 3.0), abs=1e-10)
    # a densidade de um corte falha a positividade na linha crítica
    assert sol.min_density < 0.0


def test_edge_zero_line(critical_3):
    A_edge, sol = edge_zero_point(3.0)
    assert A_edge == edge_zero_line(3.0)
    assert A_edge < 0.0
    assert abs(sol.edge_value()) < 1e-10
    assert sol.residual_norm < 1e-10
    # ao longo do ramo, o zero no extremo surge antes da linha crítica
    assert 0.0 < sol.support.f1 < critical_3[1].support.f1
    assert abs(edge_zero_line(2.05)) < abs(A_edge)
    with pytest.raises(InfeasibleParametersError):
        edge_zero_line(2.0)


def test_collapse_identity_vanishes():
    rng = np.random.default_rng(3)
    support, a = OneCutSupport(-1.8, 1.6), 2.4
    for A, x3 in ((0.1, 3.0), (0.7, 2.6), (2.0, 5.0)):
        p = rng.uniform(-5.0, 5.0, size=8)
        gap = collapse_identity_gap(support, a, A, x3, p)
        scale = np.maximum(1.0, np.abs(p) ** 3)
        assert np.max(np.abs(gap) / scale) < 1e-10
        assert math.isfinite(collapse_alpha2(support, a, A, x3))


def test_collapse_point_left_of_pole_rejected():
    with pytest.raises(InvalidSupportError):
        collapse_alpha2(OneCutSupport(-2.0, 1.0), 2.0, 0.1, 1.5)


def test_collapse_gaps_are_roots():
    for f1, f2, a in ((-0.2, -3.9, 3.0), (0.3, -3.5, 2.5), (-0.5, -4.4, 6.0)):
        for gap in collapse_gaps(f1, f2, a):
            t = -1.0 / gap
            assert gap > 0.0
            assert abs(shrink_residual(f1, f2, a, t) * t * t) < 1e-9


def test_shrink_single_point(critical_3):
    _, sol = critical_3
    # x3 = 4 com a = 3
    res = shrink_residual(sol.support.f1, sol.support.f2, 3.0, -1.0)
    assert math.isfinite(res)
    assert abs(res) > 1e-6


def test_shrink_scan_has_no_admissible_point():
    gaps = np.geomspace(0.01, 10.0, 10)
    report = shrink_condition_scan([1.0, 2.0, 3.0, 4.0], gaps)
    table = report.table
    assert len(table) == 40
    assert int(table["admissible"].sum()) == 0
    assert report.n_failures == 1
    assert set(table.loc[table["a"] == 1.0, "status"]) == {"no-solution"}
    # na fronteira A = 0 nenhum ponto é admissível
    assert not table.loc[table["a"] == 2.0, "admissible"].any()
    assert list(report.collapse_roots.columns) == ["a", "gap", "A", "admissible"]


@pytest.mark.parametrize("a", [2.5, 3.0, 4.0])
def test_family_point_solves_endpoint_equations(a):
    for f1 in (-0.5, -1e-3, 1e-3, 0.05):
        point = family_point(a, f1)
        assert point is not None
        A, support = point
        assert support.f1 == pytest.approx(f1, abs=1e-14)
        assert np.max(np.abs(one_cut_residuals(support, a, A))) < 1e-10
        # A < 0 exatamente quando f1 > 0
        assert np.sign(A) == -np.sign(f1)


def test_family_point_matches_newton():
    sol = solve_one_cut(3.0, 0.1)
    A, support = family_point(3.0, sol.support.f1)
    assert A == pytest.approx(0.1, rel=1e-9)
    assert support.y2 == pytest.approx(sol.support.y2, abs=1e-9)


def test_branch_folds_back_towards_zero_A():
    # A < 0 volta a 0 quando y2 se aproxima do polo
    values = []
    for f1 in 3.0 * np.geomspace(1e-6, 2.0, 400):
        point = family_point(3.0, float(f1))
        if point is None:
            break
        values.append(point[0])
    values = np.array(values)
    assert np.all(values < 0.0)
    assert values.min() < values[0] and values.min() < values[-1]
    assert abs(values[-1]) < 0.5 * abs(values.min())


def test_reduced_trace_limit_near_semicircle():
    A, support = family_point(3.0, 1e-6)
    reduced = (gamma_coeffs(support, 3.0, A)[0] - traceless_gamma0(support.f1, support.f2, 3.0)) / A
    assert reduced == pytest.approx(8.0 / 5.0 ** 1.5, rel=1e-4)


def test_family_closed_end_at_two():
    A, support = family_point(2.0, 0.0, closed=True)
    assert A == 0.0
    assert family_point(2.0, 0.0) is None
    assert family_point(2.0, 1e-4) is None
    assert family_point(1.5, 0.0, closed=True) is None
