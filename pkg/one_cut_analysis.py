# one_cut_analysis.py
#
# Ansatz de um corte para m = 2: W0 = ½(V' - L2 sqrt(G)), com
# L2(p) = (g3 p³ + g2 p² + g1 p + g0)/(p-a)³ e G(p) = (p-y1)(p-y2).
# Inclui a linha crítica (solução de um corte sem traço), a linha onde
# a densidade ganha um zero no extremo direito e o varrimento da
# condição de colapso x3 = x4 do corte direito.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from core_model import OneCutSupport, PotentialParams, G_taylor_at, eval_G
from density_quadrature import density_minimum
from errors import (
    InfeasibleParametersError,
    InvalidSupportError,
    NoConvergenceError,
    OnCutError,
    SkpoleError,
)
from newton_solver import damped_newton
from series_jet import SeriesJet

logger = logging.getLogger(__name__)

ON_CUT_TOL = 1e-12
POLE_SERIES_ORDER = 16


# ---------------------------------------------------------
# 1. Coeficientes gama e equações dos extremos
# ---------------------------------------------------------
def _valid_G_at_pole(support: OneCutSupport, a: float) -> Tuple[float, float, float]:
    if not support.y2 < a:
        raise InvalidSupportError(
            "o polo tem de ficar à direita do corte (a > y2)",
            {"a": a, "endpoints": support.endpoints.tolist()},
        )
    G, dG, d2G = eval_G(support, a)
    if not G > 0.0:
        raise InvalidSupportError("G(a) <= 0", {"a": a, "G(a)": G})
    return G, dG, d2G


def gamma_coeffs(support: OneCutSupport, a: float, A: float) -> Tuple[float, float, float, float]:
    G, dG, d2G = _valid_G_at_pole(support, a)
    P = G ** 2.5
    g3 = 1.0
    g2 = -3.0 * a + A / P * (-1.5 * dG ** 2 + d2G * G)
    g1 = 3.0 * a * a + A / P * (2.0 * G * dG - 2.0 * a * G * d2G + 3.0 * a * dG ** 2)
    g0 = -a ** 3 - A / P * (4.0 * G * G + 2.0 * a * G * dG - a * a * G * d2G + 1.5 * a * a * dG ** 2)
    return g0, g1, g2, g3


def one_cut_residuals(support: OneCutSupport, a: float, A: float) -> np.ndarray:
    """Ordens O(1) e O(1/p) da expansão assintótica de W0."""
    _, g1, g2, _ = gamma_coeffs(support, a, A)
    f1, f2 = support.f1, support.f2
    r1 = g2 - (0.5 * f1 - 3.0 * a)
    r2 = g1 - (-2.0 + 0.375 * f1 ** 2 - 1.5 * a * f1 + 3.0 * a * a - 0.5 * f2)
    return np.array([r1, r2])


def traceless_gamma0(f1: float, f2: float, a: float) -> float:
    """gama_0 imposto pelo traço nulo (ordem 1/p²)."""
    return (
        6.0 * a
        - f1
        + 1.5 * a * f2
        - a ** 3
        + 1.5 * a * a * f1
        - 1.125 * a * f1 ** 2
        - 0.75 * f1 * f2
        + 0.3125 * f1 ** 3
    )


def traceless_residual(support: OneCutSupport, a: float, A: float) -> float:
    g0 = gamma_coeffs(support, a, A)[0]
    return g0 - traceless_gamma0(support.f1, support.f2, a)


# ---------------------------------------------------------
# 2. Solução de um corte
# ---------------------------------------------------------
@dataclass(frozen=True)
class OneCutSolution:
    params: PotentialParams
    support: OneCutSupport
    gamma: Tuple[float, float, float, float]
    residual_norm: float
    traceless_residual: float
    min_density: float
    min_location: float

    @classmethod
    def build(cls, params: PotentialParams, support: OneCutSupport) -> "OneCutSolution":
        a, A = params.a, params.A
        gamma = gamma_coeffs(support, a, A)
        res = one_cut_residuals(support, a, A)
        draft = cls(params, support, gamma, float(np.max(np.abs(res))),
                    traceless_residual(support, a, A), math.nan, math.nan)
        mn, loc = density_minimum(draft)
        return cls(params, support, gamma, draft.residual_norm, draft.traceless_residual, mn, loc)

    @classmethod
    def semicircle(cls, a: float, m: int = 2) -> "OneCutSolution":
        """Limite A = 0: L2 = 1 e suporte [-2, 2] para qualquer a."""
        params = PotentialParams(a=a, A=0.0, m=m)
        gamma = (-a ** 3, 3.0 * a * a, -3.0 * a, 1.0)
        draft = cls(params, OneCutSupport(-2.0, 2.0), gamma, 0.0, 0.0, math.nan, math.nan)
        mn, loc = density_minimum(draft)
        return cls(params, draft.support, gamma, 0.0, 0.0, mn, loc)

    @property
    def cuts(self):
        return self.support.cuts

    def L2(self, p):
        if self.params.A == 0.0:
            return np.ones_like(np.asarray(p, dtype=complex if np.iscomplexobj(p) else float))
        g0, g1, g2, g3 = self.gamma
        return (((g3 * p + g2) * p + g1) * p + g0) / (p - self.params.a) ** 3

    def density(self, lam):
        """Densidade com sinal (não se aplica valor absoluto)."""
        lam = np.asarray(lam, dtype=float)
        y1, y2 = self.support.y1, self.support.y2
        inside = (lam >= y1) & (lam <= y2)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = self.L2(lam) * np.sqrt(np.clip((lam - y1) * (y2 - lam), 0.0, None)) / (2.0 * np.pi)
        out = np.where(inside, rho, 0.0)
        return float(out) if out.ndim == 0 else out

    def cut_factor(self, k: int, lam):
        return self.L2(np.asarray(lam, dtype=float)) / (2.0 * np.pi)

    def edge_value(self) -> float:
        """L2(y2): anula-se quando a densidade ganha um zero no extremo direito."""
        return float(self.L2(self.support.y2))

    def _sqrtG(self, p: complex) -> complex:
        return np.sqrt(p - self.support.y1) * np.sqrt(p - self.support.y2)

    def resolvent(self, p: complex) -> complex:
        p = complex(p)
        y1, y2 = self.support.y1, self.support.y2
        if abs(p.imag) < ON_CUT_TOL and y1 - ON_CUT_TOL <= p.real <= y2 + ON_CUT_TOL:
            raise OnCutError("p está sobre o suporte", {"p": [p.real, p.imag]})
        a, A = self.params.a, self.params.A
        if A == 0.0:
            return 0.5 * (p - self._sqrtG(p))
        u = p - a
        if abs(u) < 0.1 * (a - y2):
            return self._resolvent_pole_series(u)
        Vp = p - 4.0 * A / u ** 3
        return 0.5 * (Vp - self.L2(p) * self._sqrtG(p))

    def _resolvent_pole_series(self, u: complex) -> complex:
        # W0(a+u) = ½(a + u - sqrt(G(a+u)) - 4A s(u) sum_{k>2} g_k u^{k-3}),  s = G^{1/2}
        a, A = self.params.a, self.params.A
        jet = SeriesJet(G_taylor_at(self.support, a), order=POLE_SERIES_ORDER)
        s = jet.sqrt().coefficients
        g = jet.rsqrt().coefficients
        tail = g[3:]
        prod = np.convolve(s, tail)[: tail.size]
        series = np.polynomial.polynomial.polyval(u, prod)
        sqrtG = np.polynomial.polynomial.polyval(u, s)
        return 0.5 * (a + u - sqrtG - 4.0 * A * series)


def _newton_one_cut(a: float, A: float, y0: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    def fun(y: np.ndarray) -> np.ndarray:
        return one_cut_residuals(OneCutSupport(y[0], y[1]), a, A)

    def feasible(y: np.ndarray) -> bool:
        return bool(y[0] < y[1] < a)

    return damped_newton(fun, y0, tol=tol, max_iter=100, feasible=feasible).x


def solve_one_cut(
    a: float,
    A: float,
    initial_guess: Optional[OneCutSupport] = None,
    continuation_steps: int = 40,
) -> OneCutSolution:
    """
    Extremos y1 < y2 < a do ansatz de um corte sem impor traço nulo.
    Semente (-2, 2); se falhar, continuação linear em A desde 0.
    """
    if not a > 0:
        raise InfeasibleParametersError("o ansatz de um corte exige a > 0", {"a": a})
    params = PotentialParams(a=a, A=A, m=2)
    if A == 0.0 and a > 2.0:
        return OneCutSolution.semicircle(a)

    if initial_guess is not None:
        seed = initial_guess.endpoints
    else:
        seed = np.array([-2.0, 2.0 if a > 2.0 else a - 0.1])
    try:
        y = _newton_one_cut(a, A, seed)
    except NoConvergenceError:
        logger.debug("um corte: semente direta falhou para a=%.4g A=%.4g; continuação em A", a, A)
        y = np.array([-2.0, 2.0 if a > 2.0 else a - 0.1])
        for A_k in np.linspace(0.0, A, continuation_steps + 1)[1:]:
            y = _newton_one_cut(a, A_k, y)

    support = OneCutSupport(float(y[0]), float(y[1]))
    if not support.y2 < a:
        raise InvalidSupportError("extremos convergidos violam y2 < a", {"a": a, "y": y.tolist()})
    return OneCutSolution.build(params, support)


# ---------------------------------------------------------
# 3. Linha crítica e linha de zero no extremo
# ---------------------------------------------------------
# O ramo de um corte é parametrizado por f1 = y1 + y2: eliminando A das
# duas equações dos extremos, f2 é raiz de uma quadrática e A fica em
# forma fechada. Com A < 0 o ramo dobra (A volta a 0 quando y2 -> a),
# por isso a continuação em A não o percorre.
BRANCH_GRID = np.geomspace(1e-8, 2.0, 3000)


def family_point(a: float, f1: float, closed: bool = False) -> Optional[Tuple[float, OneCutSupport]]:
    """
    (A, suporte) do ramo de um corte com y1 + y2 = f1, ou None fora do
    domínio. `closed` aceita o extremo y2 = a do ramo.
    """
    K = -2.0 + 0.375 * f1 ** 2 - 1.5 * a * f1
    h10 = -8.0 * a * a + 8.0 * a * f1 - 3.0 * f1 ** 2
    h20 = 12.0 * a ** 3 - 14.0 * a * a * f1 + 5.0 * a * f1 ** 2
    c1 = 4.0 * K - 0.5 * h10 + 2.0 * f1 ** 2
    c0 = K * h10 - f1 * h20
    D = c1 * c1 + 8.0 * c0
    if D < 0.0:
        return None
    f2 = (c1 - math.sqrt(D)) / 4.0
    disc = f1 * f1 - 4.0 * f2
    G = a * a - a * f1 + f2
    H1 = h10 + 4.0 * f2
    if disc <= 0.0 or G < 0.0 or H1 == 0.0:
        return None
    w = math.sqrt(disc)
    y1, y2 = 0.5 * (f1 - w), 0.5 * (f1 + w)
    if not (y2 < a or (closed and y2 == a)):
        return None
    # + 0.0 normaliza -0.0 em f1 = 0
    return f1 * G ** 2.5 / H1 + 0.0, OneCutSupport(y1, y2)


def _reduced_trace(a: float, A: float, support: OneCutSupport) -> float:
    # em A -> 0 tende para 8/(a²-4)^{3/2}
    return traceless_residual(support, a, A) / A


def _edge_value(a: float, A: float, support: OneCutSupport) -> float:
    g0, g1, g2, g3 = gamma_coeffs(support, a, A)
    y = support.y2
    return (((g3 * y + g2) * y + g1) * y + g0) / (y - a) ** 3


def _one_cut_at(a: float, A: float, support: OneCutSupport) -> OneCutSolution:
    if A == 0.0:
        return OneCutSolution.semicircle(a)
    return OneCutSolution.build(PotentialParams(a=a, A=A, m=2), support)


def _first_root_along_branch(a: float, fn, what: str) -> Tuple[float, OneCutSolution]:
    """
    Percorre o ramo A < 0 (f1 > 0) a partir do semicírculo e devolve a
    primeira raiz de fn(a, A, suporte).
    """
    start = family_point(a, 0.0, closed=True)
    if start is None:
        raise InfeasibleParametersError(
            f"{what}: não há ramo de um corte (o semicírculo não fica à esquerda do polo)",
            {"a": a, "no_solution": True},
        )
    grid = a * BRANCH_GRID
    prev: Optional[Tuple[float, float]] = None
    n_valid = 0
    for f1 in grid:
        point = family_point(a, float(f1))
        if point is None:
            break
        n_valid += 1
        val = fn(a, *point)
        if prev is not None and np.sign(val) != np.sign(prev[1]):
            f_root = brentq(lambda f: fn(a, *family_point(a, f)), prev[0], float(f1), xtol=1e-15, rtol=1e-14)
            A_root, support = family_point(a, f_root)
            logger.info("%s: a=%.6g A=%.12g (f1=%.6g)", what, a, A_root, f_root)
            return A_root, _one_cut_at(a, A_root, support)
        prev = (float(f1), val)

    if n_valid == 0:
        # ramo degenerado: y2 = a já no semicírculo
        A0, support = start
        logger.info("%s: a=%.6g ramo reduzido ao semicírculo", what, a)
        return A0, _one_cut_at(a, A0, support)
    raise NoConvergenceError(f"{what}: nenhuma raiz encontrada", details={"a": a, "f1_max": prev[0]})


def critical_line(a: float) -> Tuple[float, OneCutSolution]:
    """
    A(a) onde a solução de um corte também tem traço nulo.

    Em A = 0 o semicírculo tem traço nulo para qualquer a; o ramo não
    trivial obtém-se anulando traceless_residual/A.
    """
    if not a > 0:
        raise InfeasibleParametersError("o ansatz de um corte exige a > 0", {"a": a, "no_solution": True})
    return _first_root_along_branch(a, _reduced_trace, "linha crítica")


def edge_zero_point(a: float) -> Tuple[float, OneCutSolution]:
    """A e solução onde L2(y2) = 0 (zero da densidade no extremo direito)."""
    if not a > 2.0:
        raise InfeasibleParametersError("linha de zero no extremo exige a > 2", {"a": a})
    return _first_root_along_branch(a, _edge_value, "linha de zero no extremo")


def edge_zero_line(a: float) -> float:
    return edge_zero_point(a)[0]


# ---------------------------------------------------------
# 4. Colapso do corte direito (x3 = x4)
# ---------------------------------------------------------
def _collapsed_rsqrt_jet(support: OneCutSupport, a: float, x3: float, order: int) -> np.ndarray:
    """Jet de F^{-1/2} com F = G·(w - x3)², raiz positiva, em w = a."""
    _valid_G_at_pole(support, a)
    if not x3 > a:
        raise InvalidSupportError("ponto de colapso tem de estar à direita do polo", {"a": a, "x3": x3})
    G = SeriesJet(G_taylor_at(support, a), order=order)
    lin = SeriesJet([a - x3, 1.0], order=order)
    return (G * lin * lin).rsqrt().coefficients


def collapse_alpha2(support: OneCutSupport, a: float, A: float, x3: float) -> float:
    """alfa_2 das fórmulas de dois cortes no suporte degenerado (y1, y2, x3, x3)."""
    return 4.0 * A * float(_collapsed_rsqrt_jet(support, a, x3, 2)[2])


def collapse_identity_gap(support: OneCutSupport, a: float, A: float, x3: float, p) -> np.ndarray:
    """
    P2(p)(p - x3) - Q(p) - (alfa_2 - 1)(p - a)³, identicamente nulo: no
    colapso o numerador de dois cortes reproduz o de um corte a menos
    de (alfa_2 - 1)(p - a)³.
    """
    p = np.asarray(p, dtype=float)
    u = p - a
    h = _collapsed_rsqrt_jet(support, a, x3, 2)
    P2 = 4.0 * A * (h[0] + h[1] * u + h[2] * u * u)
    g0, g1, g2, g3 = gamma_coeffs(support, a, A)
    Q = ((g3 * p + g2) * p + g1) * p + g0
    alpha2 = 4.0 * A * h[2]
    return P2 * (p - x3) - Q - (alpha2 - 1.0) * u ** 3


def shrink_residual(f1: float, f2: float, a: float, t: float) -> float:
    """
    Condição extra do colapso (alfa_2 = 1 com A eliminado pelo traço
    nulo), escrita como LHS - RHS; t = 1/(a - x3) < 0.
    """
    lhs = t * (
        0.5 * a * a * f1
        - 0.75 * a * f1 ** 2
        + a * f2
        + 4.0 * a
        + 0.3125 * f1 ** 3
        - 0.75 * f1 * f2
        - f1
    )
    rhs = -0.5 * a * f1 + 0.375 * f1 ** 2 - f1 / (2.0 * t) - 0.5 * f2 + 1.0 / t ** 2 - 2.0
    return lhs - rhs


def collapse_gaps(f1: float, f2: float, a: float) -> List[float]:
    """Gaps x3 - a > 0 que anulam shrink_residual (raízes reais t < 0 de uma cúbica)."""
    B = 0.5 * a * a * f1 - 0.75 * a * f1 ** 2 + a * f2 + 4.0 * a + 0.3125 * f1 ** 3 - 0.75 * f1 * f2 - f1
    C = -0.5 * a * f1 + 0.375 * f1 ** 2 - 0.5 * f2 - 2.0
    roots = np.roots([B, -C, 0.5 * f1, -1.0])
    gaps = [-1.0 / r.real for r in roots if abs(r.imag) < 1e-12 and r.real < 0.0]
    return sorted(gaps)


@dataclass
class ShrinkScanReport:
    table: pd.DataFrame
    n_admissible: int
    n_failures: int
    collapse_roots: pd.DataFrame


def shrink_condition_scan(
    a_grid: Iterable[float],
    gap_grid: Iterable[float],
    tol: float = 1e-8,
) -> ShrinkScanReport:
    """
    Para cada a toma o ponto sem traço do ramo de um corte e avalia a
    condição de colapso em cada gap = x3 - a. Admissível só se a
    condição se anular com x3 > a > y2 > y1 e A > 0.
    """
    gaps = [float(g) for g in gap_grid]
    rows = []
    root_rows = []
    failures = 0
    for a in a_grid:
        a = float(a)
        try:
            A_c, sol = critical_line(a)
            status = "ok"
        except SkpoleError as exc:
            failures += 1
            status = "no-solution" if exc.details.get("no_solution") else type(exc).__name__
            for gap in gaps:
                rows.append({"a": a, "gap": gap, "f1": np.nan, "f2": np.nan, "A": np.nan,
                             "shrink_residual": np.nan, "admissible": False, "status": status})
            continue
        f1, f2 = sol.support.f1, sol.support.f2
        ordered = sol.support.y1 < sol.support.y2 < a
        for gap in gaps:
            t = -1.0 / gap
            res = shrink_residual(f1, f2, a, t)
            admissible = bool(abs(res) < tol and ordered and A_c > 0.0)
            rows.append({"a": a, "gap": gap, "f1": f1, "f2": f2, "A": A_c,
                         "shrink_residual": res, "admissible": admissible, "status": status})
        for gap in collapse_gaps(f1, f2, a):
            root_rows.append({"a": a, "gap": gap, "A": A_c,
                              "admissible": bool(ordered and A_c > 0.0)})

    table = pd.DataFrame(rows)
    roots = pd.DataFrame(root_rows, columns=["a", "gap", "A", "admissible"])
    n_adm = int(table["admissible"].sum()) + int(roots["admissible"].sum()) if len(table) else 0
    logger.info("varrimento de colapso: %d pontos, %d admissíveis, %d falhas", len(table), n_adm, failures)
    return ShrinkScanReport(table=table, n_admissible=n_adm, n_failures=failures, collapse_roots=roots)
