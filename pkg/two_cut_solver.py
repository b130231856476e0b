# two_cut_solver.py
#
# Solução planar de dois cortes para V_m(x) = x²/2 + 2A/(x-a)^m:
# coeficientes alfa, sistema dos quatro extremos (m = 2 explícito e m
# geral), Newton com continuação em A e resolvente W0(p).
#
# Convenção de ramo: F(a)^{1/2} é a raiz positiva de F(a) > 0; a raiz
# complexa entre os cortes vale -F(a)^{1/2}. Com isso
#     P_m(p) = 2mA · sum_{k<=m} h_k (p-a)^k ,
# onde h_k são os coeficientes de Taylor de F(w)^{-1/2} em w = a.

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from core_model import (
    PotentialParams,
    TwoCutSupport,
    F_taylor_at,
    chebyshev_u_rule,
    eval_F,
)
from errors import (
    InfeasibleParametersError,
    InvalidSupportError,
    NoConvergenceError,
    OnCutError,
)
from newton_solver import damped_newton, geometric_path
from series_jet import SeriesJet

logger = logging.getLogger(__name__)

ON_CUT_TOL = 1e-12
NEAR_POLE_FRACTION = 0.1
POLE_SERIES_ORDER = 14


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-10
    max_iter: int = 200
    max_continuation_steps: int = 40
    A_seed: float = 1e-4
    fd_rel_step: float = 1e-7
    quad_nodes: int = 256
    collapse_ratio: float = 1e-8
    max_subdivisions: int = 6


# ---------------------------------------------------------
# 1. Jets de F^{-1/2} e coeficientes alfa
# ---------------------------------------------------------
def _valid_F_at_pole(support: TwoCutSupport, a: float) -> float:
    support.require_ordered(a)
    Fa = eval_F(support, a)[0]
    if not Fa > 0.0:
        raise InvalidSupportError(
            "F(a) <= 0: o polo não está entre os cortes",
            {"a": a, "F(a)": Fa},
        )
    return Fa


def rsqrt_jet(support: TwoCutSupport, a: float, order: int) -> SeriesJet:
    """Jet de F(w)^{-1/2} (raiz positiva) em torno de w = a."""
    _valid_F_at_pole(support, a)
    return SeriesJet(F_taylor_at(support, a), order=order).rsqrt()


def alpha_coeffs_m2(support: TwoCutSupport, a: float, A: float) -> Tuple[float, float, float]:
    """Formas fechadas de alfa_2, alfa_1, alfa_0 para o polo de ordem 2."""
    Fa = _valid_F_at_pole(support, a)
    _, dF, d2F, _ = eval_F(support, a)
    P = Fa ** 2.5
    al2 = -A * (2.0 * Fa * d2F - 3.0 * dF ** 2) / (2.0 * P)
    al1 = -A * (2.0 * Fa * dF - 2.0 * a * Fa * d2F + 3.0 * a * dF ** 2) / P
    al0 = A * (4.0 * Fa ** 2 + 2.0 * a * Fa * dF - a * a * Fa * d2F + 1.5 * a * a * dF ** 2) / P
    return al0, al1, al2


def alpha_coeffs_general(support: TwoCutSupport, params: PotentialParams) -> np.ndarray:
    """alfa_0..alfa_m a partir de P_m(p) = 2mA sum_k h_k (p-a)^k."""
    m, a = params.m, params.a
    h = rsqrt_jet(support, a, m).coefficients
    pref = 2.0 * m * params.A
    alpha = np.zeros(m + 1)
    for j in range(m + 1):
        alpha[j] = pref * sum(
            h[i] * math.comb(i, j) * (-a) ** (i - j) for i in range(j, m + 1)
        )
    return alpha


# ---------------------------------------------------------
# 2. Resíduos do sistema dos extremos
# ---------------------------------------------------------
def asymptotic_c(support: TwoCutSupport, a: float, m: int) -> Tuple[float, float, float]:
    """c1, c2, c3 da expansão de sqrt(F(p))/(p-a)^{m+1} para |p| grande."""
    e1, e2, e3 = support.e1, support.e2, support.e3
    c1 = (m + 1) * a - 0.5 * e1
    c2 = (
        -0.5 * (m + 1) * a * e1
        - e1 ** 2 / 8.0
        + 0.5 * e2
        + 0.5 * (m + 1) * (m + 2) * a ** 2
    )
    c3 = (
        8.0 * (m + 1) * (m + 2) * (m + 3) / 3.0 * a ** 3
        - ((2 * m + 3) ** 2 - 1) * a ** 2 * e1
        - (2 * m + 2) * a * e1 ** 2
        - e1 ** 3
        + 4.0 * e1 * e2
        - 8.0 * e3
        + 8.0 * (m + 1) * a * e2
    ) / 16.0
    return c1, c2, c3


def _residuals_m2(support: TwoCutSupport, a: float, A: float) -> np.ndarray:
    al0, al1, al2 = alpha_coeffs_m2(support, a, A)
    e1, e2, e3 = support.e1, support.e2, support.e3
    r1 = al2 - 1.0
    r2 = al1 - (0.5 * e1 - 3.0 * a)
    r3 = al0 - (3.0 * a * a - 2.0 - 1.5 * a * e1 + 0.375 * e1 ** 2 - 0.5 * e2)
    # ordem p^-2 com as três condições anteriores já substituídas
    r4 = (
        a ** 3
        - 6.0 * a
        - 1.5 * a * e2
        + 1.125 * a * e1 ** 2
        - 1.5 * a * a * e1
        + e1
        + 0.75 * e1 * e2
        - 0.3125 * e1 ** 3
        - 0.5 * e3
    )
    return np.array([r1, r2, r3, r4])


def _residuals_general(support: TwoCutSupport, params: PotentialParams) -> np.ndarray:
    m, a, A = params.m, params.a, params.A
    alpha = alpha_coeffs_general(support, params)

    def al(k: int) -> float:
        return float(alpha[k]) if k >= 0 else 0.0

    c1, c2, c3 = asymptotic_c(support, a, m)
    r1 = al(m) - 1.0
    r2 = al(m - 1) + al(m) * c1
    r3 = 1.0 + 0.5 * (al(m - 2) + al(m - 1) * c1 + al(m) * c2)
    r4 = al(m - 3) + al(m - 2) * c1 + al(m - 1) * c2 + al(m) * c3
    if m == 1:
        r4 += 2.0 * A
    return np.array([r1, r2, r3, r4])


def endpoint_residuals(support: TwoCutSupport, params: PotentialParams) -> np.ndarray:
    if params.m == 2:
        return _residuals_m2(support, params.a, params.A)
    return _residuals_general(support, params)


# ---------------------------------------------------------
# 3. Solução
# ---------------------------------------------------------
@dataclass(frozen=True)
class TwoCutSolution:
    params: PotentialParams
    support: TwoCutSupport
    alpha: np.ndarray
    residual_norm: float
    iterations: int = 0
    _h: np.ndarray = field(default=None, repr=False, compare=False)

    @classmethod
    def build(
        cls,
        params: PotentialParams,
        support: TwoCutSupport,
        iterations: int = 0,
    ) -> "TwoCutSolution":
        alpha = alpha_coeffs_general(support, params)
        res = endpoint_residuals(support, params)
        h = rsqrt_jet(support, params.a, params.m + POLE_SERIES_ORDER).coefficients
        return cls(
            params=params,
            support=support,
            alpha=alpha,
            residual_norm=float(np.max(np.abs(res))),
            iterations=iterations,
            _h=h,
        )

    @property
    def cuts(self):
        return self.support.cuts

    # ----- M_m e densidade -----
    def numerator(self, p):
        """P_m(p) = sum alfa_j p^j (aceita arrays e complexos)."""
        return np.polynomial.polynomial.polyval(p, self.alpha)

    def M(self, p):
        return self.numerator(p) / (p - self.params.a) ** (self.params.m + 1)

    def density(self, lam):
        lam = np.asarray(lam, dtype=float)
        s = self.support
        inside = ((lam >= s.x1) & (lam <= s.x2)) | ((lam >= s.x3) & (lam <= s.x4))
        F = (lam - s.x1) * (lam - s.x2) * (lam - s.x3) * (lam - s.x4)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.abs(self.M(lam)) * np.sqrt(np.abs(F)) / (2.0 * np.pi)
        out = np.where(inside, rho, 0.0)
        return float(out) if out.ndim == 0 else out

    def cut_factor(self, k: int, lam):
        """rho(lam) / sqrt((lam-lo)(hi-lam)) no corte k; suave até aos extremos."""
        s = self.support
        lam = np.asarray(lam, dtype=float)
        if k == 0:
            other = (lam - s.x3) * (lam - s.x4)
        else:
            other = (lam - s.x1) * (lam - s.x2)
        return np.abs(self.M(lam)) * np.sqrt(np.abs(other)) / (2.0 * np.pi)

    # ----- resolvente -----
    def _sqrtF(self, p: complex) -> complex:
        out = 1.0 + 0.0j
        for x in self.support.endpoints:
            out *= np.sqrt(complex(p) - x)
        return out

    def _near_pole_radius(self) -> float:
        s, a = self.support, self.params.a
        return NEAR_POLE_FRACTION * min(a - s.x2, s.x3 - a)

    def value_at_pole(self) -> float:
        """W0(a) = a/2 - m A F(a)^{1/2} h_{m+1}."""
        m, a, A = self.params.m, self.params.a, self.params.A
        Fa = eval_F(self.support, a)[0]
        return 0.5 * a - m * A * math.sqrt(Fa) * float(self._h[m + 1])

    def _resolvent_pole_series(self, u: complex) -> complex:
        # W0(a+u) = ½(a + u - 2mA s(u) sum_{k>m} h_k u^{k-m-1}),  s = F^{1/2}
        m, a, A = self.params.m, self.params.a, self.params.A
        order = self._h.size - 1
        s = SeriesJet(F_taylor_at(self.support, a), order=order).sqrt().coefficients
        tail = self._h[m + 1 :]
        prod = np.convolve(s, tail)[: tail.size]
        series = np.polynomial.polynomial.polyval(u, prod)
        return 0.5 * (a + u - 2.0 * m * A * series)

    def resolvent(self, p: complex) -> complex:
        a, m, A = self.params.a, self.params.m, self.params.A
        p = complex(p)
        if abs(p.imag) < ON_CUT_TOL:
            x = p.real
            s = self.support
            if (s.x1 - ON_CUT_TOL <= x <= s.x2 + ON_CUT_TOL) or (
                s.x3 - ON_CUT_TOL <= x <= s.x4 + ON_CUT_TOL
            ):
                raise OnCutError("p está sobre o suporte", {"p": [p.real, p.imag]})
        u = p - a
        if u == 0:
            return complex(self.value_at_pole())
        if abs(u) < self._near_pole_radius():
            return self._resolvent_pole_series(u)
        Vp = p - 2.0 * m * A / u ** (m + 1)
        return 0.5 * (Vp - self.M(p) * self._sqrtF(p))

    # ----- serialização -----
    def to_dict(self) -> Dict:
        return {
            "a": self.params.a,
            "A": self.params.A,
            "m": self.params.m,
            "endpoints": [float(v) for v in self.support.endpoints],
            "alpha": [float(v) for v in self.alpha],
            "residual_norm": float(self.residual_norm),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict) -> "TwoCutSolution":
        params = PotentialParams(a=data["a"], A=data["A"], m=data["m"])
        return cls.build(params, TwoCutSupport.from_array(data["endpoints"]))


def resolvent(solution, p: complex) -> complex:
    """W0(p) de uma solução de dois cortes ou de um corte (inclui o semicírculo)."""
    return solution.resolvent(p)


# ---------------------------------------------------------
# 4. Sementes e continuação
# ---------------------------------------------------------
def _semicircle_moment(a: float, k: int, nodes: int = 400) -> float:
    """J_k = int rho_sc(lam)/(a-lam)^k, a > 2, por Gauss-Chebyshev de 2ª espécie."""
    _, x, w = chebyshev_u_rule(nodes)
    return float(2.0 / np.pi * np.sum(w / (a - 2.0 * x) ** k))


def _evaporation_gap(a: float, A0: float, m: int) -> float:
    """Distância ao polo onde a força do semicírculo equilibra a do polo."""
    gap0 = (2.0 * m * A0 / math.sqrt(a * a - 4.0)) ** (1.0 / (m + 1))

    def force(x: float) -> float:
        return math.sqrt(x * x - 4.0) - 2.0 * m * A0 / (x - a) ** (m + 1)

    return brentq(force, a + 1e-3 * gap0, a + 1.5 * gap0, xtol=1e-15, rtol=1e-14) - a


def seed_supports(a: float, A0: float, m: int) -> List[TwoCutSupport]:
    """
    Geometrias iniciais para A0 pequeno. a = 2 separa os dois mecanismos:
    para a > 2 um corte direito minúsculo junto ao polo; para a < 2 um
    buraco de meia-largura ~ A0^{1/3} à volta do polo no semicírculo.
    """
    delta = A0 ** (1.0 / 3.0)

    def evaporating() -> List[TwoCutSupport]:
        if a <= 2.0:
            return []
        out = []
        eps = 1e-3
        if a > 2.0 + 2 * eps:
            out.append(TwoCutSupport(-2.0 + eps, 2.0 - eps, a + delta, a + 2.0 * delta))
        gap = _evaporation_gap(a, A0, m)
        xc = a + gap
        # massa do corte direito fixada pelo traço nulo, largura pela curvatura local
        mass = 2.0 * m * A0 * _semicircle_moment(a, m + 1) / a
        curvature = xc / math.sqrt(xc * xc - 4.0) + 2.0 * m * (m + 1) * A0 / gap ** (m + 2)
        half = 2.0 * math.sqrt(mass / curvature)
        x2 = min(2.0, a - 0.5 * gap)
        for scale in (1.0, 0.3, 3.0):
            hw = min(half * scale, 0.45 * gap)
            out.append(TwoCutSupport(-2.0, x2, a + gap - hw, a + gap + hw))
        return out

    def merging() -> List[TwoCutSupport]:
        out = [TwoCutSupport(min(-2.0, a - 2.0 * delta), a - delta, a + delta, max(2.0, a + 2.0 * delta))]
        rho_ratio = 2.0 / math.sqrt(max(4.0 - a * a, 0.04))
        for scale in (1.0, 0.6, 1.6):
            d = delta * scale * rho_ratio ** (1.0 / 3.0)
            out.append(TwoCutSupport(min(-2.0, a - 2.0 * d), a - d, a + d, max(2.0, a + 2.0 * d)))
        return out

    if a > 2.0:
        seeds = evaporating() + merging()
    else:
        seeds = merging()
    return [s for s in seeds if s.is_ordered(a)]


def rescale_right_cut(x: np.ndarray, a: float, A_from: float, A_to: float, m: int) -> Optional[np.ndarray]:
    """
    Estimativa para A_to a partir da solução em A_from quando o corte
    direito é estreito: distância ao polo ~ A^{1/(m+1)}, meia-largura
    ~ A^{(m+2)/(2(m+1))}. None fora desse regime.
    """
    x1, x2, x3, x4 = (float(v) for v in x)
    center, half = 0.5 * (x3 + x4), 0.5 * (x4 - x3)
    gap = center - a
    if a <= 2.0 or not (0.0 < half < 0.25 * gap):
        return None
    ratio = A_to / A_from
    gap_new = gap * ratio ** (1.0 / (m + 1))
    half_new = min(half * ratio ** ((m + 2) / (2.0 * (m + 1))), 0.45 * gap_new)
    x2_new = min(x2, a - 0.5 * gap_new)
    out = np.array([x1, x2_new, a + gap_new - half_new, a + gap_new + half_new])
    if not (out[0] < out[1] < a < out[2] < out[3]):
        return None
    return out


def _solve_at(
    params: PotentialParams,
    x0: np.ndarray,
    settings: SolverSettings,
) -> Tuple[np.ndarray, int]:
    a = params.a

    def fun(x: np.ndarray) -> np.ndarray:
        return endpoint_residuals(TwoCutSupport.from_array(x), params)

    def feasible(x: np.ndarray) -> bool:
        return bool(x[0] < x[1] < a < x[2] < x[3])

    def barrier(x: np.ndarray) -> float:
        gaps = np.array([x[1] - x[0], a - x[1], x[2] - a, x[3] - x[2]])
        return float(-np.sum(np.log(gaps)))

    result = damped_newton(
        fun,
        x0,
        tol=settings.tol,
        max_iter=settings.max_iter,
        rel_step=settings.fd_rel_step,
        feasible=feasible,
        barrier=barrier,
    )
    return result.x, result.iterations


def _continue(
    params: PotentialParams,
    x_start: np.ndarray,
    A_from: float,
    A_to: float,
    settings: SolverSettings,
    depth: int = 0,
) -> Tuple[np.ndarray, int]:
    predicted = rescale_right_cut(x_start, params.a, A_from, A_to, params.m)
    if predicted is not None:
        try:
            return _solve_at(params.with_A(A_to), predicted, settings)
        except NoConvergenceError:
            logger.debug("preditor de escala falhou em A=%.4g", A_to)
    try:
        return _solve_at(params.with_A(A_to), x_start, settings)
    except NoConvergenceError:
        if depth >= settings.max_subdivisions:
            raise
    A_mid = math.sqrt(A_from * A_to)
    logger.debug("subdivisão da continuação: A %.4g -> %.4g -> %.4g", A_from, A_mid, A_to)
    x_mid, it1 = _continue(params, x_start, A_from, A_mid, settings, depth + 1)
    x_end, it2 = _continue(params, x_mid, A_mid, A_to, settings, depth + 1)
    return x_end, it1 + it2


def solve_endpoints(
    params: PotentialParams,
    initial_guess: Optional[TwoCutSupport] = None,
    settings: Optional[SolverSettings] = None,
) -> TwoCutSolution:
    """
    Extremos x1 < x2 < a < x3 < x4 que anulam os quatro resíduos.

    Com A <= 0 não existe solução de dois cortes (alfa_m <= 0).
    Sem estimativa inicial: sementes em A0 = max(A, A_seed) e continuação
    geométrica até A; se falhar, o mesmo a partir de min(A, A_seed).
    """
    settings = settings or SolverSettings()
    a, A = params.a, params.A
    if not A > 0.0:
        raise InfeasibleParametersError(
            "a solução de dois cortes é inconsistente para A <= 0",
            {"a": a, "A": A, "m": params.m},
        )

    best = (float("inf"), None)

    if initial_guess is not None and initial_guess.is_ordered(a):
        try:
            x, it = _solve_at(params, initial_guess.endpoints, settings)
            return _finish(params, x, it, settings)
        except NoConvergenceError as exc:
            logger.warning("estimativa inicial não convergiu (|r|=%.3e); a usar continuação", exc.best_residual)
            best = min(best, (exc.best_residual, exc.best_point), key=lambda t: t[0])

    # primeiro max(A, A_seed); se falhar, o outro extremo
    anchors = [max(A, settings.A_seed)]
    if min(A, settings.A_seed) != anchors[0]:
        anchors.append(min(A, settings.A_seed))
    for A0 in anchors:
        path = geometric_path(A0, A, settings.max_continuation_steps)
        for n_seed, seed in enumerate(seed_supports(a, A0, params.m)):
            try:
                x, iterations = _solve_at(params.with_A(A0), seed.endpoints, settings)
                A_prev = A0
                for A_k in path:
                    if A_k == A_prev:
                        continue
                    x, it = _continue(params, x, A_prev, A_k, settings)
                    iterations += it
                    A_prev = A_k
                if n_seed > 0 or A0 != anchors[0]:
                    logger.warning("convergiu com a semente alternativa #%d em A0=%.3g", n_seed, A0)
                return _finish(params, x, iterations, settings)
            except NoConvergenceError as exc:
                logger.debug("semente #%d em A0=%.3g falhou (|r|=%.3e)", n_seed, A0, exc.best_residual)
                if exc.best_residual < best[0]:
                    best = (exc.best_residual, exc.best_point)

    raise NoConvergenceError(
        "sistema dos extremos não convergiu",
        best_residual=best[0],
        best_point=best[1],
        details={"a": a, "A": A, "m": params.m},
    )


def _finish(
    params: PotentialParams,
    x: np.ndarray,
    iterations: int,
    settings: SolverSettings,
) -> TwoCutSolution:
    support = TwoCutSupport.from_array(x)
    if (support.x4 - support.x3) < settings.collapse_ratio * (support.x2 - support.x1):
        logger.warning("colapso do corte direito detetado (x4 - x3 = %.3e)", support.x4 - support.x3)
        raise NoConvergenceError(
            "colapso do corte direito durante a continuação",
            best_residual=float(np.max(np.abs(endpoint_residuals(support, params)))),
            best_point=x,
            details={"diagnostic": "cut-collapse"},
        )
    solution = TwoCutSolution.build(params, support, iterations)
    logger.info(
        "dois cortes: a=%.6g A=%.6g m=%d extremos=%s |r|=%.2e",
        params.a,
        params.A,
        params.m,
        np.array2string(support.endpoints, precision=8),
        solution.residual_norm,
    )
    return solution


def solve_many(
    param_list: Sequence[PotentialParams],
    settings: Optional[SolverSettings] = None,
) -> List[TwoCutSolution]:
    """Resolve em sequência reaproveitando a solução anterior como estimativa."""
    out: List[TwoCutSolution] = []
    guess: Optional[TwoCutSupport] = None
    for params in param_list:
        sol = solve_endpoints(params, initial_guess=guess, settings=settings)
        out.append(sol)
        guess = sol.support
    return out
