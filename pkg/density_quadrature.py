# density_quadrature.py
#
# Densidade rho*(lam), quadratura por corte com a singularidade de raiz
# quadrada absorvida (Gauss-Chebyshev de 2ª espécie), restrições
# (normalização, traço, susceptibilidade), acção e função taxa.
#
# Qualquer solução serve desde que exponha `cuts`, `cut_factor(k, lam)`,
# `density(lam)` e `params`: TwoCutSolution, OneCutSolution (inclui o
# semicírculo) e SymmetricSolution.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from errors import InfeasibleParametersError, NoConvergenceError
from two_cut_solver import SolverSettings, rescale_right_cut, solve_endpoints
from core_model import PotentialParams, TwoCutSupport, chebyshev_u_rule

logger = logging.getLogger(__name__)

DEFAULT_NODES = 256
SCAN_PER_DECADE = 4


# ---------------------------------------------------------
# 1. Quadratura por corte
# ---------------------------------------------------------
class CutQuadrature:
    """
    Regra de quadratura de int f(lam) rho(lam) dlam sobre cada corte.

    Em cada corte lam = mid + half·x; rho = s(lam)·half·sqrt(1-x²), com
    s suave, por isso os pesos finais são w_i·half²·s(lam_i).
    """

    def __init__(self, solution, nodes: int = DEFAULT_NODES):
        self.solution = solution
        self.nodes = int(nodes)
        theta, x, w = chebyshev_u_rule(self.nodes)
        self.theta = theta
        self.blocks: List[Dict[str, np.ndarray]] = []
        for k, (lo, hi) in enumerate(solution.cuts):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            lam = mid + half * x
            q = half * half * np.asarray(solution.cut_factor(k, lam), dtype=float)
            self.blocks.append(
                {"lam": lam, "weights": w * q, "q": q, "w": w, "half": half}
            )

    def integrate(self, f: Callable) -> float:
        return sum(float(np.sum(_apply(f, b["lam"]) * b["weights"])) for b in self.blocks)

    def integrate_cut(self, k: int, f: Callable) -> float:
        b = self.blocks[k]
        return float(np.sum(_apply(f, b["lam"]) * b["weights"]))

    def log_energy(self) -> float:
        """Integral dupla de rho(lam) rho(lam') ln|lam - lam'|."""
        total = 0.0
        n = self.nodes
        k = np.arange(1, n + 1)
        Tk = np.cos(np.outer(k, self.theta))
        for b in self.blocks:
            # ln|x-y| = -ln 2 - 2 sum_k T_k(x) T_k(y)/k
            wq = b["w"] * b["q"]
            Q0 = float(np.sum(wq))
            Qk = Tk @ wq
            same = -math.log(2.0) * Q0 ** 2 - 2.0 * float(np.sum(Qk ** 2 / k))
            total += math.log(b["half"]) * Q0 ** 2 + same
        for i in range(len(self.blocks)):
            for j in range(i + 1, len(self.blocks)):
                bi, bj = self.blocks[i], self.blocks[j]
                diff = np.abs(bi["lam"][:, None] - bj["lam"][None, :])
                total += 2.0 * float(bi["weights"] @ np.log(diff) @ bj["weights"])
        return total


def _apply(f: Callable, lam: np.ndarray) -> np.ndarray:
    # f pode ser vetorizada ou escalar
    try:
        out = np.asarray(f(lam))
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != lam.shape:
        out = np.array([f(float(v)) for v in lam])
    return out


# ---------------------------------------------------------
# 2. Densidade e integrais
# ---------------------------------------------------------
def density_eval(solution, lam: float) -> float:
    return float(solution.density(lam))


def cut_integral(solution, f: Callable, nodes: int = DEFAULT_NODES) -> float:
    return CutQuadrature(solution, nodes).integrate(f)


def stieltjes(solution, p: complex, nodes: int = DEFAULT_NODES) -> complex:
    """int rho(lam)/(p - lam) dlam."""
    quad = CutQuadrature(solution, nodes)
    return complex(sum(np.sum(b["weights"] / (p - b["lam"])) for b in quad.blocks))


def moment_about_pole(solution, power: int, nodes: int = DEFAULT_NODES) -> float:
    """int rho(lam)/(lam - a)^power dlam."""
    a = solution.params.a
    return cut_integral(solution, lambda lam: 1.0 / (lam - a) ** power, nodes)


def susceptibility_of_solution(solution, nodes: int = DEFAULT_NODES) -> float:
    """chi = int rho(lam)/(a - lam)² dlam."""
    a = solution.params.a
    return cut_integral(solution, lambda lam: 1.0 / (a - lam) ** 2, nodes)


@dataclass(frozen=True)
class ConstraintReport:
    norm: float
    trace: float
    susceptibility: float
    min_density: float
    min_location: float
    left_mass: float
    right_mass: float

    def as_row(self) -> Dict[str, float]:
        return {
            "norm": self.norm,
            "trace": self.trace,
            "chi": self.susceptibility,
            "min_density": self.min_density,
            "min_location": self.min_location,
            "left_mass": self.left_mass,
            "right_mass": self.right_mass,
        }


def density_minimum(solution, grid: int = 2001) -> Tuple[float, float]:
    """Mínimo de rho no interior do suporte (grelha + refinamento)."""
    best_val, best_loc = math.inf, math.nan
    for lo, hi in solution.cuts:
        t = np.linspace(0.0, np.pi, grid)[1:-1]
        lam = 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(t)
        vals = np.asarray(solution.density(lam), dtype=float)
        i = int(np.argmin(vals))
        left, right = lam[max(i - 1, 0)], lam[min(i + 1, lam.size - 1)]
        val, loc = float(vals[i]), float(lam[i])
        if right > left:
            res = minimize_scalar(
                lambda v: float(solution.density(v)),
                bounds=(left, right),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if res.success and res.fun < val:
                val, loc = float(res.fun), float(res.x)
        if val < best_val:
            best_val, best_loc = val, loc
    return best_val, best_loc


def constraint_report(solution, nodes: int = DEFAULT_NODES) -> ConstraintReport:
    quad = CutQuadrature(solution, nodes)
    a = solution.params.a
    norm = quad.integrate(lambda lam: np.ones_like(lam))
    trace = quad.integrate(lambda lam: lam)
    chi = quad.integrate(lambda lam: 1.0 / (a - lam) ** 2)
    masses = [quad.integrate_cut(k, lambda lam: np.ones_like(lam)) for k in range(len(quad.blocks))]
    left = masses[0]
    right = masses[1] if len(masses) > 1 else 0.0
    mn, loc = density_minimum(solution)
    return ConstraintReport(norm, trace, chi, mn, loc, left, right)


# ---------------------------------------------------------
# 3. Susceptibilidade média e mapa a(beta)
# ---------------------------------------------------------
def chi0(a: float) -> float:
    """½(a/sqrt(a²-4) - 1)·Theta(a-2); em a = 2 devolve +inf (divergência)."""
    if a < 0:
        raise InfeasibleParametersError("chi0 exige a >= 0", {"a": a})
    if a == 2.0:
        return math.inf
    if a < 2.0:
        return 0.0
    return 0.5 * (a / math.sqrt(a * a - 4.0) - 1.0)


def sk_a_of_beta(beta: float) -> float:
    if not beta > 0:
        raise InfeasibleParametersError("beta tem de ser positivo", {"beta": beta})
    return beta + 1.0 / beta


# ---------------------------------------------------------
# 4. Acção e função taxa
# ---------------------------------------------------------
def action(solution, chi_target: float, nodes: int = DEFAULT_NODES) -> float:
    """
    S = ¼ int lam² rho - ½ int int rho rho ln|lam-lam'| + A(chi_m - chi_target)

    com chi_m = int rho/(lam-a)^m (para m = 2 é a susceptibilidade).
    Os termos dos multiplicadores de normalização e traço anulam-se numa
    solução que cumpre as restrições.
    """
    quad = CutQuadrature(solution, nodes)
    params = solution.params
    second = quad.integrate(lambda lam: lam * lam)
    S = 0.25 * second - 0.5 * quad.log_energy()
    if params.A != 0.0:
        a, m = params.a, params.m
        chi_m = quad.integrate(lambda lam: 1.0 / (lam - a) ** m)
        S += params.A * (chi_m - chi_target)
    return S


def _semicircle(a: float, m: int):
    from one_cut_analysis import OneCutSolution

    return OneCutSolution.semicircle(a, m)


class _ChiMap:
    """A -> chi(A; a) com arranque a quente a partir da solução mais próxima."""

    def __init__(self, a: float, m: int, settings: SolverSettings, nodes: int):
        self.a, self.m = a, m
        self.settings = settings
        self.nodes = nodes
        self.cache: Dict[float, object] = {}

    def solution(self, A: float):
        if A in self.cache:
            return self.cache[A]
        guess = None
        if self.cache:
            nearest = min(self.cache, key=lambda k: abs(math.log(k / A)))
            support = self.cache[nearest].support
            scaled = rescale_right_cut(support.endpoints, self.a, nearest, A, self.m)
            guess = TwoCutSupport.from_array(scaled) if scaled is not None else support
        sol = solve_endpoints(PotentialParams(self.a, A, self.m), guess, self.settings)
        self.cache[A] = sol
        return sol

    def chi(self, A: float) -> float:
        sol = self.solution(A)
        return moment_about_pole(sol, self.m, self.nodes)


@dataclass(frozen=True)
class RatePoint:
    """psi(chi; a) com o multiplicador A* e o relatório da solução usada."""

    a: float
    chi: float
    A: float
    psi: float
    report: Optional[ConstraintReport] = None

    def as_row(self) -> Dict[str, float]:
        row = {"a": self.a, "A": self.A, "chi": self.chi, "psi": self.psi,
               "norm": math.nan, "trace": math.nan, "min_density": math.nan}
        if self.report is not None:
            row.update(norm=self.report.norm, trace=self.report.trace, min_density=self.report.min_density)
        return row


def _chi_reference(a: float, m: int, nodes: int) -> float:
    if m == 2:
        return chi0(a)
    return moment_about_pole(_semicircle(a, m), m, nodes) if a > 2.0 else 0.0


def rate_point(
    a: float,
    chi: float,
    m: int = 2,
    settings: Optional[SolverSettings] = None,
    A_lo: float = 1e-8,
    A_max: float = 1e6,
) -> RatePoint:
    """
    psi(chi; a) = S[rho*(A*)] - S[semicírculo], com A* tal que
    chi(A*; a) = chi no ramo em que chi cresce a partir de chi0.

    A grelha geométrica em A (SCAN_PER_DECADE pontos por década) só
    aceita o intervalo antes do máximo de chi(A). Entre A = 0 e o
    primeiro ponto resolvido usam-se as leis de escala do corte pequeno:
    chi - chi0 ~ A^{1/(m+1)} e psi ~ A.
    """
    settings = settings or SolverSettings()
    nodes = settings.quad_nodes
    if not chi > 0:
        raise InfeasibleParametersError("chi tem de ser positivo", {"chi": chi})
    reference = _chi_reference(a, m, nodes)
    if not math.isfinite(reference):
        raise InfeasibleParametersError("chi0 diverge em a = 2", {"a": a})
    if chi < reference:
        raise InfeasibleParametersError(
            "chi abaixo de chi0: exigiria A < 0, onde não há solução de dois cortes",
            {"a": a, "chi": chi, "chi0": reference},
        )

    cmap = _ChiMap(a, m, settings, nodes)
    semicircle = _semicircle(a, m)
    n_grid = int(round(SCAN_PER_DECADE * math.log10(A_max / A_lo))) + 1
    prev_A, prev_chi = 0.0, reference
    bracket: Optional[Tuple[float, float]] = None
    for A_k in np.geomspace(A_lo, A_max, n_grid):
        try:
            chi_k = cmap.chi(float(A_k))
        except NoConvergenceError as exc:
            logger.debug("chi(A=%.3g) sem convergência (|r|=%.2e)", A_k, exc.best_residual)
            continue
        if chi_k >= chi:
            bracket = (prev_A, float(A_k))
            break
        if prev_A > 0.0 and chi_k < prev_chi:
            raise InfeasibleParametersError(
                "chi acima do máximo do ramo de dois cortes",
                {"a": a, "chi": chi, "chi_max": prev_chi, "A_at_max": prev_A},
            )
        prev_A, prev_chi = float(A_k), chi_k
    if bracket is None:
        raise InfeasibleParametersError(
            "chi fora do alcance do multiplicador A",
            {"a": a, "chi": chi, "A_max": A_max},
        )

    lo, hi = bracket
    if lo == 0.0:
        # entre o semicírculo e o primeiro ponto resolvido
        sol_hi = cmap.solution(hi)
        chi_hi = cmap.chi(hi)
        t = (chi - reference) / (chi_hi - reference) if chi_hi > reference else 0.0
        psi_hi = action(sol_hi, chi_hi, nodes) - action(semicircle, chi_hi, nodes)
        A_star = hi * t ** (m + 1)
        psi = psi_hi * t ** (m + 1)
        report = None
    else:
        log_A = brentq(
            lambda s: cmap.chi(math.exp(s)) - chi,
            math.log(lo),
            math.log(hi),
            xtol=1e-13,
            rtol=1e-13,
        )
        A_star = math.exp(log_A)
        sol = cmap.solution(A_star)
        psi = action(sol, chi, nodes) - action(semicircle, chi, nodes)
        report = constraint_report(sol, nodes)
    logger.info("psi(chi=%.6g; a=%.6g) = %.10g com A*=%.6g", chi, a, psi, A_star)
    return RatePoint(a=a, chi=chi, A=A_star, psi=psi, report=report)


def rate_function(
    a: float,
    chi: float,
    m: int = 2,
    settings: Optional[SolverSettings] = None,
    A_lo: float = 1e-8,
    A_max: float = 1e6,
) -> float:
    return rate_point(a, chi, m, settings, A_lo, A_max).psi
