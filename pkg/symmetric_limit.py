# symmetric_limit.py
#
# Caso simétrico a = 0, m = 2 resolvido em forma fechada (inversão de
# Tricomi): e1 = e3 = 0, 2A e2 + e4^{3/2} = 0 e e4 = e2 + e2²/4.
# Serve de oráculo independente para o solver de dois cortes.

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy.optimize import brentq

from core_model import PotentialParams, TwoCutSupport
from errors import InfeasibleParametersError, NoConvergenceError

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-14
ROOT_MAXITER = 200


@dataclass(frozen=True)
class SymmetricSolution:
    A: float
    s: float
    x3: float
    x4: float

    @property
    def e2(self) -> float:
        return -(self.x3 ** 2 + self.x4 ** 2)

    @property
    def e4(self) -> float:
        return (self.x3 * self.x4) ** 2

    @property
    def params(self) -> PotentialParams:
        return PotentialParams(a=0.0, A=self.A, m=2)

    @property
    def support(self) -> TwoCutSupport:
        return TwoCutSupport(-self.x4, -self.x3, self.x3, self.x4)

    @property
    def cuts(self):
        return (-self.x4, -self.x3), (self.x3, self.x4)

    def density(self, lam):
        return density_symmetric(self, lam)

    def cut_factor(self, k: int, lam):
        # rho = 2(lam²(x3²+x4²) + 2x3²x4²)/(pi|lam|³(x3²-x4²)²) · sqrt((lam²-x3²)(x4²-lam²))
        lam = np.asarray(lam, dtype=float)
        t3, t4 = self.x3 ** 2, self.x4 ** 2
        pref = 2.0 * (lam ** 2 * (t3 + t4) + 2.0 * t3 * t4) / (
            np.pi * np.abs(lam) ** 3 * (t3 - t4) ** 2
        )
        # (lam²-x3²)(x4²-lam²) = |lam-x3||lam+x3||x4-lam||x4+lam|
        if k == 0:
            rest = np.abs(lam - self.x3) * np.abs(self.x4 - lam)
        else:
            rest = np.abs(lam + self.x3) * np.abs(lam + self.x4)
        return pref * np.sqrt(rest)

    def to_dict(self) -> Dict[str, float]:
        return {"A": self.A, "s": self.s, "x3": self.x3, "x4": self.x4}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _balance(s: float, A: float) -> float:
    """(s²/4 - s)^{3/2} - 2As; crescente em s >= 4 a partir de -8A."""
    return (0.25 * s * s - s) ** 1.5 - 2.0 * A * s


def solve_symmetric(A: float) -> SymmetricSolution:
    if not A > 0:
        raise InfeasibleParametersError(
            "extremos reais só existem para A > 0",
            {"A": A},
        )
    # para s >= 8, s²/4 - s >= s²/8, logo o balanço é positivo quando s² > 45A
    hi = max(8.0, 7.0 * math.sqrt(A))
    try:
        s = brentq(_balance, 4.0, hi, args=(A,), xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    except (RuntimeError, ValueError) as exc:
        raise NoConvergenceError(f"não foi possível resolver s: {exc}", best_point=[hi]) from exc

    e4 = 0.25 * s * s - s
    disc = math.sqrt(max(s * s - 4.0 * e4, 0.0))
    t_small = 2.0 * e4 / (s + disc)
    t_large = 0.5 * (s + disc)
    sol = SymmetricSolution(A=A, s=s, x3=math.sqrt(t_small), x4=math.sqrt(t_large))
    logger.info("solução simétrica: A=%.6g s=%.15g x3=%.15g x4=%.15g", A, s, sol.x3, sol.x4)
    return sol


def density_symmetric(sol: SymmetricSolution, lam):
    lam = np.asarray(lam, dtype=float)
    x3, x4 = sol.x3, sol.x4
    mod = np.abs(lam)
    inside = (mod >= x3) & (mod <= x4)
    t3, t4 = x3 * x3, x4 * x4
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = 2.0 * (lam ** 2 * (t3 + t4) + 2.0 * t3 * t4) / (np.pi * mod ** 3 * (t3 - t4) ** 2)
        rad = np.sqrt(np.clip((lam ** 2 - t3) * (t4 - lam ** 2), 0.0, None))
        rho = pref * rad
    out = np.where(inside, rho, 0.0)
    return float(out) if out.ndim == 0 else out


def density_symmetric_polynomial_form(sol: SymmetricSolution, lam):
    """(1/2pi)(lam² - (8 + 2e2)/4)/|lam|³ · sqrt(-lam⁴ - e2 lam² - e4)."""
    lam = np.asarray(lam, dtype=float)
    e2, e4 = sol.e2, sol.e4
    mod = np.abs(lam)
    inside = (mod >= sol.x3) & (mod <= sol.x4)
    with np.errstate(divide="ignore", invalid="ignore"):
        rad = np.sqrt(np.clip(-lam ** 4 - e2 * lam ** 2 - e4, 0.0, None))
        rho = (lam ** 2 - (8.0 + 2.0 * e2) / 4.0) / (2.0 * np.pi * mod ** 3) * rad
    out = np.where(inside, rho, 0.0)
    return float(out) if out.ndim == 0 else out
