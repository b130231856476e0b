# core_model.py
#
# Potencial singular V_m(x) = x²/2 + 2A/(x-a)^m, álgebra dos extremos
# (funções simétricas elementares) e os polinómios F (dois cortes) e
# G (um corte) partilhados por todos os solvers.

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from errors import InvalidSupportError, PoleEvaluationError

POLE_GUARD = 1e-300


# ---------------------------------------------------------
# 1. Parâmetros do potencial
# ---------------------------------------------------------
@dataclass(frozen=True)
class PotentialParams:
    """Triplo (a, A, m). O sinal de A não é validado aqui."""

    a: float
    A: float
    m: int = 2

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"ordem do polo inválida: m={self.m}")
        if not math.isfinite(self.a) or self.a < 0:
            raise ValueError(f"posição do polo inválida: a={self.a}")
        if not math.isfinite(self.A):
            raise ValueError(f"intensidade do polo inválida: A={self.A}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "A", float(self.A))

    def with_A(self, A: float) -> "PotentialParams":
        return PotentialParams(a=self.a, A=A, m=self.m)


def _check_pole(params: PotentialParams, x: float) -> float:
    d = x - params.a
    if d == 0.0 or abs(d) < POLE_GUARD:
        raise PoleEvaluationError(
            "avaliação em cima do polo x = a",
            {"a": params.a, "x": float(x)},
        )
    return d


def eval_potential(params: PotentialParams, x: float) -> float:
    d = _check_pole(params, x)
    return 0.5 * x * x + 2.0 * params.A / d ** params.m


def eval_potential_derivative(params: PotentialParams, x: float) -> float:
    d = _check_pole(params, x)
    return x - 2.0 * params.m * params.A / d ** (params.m + 1)


# ---------------------------------------------------------
# 2. Funções simétricas elementares
# ---------------------------------------------------------
def elementary_symmetric(
    x1: float, x2: float, x3: float, x4: float
) -> Tuple[float, float, float, float]:
    e1 = x1 + x2 + x3 + x4
    e2 = x1 * x2 + x1 * x3 + x1 * x4 + x2 * x3 + x2 * x4 + x3 * x4
    e3 = x1 * x2 * x3 + x1 * x2 * x4 + x1 * x3 * x4 + x2 * x3 * x4
    e4 = x1 * x2 * x3 * x4
    return e1, e2, e3, e4


# ---------------------------------------------------------
# 3. Suportes
# ---------------------------------------------------------
@dataclass(frozen=True)
class TwoCutSupport:
    """Quatro extremos x1 < x2 < x3 < x4 e respetivos e1..e4."""

    x1: float
    x2: float
    x3: float
    x4: float
    e1: float = field(init=False)
    e2: float = field(init=False)
    e3: float = field(init=False)
    e4: float = field(init=False)

    def __post_init__(self):
        e = elementary_symmetric(self.x1, self.x2, self.x3, self.x4)
        for name, value in zip(("e1", "e2", "e3", "e4"), e):
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, x) -> "TwoCutSupport":
        x1, x2, x3, x4 = (float(v) for v in x)
        return cls(x1, x2, x3, x4)

    @property
    def endpoints(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4])

    @property
    def cuts(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return (self.x1, self.x2), (self.x3, self.x4)

    def is_ordered(self, a: float) -> bool:
        return self.x1 < self.x2 < a < self.x3 < self.x4

    def require_ordered(self, a: float) -> None:
        if not self.is_ordered(a):
            raise InvalidSupportError(
                "suporte fora de ordem: exige-se x1 < x2 < a < x3 < x4",
                {"a": a, "endpoints": self.endpoints.tolist()},
            )

    def contains(self, lam: float) -> bool:
        return (self.x1 <= lam <= self.x2) or (self.x3 <= lam <= self.x4)


@dataclass(frozen=True)
class OneCutSupport:
    """Um intervalo [y1, y2]; f1 = y1 + y2, f2 = y1·y2."""

    y1: float
    y2: float
    f1: float = field(init=False)
    f2: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "f1", self.y1 + self.y2)
        object.__setattr__(self, "f2", self.y1 * self.y2)

    @property
    def endpoints(self) -> np.ndarray:
        return np.array([self.y1, self.y2])

    @property
    def cuts(self) -> Tuple[Tuple[float, float]]:
        return ((self.y1, self.y2),)

    def require_ordered(self, a: float) -> None:
        if not (self.y1 < self.y2 < a):
            raise InvalidSupportError(
                "suporte de um corte inválido: exige-se y1 < y2 < a",
                {"a": a, "endpoints": self.endpoints.tolist()},
            )

    def contains(self, lam: float) -> bool:
        return self.y1 <= lam <= self.y2


# ---------------------------------------------------------
# 4. Polinómios F e G
# ---------------------------------------------------------
def eval_F(support: TwoCutSupport, p: float) -> Tuple[float, float, float, float]:
    """F(p) = p⁴ - e1 p³ + e2 p² - e3 p + e4 e as três primeiras derivadas."""
    e1, e2, e3, e4 = support.e1, support.e2, support.e3, support.e4
    F = (((p - e1) * p + e2) * p - e3) * p + e4
    dF = ((4.0 * p - 3.0 * e1) * p + 2.0 * e2) * p - e3
    d2F = (12.0 * p - 6.0 * e1) * p + 2.0 * e2
    d3F = 24.0 * p - 6.0 * e1
    return F, dF, d2F, d3F


def eval_G(support: OneCutSupport, p: float) -> Tuple[float, float, float]:
    """G(p) = p² - f1 p + f2, G' e G''."""
    return (p - support.f1) * p + support.f2, 2.0 * p - support.f1, 2.0


def F_taylor_at(support: TwoCutSupport, a: float) -> np.ndarray:
    """Coeficientes de F(a + u) em potências de u (ordens 0..4)."""
    F, dF, d2F, d3F = eval_F(support, a)
    return np.array([F, dF, d2F / 2.0, d3F / 6.0, 1.0])


def G_taylor_at(support: OneCutSupport, a: float) -> np.ndarray:
    G, dG, _ = eval_G(support, a)
    return np.array([G, dG, 1.0])


# ---------------------------------------------------------
# 5. Nós de Chebyshev de 2ª espécie
# ---------------------------------------------------------
def chebyshev_u_rule(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """theta_i, x_i = cos(theta_i) e pesos de int g(x) sqrt(1-x²) dx."""
    i = np.arange(1, n + 1)
    theta = i * np.pi / (n + 1)
    w = np.pi / (n + 1) * np.sin(theta) ** 2
    return theta, np.cos(theta), w
