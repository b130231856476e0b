# series_jet.py
#
# Aritmética de séries de potências truncadas (jets) em torno de um
# ponto. Serve para obter as derivadas de ordem m em w = a sem
# diferenciação simbólica.

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

Number = Union[int, float]


class SeriesJet:
    """Série truncada c0 + c1 u + ... + c_n u^n (u = w - w0)."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[float], order: int | None = None):
        c = np.asarray(list(coefficients), dtype=float)
        if order is not None:
            out = np.zeros(order + 1)
            k = min(order + 1, c.size)
            out[:k] = c[:k]
            c = out
        if c.size == 0:
            raise ValueError("jet vazio")
        self.coefficients = c

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    @classmethod
    def constant(cls, value: float, order: int) -> "SeriesJet":
        return cls([value], order=order)

    @classmethod
    def variable(cls, order: int) -> "SeriesJet":
        """O próprio u = w - w0."""
        return cls([0.0, 1.0], order=order)

    def __repr__(self) -> str:
        return f"SeriesJet({self.coefficients.tolist()})"

    def __getitem__(self, k: int) -> float:
        return float(self.coefficients[k]) if k <= self.order else 0.0

    def _coerce(self, other) -> "SeriesJet":
        if isinstance(other, SeriesJet):
            if other.order != self.order:
                raise ValueError("jets com ordens diferentes")
            return other
        return SeriesJet.constant(float(other), self.order)

    # --------------------------------------------------
    # Operações elementares
    # --------------------------------------------------
    def __add__(self, other) -> "SeriesJet":
        o = self._coerce(other)
        return SeriesJet(self.coefficients + o.coefficients)

    __radd__ = __add__

    def __neg__(self) -> "SeriesJet":
        return SeriesJet(-self.coefficients)

    def __sub__(self, other) -> "SeriesJet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SeriesJet":
        return self._coerce(other) - self

    def __mul__(self, other) -> "SeriesJet":
        if not isinstance(other, SeriesJet):
            return SeriesJet(self.coefficients * float(other))
        o = self._coerce(other)
        n = self.order + 1
        return SeriesJet(np.convolve(self.coefficients, o.coefficients)[:n])

    __rmul__ = __mul__

    def reciprocal(self) -> "SeriesJet":
        a = self.coefficients
        if a[0] == 0.0:
            raise ZeroDivisionError("termo constante nulo: 1/s não é analítica")
        b = np.zeros_like(a)
        b[0] = 1.0 / a[0]
        for n in range(1, a.size):
            b[n] = -np.dot(a[1 : n + 1], b[n - 1 :: -1][:n]) / a[0]
        return SeriesJet(b)

    def __truediv__(self, other) -> "SeriesJet":
        if not isinstance(other, SeriesJet):
            return SeriesJet(self.coefficients / float(other))
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other) -> "SeriesJet":
        return self._coerce(other) * self.reciprocal()

    def power(self, r: float) -> "SeriesJet":
        """s^r com o ramo positivo de c0^r (c0 > 0)."""
        a = self.coefficients
        if a[0] <= 0.0:
            raise ValueError("potência real exige termo constante positivo")
        b = np.zeros_like(a)
        b[0] = a[0] ** r
        for n in range(1, a.size):
            k = np.arange(1, n + 1)
            b[n] = np.sum((k * (r + 1.0) - n) * a[k] * b[n - k]) / (n * a[0])
        return SeriesJet(b)

    def sqrt(self) -> "SeriesJet":
        return self.power(0.5)

    def rsqrt(self) -> "SeriesJet":
        return self.power(-0.5)

    def taylor_coefficient(self, k: int) -> float:
        """Coeficiente de u^k = f^(k)(w0)/k!."""
        return self[k]

    def derivative_value(self, k: int) -> float:
        return self[k] * float(np.prod(np.arange(1, k + 1)))


def polynomial_jet(poly_coeffs_ascending: Iterable[float], order: int) -> SeriesJet:
    """Jet de um polinómio já expandido em potências de u."""
    return SeriesJet(poly_coeffs_ascending, order=order)
