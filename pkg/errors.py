# errors.py
#
# Hierarquia de exceções do skpole. Cada classe tem um código de saída
# usado pela linha de comandos e um dicionário "details" serializável.

from __future__ import annotations

from typing import Any, Dict, Optional


class SkpoleError(Exception):
    """Erro base. `details` vai tal e qual para o error.json da CLI."""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class PoleEvaluationError(SkpoleError):
    exit_code = 4


class InvalidSupportError(SkpoleError):
    exit_code = 3


class InfeasibleParametersError(SkpoleError):
    exit_code = 2


class NoConvergenceError(SkpoleError):
    """Solver parou sem atingir a tolerância; guarda o melhor ponto."""

    exit_code = 3

    def __init__(
        self,
        message: str,
        best_residual: float = float("nan"),
        best_point: Any = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        merged = dict(details or {})
        merged["best_residual"] = float(best_residual)
        if best_point is not None:
            merged["best_point"] = [float(v) for v in best_point]
        super().__init__(message, merged)
        self.best_residual = float(best_residual)
        self.best_point = best_point


class OnCutError(SkpoleError):
    # ponto de avaliação inválido: mesmo código dos erros de entrada
    exit_code = 4


class CoincidentParticlesError(SkpoleError):
    exit_code = 4


class ConfigError(SkpoleError):
    exit_code = 4
