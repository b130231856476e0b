# newton_solver.py
#
# Newton amortecido com Jacobiano por diferenças centrais e procura
# linear de Armijo. Usado pelos sistemas de extremos (dois cortes, um
# corte, linha crítica).

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from errors import NoConvergenceError, SkpoleError

logger = logging.getLogger(__name__)

ResidualFn = Callable[[np.ndarray], np.ndarray]
FeasibleFn = Callable[[np.ndarray], bool]
BarrierFn = Callable[[np.ndarray], float]


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: np.ndarray
    residual_norm: float
    iterations: int


def fd_jacobian(
    f: ResidualFn,
    x: np.ndarray,
    rel_step: float = 1e-7,
    feasible: Optional[FeasibleFn] = None,
    f0: Optional[np.ndarray] = None,
    max_shrink: int = 20,
) -> Optional[np.ndarray]:
    """
    J_ij = df_i/dx_j por diferenças centrais, passo rel_step·max(1,|x_j|).

    Cada ponto do estêncil passa pelo mesmo filtro que o resíduo. Se um
    lado sai do domínio usa-se a diferença unilateral; se os dois saem,
    o passo é reduzido a metade. Devolve None se não houver estêncil válido.
    """
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = _safe_eval(f, x)
        if f0 is None:
            return None

    def valid(xv: np.ndarray) -> Optional[np.ndarray]:
        if feasible is not None and not feasible(xv):
            return None
        return _safe_eval(f, xv)

    J = np.zeros((f0.size, x.size))
    for j in range(x.size):
        h = rel_step * max(1.0, abs(x[j]))
        for _ in range(max_shrink):
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            fp, fm = valid(xp), valid(xm)
            if fp is not None and fm is not None:
                J[:, j] = (fp - fm) / (2.0 * h)
                break
            if fp is not None:
                J[:, j] = (fp - f0) / h
                break
            if fm is not None:
                J[:, j] = (f0 - fm) / h
                break
            h *= 0.5
        else:
            logger.debug("estêncil inválido na coordenada %d", j)
            return None
    return J


def _safe_eval(f: ResidualFn, x: np.ndarray) -> Optional[np.ndarray]:
    try:
        r = np.asarray(f(x), dtype=float)
    except (SkpoleError, ZeroDivisionError, FloatingPointError, ValueError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def damped_newton(
    f: ResidualFn,
    x0,
    tol: float = 1e-10,
    max_iter: int = 200,
    rel_step: float = 1e-7,
    feasible: Optional[FeasibleFn] = None,
    barrier: Optional[BarrierFn] = None,
    barrier_weight: float = 1e-12,
    armijo_c: float = 1e-4,
    min_step: float = 1e-10,
) -> NewtonResult:
    """
    Resolve f(x) = 0. Convergência quando ||f||_inf < tol.

    `feasible` rejeita passos fora do domínio (ex.: extremos fora de
    ordem); `barrier` só entra no mérito da procura linear.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = _safe_eval(f, x)
    if r is None or (feasible is not None and not feasible(x)):
        raise NoConvergenceError(
            "ponto inicial inválido para Newton",
            best_residual=float("inf"),
            best_point=x,
        )

    def merit(xv: np.ndarray, rv: np.ndarray) -> float:
        m = 0.5 * float(rv @ rv)
        if barrier is not None:
            m += barrier_weight * barrier(xv)
        return m

    best_x, best_norm = x.copy(), float(np.max(np.abs(r)))

    for it in range(max_iter):
        norm = float(np.max(np.abs(r)))
        if norm < best_norm:
            best_x, best_norm = x.copy(), norm
        if norm < tol:
            return NewtonResult(x, r, norm, it)

        J = fd_jacobian(f, x, rel_step, feasible=feasible, f0=r)
        if J is None:
            logger.debug("Jacobiano sem estêncil válido na iteração %d", it)
            break
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -r, rcond=None)[0]

        m0 = merit(x, r)
        step = 1.0
        accepted = False
        while step >= min_step:
            xt = x + step * dx
            if feasible is None or feasible(xt):
                rt = _safe_eval(f, xt)
                if rt is not None and merit(xt, rt) <= (1.0 - 2.0 * armijo_c * step) * m0:
                    accepted = True
                    break
            step *= 0.5

        if not accepted:
            logger.debug("procura linear falhou na iteração %d (|r|=%.3e)", it, norm)
            break

        x, r = xt, rt
        logger.debug("newton it=%d passo=%.3g |r|=%.3e", it, step, float(np.max(np.abs(r))))

    norm = float(np.max(np.abs(r)))
    if norm < best_norm:
        best_x, best_norm = x.copy(), norm
    if best_norm < tol:
        return NewtonResult(best_x, np.asarray(f(best_x)), best_norm, max_iter)

    raise NoConvergenceError(
        "Newton não convergiu",
        best_residual=best_norm,
        best_point=best_x,
    )


def geometric_path(start: float, target: float, max_steps: int, ratio: float = 1.5) -> np.ndarray:
    """Valores de continuação start -> target, geométricos, com no máximo max_steps passos."""
    if start == target:
        return np.array([target])
    n = int(np.ceil(abs(np.log(target / start)) / np.log(ratio)))
    n = min(max(n, 1), max_steps)
    return np.geomspace(start, target, n + 1)[1:]
