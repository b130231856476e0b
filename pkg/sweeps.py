# sweeps.py
#
# Varrimentos em grelha: uma linha CSV por ponto, colunas fixas por
# tipo e sempre terminadas em "status". Falhas por ponto ficam no status
# e o varrimento continua.

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from core_model import PotentialParams
from density_quadrature import chi0, constraint_report, moment_about_pole, rate_point
from errors import ConfigError, SkpoleError
from one_cut_analysis import critical_line, edge_zero_line, shrink_condition_scan
from two_cut_solver import SolverSettings, solve_endpoints

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"

COLUMNS: Dict[str, List[str]] = {
    "endpoints-vs-a": ["a", "A", "m", "x1", "x2", "x3", "x4", "residual_norm", "norm", "trace",
                       "chi", "min_density", "left_mass", "right_mass", "status"],
    "chi-vs-A": ["a", "A", "m", "x1", "x2", "x3", "x4", "chi", "chi0", "status"],
    "rate-function": ["a", "A", "chi", "psi", "norm", "trace", "min_density", "status"],
    "critical-line": ["a", "A_crit", "y1", "y2", "traceless_residual", "min_density",
                      "min_location", "status"],
    "edge-line": ["a", "A_edge", "status"],
    "shrink-scan": ["a", "gap", "f1", "f2", "A", "shrink_residual", "admissible", "status"],
}


def _status(exc: SkpoleError) -> str:
    if exc.details.get("no_solution"):
        return "no-solution"
    if exc.details.get("diagnostic"):
        return str(exc.details["diagnostic"])
    return type(exc).__name__


def _point_endpoints(a: float, A: float, m: int, settings: SolverSettings) -> Dict:
    row = {"a": a, "A": A, "m": m}
    try:
        sol = solve_endpoints(PotentialParams(a, A, m), settings=settings)
    except SkpoleError as exc:
        return {**row, "status": _status(exc)}
    rep = constraint_report(sol, settings.quad_nodes)
    x1, x2, x3, x4 = sol.support.endpoints
    return {**row, "x1": x1, "x2": x2, "x3": x3, "x4": x4, "residual_norm": sol.residual_norm,
            "norm": rep.norm, "trace": rep.trace, "chi": rep.susceptibility,
            "min_density": rep.min_density, "left_mass": rep.left_mass,
            "right_mass": rep.right_mass, "status": "ok"}


def _point_chi(A: float, a: float, m: int, settings: SolverSettings) -> Dict:
    row = {"a": a, "A": A, "m": m, "chi0": chi0(a) if m == 2 else math.nan}
    try:
        sol = solve_endpoints(PotentialParams(a, A, m), settings=settings)
    except SkpoleError as exc:
        return {**row, "status": _status(exc)}
    x1, x2, x3, x4 = sol.support.endpoints
    chi = moment_about_pole(sol, m, settings.quad_nodes)
    return {**row, "x1": x1, "x2": x2, "x3": x3, "x4": x4, "chi": chi, "status": "ok"}


def _point_rate(chi: float, a: float, m: int, settings: SolverSettings) -> Dict:
    try:
        point = rate_point(a, chi, m=m, settings=settings)
    except SkpoleError as exc:
        return {"a": a, "chi": chi, "status": _status(exc)}
    return {**point.as_row(), "status": "ok"}


def _point_critical(a: float) -> Dict:
    try:
        A_c, sol = critical_line(a)
    except SkpoleError as exc:
        return {"a": a, "status": _status(exc)}
    return {"a": a, "A_crit": A_c, "y1": sol.support.y1, "y2": sol.support.y2,
            "traceless_residual": sol.traceless_residual, "min_density": sol.min_density,
            "min_location": sol.min_location, "status": "ok"}


def _point_edge(a: float) -> Dict:
    try:
        return {"a": a, "A_edge": edge_zero_line(a), "status": "ok"}
    except SkpoleError as exc:
        return {"a": a, "status": _status(exc)}


def _map_points(fn: Callable[[float], Dict], points: Sequence[float], workers: int, desc: str) -> List[Dict]:
    """Resultados na ordem da grelha, independentemente da ordem de conclusão."""
    if workers <= 1:
        return [fn(p) for p in tqdm(points, desc=desc)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(tqdm(ex.map(fn, points), total=len(points), desc=desc))


def grid(start: float, stop: float, num: int, geometric: bool = False) -> np.ndarray:
    if geometric:
        if not (start > 0 and stop > 0):
            raise ConfigError("grelha geométrica exige extremos positivos", {"start": start, "stop": stop})
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)


def run_sweep(
    kind: str,
    points: Sequence[float],
    a: float = 2.5,
    A: float = 0.01,
    m: int = 2,
    settings: SolverSettings = SolverSettings(),
    gaps: Sequence[float] = (),
    workers: int = 1,
) -> pd.DataFrame:
    """
    endpoints-vs-a, critical-line, edge-line e shrink-scan varrem a;
    chi-vs-A varre A com a fixo; rate-function varre chi com a fixo.
    """
    if kind not in COLUMNS:
        raise ConfigError("tipo de varrimento desconhecido", {"kind": kind})
    points = [float(p) for p in points]

    if kind == "endpoints-vs-a":
        rows = _map_points(partial(_point_endpoints, A=A, m=m, settings=settings), points, workers, kind)
    elif kind == "chi-vs-A":
        rows = _map_points(partial(_point_chi, a=a, m=m, settings=settings), points, workers, kind)
    elif kind == "rate-function":
        rows = _map_points(partial(_point_rate, a=a, m=m, settings=settings), points, workers, kind)
    elif kind == "critical-line":
        rows = _map_points(_point_critical, points, workers, kind)
    elif kind == "edge-line":
        rows = _map_points(_point_edge, points, workers, kind)
    else:
        report = shrink_condition_scan(points, gaps)
        logger.info("shrink-scan: %d admissíveis, %d falhas", report.n_admissible, report.n_failures)
        rows = report.table.to_dict("records")

    df = pd.DataFrame(rows).reindex(columns=COLUMNS[kind])
    n_bad = int((df["status"] != "ok").sum())
    if n_bad:
        logger.warning("%s: %d de %d pontos falharam", kind, n_bad, len(df))
    return df


def write_csv(df: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Lê um CSV de resultados; round_trip devolve exatamente o float escrito com 17 dígitos."""
    return pd.read_csv(path, float_precision="round_trip")
