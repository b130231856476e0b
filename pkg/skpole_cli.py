# skpole_cli.py
#
# Linha de comandos: solve, mc e sweep. Cada corrida grava a
# configuração efetiva (run_config.txt) junto dos resultados; os erros
# do skpole viram error.json e um código de saída.

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from coulomb_mc import MCResult, compare, conditional_energy_scan, run_chains, seeded_state
from density_quadrature import constraint_report
from errors import ConfigError, SkpoleError
from mc_report import generate_pdf_report
from one_cut_analysis import OneCutSolution
from run_config import SWEEP_KINDS, RunConfig, worker_count
from sweeps import CSV_FLOAT_FORMAT, grid, run_sweep, write_csv
from symmetric_limit import solve_symmetric
from two_cut_solver import solve_endpoints

logger = logging.getLogger("skpole")

DENSITY_POINTS_PER_CUT = 1000

# flag da CLI -> chave do ficheiro de configuração
FLAG_KEYS = {
    "a": "a", "A": "A", "m": "m", "N": "N", "seed": "seed", "sweeps": "sweeps",
    "burn_in": "burn_in", "eps": "eps", "anneal_tterm": "anneal_tterm",
    "anneal_kappa0": "anneal_kappa0", "anneal_cycles": "anneal_cycles", "out": "out",
    "kind": "sweep_kind", "grid_start": "grid_start", "grid_stop": "grid_stop",
    "grid_num": "grid_num", "gap_start": "gap_start", "gap_stop": "gap_stop",
    "gap_num": "gap_num", "report_lang": "report_lang",
}


# ============================================================
# 1. Escrita de resultados
# ============================================================
def _write_json(path: Path, data: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=float), encoding="utf-8")
    return path


def _write_meta(out: Path, cfg: RunConfig) -> None:
    _write_json(out / "meta.json", {
        "command": cfg.command,
        "started_utc": datetime.now(timezone.utc).isoformat(),
    })


def density_table(solution, points_per_cut: int = DENSITY_POINTS_PER_CUT) -> pd.DataFrame:
    lam = np.concatenate([np.linspace(lo, hi, points_per_cut) for lo, hi in solution.cuts])
    return pd.DataFrame({"lambda": lam, "rho": np.asarray(solution.density(lam), dtype=float)})


# ============================================================
# 2. Comandos
# ============================================================
def cmd_solve(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    params = cfg.mc.params
    if params.A == 0.0:
        solution = OneCutSolution.semicircle(params.a, params.m)
        payload = {"a": params.a, "A": 0.0, "m": params.m, "endpoints": [-2.0, 2.0]}
    else:
        solution = solve_endpoints(params, settings=cfg.solver)
        payload = solution.to_dict()
    _write_json(out / "solution.json", payload)
    write_csv(density_table(solution), out / "density.csv")
    report = constraint_report(solution, cfg.solver.quad_nodes)
    _write_json(out / "constraints.json", report.as_row())

    if params.a == 0.0 and params.m == 2 and params.A > 0.0:
        oracle = solve_symmetric(params.A)
        diff = np.abs(np.asarray(solution.support.endpoints) - np.asarray(oracle.support.endpoints))
        _write_json(out / "symmetric_check.json", {
            "oracle": oracle.to_dict(),
            "max_endpoint_difference": float(diff.max()),
        })
        logger.info("comparação com a solução simétrica: |dx|max = %.3e", diff.max())
    logger.info("solve concluído em %s", out)
    return 0


def _analytic_for_mc(cfg: RunConfig):
    params = cfg.mc.params
    if params.A == 0.0:
        return OneCutSolution.semicircle(params.a, params.m)
    try:
        return solve_endpoints(params, settings=cfg.solver)
    except SkpoleError as exc:
        logger.warning("sem densidade analítica para comparar: %s", exc.message)
        return None


def cmd_mc(cfg: RunConfig, workers: int) -> int:
    out = Path(cfg.out)
    mc = cfg.mc
    solution = _analytic_for_mc(cfg)

    init = None
    if mc.anneal is None and solution is not None:
        n_star, energies = conditional_energy_scan(mc, solution)
        init = seeded_state(mc, n_star, solution)
        pd.DataFrame({"N_l": np.arange(energies.size), "mean_energy": energies}).to_csv(
            out / "conditional_energy.csv", index=False, float_format=CSV_FLOAT_FORMAT
        )

    results, merged = run_chains(mc, init=init, workers=workers)
    combined: MCResult = dataclasses.replace(results[0], histogram=merged)

    metrics = None
    density = None
    if solution is not None:
        density = solution.density
        metrics = compare(merged, density, solution.cuts)
        _write_json(out / "comparison.json", metrics.to_dict())

    hist = pd.DataFrame({
        "bin_lo": merged.bin_edges[:-1],
        "bin_hi": merged.bin_edges[1:],
        "count": merged.counts,
        "density_empirical": merged.density(),
    })
    if density is not None:
        hist["density_analytic"] = np.asarray(density(merged.centers), dtype=float)
    write_csv(hist, out / "histogram.csv")

    _write_json(out / "diagnostics.json", {
        "chains": [r.diagnostics() for r in results],
        "merged_samples": int(merged.total_samples),
    })
    if mc.keep_snapshots and results[0].snapshots is not None:
        snaps = pd.DataFrame(results[0].snapshots, columns=[f"lambda_{i}" for i in range(mc.N)])
        write_csv(snaps, out / "snapshots.csv")

    constraints = constraint_report(solution, cfg.solver.quad_nodes) if solution is not None else None
    pdf = generate_pdf_report(combined, metrics, solution, constraints, lang=cfg.report_lang)
    (out / "report.pdf").write_bytes(pdf)
    logger.info("mc concluído em %s", out)
    return 0


def cmd_sweep(cfg: RunConfig, workers: int) -> int:
    kind = cfg.sweep_kind
    if kind is None:
        raise ConfigError("sweep exige --kind", {"kinds": list(SWEEP_KINDS)})
    geometric = kind == "chi-vs-A"
    points = grid(cfg.grid_start, cfg.grid_stop, cfg.grid_num, geometric=geometric)
    gaps = grid(cfg.gap_start, cfg.gap_stop, cfg.gap_num, geometric=True) if kind == "shrink-scan" else ()
    df = run_sweep(kind, points, a=cfg.mc.a, A=cfg.mc.A, m=cfg.mc.m, settings=cfg.solver,
                   gaps=gaps, workers=workers)
    write_csv(df, Path(cfg.out) / f"sweep_{kind}.csv")
    logger.info("sweep %s: %d pontos gravados", kind, len(df))
    return 0


# ============================================================
# 3. Argumentos e main
# ============================================================
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skpole",
        description="Solver de dois cortes e Monte Carlo do fluido de Coulomb com polo singular.",
    )
    parser.add_argument("--log-level", default="INFO", help="Nível de logging (DEBUG, INFO, ...).")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="Ficheiro chave = valor.")
        p.add_argument("--a", type=float, help="Posição do polo.")
        p.add_argument("--A", type=float, help="Intensidade do polo.")
        p.add_argument("--m", type=int, help="Ordem do polo.")
        p.add_argument("--out", help="Pasta de saída.")

    p_solve = sub.add_parser("solve", help="Resolve os extremos e grava densidade e restrições.")
    common(p_solve)

    p_mc = sub.add_parser("mc", help="Corre o Monte Carlo e compara com a densidade analítica.")
    common(p_mc)
    p_mc.add_argument("--N", type=int, help="Número de partículas.")
    p_mc.add_argument("--seed", type=int)
    p_mc.add_argument("--sweeps", type=int)
    p_mc.add_argument("--burn-in", dest="burn_in", type=int)
    p_mc.add_argument("--eps", type=float, help="Escala gaussiana dos movimentos.")
    p_mc.add_argument("--anneal-tterm", dest="anneal_tterm", type=int)
    p_mc.add_argument("--anneal-kappa0", dest="anneal_kappa0", type=float)
    p_mc.add_argument("--anneal-cycles", dest="anneal_cycles", type=int)
    p_mc.add_argument("--report-lang", dest="report_lang", choices=["pt", "en"])

    p_sweep = sub.add_parser("sweep", help="Varrimento numa grelha; CSV com coluna status.")
    common(p_sweep)
    p_sweep.add_argument("--kind", choices=SWEEP_KINDS)
    for name in ("grid_start", "grid_stop", "gap_start", "gap_stop"):
        p_sweep.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    for name in ("grid_num", "gap_num"):
        p_sweep.add_argument("--" + name.replace("_", "-"), dest=name, type=int)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {"command": args.command}
    for flag, key in FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    return values


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    out = Path(args.out or "out")
    try:
        overrides = _overrides(args)
        if args.config:
            cfg = RunConfig.load(args.config, overrides)
        else:
            cfg = RunConfig.from_dict(overrides)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        cfg.save(out / "run_config.txt")
        _write_meta(out, cfg)

        if cfg.command == "solve":
            return cmd_solve(cfg)
        workers = worker_count()
        if cfg.command == "mc":
            return cmd_mc(cfg, workers)
        return cmd_sweep(cfg, workers)
    except SkpoleError as exc:
        payload = exc.to_dict()
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "error.json", payload)
        sys.stderr.write(json.dumps(payload, default=float) + "\n")
        logger.error("%s: %s", payload["error"], exc.message)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
