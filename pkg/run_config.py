# run_config.py
#
# Ficheiro de configuração plano "chave = valor" (# comentários) e o
# RunConfig que junta as definições do solver, do MC e da grelha.
# Precedência: valores por omissão < ficheiro < flags da CLI.

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from coulomb_mc import AnnealSettings, MCConfig
from errors import ConfigError
from two_cut_solver import SolverSettings

COMMANDS = ("solve", "mc", "sweep")
SWEEP_KINDS = ("endpoints-vs-a", "chi-vs-A", "rate-function", "critical-line", "edge-line", "shrink-scan")

# chave do ficheiro -> (secção, campo)
MC_KEYS = {
    "N": "N", "a": "a", "A": "A", "m": "m", "beta_D": "beta_D", "eps": "step_sigma",
    "seed": "seed", "sweeps": "sweeps", "burn_in": "burn_in", "thin": "thin",
    "energy_scaling": "energy_scaling", "tune_every": "tune_every",
    "resync_every": "resync_every", "n_bins": "n_bins", "chains": "chains",
    "snapshots": "keep_snapshots",
}
ANNEAL_KEYS = {"anneal_tterm": "T_term", "anneal_kappa0": "kappa0", "anneal_cycles": "cycles"}
SOLVER_KEYS = {f.name: f.name for f in dataclasses.fields(SolverSettings)}


def parse_value(raw: str) -> Union[int, float, bool, str]:
    """int -> float -> bool -> str."""
    text = raw.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "yes", "on"):
        return True
    if text.lower() in ("false", "no", "off"):
        return False
    return text


def read_flat_config(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError("ficheiro de configuração não encontrado", {"path": str(path)})
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("linha sem '='", {"path": str(path), "line": lineno})
        key, raw = line.split("=", 1)
        values[key.strip()] = parse_value(raw)
    return values


@dataclass
class RunConfig:
    command: str = "solve"
    out: str = "out"
    report_lang: str = "pt"
    solver: SolverSettings = field(default_factory=SolverSettings)
    mc: MCConfig = field(default_factory=MCConfig)
    sweep_kind: Optional[str] = None
    grid_start: float = 0.5
    grid_stop: float = 12.0
    grid_num: int = 50
    gap_start: float = 0.01
    gap_stop: float = 10.0
    gap_num: int = 100

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("comando desconhecido", {"command": self.command})
        if self.sweep_kind is not None and self.sweep_kind not in SWEEP_KINDS:
            raise ConfigError("tipo de varrimento desconhecido", {"sweep_kind": self.sweep_kind})
        if self.grid_num < 1 or self.gap_num < 1:
            raise ConfigError("grelhas precisam de pelo menos um ponto")
        if self.report_lang not in ("pt", "en"):
            raise ConfigError("idioma do relatório inválido", {"report_lang": self.report_lang})

    # ----- dicionário plano -----
    def to_dict(self) -> Dict[str, Any]:
        flat: Dict[str, Any] = {
            "command": self.command,
            "out": self.out,
            "report_lang": self.report_lang,
            "sweep_kind": self.sweep_kind,
            "grid_start": self.grid_start,
            "grid_stop": self.grid_stop,
            "grid_num": self.grid_num,
            "gap_start": self.gap_start,
            "gap_stop": self.gap_stop,
            "gap_num": self.gap_num,
        }
        for key, name in MC_KEYS.items():
            flat[key] = getattr(self.mc, name)
        if self.mc.anneal is not None:
            for key, name in ANNEAL_KEYS.items():
                flat[key] = getattr(self.mc.anneal, name)
        if self.mc.hist_range is not None:
            flat["hist_lo"], flat["hist_hi"] = self.mc.hist_range
        for key in SOLVER_KEYS:
            flat[key] = getattr(self.solver, key)
        return {k: v for k, v in flat.items() if v is not None}

    @classmethod
    def from_dict(cls, values: Dict[str, Any], base: Optional["RunConfig"] = None) -> "RunConfig":
        """Aplica `values` sobre `base` (ou sobre os valores por omissão)."""
        base = base or cls()
        values = dict(values)
        unknown = set(values) - set(base.to_dict()) - set(ANNEAL_KEYS) - {"hist_lo", "hist_hi", "sweep_kind"}
        if unknown:
            raise ConfigError("chaves desconhecidas na configuração", {"keys": sorted(unknown)})

        try:
            mc_kw = {name: values.get(key, getattr(base.mc, name)) for key, name in MC_KEYS.items()}
            anneal = base.mc.anneal
            if any(k in values for k in ANNEAL_KEYS):
                current = asdict_or_default(anneal)
                current.update({ANNEAL_KEYS[k]: values[k] for k in ANNEAL_KEYS if k in values})
                anneal = AnnealSettings(**current)
            hist = base.mc.hist_range
            if "hist_lo" in values or "hist_hi" in values:
                lo, hi = hist if hist is not None else (-3.0, 3.0)
                hist = (float(values.get("hist_lo", lo)), float(values.get("hist_hi", hi)))
            mc = MCConfig(anneal=anneal, hist_range=hist, **mc_kw)
            solver = SolverSettings(**{k: values.get(k, getattr(base.solver, k)) for k in SOLVER_KEYS})
        except TypeError as exc:
            raise ConfigError(f"valor inválido na configuração: {exc}") from exc

        top = {
            f.name: values.get(f.name, getattr(base, f.name))
            for f in dataclasses.fields(cls)
            if f.name not in ("solver", "mc")
        }
        return cls(solver=solver, mc=mc, **top)

    # ----- ficheiros -----
    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"{k} = {_format(v)}" for k, v in self.to_dict().items()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        values = read_flat_config(path)
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(values)


def asdict_or_default(anneal: Optional[AnnealSettings]) -> Dict[str, Any]:
    return dataclasses.asdict(anneal if anneal is not None else AnnealSettings())


def _format(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def worker_count() -> int:
    raw = os.environ.get("SKPOLE_WORKERS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError("SKPOLE_WORKERS tem de ser inteiro", {"SKPOLE_WORKERS": raw}) from exc
    if n < 1:
        raise ConfigError("SKPOLE_WORKERS tem de ser >= 1", {"SKPOLE_WORKERS": raw})
    return n
