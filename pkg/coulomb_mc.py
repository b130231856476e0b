# coulomb_mc.py
#
# Monte Carlo de Metropolis do fluido de Coulomb com traço nulo.
# Movimentos de pares (lam_i + d, lam_j - d) preservam a soma; o ΔE é
# incremental em O(N). Os núcleos numba recebem blocos de números
# aleatórios já gerados pelo numpy.random.Generator, por isso a semente
# determina a trajetória inteira.

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit
from scipy.integrate import quad
from tqdm import tqdm

from core_model import PotentialParams
from errors import (
    CoincidentParticlesError,
    ConfigError,
    InfeasibleParametersError,
    PoleEvaluationError,
    SkpoleError,
)

logger = logging.getLogger(__name__)

COINCIDENCE_TOL = 1e-14
DRIFT_TOL = 1e-6
ENERGY_SCALINGS = ("planar", "raw")
SAMPLE_CHUNK_SWEEPS = 1000


# ---------------------------------------------------------
# 1. Configuração e estado
# ---------------------------------------------------------
@dataclass(frozen=True)
class AnnealSettings:
    T_term: int = 10_000
    kappa0: float = 2.0
    cycles: int = 5


@dataclass(frozen=True)
class MCConfig:
    N: int = 50
    a: float = 1.5
    A: float = 0.1
    m: int = 2
    beta_D: float = 1.0
    step_sigma: float = 0.1
    seed: int = 0
    sweeps: int = 10_000
    burn_in: int = 1_000
    thin: int = 1
    anneal: Optional[AnnealSettings] = None
    energy_scaling: str = "planar"
    tune_every: int = 100
    resync_every: int = 10_000
    n_bins: int = 100
    hist_range: Optional[Tuple[float, float]] = None
    chains: int = 1
    keep_snapshots: bool = False

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError("N tem de ser inteiro >= 2", {"N": self.N})
        if not self.step_sigma > 0:
            raise ConfigError("step_sigma tem de ser positivo", {"step_sigma": self.step_sigma})
        if not self.beta_D > 0:
            raise ConfigError("beta_D tem de ser positivo", {"beta_D": self.beta_D})
        if self.energy_scaling not in ENERGY_SCALINGS:
            raise ConfigError("energy_scaling desconhecido", {"energy_scaling": self.energy_scaling})
        for key in ("sweeps", "burn_in"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} não pode ser negativo", {key: getattr(self, key)})
        for key in ("thin", "tune_every", "resync_every", "n_bins", "chains"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} tem de ser >= 1", {key: getattr(self, key)})
        if self.anneal is not None:
            if not 1.0 <= self.anneal.kappa0 <= 10.0:
                raise ConfigError("kappa0 tem de estar em [1, 10]", {"kappa0": self.anneal.kappa0})
            if self.anneal.T_term < 1 or self.anneal.cycles < 1:
                raise ConfigError("T_term e cycles têm de ser >= 1", asdict(self.anneal))
        if self.hist_range is not None and not self.hist_range[0] < self.hist_range[1]:
            raise ConfigError("hist_range inválido", {"hist_range": list(self.hist_range)})
        try:
            PotentialParams(self.a, self.A, self.m)
        except ValueError as exc:
            raise ConfigError(str(exc), {"a": self.a, "A": self.A, "m": self.m}) from exc

    @property
    def params(self) -> PotentialParams:
        return PotentialParams(self.a, self.A, self.m)

    @property
    def scales(self) -> Tuple[float, float]:
        """(peso do potencial, peso do termo logarítmico por par i<j)."""
        if self.energy_scaling == "planar":
            return 0.5 * self.N, 1.0
        return 1.0, 2.0

    @property
    def bin_edges(self) -> np.ndarray:
        lo, hi = self.hist_range if self.hist_range is not None else (-3.0, max(3.0, self.a + 3.0))
        return np.linspace(lo, hi, self.n_bins + 1)


@dataclass
class EnsembleState:
    positions: np.ndarray
    energy: float
    a: float

    @property
    def N_left(self) -> int:
        return int(np.count_nonzero(self.positions < self.a))

    def copy(self) -> "EnsembleState":
        return EnsembleState(self.positions.copy(), self.energy, self.a)


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    total_samples: float
    n_outside: int = 0

    @classmethod
    def empty(cls, edges: np.ndarray) -> "Histogram":
        return cls(np.asarray(edges, dtype=float), np.zeros(len(edges) - 1, dtype=np.int64), 0, 0)

    @classmethod
    def from_density(cls, density: Callable, edges: np.ndarray, total: int = 10 ** 15) -> "Histogram":
        """Binning exato de uma densidade: contagens fracionárias total·massa do bin."""
        masses = bin_masses(density, edges)
        return cls(np.asarray(edges, dtype=float), masses * total, float(total), 0)

    def add(self, samples: np.ndarray) -> None:
        samples = np.ravel(samples)
        c, _ = np.histogram(samples, bins=self.bin_edges)
        self.counts += c
        inside = int(c.sum())
        self.total_samples += inside
        self.n_outside += samples.size - inside

    def merge(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.bin_edges, other.bin_edges):
            raise ConfigError("histogramas com bins diferentes")
        return Histogram(self.bin_edges, self.counts + other.counts,
                         self.total_samples + other.total_samples, self.n_outside + other.n_outside)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def density(self) -> np.ndarray:
        """Normalizada pela largura e pelo total de amostras (incluindo as de fora)."""
        total = self.total_samples + self.n_outside
        if total == 0:
            return np.zeros_like(self.widths)
        return self.counts / (total * self.widths)


# ---------------------------------------------------------
# 2. Núcleos numba
# ---------------------------------------------------------
@njit(cache=True)
def _potential(x, a, A, m):
    if A == 0.0:
        return 0.5 * x * x
    d = x - a
    if d == 0.0:
        return np.inf
    return 0.5 * x * x + 2.0 * A / d ** m


@njit(cache=True)
def _full_energy(x, a, A, m, v_scale, log_scale):
    n = x.size
    pot = 0.0
    for i in range(n):
        pot += _potential(x[i], a, A, m)
    logs = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            logs += math.log(abs(x[i] - x[j]))
    return v_scale * pot - log_scale * logs


@njit(cache=True)
def _pair_delta(x, i, j, d, a, A, m, v_scale, log_scale):
    xi, xj = x[i], x[j]
    ni, nj = xi + d, xj - d
    if A != 0.0 and (ni == a or nj == a):
        return np.inf
    if abs(ni - nj) < COINCIDENCE_TOL:
        return np.inf
    dv = _potential(ni, a, A, m) + _potential(nj, a, A, m) - _potential(xi, a, A, m) - _potential(xj, a, A, m)
    dlog = math.log(abs(ni - nj)) - math.log(abs(xi - xj))
    for k in range(x.size):
        if k == i or k == j:
            continue
        xk = x[k]
        di, dj = abs(ni - xk), abs(nj - xk)
        if di < COINCIDENCE_TOL or dj < COINCIDENCE_TOL:
            return np.inf
        dlog += math.log(di) - math.log(abs(xi - xk)) + math.log(dj) - math.log(abs(xj - xk))
    return v_scale * dv - log_scale * dlog


@njit(cache=True)
def _metropolis_block(x, energy, ii, jj, gauss, unif, eps, beta, a, A, m, v_scale, log_scale):
    n_acc = 0
    for s in range(ii.size):
        i, j = ii[s], jj[s]
        d = eps * gauss[s]
        dE = _pair_delta(x, i, j, d, a, A, m, v_scale, log_scale)
        if not np.isfinite(dE):
            continue
        if dE <= 0.0 or unif[s] < math.exp(-beta * dE):
            x[i] += d
            x[j] -= d
            energy += dE
            n_acc += 1
    return energy, n_acc


@njit(cache=True)
def _sampling_block(x, energy, n_sweeps, thin, ii, jj, gauss, unif, eps, beta, a, A, m, v_scale, log_scale):
    n = x.size
    n_snap = n_sweeps // thin
    snaps = np.empty((n_snap, n))
    energies = np.empty(n_snap)
    n_acc = 0
    k = 0
    for s in range(n_sweeps):
        lo, hi = s * n, (s + 1) * n
        energy, acc = _metropolis_block(
            x, energy, ii[lo:hi], jj[lo:hi], gauss[lo:hi], unif[lo:hi],
            eps, beta, a, A, m, v_scale, log_scale,
        )
        n_acc += acc
        if (s + 1) % thin == 0 and k < n_snap:
            snaps[k, :] = x
            energies[k] = energy
            k += 1
    return energy, n_acc, snaps, energies


@njit(cache=True)
def _anneal_cycle(x, energy, best_x, best_energy, ii, jj, gauss, unif, eps, beta,
                  a, A, m, v_scale, log_scale, kappa0, T_term):
    # ΔE_eff = min(ΔE, kappa0·t/T_term)
    n_acc = 0
    for t in range(ii.size):
        i, j = ii[t], jj[t]
        d = eps * gauss[t]
        dE = _pair_delta(x, i, j, d, a, A, m, v_scale, log_scale)
        if not np.isfinite(dE):
            continue
        dE_eff = min(dE, kappa0 * t / T_term)
        if dE_eff <= 0.0 or unif[t] < math.exp(-beta * dE_eff):
            x[i] += d
            x[j] -= d
            energy += dE
            n_acc += 1
            if energy < best_energy:
                best_energy = energy
                best_x[:] = x
    return energy, best_energy, n_acc


# ---------------------------------------------------------
# 3. Energia e passos elementares
# ---------------------------------------------------------
def _draw_pairs(rng: np.random.Generator, N: int, size: int) -> Tuple[np.ndarray, np.ndarray]:
    ii = rng.integers(0, N, size=size)
    jj = rng.integers(0, N - 1, size=size)
    jj = jj + (jj >= ii)
    return ii, jj


def _draw_block(rng: np.random.Generator, N: int, size: int):
    ii, jj = _draw_pairs(rng, N, size)
    return ii, jj, rng.standard_normal(size), rng.random(size)


def energy(state: EnsembleState, config: MCConfig) -> float:
    """E_N = (N/2) sum V(lam_i) - sum_{i<j} ln|lam_i - lam_j| (escala planar)."""
    x = np.asarray(state.positions, dtype=float)
    if config.A != 0.0 and np.any(x == config.a):
        raise PoleEvaluationError("partícula em cima do polo", {"a": config.a})
    xs = np.sort(x)
    if np.any(np.diff(xs) == 0.0):
        raise CoincidentParticlesError("partículas coincidentes (ln 0)", {"N": int(x.size)})
    v_scale, log_scale = config.scales
    return float(_full_energy(x, config.a, config.A, config.m, v_scale, log_scale))


def make_state(positions: Sequence[float], config: MCConfig) -> EnsembleState:
    x = np.array(positions, dtype=float)
    return EnsembleState(x, energy(EnsembleState(x, 0.0, config.a), config), config.a)


def random_zero_sum_state(config: MCConfig, rng: np.random.Generator) -> EnsembleState:
    x = rng.standard_normal(config.N)
    x -= x.mean()
    return make_state(x, config)


def propose_pair_move(state: EnsembleState, config: MCConfig, rng: np.random.Generator) -> Tuple[int, int, float]:
    ii, jj = _draw_pairs(rng, config.N, 1)
    return int(ii[0]), int(jj[0]), float(config.step_sigma * rng.standard_normal())


def metropolis_step(state: EnsembleState, config: MCConfig, rng: np.random.Generator) -> bool:
    i, j, d = propose_pair_move(state, config, rng)
    v_scale, log_scale = config.scales
    dE = _pair_delta(state.positions, i, j, d, config.a, config.A, config.m, v_scale, log_scale)
    if not math.isfinite(dE):
        return False
    if dE <= 0.0 or rng.random() < math.exp(-config.beta_D * dE):
        state.positions[i] += d
        state.positions[j] -= d
        state.energy += dE
        return True
    return False


# ---------------------------------------------------------
# 4. Recozimento e varrimento condicional em N_l
# ---------------------------------------------------------
def anneal(config: MCConfig, rng: Optional[np.random.Generator] = None) -> EnsembleState:
    """
    n ciclos de T_term passos com o corte E_max(t) = kappa0·t/T_term;
    devolve a configuração de menor energia encontrada.
    """
    if config.anneal is None:
        raise ConfigError("anneal exige parâmetros de recozimento")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    settings = config.anneal
    v_scale, log_scale = config.scales
    state = random_zero_sum_state(config, rng)
    x = state.positions
    best_x = x.copy()
    best_E = state.energy
    E = state.energy
    for cycle in range(settings.cycles):
        ii, jj, gauss, unif = _draw_block(rng, config.N, settings.T_term)
        E, best_E, n_acc = _anneal_cycle(
            x, E, best_x, best_E, ii, jj, gauss, unif, config.step_sigma, config.beta_D,
            config.a, config.A, config.m, v_scale, log_scale, settings.kappa0, float(settings.T_term),
        )
        logger.debug("recozimento ciclo %d: aceitação %.3f, E=%.6g", cycle, n_acc / settings.T_term, E)
    best = make_state(best_x, config)
    logger.info("recozimento: %d ciclos, melhor energia %.8g", settings.cycles, best.energy)
    return best


def _cut_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    k = np.arange(n)
    return lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * (k + 0.5) / n))


def _zero_sum_split(xl: np.ndarray, xr: np.ndarray, a: float) -> Optional[np.ndarray]:
    """
    Translada cada grupo para que a soma total seja nula sem atravessar o
    polo: xl fica à esquerda de a e xr à direita. None se for impossível.
    """
    nl, nr = xl.size, xr.size
    shift = -(xl.sum() + xr.sum()) / (nl + nr)
    room_l = a - xl.max() if nl else math.inf
    room_r = a - xr.min() if nr else -math.inf
    if room_r < shift < room_l:
        return np.concatenate([xl + shift, xr + shift])
    if nl == 0 or nr == 0:
        return None
    total = -(xl.sum() + xr.sum())
    if shift >= room_l:
        dl = 0.5 * room_l
        dr = (total - nl * dl) / nr
    else:
        dr = 0.5 * room_r
        dl = (total - nr * dr) / nl
    return np.concatenate([xl + dl, xr + dr])


def _conditioned_positions(config: MCConfig, left, right, n_left: int) -> Optional[np.ndarray]:
    return _zero_sum_split(_cut_nodes(*left, n_left), _cut_nodes(*right, config.N - n_left), config.a)


def _scan_cuts(config: MCConfig, solution) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    cuts = list(solution.cuts)
    a = config.a
    if len(cuts) >= 2:
        return tuple(cuts[0]), tuple(cuts[1])
    lo, hi = cuts[0]
    if hi > a:
        return (lo, a), (a, hi)
    return (lo, hi), (a, a + 1.0)


def _analytic_solution(config: MCConfig):
    from one_cut_analysis import OneCutSolution
    from two_cut_solver import solve_endpoints

    if config.A == 0.0:
        return OneCutSolution.semicircle(config.a, config.m)
    return solve_endpoints(config.params)


def conditional_energy_scan(
    config: MCConfig,
    solution=None,
    relax_sweeps: int = 20,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[int, np.ndarray]:
    """
    Energia média condicionada a N_l partículas à esquerda do polo, para
    N_l = 0..N. Devolve (N_l*, energias); N_l* serve de condição inicial.
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    solution = solution if solution is not None else _analytic_solution(config)
    left, right = _scan_cuts(config, solution)
    v_scale, log_scale = config.scales
    N = config.N
    means = np.full(N + 1, np.inf)
    for n_left in range(N + 1):
        x = _conditioned_positions(config, left, right, n_left)
        if x is None:
            continue
        try:
            E = energy(EnsembleState(x, 0.0, config.a), config)
        except SkpoleError:
            continue
        total, count = 0.0, 0
        for _ in range(relax_sweeps):
            ii, jj, gauss, unif = _draw_block(rng, N, N)
            E, _ = _metropolis_block(x, E, ii, jj, gauss, unif, config.step_sigma, config.beta_D,
                                     config.a, config.A, config.m, v_scale, log_scale)
            total += E
            count += 1
        means[n_left] = total / max(count, 1) if relax_sweeps > 0 else E
    n_star = int(np.argmin(means))
    logger.info("varrimento condicional: N_l* = %d de N = %d", n_star, N)
    return n_star, means


def seeded_state(config: MCConfig, n_left: int, solution=None) -> EnsembleState:
    solution = solution if solution is not None else _analytic_solution(config)
    left, right = _scan_cuts(config, solution)
    if not 0 <= n_left <= config.N:
        raise ConfigError("n_left fora de [0, N]", {"n_left": n_left, "N": config.N})
    x = _conditioned_positions(config, left, right, n_left)
    if x is None:
        raise InfeasibleParametersError(
            "soma nula impossível com esta ocupação dos cortes",
            {"a": config.a, "n_left": n_left, "N": config.N},
        )
    return make_state(x, config)


# ---------------------------------------------------------
# 5. Corrida completa
# ---------------------------------------------------------
@dataclass
class MCResult:
    config: MCConfig
    final_state: EnsembleState
    histogram: Histogram
    acceptance: float
    epsilon_final: float
    energy_trace: np.ndarray
    n_left_trace: np.ndarray
    acceptance_trace: List[float] = field(default_factory=list)
    max_energy_drift: float = 0.0
    max_sum_error: float = 0.0
    snapshots: Optional[np.ndarray] = None

    def diagnostics(self) -> Dict:
        def summary(v: np.ndarray) -> Dict[str, float]:
            if v.size == 0:
                return {"mean": math.nan, "std": math.nan, "min": math.nan, "max": math.nan}
            return {"mean": float(v.mean()), "std": float(v.std()), "min": float(v.min()), "max": float(v.max())}

        return {
            "acceptance": self.acceptance,
            "epsilon_final": self.epsilon_final,
            "energy_trace_summary": summary(self.energy_trace),
            "n_left_trace_summary": summary(self.n_left_trace.astype(float)),
            "max_energy_drift": self.max_energy_drift,
            "max_sum_error": self.max_sum_error,
            "n_outside": self.histogram.n_outside,
        }


def run(
    config: MCConfig,
    init: Optional[EnsembleState] = None,
    rng: Optional[np.random.Generator] = None,
    progress: bool = False,
) -> MCResult:
    """
    Burn-in com afinação de eps (janelas de tune_every passos,
    eps <- eps·exp(0.01·(taxa de aceitação - 1/2))), depois amostragem
    com eps fixo. 1 sweep = N passos.
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    if init is None:
        init = anneal(config, rng) if config.anneal is not None else random_zero_sum_state(config, rng)
    N = config.N
    v_scale, log_scale = config.scales
    args = (config.beta_D, config.a, config.A, config.m, v_scale, log_scale)
    x = init.positions.copy()
    E = energy(EnsembleState(x, 0.0, config.a), config)
    eps = config.step_sigma

    acceptance_trace: List[float] = []
    since_resync = 0
    max_drift = 0.0

    def resync(E_cached: float) -> float:
        nonlocal since_resync, max_drift
        full = float(_full_energy(x, config.a, config.A, config.m, v_scale, log_scale))
        drift = abs(full - E_cached)
        max_drift = max(max_drift, drift)
        if drift > DRIFT_TOL * max(1.0, abs(full)):
            logger.warning("deriva de energia %.3e; ressincronizado", drift)
        since_resync = 0
        return full

    burn_steps = config.burn_in * N
    window = config.tune_every
    done = 0
    while done < burn_steps:
        size = min(window, burn_steps - done)
        ii, jj, gauss, unif = _draw_block(rng, N, size)
        E, n_acc = _metropolis_block(x, E, ii, jj, gauss, unif, eps, *args)
        acceptance_trace.append(n_acc / size)
        if size == window:
            eps *= math.exp(0.01 * (n_acc / window - 0.5))
        since_resync += n_acc
        if since_resync >= config.resync_every:
            E = resync(E)
        done += size
    if burn_steps:
        logger.info("burn-in concluído: eps congelado em %.6g", eps)

    hist = Histogram.empty(config.bin_edges)
    energies: List[np.ndarray] = []
    n_left: List[np.ndarray] = []
    snapshots: List[np.ndarray] = []
    total_acc = 0
    max_sum_error = 0.0
    remaining = config.sweeps
    bar = tqdm(total=config.sweeps, desc="MC", unit="sweep", disable=not progress)
    while remaining > 0:
        n_sw = min(SAMPLE_CHUNK_SWEEPS, remaining)
        n_sw -= n_sw % config.thin if n_sw > config.thin else 0
        ii, jj, gauss, unif = _draw_block(rng, N, n_sw * N)
        E, n_acc, snaps, snap_E = _sampling_block(x, E, n_sw, config.thin, ii, jj, gauss, unif, eps, *args)
        total_acc += n_acc
        acceptance_trace.append(n_acc / (n_sw * N))
        hist.add(snaps)
        energies.append(snap_E)
        n_left.append(np.count_nonzero(snaps < config.a, axis=1))
        if snaps.size:
            max_sum_error = max(max_sum_error, float(np.max(np.abs(snaps.sum(axis=1)))))
        if config.keep_snapshots:
            snapshots.append(snaps)
        since_resync += n_acc
        if since_resync >= config.resync_every:
            E = resync(E)
        remaining -= n_sw
        bar.update(n_sw)
    bar.close()

    if max_sum_error > 1e-9 * N:
        logger.warning("soma das posições afastou-se de zero: %.3e", max_sum_error)
    acceptance = total_acc / (config.sweeps * N) if config.sweeps else math.nan
    logger.info("MC: N=%d a=%.4g A=%.4g aceitação=%.3f", N, config.a, config.A, acceptance)
    return MCResult(
        config=config,
        final_state=EnsembleState(x, E, config.a),
        histogram=hist,
        acceptance=acceptance,
        epsilon_final=eps,
        energy_trace=np.concatenate(energies) if energies else np.zeros(0),
        n_left_trace=np.concatenate(n_left) if n_left else np.zeros(0, dtype=np.int64),
        acceptance_trace=acceptance_trace,
        max_energy_drift=max_drift,
        max_sum_error=max_sum_error,
        snapshots=np.vstack(snapshots) if snapshots else None,
    )


def _run_chain(config: MCConfig, seed_seq: np.random.SeedSequence, init: Optional[EnsembleState]) -> MCResult:
    return run(config, init=init, rng=np.random.default_rng(seed_seq))


def run_chains(
    config: MCConfig,
    init: Optional[EnsembleState] = None,
    workers: Optional[int] = None,
) -> Tuple[List[MCResult], Histogram]:
    """Cadeias independentes com sementes de SeedSequence(seed).spawn; histograma fundido."""
    seeds = np.random.SeedSequence(config.seed).spawn(config.chains)
    workers = workers or 1
    if config.chains == 1 or workers == 1:
        results = [_run_chain(config, s, init) for s in tqdm(seeds, desc="cadeias", disable=config.chains == 1)]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, config.chains)) as ex:
            futures = [ex.submit(_run_chain, config, s, init) for s in seeds]
            results = [f.result() for f in tqdm(futures, desc="cadeias")]
    merged = results[0].histogram
    for r in results[1:]:
        merged = merged.merge(r.histogram)
    return results, merged


# ---------------------------------------------------------
# 6. Comparação com a densidade analítica
# ---------------------------------------------------------
def bin_masses(density: Callable, edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=float)
    out = np.empty(edges.size - 1)
    for k in range(out.size):
        out[k] = quad(lambda v: float(density(v)), edges[k], edges[k + 1], limit=200)[0]
    return out


@dataclass(frozen=True)
class ComparisonMetrics:
    l1: float
    sup_norm: float
    cut_mass_empirical: Tuple[float, ...]
    cut_mass_analytic: Tuple[float, ...]
    outside_fraction: float
    support_mismatch: bool

    def to_dict(self) -> Dict:
        d = asdict(self)
        d["cut_mass_empirical"] = list(self.cut_mass_empirical)
        d["cut_mass_analytic"] = list(self.cut_mass_analytic)
        return d


def compare(histogram: Histogram, density: Callable, cuts: Optional[Sequence[Tuple[float, float]]] = None) -> ComparisonMetrics:
    """
    Distância L1 e norma do supremo entre o histograma normalizado e as
    médias por bin da densidade analítica; massas por corte.
    """
    edges = histogram.bin_edges
    widths = histogram.widths
    analytic = bin_masses(density, edges) / widths
    empirical = histogram.density()
    diff = np.abs(empirical - analytic)
    l1 = float(np.sum(diff * widths))
    sup = float(np.max(diff))

    total = histogram.total_samples + histogram.n_outside
    emp_mass: List[float] = []
    ana_mass: List[float] = []
    outside = float(histogram.n_outside)
    mismatch = False
    if cuts:
        cuts = sorted(cuts)
        width = float(np.max(widths))
        centers = histogram.centers
        bounds = [-np.inf] + [0.5 * (cuts[k][1] + cuts[k + 1][0]) for k in range(len(cuts) - 1)] + [np.inf]
        for k, (lo, hi) in enumerate(cuts):
            sel = (centers > bounds[k]) & (centers <= bounds[k + 1])
            emp_mass.append(float(histogram.counts[sel].sum() / total) if total else math.nan)
            ana_mass.append(float(quad(lambda v: float(density(v)), lo, hi, limit=200)[0]))
        near = np.zeros(centers.size, dtype=bool)
        for lo, hi in cuts:
            near |= (centers >= lo - 3.0 * width) & (centers <= hi + 3.0 * width)
        outside += float(histogram.counts[~near].sum())
    outside_fraction = outside / total if total else 0.0
    if outside_fraction > 0.01:
        mismatch = True
        logger.warning("%.2f%% das amostras fora do suporte analítico", 100.0 * outside_fraction)
    return ComparisonMetrics(l1, sup, tuple(emp_mass), tuple(ana_mass), outside_fraction, mismatch)
