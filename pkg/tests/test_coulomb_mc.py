import math

import numpy as np
import numpy.testing as npt
import pytest

from coulomb_mc import (
    AnnealSettings,
    EnsembleState,
    Histogram,
    MCConfig,
    _full_energy,
    _metropolis_block,
    anneal,
    compare,
    conditional_energy_scan,
    energy,
    metropolis_step,
    propose_pair_move,
    random_zero_sum_state,
    run,
    run_chains,
    seeded_state,
)
from core_model import PotentialParams
from density_quadrature import cut_integral
from errors import CoincidentParticlesError, ConfigError, InfeasibleParametersError, PoleEvaluationError
from two_cut_solver import solve_endpoints


def _semicircle_density(v):
    return math.sqrt(max(4.0 - v * v, 0.0)) / (2.0 * math.pi)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"N": 1},
        {"step_sigma": 0.0},
        {"energy_scaling": "exact"},
        {"anneal": AnnealSettings(kappa0=0.5)},
        {"thin": 0},
        {"hist_range": (1.0, -1.0)},
        {"a": -1.0},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        MCConfig(**kwargs)


def test_energy_two_particles():
    cfg = MCConfig(N=2, a=3.0, A=0.0)
    state = EnsembleState(np.array([1.0, -1.0]), 0.0, 3.0)
    assert energy(state, cfg) == pytest.approx(1.0 - math.log(2.0), rel=1e-15)
    cfg = MCConfig(N=2, a=3.0, A=0.1)
    expected = 1.0 + 0.2 / 16.0 + 0.2 / 4.0 - math.log(2.0)
    assert energy(state, cfg) == pytest.approx(expected, rel=1e-14)
    raw = MCConfig(N=2, a=3.0, A=0.1, energy_scaling="raw")
    assert energy(state, raw) == pytest.approx(expected - math.log(2.0), rel=1e-14)


def test_energy_errors():
    cfg = MCConfig(N=2, a=1.0, A=0.1)
    with pytest.raises(CoincidentParticlesError):
        energy(EnsembleState(np.array([1.5, 1.5]), 0.0, 1.0), cfg)
    with pytest.raises(PoleEvaluationError):
        energy(EnsembleState(np.array([1.0, -1.0]), 0.0, 1.0), cfg)


def test_shift_changes_only_potential():
    cfg = MCConfig(N=5, a=4.0, A=0.2)
    x = np.array([-1.3, -0.4, 0.2, 0.6, 0.9])
    delta = 0.37
    v_scale = cfg.scales[0]
    pot = lambda y: np.sum(0.5 * y ** 2 + 2.0 * cfg.A / (y - cfg.a) ** 2)
    diff = energy(EnsembleState(x + delta, 0.0, cfg.a), cfg) - energy(EnsembleState(x, 0.0, cfg.a), cfg)
    assert diff == pytest.approx(v_scale * (pot(x + delta) - pot(x)), rel=1e-12)


def test_pair_proposals_uniform_and_gaussian():
    cfg = MCConfig(N=4, a=3.0, A=0.0, step_sigma=0.3)
    rng = np.random.default_rng(11)
    state = random_zero_sum_state(cfg, rng)
    n = 100_000
    counts = {}
    d = np.empty(n)
    for k in range(n):
        i, j, d[k] = propose_pair_move(state, cfg, rng)
        assert i != j
        key = (min(i, j), max(i, j))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 6
    expected = n / 6
    sigma = math.sqrt(n * (1 / 6) * (5 / 6))
    assert all(abs(c - expected) < 5 * sigma for c in counts.values())
    assert abs(d.mean()) < 3 * 0.3 / math.sqrt(n)
    assert d.var() == pytest.approx(0.09, abs=3 * 0.09 * math.sqrt(2.0 / n))


def test_steps_preserve_sum_and_cached_energy():
    cfg = MCConfig(N=8, a=2.5, A=0.1, step_sigma=0.2)
    rng = np.random.default_rng(5)
    state = random_zero_sum_state(cfg, rng)
    s0 = state.positions.sum()
    for _ in range(10_000):
        metropolis_step(state, cfg, rng)
    assert abs(state.positions.sum() - s0) < 1e-12 * cfg.N
    v_scale, log_scale = cfg.scales
    full = _full_energy(state.positions, cfg.a, cfg.A, cfg.m, v_scale, log_scale)
    assert abs(full - state.energy) < 1e-6


def test_downhill_accepted_and_pole_rejected():
    cfg = MCConfig(N=2, a=1.0, A=0.1)
    v_scale, log_scale = cfg.scales
    x = np.array([3.0, -3.0])
    E = energy(EnsembleState(x, 0.0, 1.0), cfg)
    one = np.ones(1)
    E_new, n_acc = _metropolis_block(x, E, np.array([0]), np.array([1]), -one, 0.999999 * one,
                                     1.0, 1.0, cfg.a, cfg.A, cfg.m, v_scale, log_scale)
    assert n_acc == 1 and E_new < E
    npt.assert_allclose(x, [2.0, -2.0])
    # lam_0 + d cai exatamente em a
    x = np.array([0.5, -0.5])
    E = energy(EnsembleState(x, 0.0, 1.0), cfg)
    _, n_acc = _metropolis_block(x, E, np.array([0]), np.array([1]), 0.5 * one, 0.0 * one,
                                 1.0, 1.0, cfg.a, cfg.A, cfg.m, v_scale, log_scale)
    assert n_acc == 0
    npt.assert_allclose(x, [0.5, -0.5])


def test_two_particle_detailed_balance():
    # sobre a reta x1 = -x2 = s o peso de Gibbs é |s| exp(-s²)
    cfg = MCConfig(N=2, a=3.0, A=0.0, step_sigma=0.5, sweeps=500_000, burn_in=1_000,
                   keep_snapshots=True, seed=1)
    result = run(cfg)
    s = np.abs(result.snapshots[:, 0])
    n_a = np.count_nonzero((s > 0.2) & (s < 0.6))
    n_b = np.count_nonzero((s > 0.8) & (s < 1.2))
    weight = lambda lo, hi: 0.5 * (math.exp(-lo * lo) - math.exp(-hi * hi))
    expected = weight(0.2, 0.6) / weight(0.8, 1.2)
    assert n_a / n_b == pytest.approx(expected, rel=0.04)


def test_acceptance_after_tuning_and_invariants():
    cfg = MCConfig(N=20, a=3.0, A=0.0, step_sigma=0.5, sweeps=2_000, burn_in=20_000,
                   resync_every=200, seed=3)
    result = run(cfg)
    assert 0.42 <= result.acceptance <= 0.58
    assert result.epsilon_final != cfg.step_sigma
    assert result.max_sum_error < 1e-9 * cfg.N
    assert result.max_energy_drift < 1e-6
    assert result.energy_trace.size == cfg.sweeps
    assert result.histogram.total_samples + result.histogram.n_outside == cfg.sweeps * cfg.N
    diag = result.diagnostics()
    assert set(diag) >= {"acceptance", "epsilon_final", "energy_trace_summary", "n_left_trace_summary"}


def test_tuning_step_uses_acceptance_fraction():
    # uma única janela de burn-in: eps muda por exp(0.01·(taxa - 1/2))
    cfg = MCConfig(N=20, a=3.0, A=0.0, step_sigma=0.3, sweeps=10, burn_in=5, tune_every=100, seed=11)
    result = run(cfg)
    rate = result.acceptance_trace[0]
    assert result.epsilon_final == pytest.approx(cfg.step_sigma * math.exp(0.01 * (rate - 0.5)), rel=1e-14)
    assert abs(math.log(result.epsilon_final / cfg.step_sigma)) <= 0.005

def test_same_seed_same_trajectory():
    cfg = MCConfig(N=6, a=2.5, A=0.1, sweeps=200, burn_in=50)
    npt.assert_array_equal(run(cfg).final_state.positions, run(cfg).final_state.positions)


def test_anneal_improves_on_random_start():
    cfg = MCConfig(N=10, a=3.0, A=0.1, anneal=AnnealSettings(T_term=2_000, kappa0=2.0, cycles=3), seed=7)
    start = random_zero_sum_state(cfg, np.random.default_rng(cfg.seed))
    best = anneal(cfg)
    assert best.energy <= start.energy
    assert abs(best.positions.sum()) < 1e-9 * cfg.N
    with pytest.raises(ConfigError):
        anneal(MCConfig(N=10))


def test_conditional_scan_single_well():
    cfg = MCConfig(N=10, a=3.0, A=0.0)
    n_star, means = conditional_energy_scan(cfg, relax_sweeps=0)
    assert n_star == cfg.N
    assert means.shape == (cfg.N + 1,)


def test_conditional_scan_symmetric():
    cfg = MCConfig(N=10, a=0.0, A=0.1)
    n_star, _ = conditional_energy_scan(cfg, relax_sweeps=0)
    assert n_star == 5
    state = seeded_state(cfg, n_star)
    assert state.N_left == 5
    assert abs(state.positions.sum()) < 1e-12


@pytest.mark.parametrize("n_left", [1, 5, 10, 20, 30, 49])
def test_seeded_state_keeps_requested_occupation(merging_solution, n_left):
    cfg = MCConfig(N=50, a=1.5, A=0.1)
    state = seeded_state(cfg, n_left, merging_solution)
    assert state.N_left == n_left
    assert abs(state.positions.sum()) < 1e-10
    assert np.all(state.positions != cfg.a)


def test_seeded_state_rejects_impossible_occupation(merging_solution):
    cfg = MCConfig(N=50, a=1.5, A=0.1)
    # todas à direita de a > 0 não somam zero
    with pytest.raises(InfeasibleParametersError):
        seeded_state(cfg, 0, merging_solution)
    with pytest.raises(ConfigError):
        seeded_state(cfg, 51, merging_solution)


def test_conditional_scan_skips_impossible_occupation(merging_solution):
    cfg = MCConfig(N=20, a=1.5, A=0.1)
    n_star, means = conditional_energy_scan(cfg, merging_solution, relax_sweeps=0)
    assert means[0] == np.inf
    assert np.all(np.isfinite(means[1:cfg.N]))
    assert 0 < n_star <= cfg.N

def test_histogram_bookkeeping():
    edges = np.linspace(-1.0, 1.0, 5)
    h = Histogram.empty(edges)
    h.add(np.array([-0.9, -0.1, 0.1, 0.2, 5.0]))
    npt.assert_array_equal(h.counts, [1, 1, 2, 0])
    assert (h.total_samples, h.n_outside) == (4, 1)
    assert np.sum(h.density() * h.widths) == pytest.approx(0.8)
    merged = h.merge(h)
    assert merged.total_samples == 8
    with pytest.raises(ConfigError):
        h.merge(Histogram.empty(np.linspace(-2.0, 2.0, 5)))


def test_compare_exact_binning_against_itself():
    edges = np.linspace(-2.5, 2.5, 51)
    hist = Histogram.from_density(_semicircle_density, edges)
    metrics = compare(hist, _semicircle_density, cuts=[(-2.0, 2.0)])
    assert metrics.l1 < 1e-12
    assert metrics.sup_norm < 1e-12
    assert metrics.cut_mass_analytic[0] == pytest.approx(1.0, abs=1e-8)
    assert metrics.cut_mass_empirical[0] == pytest.approx(1.0, abs=1e-8)
    assert not metrics.support_mismatch


def test_compare_flags_support_mismatch():
    edges = np.linspace(-6.0, 6.0, 61)
    hist = Histogram.empty(edges)
    hist.add(np.full(100, 5.0))
    metrics = compare(hist, _semicircle_density, cuts=[(-2.0, 2.0)])
    assert metrics.support_mismatch
    assert metrics.outside_fraction == pytest.approx(1.0)


def test_run_chains_merges_histograms():
    cfg = MCConfig(N=4, a=3.0, A=0.0, sweeps=300, burn_in=20, chains=2)
    results, merged = run_chains(cfg, workers=1)
    assert len(results) == 2
    assert merged.total_samples == sum(r.histogram.total_samples for r in results)
    assert not np.array_equal(results[0].final_state.positions, results[1].final_state.positions)


@pytest.mark.slow
def test_semicircle_recovered_at_zero_coupling():
    cfg = MCConfig(N=50, a=3.0, A=0.0, sweeps=100_000, burn_in=2_000, hist_range=(-2.5, 2.5), n_bins=50)
    result = run(cfg)
    metrics = compare(result.histogram, _semicircle_density, cuts=[(-2.0, 2.0)])
    assert metrics.l1 < 0.05


@pytest.mark.slow
def test_two_cut_density_and_occupation(merging_solution):
    cfg = MCConfig(N=50, a=1.5, A=0.1, sweeps=1_000_000, burn_in=5_000, n_bins=60, hist_range=(-2.5, 2.5))
    n_star, _ = conditional_energy_scan(cfg, merging_solution)
    left_mass = cut_integral(merging_solution, lambda lam: (lam < cfg.a).astype(float))
    assert abs(n_star - round(left_mass * cfg.N)) <= 2
    result = run(cfg, init=seeded_state(cfg, n_star, merging_solution))
    matched = compare(result.histogram, merging_solution.density, cuts=merging_solution.cuts)
    assert matched.l1 < 0.05
    wrong = solve_endpoints(PotentialParams(1.5, 0.2))
    assert compare(result.histogram, wrong.density).l1 > 2.0 * matched.l1


def _occupation_within_3_sigma(result, solution, N):
    a = result.config.a
    p_left = cut_integral(solution, lambda lam: (lam < a).astype(float))
    sigma = math.sqrt(N * p_left * (1.0 - p_left))
    mean_left = float(np.mean(result.n_left_trace))
    return abs(mean_left - N * p_left) <= 3.0 * max(sigma, 1.0 / math.sqrt(N))


@pytest.mark.slow
def test_evaporating_cut_occupation(evaporating_solution):
    cfg = MCConfig(N=50, a=2.5, A=0.1, sweeps=300_000, burn_in=5_000, n_bins=60, hist_range=(-2.5, 3.5))
    n_star, _ = conditional_energy_scan(cfg, evaporating_solution)
    result = run(cfg, init=seeded_state(cfg, n_star, evaporating_solution))
    assert _occupation_within_3_sigma(result, evaporating_solution, cfg.N)
    metrics = compare(result.histogram, evaporating_solution.density, cuts=evaporating_solution.cuts)
    assert metrics.l1 < 0.1
    assert result.max_sum_error < 1e-9 * cfg.N


@pytest.mark.slow
def test_annealed_run_matches_two_cut_density(merging_solution):
    cfg = MCConfig(N=30, a=1.5, A=0.1, sweeps=300_000, burn_in=5_000, n_bins=40, hist_range=(-2.5, 2.5),
                   anneal=AnnealSettings(T_term=20_000, kappa0=2.0, cycles=5), seed=5)
    result = run(cfg)
    assert _occupation_within_3_sigma(result, merging_solution, cfg.N)
    metrics = compare(result.histogram, merging_solution.density, cuts=merging_solution.cuts)
    assert metrics.l1 < 0.1
