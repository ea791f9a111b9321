import math

import numpy as np
import pytest

from pooldata.model import LabelCounts, NoiseModel, Proportions, TestDesign
from pooldata.decode import exact_pe_oracle
from pooldata.experiments import (
    ExperimentConfig,
    estimate_pe,
    figure1_data,
    isotonic_trend_pvalue,
    pava_nonincreasing,
    run_trial,
    sweep_n,
    trial_seed,
    wilson_interval,
)
from pooldata.report import sweep_to_csv

from helpers import mc_pe_lower_slack

UNIF2 = Proportions(np.array([0.5, 0.5]))


def cfg(**kw):
    base = dict(pi=UNIF2, p=4, n=2, q=0.5, noise=NoiseModel.noiseless(),
                qmax=0, trials=100, master_seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(trials=0)
    with pytest.raises(ValueError):
        cfg(design=TestDesign(np.ones((1, 3), dtype=np.int8)))


def test_trial_seed_distinct_streams():
    keys = {tuple(trial_seed(1, i, t).spawn_key) for i in range(5) for t in range(4)}
    assert len(keys) == 20


def test_run_trial_deterministic():
    c = cfg(trials=1)
    vals = [run_trial(c, 3) for _ in range(5)]
    assert len(set(vals)) == 1


def test_run_trial_qmax_p_always_succeeds():
    c = cfg(n=0, qmax=4, trials=1,
            design=TestDesign(np.zeros((0, 4), dtype=np.int8)))
    assert all(run_trial(c, i) for i in range(20))


def test_run_trial_pure_guess_rate():
    # n=0: decoder picks uniformly among the |B|=6 candidates
    c = cfg(n=0, trials=10000, design=TestDesign(np.zeros((0, 4), dtype=np.int8)))
    est = estimate_pe(c)
    se = math.sqrt((5 / 6) * (1 / 6) / c.trials)
    assert abs((1 - est.pe_hat) - 1 / 6) < 3.5 * se


def test_estimate_matches_oracle_fixed_design():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 20:
        p = int(rng.integers(4, 9))
        d = int(rng.integers(2, 4))
        raw = rng.random(d) + 0.2
        pi = Proportions(raw / raw.sum())
        n = int(rng.integers(1, 5))
        rows = (rng.random((n, p)) < 0.5).astype(np.int8)
        design = TestDesign(rows)
        c = cfg(pi=pi, p=p, n=n, trials=800, design=design,
                master_seed=int(rng.integers(1 << 30)))
        from pooldata.model import round_proportions
        oracle = exact_pe_oracle(design, round_proportions(pi, p))
        est = estimate_pe(c)
        assert abs(est.pe_hat - oracle.pe_exact) <= mc_pe_lower_slack(
            est.pe_hat, est)
        checked += 1


def test_estimate_trials_one():
    est = estimate_pe(cfg(trials=1))
    assert est.pe_hat in (0.0, 1.0)
    assert est.ci_high > est.ci_low


def test_wilson_interval_scaling():
    lo1, hi1 = wilson_interval(50, 200)
    lo2, hi2 = wilson_interval(100, 400)
    ratio = (hi2 - lo2) / (hi1 - lo1)
    assert abs(ratio - 1 / math.sqrt(2)) < 0.2 / math.sqrt(2)


def test_wilson_interval_brackets():
    for f, t in ((0, 10), (10, 10), (3, 17)):
        lo, hi = wilson_interval(f, t)
        assert 0.0 <= lo <= f / t <= hi <= 1.0


def test_estimate_thread_invariance():
    c = cfg(trials=200)
    a = estimate_pe(c, threads=1)
    b = estimate_pe(c, threads=2)
    assert a == b


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        sweep_n(cfg(), [])
    with pytest.raises(ValueError):
        sweep_n(cfg(), [2, 2])


def test_sweep_zero_grid_matches_guess_rate():
    res = sweep_n(cfg(trials=4000), [0])
    assert res.estimates[0].pe_hat == pytest.approx(5 / 6, abs=0.03)
    assert math.isnan(res.n_cross)


def test_sweep_decay_and_crossing():
    pi = UNIF2
    c = cfg(pi=pi, p=12, trials=400, master_seed=11)
    res = sweep_n(c, list(range(1, 13)))
    pes = [e.pe_hat for e in res.estimates]
    assert pes[0] > 0.9
    assert pes[-1] < 0.1
    assert res.n_grid[0] <= res.n_cross <= res.n_grid[-1]
    assert res.n_star_formula > 0


def test_sweep_gaussian_dominates_noiseless():
    grid = [2, 4, 6, 8]
    base = cfg(p=8, trials=300, master_seed=5)
    clean = sweep_n(base, grid)
    noisy = sweep_n(cfg(p=8, trials=300, master_seed=5,
                        noise=NoiseModel.gaussian(1.0)), grid)
    for a, b in zip(clean.estimates, noisy.estimates):
        slack = 3 * ((a.ci_high - a.ci_low) / 2 + (b.ci_high - b.ci_low) / 2)
        assert b.pe_hat >= a.pe_hat - slack


def test_sweep_qmax_paired_dominance():
    grid = [1, 3, 5]
    exact = sweep_n(cfg(p=8, trials=300, master_seed=9), grid)
    relaxed = sweep_n(cfg(p=8, trials=300, master_seed=9, qmax=1), grid)
    for a, b in zip(exact.estimates, relaxed.estimates):
        assert b.pe_hat <= a.pe_hat  # same seeds: pathwise dominance


def test_sweep_csv_thread_invariant():
    c = cfg(p=8, trials=120, master_seed=13)
    grid = [2, 5]
    csv1 = sweep_to_csv(sweep_n(c, grid, threads=1))
    csv2 = sweep_to_csv(sweep_n(c, grid, threads=2))
    assert csv1 == csv2


def test_figure1_rows():
    rows = figure1_data(10, 3, 0)
    ids = {r[0] for r in rows}
    assert ids == {"uniform", "nonuniform", "random0", "random1", "random2"}
    assert len(rows) == 5 * 9
    by_id = {}
    for pid, r, f in rows:
        assert np.isfinite(f) and f >= 0
        by_id.setdefault(pid, {})[r] = f
    # uniform peaks at r=1; the skewed fixed vector peaks at r=9
    unif = by_id["uniform"]
    assert max(unif, key=unif.get) == 1
    nonunif = by_id["nonuniform"]
    assert max(nonunif, key=nonunif.get) == 9
    assert nonunif[9] == pytest.approx(1.3585685, abs=1e-4)


def test_figure1_no_fixed_vector_off_d10():
    rows = figure1_data(4, 1, 0)
    assert {r[0] for r in rows} == {"uniform", "random0"}
    with pytest.raises(ValueError):
        figure1_data(1, 0, 0)


def test_pava_nonincreasing_fit():
    y = [1.0, 0.8, 0.9, 0.2]
    fit = pava_nonincreasing(y, [1, 1, 1, 1])
    assert all(b <= a + 1e-12 for a, b in zip(fit, fit[1:]))
    assert fit[1] == pytest.approx(0.85)
    already = [0.9, 0.5, 0.1]
    assert np.allclose(pava_nonincreasing(already, [2, 1, 1]), already)


def test_isotonic_trend_pvalue():
    trials = [300] * 5
    assert isotonic_trend_pvalue([0.9, 0.7, 0.5, 0.3, 0.1], trials) > 0.5
    # grossly increasing curve is rejected
    assert isotonic_trend_pvalue([0.05, 0.3, 0.5, 0.7, 0.95], trials) < 0.01
