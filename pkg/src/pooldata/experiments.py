"""Seeded Monte Carlo harness for error-probability estimation and n-sweeps.

Every trial derives its own random streams from (master_seed, trial_index,
purpose), so results are bit-identical regardless of execution order or
worker count; merging is plain counting.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .model import (
    NoiseModel,
    Proportions,
    TestDesign,
    bernoulli_design,
    observe,
    round_proportions,
    sample_beta,
)
from .decode import approx_success, candidate_array, candidate_counts, ml_decode
from .bounds import f_ratio, noiseless_threshold

# purpose tags for per-trial stream separation
_TAG_BETA, _TAG_DESIGN, _TAG_NOISE, _TAG_TIE = 0, 1, 2, 3

WILSON_Z = 1.959963984540054  # 95%


@dataclass(frozen=True)
class ExperimentConfig:
    pi: Proportions
    p: int
    n: int
    q: float
    noise: NoiseModel
    qmax: int
    trials: int
    master_seed: int
    design: TestDesign | None = None  # fixed design overrides per-trial Bernoulli

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.design is not None and self.design.p != self.p:
            raise ValueError("fixed design width does not match p")


def trial_seed(master_seed: int, trial_index: int, tag: int) -> np.random.SeedSequence:
    """Deterministic, purpose-separated stream key for one trial."""
    return np.random.SeedSequence(master_seed, spawn_key=(trial_index, tag))


@dataclass(frozen=True)
class PeEstimate:
    pe_hat: float
    ci_low: float
    ci_high: float
    trials: int
    failures: int


def wilson_interval(failures: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    ph = failures / trials
    denom = 1.0 + z * z / trials
    center = (ph + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials))
    # clamp to [0,1] but keep the point estimate inside despite rounding
    return min(max(center - half, 0.0), ph), max(min(center + half, 1.0), ph)


class _TrialContext:
    """Shared per-config state: rounded counts, candidate set, and (for a
    fixed design) the precomputed candidate observations."""

    def __init__(self, config: ExperimentConfig):
        self.counts = round_proportions(config.pi, config.p)
        self.candidates = candidate_array(self.counts)
        self.fixed_counts = None
        if config.design is not None:
            self.fixed_counts = candidate_counts(
                self.candidates, config.design, self.counts.d)


def run_trial(config: ExperimentConfig, trial_index: int,
              _ctx: _TrialContext | None = None) -> bool:
    """One seeded trial: sample labels and design, observe, decode, score."""
    ctx = _ctx if _ctx is not None else _TrialContext(config)
    ms = config.master_seed
    beta = sample_beta(ctx.counts, trial_seed(ms, trial_index, _TAG_BETA))
    if config.design is not None:
        design = config.design
        cand_counts = ctx.fixed_counts
    else:
        design = bernoulli_design(config.n, config.p, config.q,
                                  trial_seed(ms, trial_index, _TAG_DESIGN))
        cand_counts = None
    y = observe(beta, design, config.noise,
                trial_seed(ms, trial_index, _TAG_NOISE), d=ctx.counts.d)
    result = ml_decode(y, design, ctx.counts, config.noise,
                       trial_seed(ms, trial_index, _TAG_TIE),
                       candidates=ctx.candidates, cand_counts=cand_counts)
    return approx_success(result.beta_hat, beta, config.qmax)


def _count_failures(config: ExperimentConfig, lo: int, hi: int) -> int:
    ctx = _TrialContext(config)
    return sum(0 if run_trial(config, i, ctx) else 1 for i in range(lo, hi))


def estimate_pe(config: ExperimentConfig, threads: int = 1) -> PeEstimate:
    """Aggregate failures over all trials; order-independent merge."""
    if threads <= 1:
        failures = _count_failures(config, 0, config.trials)
    else:
        edges = np.linspace(0, config.trials, threads + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_count_failures, config, int(a), int(b))
                       for a, b in zip(edges[:-1], edges[1:]) if b > a]
            failures = sum(f.result() for f in futures)
    lo, hi = wilson_interval(failures, config.trials)
    return PeEstimate(pe_hat=failures / config.trials, ci_low=lo, ci_high=hi,
                      trials=config.trials, failures=failures)


@dataclass(frozen=True)
class SweepResult:
    n_grid: list
    estimates: list
    n_star_formula: float
    n_cross: float


def _crossing(n_grid, pe_hats, level: float = 0.5) -> float:
    """First downward crossing of `level`, linearly interpolated; NaN if the
    curve never reaches it."""
    if pe_hats[0] <= level:
        return float(n_grid[0])
    for i in range(1, len(n_grid)):
        if pe_hats[i] <= level:
            a, b = pe_hats[i - 1], pe_hats[i]
            if a == b:
                return float(n_grid[i])
            frac = (a - level) / (a - b)
            return float(n_grid[i - 1] + frac * (n_grid[i] - n_grid[i - 1]))
    return float("nan")


def sweep_n(config: ExperimentConfig, n_grid, threads: int = 1) -> SweepResult:
    """Estimate the error probability over an increasing grid of test counts.

    Trials at different grid points share seeds (paired comparisons): the
    trial index, not n, keys the random streams.
    """
    n_grid = list(n_grid)
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be nonempty and strictly increasing")
    estimates = [estimate_pe(replace(config, n=n), threads=threads) for n in n_grid]
    n_star = noiseless_threshold(config.pi, config.p).n_bound
    pe_hats = [e.pe_hat for e in estimates]
    return SweepResult(n_grid=n_grid, estimates=estimates,
                       n_star_formula=n_star, n_cross=_crossing(n_grid, pe_hats))


def figure1_data(d: int, num_random: int, seed) -> list[tuple[str, int, float]]:
    """(pi_id, r, f(r)) rows for the uniform vector, the fixed highly
    non-uniform d=10 vector, and simplex-uniform random draws."""
    if d < 2:
        raise ValueError("need d >= 2")
    rows = []
    vectors = [("uniform", Proportions.uniform(d))]
    if d == 10:
        vectors.append(("nonuniform",
                        Proportions(np.array([0.49, 0.49] + [0.0025] * 8))))
    rng = np.random.default_rng(seed)
    for i in range(num_random):
        e = rng.exponential(size=d)  # flat Dirichlet via normalized exponentials
        vectors.append((f"random{i}", Proportions(e / e.sum())))
    for pi_id, pi in vectors:
        for r in range(1, d):
            rows.append((pi_id, r, f_ratio(pi, r)))
    return rows


def pava_nonincreasing(y, weights) -> np.ndarray:
    """Weighted least-squares nonincreasing fit (pool adjacent violators)."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    levels = [[y[0], w[0], 1]]  # value, weight, run length
    for yi, wi in zip(y[1:], w[1:]):
        levels.append([yi, wi, 1])
        while len(levels) > 1 and levels[-2][0] < levels[-1][0]:
            v2, w2, c2 = levels.pop()
            v1, w1, c1 = levels.pop()
            levels.append([(v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, c1 + c2])
    return np.concatenate([np.full(c, v) for v, _, c in levels])


def isotonic_trend_pvalue(pe_hats, trials, n_boot: int = 500, seed: int = 0) -> float:
    """Bootstrap p-value for 'the curve is nonincreasing up to sampling noise'.

    The statistic is the weighted squared residual from the nonincreasing
    fit; the null resamples binomial counts around the fitted curve.
    """
    pe_hats = np.asarray(pe_hats, dtype=float)
    trials = np.asarray(trials, dtype=float)
    fit = pava_nonincreasing(pe_hats, trials)
    stat = float(np.dot(trials, (pe_hats - fit) ** 2))
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_boot):
        sim = rng.binomial(trials.astype(int), np.clip(fit, 0, 1)) / trials
        sim_fit = pava_nonincreasing(sim, trials)
        if float(np.dot(trials, (sim - sim_fit) ** 2)) >= stat:
            hits += 1
    return (hits + 1) / (n_boot + 1)
