"""Lower bounds and threshold formulas for the pooled-count problem.

Every bound is evaluated at finite p in leading order: asymptotic o(1)
slack is dropped and recorded in the report's regime note, while the
target error probability delta stays a numeric input.  Vacuous or negative
values clamp to 0 with a flag rather than raising, so sweep code can treat
the evaluators as total functions.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import Proportions, round_proportions
from .infotheory import (
    GeniePattern,
    binomial_pmf,
    gaussian_mixture_entropy,
    log_binomial,
    log_hamming_ball,
    log_multinomial,
    pmf_entropy,
)

LOG2 = math.log(2.0)


def entropy(pi_vec) -> float:
    """Shannon entropy of a probability vector, in nats."""
    v = np.asarray(pi_vec, dtype=float)
    v = v[v > 0]
    return float(-np.dot(v, np.log(v)))


@dataclass(frozen=True)
class PiReduced:
    """Coarsened proportion vector: the largest d-r+1 entries merged into one,
    the smallest r-1 entries kept as-is."""

    r: int
    entries: np.ndarray


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound: required-test value, argmax (if any), and a note
    describing which asymptotic slack terms were dropped."""

    name: str
    n_bound: float
    argmax: object = None
    regime_note: str = ""
    inputs: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.n_bound <= 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_bound": self.n_bound,
            "argmax": self.argmax,
            "regime_note": self.regime_note,
            "inputs": self.inputs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class RegimeError(ValueError):
    """A bound was requested outside the parameter regime where its formula
    is valid."""


def pi_reduced(pi: Proportions, r: int) -> PiReduced:
    if not 1 <= r <= pi.d - 1:
        raise ValueError(f"r={r} outside 1..{pi.d - 1}")
    desc = np.sort(pi.pi)[::-1]
    merged = desc[: pi.d - r + 1].sum()
    return PiReduced(r, np.concatenate(([merged], desc[pi.d - r + 1:])))


def f_ratio(pi: Proportions, r: int) -> float:
    """Entropy-gap ratio 2(H(pi) - H(pi reduced at r)) / (d - r), nats."""
    red = pi_reduced(pi, r)
    return 2.0 * (entropy(pi.pi) - entropy(red.entries)) / (pi.d - r)


def _threshold_scan(pi: Proportions, p: int, log_ball: float = 0.0):
    """Per-r values 2(pH(pi) - pH(pi^(r)) - log_ball)/((d-r) log p); returns
    (best value, argmax r).  Ties go to the smallest r."""
    h = entropy(pi.pi)
    logp = math.log(p)
    best = -math.inf
    best_r = None
    for r in range(1, pi.d):
        hr = entropy(pi_reduced(pi, r).entries)
        val = 2.0 * (p * (h - hr) - log_ball) / ((pi.d - r) * logp)
        if val > best:
            best, best_r = val, r
    return best, best_r


def noiseless_threshold(pi: Proportions, p: int) -> BoundReport:
    """Exact-recovery phase-transition location (p/log p) * max_r f(r).

    The same expression is both sufficient (above) and necessary (below) for
    vanishing error, so a single evaluator serves as the threshold.
    """
    if p < 3:
        raise ValueError("need p >= 3")
    val, r = _threshold_scan(pi, p)
    return BoundReport(
        name="noiseless_threshold",
        n_bound=val,
        argmax=r,
        regime_note="phase-transition location n*; multiplicative 1+-eta margins dropped",
        inputs={"pi": list(pi.pi), "p": p},
    )


def counting_pe_lower(p: int, n: int, counts) -> float:
    """Finite-p counting lower bound on the error probability.

    P_e >= 1 - exp(n(d-1) log(2 sqrt(p log p) + 1) - log|B|) - 2nd/p^2,
    clamped to [0,1], with the exact multinomial log-count for |B|.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    c = np.asarray(counts, dtype=np.int64)
    d = c.size
    log_b = log_multinomial(c)
    exponent = n * (d - 1) * math.log(2.0 * math.sqrt(p * math.log(p)) + 1.0) - log_b
    outcome_term = math.exp(exponent) if exponent < 0 else math.inf
    val = 1.0 - outcome_term - 2.0 * n * d / p**2
    return min(max(val, 0.0), 1.0)


def fano_bound(log_cand: float, mi_per_test: float, delta: float,
               name: str = "fano") -> BoundReport:
    """Candidate-count vs information trade-off: tests needed so that the
    accumulated per-test information can cover the candidate entropy."""
    if mi_per_test <= 0:
        raise ValueError("mi_per_test must be positive")
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must be in [0,1)")
    raw = (log_cand * (1.0 - delta) - LOG2) / mi_per_test
    clamped = max(raw, 0.0)
    note = "finite-p evaluation; clamped to 0 (vacuous)" if raw < 0 else "finite-p evaluation"
    return BoundReport(name=name, n_bound=clamped, regime_note=note,
                       inputs={"log_cand": log_cand, "mi_per_test": mi_per_test,
                               "delta": delta})


def mi_noiseless_bernoulli(pattern: GeniePattern, q: float) -> float:
    """Per-test information under Bernoulli(q) designs, noiseless channel.

    Equals the sum over labels of the entropy of a Binomial(ell_t, q) count:
    given the revealed items' inclusions, the unknown contribution to each
    label count is an independent binomial.  All d coordinates contribute,
    since the row popcount is itself random under a Bernoulli design.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q={q} outside (0,1)")
    total = 0.0
    for ell_t in pattern.ell:
        if ell_t > 0:
            total += pmf_entropy(binomial_pmf(int(ell_t), q))
    return total


def mi_gaussian_bernoulli(pattern: GeniePattern, q: float, sigma2: float,
                          p: int) -> float:
    """Per-test information under Bernoulli(q) designs with additive
    N(0, p*sigma2) noise on each count: sum over labels of the mixture
    entropy minus the pure-noise entropy."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    noise_var = p * sigma2
    base = 0.5 * math.log(2 * math.pi * math.e * noise_var)
    total = 0.0
    for ell_t in pattern.ell:
        if ell_t > 0:
            total += gaussian_mixture_entropy(binomial_pmf(int(ell_t), q), noise_var) - base
    return total


def bernoulli_noiseless_bound(pi: Proportions, p: int, q: float,
                              delta: float) -> BoundReport:
    """Noiseless necessary condition under Bernoulli(q) designs: the
    threshold with log p replaced by log(p q (1-q))."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q={q} outside (0,1)")
    if p * q * (1.0 - q) <= 1.0:
        raise RegimeError(
            f"pq(1-q)={p * q * (1 - q):.4g} <= 1: formula requires q, 1-q "
            "well above 1/p")
    fmax = max(f_ratio(pi, r) for r in range(1, pi.d))
    r_best = min(r for r in range(1, pi.d)
                 if f_ratio(pi, r) == fmax)
    val = (p / math.log(p * q * (1.0 - q))) * fmax * (1.0 - delta)
    return BoundReport(
        name="bernoulli_noiseless",
        n_bound=max(val, 0.0),
        argmax=r_best,
        regime_note="leading order; additive o(1) inside (1 - delta - o(1)) dropped",
        inputs={"pi": list(pi.pi), "p": p, "q": q, "delta": delta},
    )


def gaussian_subset_bound(pi: Proportions, p: int, sigma2: float,
                          delta: float) -> BoundReport:
    """Gaussian-noise necessary condition from the label-subset reduction:
    exact maximum over all label subsets of size >= 2."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if pi.d > 20:
        raise ValueError("exhaustive subset scan capped at d <= 20")
    best = -math.inf
    best_g = None
    for size in range(2, pi.d + 1):
        for g in itertools.combinations(range(pi.d), size):
            sub = pi.pi[list(g)]
            mass = sub.sum()
            p_g = p * mass
            h_g = entropy(sub / mass)
            denom = sum(0.5 * math.log1p(t / (4.0 * sigma2)) for t in sub)
            val = p_g * h_g / denom
            if val > best:
                best, best_g = val, g
    val = best * (1.0 - delta)
    return BoundReport(
        name="gaussian_subset",
        n_bound=max(val, 0.0),
        argmax=[t + 1 for t in best_g],
        regime_note="leading order; additive o(1) inside (1 - delta - o(1)) dropped",
        inputs={"pi": list(pi.pi), "p": p, "sigma2": sigma2, "delta": delta},
    )


def gaussian_single_item_bound(p: int, sigma2: float, delta: float,
                               pi1: float | None = None) -> BoundReport:
    """Gaussian-noise necessary condition from the hardness of locating a
    single unknown item: 4 p sigma^2 log p, super-linear at constant SNR.

    When pi1 is supplied, the report also carries the underlying exact
    finite-p trade-off (log(p*pi1 + 1)(1-delta) - log 2) * 4 p sigma^2.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    val = 4.0 * p * sigma2 * math.log(p) * (1.0 - delta)
    inputs = {"p": p, "sigma2": sigma2, "delta": delta}
    if pi1 is not None:
        inputs["exact_fano_form"] = max(
            (math.log(p * pi1 + 1.0) * (1.0 - delta) - LOG2) * 4.0 * p * sigma2, 0.0)
        inputs["pi1"] = pi1
    return BoundReport(
        name="gaussian_single_item",
        n_bound=max(val, 0.0),
        regime_note=("leading order: log(p pi_1 + 1) -> log p and the "
                     "log(1+a) <= a relaxation applied; o(1) dropped"),
        inputs=inputs,
    )


def approx_recovery_threshold(pi: Proportions, p: int, qmax: int,
                              eta_or_delta: float, variant: str = "noiseless",
                              mi_per_test: float | None = None) -> BoundReport:
    """Approximate-recovery (Hamming-ball) versions of the lower bounds.

    noiseless: the exact-recovery scan with the log Hamming-ball size
    subtracted from each numerator; identical to the exact threshold when
    qmax = 0.  fano: the information trade-off with the ball term subtracted
    from the candidate log-count before applying (1 - delta).
    """
    ball = log_hamming_ball(p, pi.d, qmax)
    if variant == "noiseless":
        val, r = _threshold_scan(pi, p, log_ball=ball)
        val *= (1.0 - eta_or_delta)
        clamped = max(val, 0.0)
        note = "leading order; eta margin applied multiplicatively"
        if val <= 0:
            note += "; clamped to 0 (vacuous: ball covers the entropy gap)"
        return BoundReport(name="approx_noiseless", n_bound=clamped, argmax=r,
                           regime_note=note,
                           inputs={"pi": list(pi.pi), "p": p, "qmax": qmax,
                                   "eta": eta_or_delta})
    if variant == "fano":
        if mi_per_test is None:
            raise ValueError("fano variant needs mi_per_test")
        counts = round_proportions(pi, p)
        log_cand = log_multinomial(counts.counts) - ball
        rep = fano_bound(log_cand, mi_per_test, eta_or_delta, name="approx_fano")
        rep.inputs.update({"pi": list(pi.pi), "p": p, "qmax": qmax})
        return rep
    raise ValueError(f"unknown variant {variant!r}")


def group_testing_bound(p: int, k: int, delta: float, channel_mi) -> BoundReport:
    """Two-label (defective/non-defective) specialization with binary
    observations: exact maximum over the number of unknown defectives."""
    if not 1 <= k <= p:
        raise ValueError(f"k={k} outside 1..p")
    best = -math.inf
    best_l = None
    for ell1 in range(1, k + 1):
        mi = channel_mi(ell1)
        if mi <= 0:
            raise ValueError(f"channel_mi({ell1}) must be positive")
        val = (log_binomial(p - k + ell1, ell1) * (1.0 - delta) - LOG2) / mi
        if val > best:
            best, best_l = val, ell1
    return BoundReport(
        name="group_testing",
        n_bound=max(best, 0.0),
        argmax=best_l,
        regime_note="exact finite-p evaluation",
        inputs={"p": p, "k": k, "delta": delta},
    )
